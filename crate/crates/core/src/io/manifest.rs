//! JSON record of a sampler run.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    /// Random stream of the run seed used by this replicate.
    pub stream: u64,
    pub final_count: usize,
    pub final_energy: f64,
    pub retained: usize,
    /// Proposed and accepted birth, death and translate moves (zero for
    /// exact draws).
    pub proposed: [u64; 3],
    pub accepted: [u64; 3],
    pub acceptance_rates: [f64; 3],
    /// Proposals made by the rejection sampler, when used.
    pub rejection_proposals: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// The configuration as given.
    pub config: serde_json::Value,
    pub replicates: Vec<ReplicateRecord>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, config: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            config,
            replicates: Vec::new(),
            files: Vec::new(),
        }
    }
}
