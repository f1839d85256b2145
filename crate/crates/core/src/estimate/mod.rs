//! Estimation of `(z, β)` from a single observed pattern: Takacs–Fiksel,
//! pseudo-likelihood, Monte-Carlo likelihood, the variational estimator of
//! `β` and the germ-grain estimator that sees only the union of balls.

mod contrast;
mod mcmle;
mod optim;
mod union;
mod variational;

use serde::{Deserialize, Serialize};

use crate::geometry::Window;

pub use contrast::{gnz_statistic, mple_estimate, takacs_fiksel_estimate, ContrastTerms, TestFunction};
pub use mcmle::{mc_mle_estimate, ImportanceSample, McmcBudget};
pub use optim::{minimize, OptimizerConfig, Optimum};
pub use union::{germ_grain_estimate, germ_grain_fit};
pub use variational::{variational_beta, variational_estimate};

/// Conditioning below which the contrast surface is reported as flat.
pub const FLAT_CONDITIONING: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub method: String,
    pub z_hat: f64,
    pub beta_hat: f64,
    /// Objective at the optimum (contrast, or negative log-likelihood ratio).
    pub contrast: f64,
    pub iterations: usize,
    pub border_corrected: bool,
    /// Window the sums and integrals ran over.
    pub window: Window,
    pub on_boundary: bool,
    /// Standard errors are not computed.
    pub standard_errors: Option<[f64; 2]>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub diagnostics: serde_json::Map<String, serde_json::Value>,
}

impl EstimationResult {
    fn from_optimum(method: &str, opt: &Optimum, window: Window, border_corrected: bool) -> Self {
        let mut warnings = Vec::new();
        if opt.on_boundary {
            warnings.push("optimum lies on the boundary of the search domain".to_string());
        }
        if opt.conditioning < FLAT_CONDITIONING {
            warnings.push(format!(
                "contrast surface is nearly flat in one direction at the optimum (conditioning {:.1e}); \
                 the parameters may not be identifiable from these test functions",
                opt.conditioning
            ));
        }
        EstimationResult {
            method: method.to_string(),
            z_hat: opt.point[0],
            beta_hat: opt.point[1],
            contrast: opt.value,
            iterations: opt.iterations,
            border_corrected,
            window,
            on_boundary: opt.on_boundary,
            standard_errors: None,
            warnings,
            diagnostics: serde_json::Map::new(),
        }
    }
}
