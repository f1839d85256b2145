//! Run configuration: a JSON document validated key by key so that every
//! schema violation is reported at once, with its path.
//!
//! ```json
//! {
//!   "command": "simulate",
//!   "model": {"family": "strauss", "R": 0.5, "z": 1.0, "beta": 1.0},
//!   "window": {"lo": [0, 0], "hi": [10, 10]},
//!   "sampler": {"method": "mh", "burn_in": 1000, "sweeps": 1000, "thinning": 10},
//!   "seed": 7,
//!   "output": {"dir": "out", "formats": ["json", "csv", "svg"]}
//! }
//! ```
//!
//! Model families and their keys (`z` and `beta` are accepted by all):
//!
//! | family | keys |
//! |---|---|
//! | `strauss`, `hard_core`, `smooth_core` | `R`, optional `A ≤ 0` |
//! | `multi_strauss` | `levels`, `radii`, optional `A` |
//! | `lennard_jones` | `a`, `b`, `cutoff`, optional `A` |
//! | `area` | `R`, optional `clip` window |
//! | `random_cluster` | `R`, optional `two_type` flag (needs `window`) |

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::energy::{EnergyModel, PairPotential};
use crate::error::{Error, Result};
use crate::estimate::{McmcBudget, OptimizerConfig, TestFunction};
use crate::experiment::{Plan, Sampling};
use crate::geometry::{BoundaryCondition, Window};
use crate::oracle::{OracleConfig, Statistic};
use crate::sampler::{MoveMix, SamplerConfig, Schedule};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Estimate,
    Oracle,
    Experiment,
    Diagnose,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "simulate" => Command::Simulate,
            "estimate" => Command::Estimate,
            "oracle" => Command::Oracle,
            "experiment" => Command::Experiment,
            "diagnose" => Command::Diagnose,
            _ => return None,
        })
    }
}

/// An energy model with optional activity and inverse temperature.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelSpec {
    pub energy: EnergyModel,
    pub z: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMethod {
    Mh,
    Rejection,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplerSection {
    pub method: SamplerMethod,
    pub schedule: Schedule,
    pub mix: MoveMix,
    /// Independent runs, on streams `0..replicates` of the seed.
    pub replicates: usize,
    /// Write every retained state as a pattern CSV.
    pub save_states: bool,
}

impl Default for SamplerSection {
    fn default() -> Self {
        SamplerSection {
            method: SamplerMethod::Mh,
            schedule: Schedule::default(),
            mix: MoveMix::default(),
            replicates: 1,
            save_states: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMethod {
    Tf,
    Mple,
    Mcmle,
    Variational,
    GermGrain,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimatorSection {
    pub method: EstimatorMethod,
    pub border_correct: bool,
    pub optimizer: OptimizerConfig,
    /// Test functions for Takacs–Fiksel; empty means `(1, h, neighbor_count(1.5R))`.
    #[serde(skip)]
    pub test_functions: Vec<TestFunction>,
    /// Starting reference `(z₀, β₀)` for the Monte-Carlo likelihood.
    pub reference: Option<[f64; 2]>,
    pub mcmc: McmcBudget,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        EstimatorSection {
            method: EstimatorMethod::Tf,
            border_correct: true,
            optimizer: OptimizerConfig::default(),
            test_functions: Vec::new(),
            reference: None,
            mcmc: McmcBudget::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleSection {
    pub config: OracleConfig,
    pub statistic: Statistic,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            config: OracleConfig::default(),
            statistic: Statistic::Count,
        }
    }
}

/// Parameters of a canned experiment; unset entries take the experiment's
/// own defaults.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ExperimentSection {
    pub name: Option<String>,
    pub replicates: Option<usize>,
    pub sampling: Option<Sampling>,
    pub z_values: Option<Vec<f64>>,
    pub sides: Option<Vec<f64>>,
    pub beta_shift: Option<f64>,
    pub subwindow: Option<Window>,
    #[serde(skip)]
    pub test_functions: Vec<TestFunction>,
}

impl ExperimentSection {
    pub fn plan(&self, default_replicates: usize, seed: u64) -> Plan {
        let mut p = Plan::new(self.replicates.unwrap_or(default_replicates), seed);
        if let Some(s) = self.sampling {
            p = p.with_sampling(s);
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub formats: BTreeSet<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: None,
            formats: [Format::Json, Format::Csv].into_iter().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySpec {
    #[default]
    Free,
    ExclusionBand(f64),
}

impl BoundarySpec {
    pub fn build(&self) -> Result<BoundaryCondition> {
        match self {
            BoundarySpec::Free => Ok(BoundaryCondition::Free),
            BoundarySpec::ExclusionBand(w) => BoundaryCondition::exclusion_band(*w),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub model: Option<ModelSpec>,
    pub window: Option<Window>,
    pub boundary: BoundarySpec,
    pub sampler: SamplerSection,
    pub estimator: EstimatorSection,
    pub oracle: OracleSection,
    pub experiment: ExperimentSection,
    pub seed: u64,
    pub output: OutputSection,
}

impl RunConfig {
    /// Checks the keys `command` needs; all violations are returned together.
    pub fn require_for(&self, command: Command) -> Result<()> {
        let mut v = Vec::new();
        let mut need = |ok: bool, path: &str, what: &str| {
            if !ok {
                v.push(Violation {
                    path: path.into(),
                    message: format!("required for `{}`: {what}", serde_json::to_value(command).unwrap()),
                });
            }
        };
        match command {
            Command::Simulate | Command::Oracle => {
                need(self.model.is_some(), "model", "model descriptor");
                if let Some(m) = &self.model {
                    need(m.z.is_some(), "model.z", "activity");
                    need(m.beta.is_some(), "model.beta", "inverse temperature");
                }
                need(self.window.is_some(), "window", "simulation window");
            }
            Command::Estimate => need(self.model.is_some(), "model", "model descriptor"),
            Command::Diagnose => {
                need(self.model.is_some(), "model", "model descriptor");
                if let Some(m) = &self.model {
                    need(m.z.is_some(), "model.z", "activity");
                    need(m.beta.is_some(), "model.beta", "inverse temperature");
                }
            }
            Command::Experiment => {}
        }
        if let Some(c) = self.command {
            if c != command {
                v.push(Violation {
                    path: "command".into(),
                    message: format!("config is for `{:?}`, invoked as `{:?}`", c, command),
                });
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    /// Sampler parameters for the model, with the run seed.
    pub fn sampler_config(&self) -> Option<SamplerConfig> {
        let m = self.model.as_ref()?;
        Some(SamplerConfig {
            z: m.z?,
            beta: m.beta?,
            mix: self.sampler.mix,
            schedule: self.sampler.schedule,
            seed: self.seed,
        })
    }
}

/// Parses and validates a run configuration, collecting every violation.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Value = serde_json::from_str(text).map_err(|e| {
        Error::Config(vec![Violation {
            path: "$".into(),
            message: format!("not valid JSON: {e}"),
        }])
    })?;
    let mut w = Walker::default();
    let cfg = w.run_config(&root);
    if w.violations.is_empty() {
        let cfg = cfg.expect("complete config without violations");
        if let Some(c) = cfg.command {
            cfg.require_for(c)?;
        }
        Ok(cfg)
    } else {
        Err(Error::Config(w.violations))
    }
}

/// Parses a test function name: `constant_one` (or `one`), `local_energy_h`
/// (or `h`), `neighbor_count:r`, `exposed_surface:R`, `isolated_indicator:R`.
pub fn parse_test_function(s: &str) -> Option<TestFunction> {
    let (head, arg) = match s.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a.trim().parse::<f64>().ok().filter(|r| *r > 0.0 && r.is_finite())?)),
        None => (s.trim(), None),
    };
    Some(match (head, arg) {
        ("one" | "constant_one", None) => TestFunction::ConstantOne,
        ("h" | "local_energy_h" | "local_energy", None) => TestFunction::LocalEnergy,
        ("neighbor_count", Some(radius)) => TestFunction::NeighborCount { radius },
        ("exposed_surface", Some(radius)) => TestFunction::ExposedSurface { radius },
        ("isolated_indicator", Some(radius)) => TestFunction::IsolatedIndicator { radius },
        _ => return None,
    })
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

#[derive(Default)]
struct Walker {
    violations: Vec<Violation>,
}

impl Walker {
    fn fail(&mut self, path: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    /// The object at `path`, with keys outside `allowed` reported.
    fn object<'v>(&mut self, v: &'v Value, path: &str, allowed: &[&str]) -> Option<&'v Map<String, Value>> {
        let Some(map) = v.as_object() else {
            self.fail(if path.is_empty() { "$" } else { path }, "expected an object");
            return None;
        };
        for k in map.keys() {
            if !allowed.contains(&k.as_str()) {
                self.fail(&join(path, k), format!("unknown key (allowed: {})", allowed.join(", ")));
            }
        }
        Some(map)
    }

    fn number(&mut self, map: &Map<String, Value>, path: &str, key: &str, ok: impl Fn(f64) -> bool, rule: &str) -> Option<f64> {
        let v = map.get(key)?;
        let p = join(path, key);
        match v.as_f64() {
            Some(x) if x.is_finite() && ok(x) => Some(x),
            Some(x) => {
                self.fail(&p, format!("{x} is out of range: {rule}"));
                None
            }
            None => {
                self.fail(&p, "expected a number");
                None
            }
        }
    }

    fn required_number(
        &mut self,
        map: &Map<String, Value>,
        path: &str,
        key: &str,
        ok: impl Fn(f64) -> bool,
        rule: &str,
    ) -> Option<f64> {
        if !map.contains_key(key) {
            self.fail(&join(path, key), "missing required key");
            return None;
        }
        self.number(map, path, key, ok, rule)
    }

    fn count(&mut self, map: &Map<String, Value>, path: &str, key: &str, min: u64) -> Option<usize> {
        let v = map.get(key)?;
        match v.as_u64() {
            Some(n) if n >= min => Some(n as usize),
            _ => {
                self.fail(&join(path, key), format!("expected an integer >= {min}"));
                None
            }
        }
    }

    fn boolean(&mut self, map: &Map<String, Value>, path: &str, key: &str) -> Option<bool> {
        let v = map.get(key)?;
        let b = v.as_bool();
        if b.is_none() {
            self.fail(&join(path, key), "expected true or false");
        }
        b
    }

    fn string<'v>(&mut self, map: &'v Map<String, Value>, path: &str, key: &str) -> Option<&'v str> {
        let v = map.get(key)?;
        let s = v.as_str();
        if s.is_none() {
            self.fail(&join(path, key), "expected a string");
        }
        s
    }

    fn numbers(&mut self, map: &Map<String, Value>, path: &str, key: &str, ok: impl Fn(f64) -> bool, rule: &str) -> Option<Vec<f64>> {
        let v = map.get(key)?;
        let p = join(path, key);
        let Some(arr) = v.as_array() else {
            self.fail(&p, "expected an array of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(arr.len());
        let mut good = true;
        for (i, x) in arr.iter().enumerate() {
            match x.as_f64() {
                Some(x) if x.is_finite() && ok(x) => out.push(x),
                Some(x) => {
                    self.fail(&format!("{p}[{i}]"), format!("{x} is out of range: {rule}"));
                    good = false;
                }
                None => {
                    self.fail(&format!("{p}[{i}]"), "expected a number");
                    good = false;
                }
            }
        }
        good.then_some(out)
    }

    fn pair(&mut self, map: &Map<String, Value>, path: &str, key: &str, ok: impl Fn(f64) -> bool, rule: &str) -> Option<[f64; 2]> {
        let v = self.numbers(map, path, key, ok, rule)?;
        if v.len() != 2 {
            self.fail(&join(path, key), format!("expected 2 numbers, found {}", v.len()));
            return None;
        }
        Some([v[0], v[1]])
    }

    fn window(&mut self, v: &Value, path: &str) -> Option<Window> {
        let map = self.object(v, path, &["lo", "hi"])?;
        let any = |_: f64| true;
        let lo = if map.contains_key("lo") {
            self.pair(map, path, "lo", any, "finite")
        } else {
            self.fail(&join(path, "lo"), "missing required key");
            None
        };
        let hi = if map.contains_key("hi") {
            self.pair(map, path, "hi", any, "finite")
        } else {
            self.fail(&join(path, "hi"), "missing required key");
            None
        };
        let (lo, hi) = (lo?, hi?);
        match Window::new(lo, hi) {
            Ok(w) => Some(w),
            Err(_) => {
                self.fail(path, "hi must exceed lo in both coordinates");
                None
            }
        }
    }

    fn run_config(&mut self, root: &Value) -> Option<RunConfig> {
        let map = self.object(
            root,
            "",
            &["command", "model", "window", "boundary", "sampler", "estimator", "oracle", "experiment", "seed", "output"],
        )?;
        let command = match self.string(map, "", "command") {
            Some(s) => {
                let c = Command::parse(s);
                if c.is_none() {
                    self.fail("command", format!("unknown command `{s}`"));
                }
                c
            }
            None => None,
        };
        let window = map.get("window").and_then(|v| self.window(v, "window"));
        let model = map.get("model").and_then(|v| self.model(v, "model", window.as_ref()));
        let boundary = map.get("boundary").map(|v| self.boundary(v)).unwrap_or(Some(BoundarySpec::Free));
        let sampler = map.get("sampler").map(|v| self.sampler(v)).unwrap_or(Some(SamplerSection::default()));
        let estimator = map.get("estimator").map(|v| self.estimator(v)).unwrap_or(Some(EstimatorSection::default()));
        let oracle = map.get("oracle").map(|v| self.oracle(v)).unwrap_or(Some(OracleSection::default()));
        let experiment = map.get("experiment").map(|v| self.experiment(v)).unwrap_or(Some(ExperimentSection::default()));
        let seed = match map.get("seed") {
            Some(v) => v.as_u64().or_else(|| {
                self.fail("seed", "expected a non-negative integer");
                None
            }),
            None => Some(0),
        };
        let output = map.get("output").map(|v| self.output(v)).unwrap_or(Some(OutputSection::default()));
        Some(RunConfig {
            command,
            model,
            window,
            boundary: boundary?,
            sampler: sampler?,
            estimator: estimator?,
            oracle: oracle?,
            experiment: experiment?,
            seed: seed?,
            output: output?,
        })
    }

    fn model(&mut self, v: &Value, path: &str, window: Option<&Window>) -> Option<ModelSpec> {
        let Some(family) = v.get("family") else {
            self.object(v, path, &["family"]);
            self.fail(&join(path, "family"), "missing required key");
            return None;
        };
        let Some(family) = family.as_str() else {
            self.fail(&join(path, "family"), "expected a string");
            return None;
        };
        let extra: &[&str] = match family {
            "strauss" | "hard_core" | "smooth_core" => &["R", "A"],
            "multi_strauss" => &["levels", "radii", "A"],
            "lennard_jones" => &["a", "b", "cutoff", "A"],
            "area" => &["R", "clip"],
            "random_cluster" => &["R", "two_type"],
            other => {
                self.fail(
                    &join(path, "family"),
                    format!(
                        "unknown model family `{other}` (known: strauss, hard_core, smooth_core, multi_strauss, \
                         lennard_jones, area, random_cluster)"
                    ),
                );
                return None;
            }
        };
        let mut allowed = vec!["family", "z", "beta"];
        allowed.extend_from_slice(extra);
        let map = self.object(v, path, &allowed)?;
        let before = self.violations.len();
        let z = self.number(map, path, "z", |x| x >= 0.0, "activity must be >= 0");
        let beta = self.number(map, path, "beta", |x| x >= 0.0, "inverse temperature must be >= 0");
        let positive = |x: f64| x > 0.0;
        let energy = match family {
            "strauss" | "hard_core" | "smooth_core" => {
                let r = self.required_number(map, path, "R", positive, "must be > 0");
                let a = self.number(map, path, "A", |x| x <= 0.0, "these energies are non-negative, so A must be <= 0");
                let potential = match family {
                    "strauss" => PairPotential::Strauss { range: r? },
                    "hard_core" => PairPotential::HardCore { range: r? },
                    _ => PairPotential::SmoothCore { range: r? },
                };
                Some(EnergyModel::Pairwise {
                    potential,
                    stability: Some(a.unwrap_or(0.0)),
                    approximate_stability: false,
                })
            }
            "multi_strauss" => {
                let levels = self.required_list(map, path, "levels", |_| true, "finite");
                let radii = self.required_list(map, path, "radii", positive, "must be > 0");
                let a = self.number(map, path, "A", |_| true, "finite");
                match (levels, radii) {
                    (Some(l), Some(r)) => match EnergyModel::multi_strauss(l, r, a) {
                        Ok(m) => Some(m),
                        Err(e) => {
                            self.fail(path, e.to_string());
                            None
                        }
                    },
                    _ => None,
                }
            }
            "lennard_jones" => {
                let a = self.required_number(map, path, "a", positive, "must be > 0");
                let b = self.required_number(map, path, "b", |_| true, "finite");
                let cut = self.required_number(map, path, "cutoff", positive, "must be > 0");
                let stab = self.number(map, path, "A", |_| true, "finite");
                match EnergyModel::lennard_jones(a?, b?, cut?, stab) {
                    Ok(m) => Some(m),
                    Err(e) => {
                        self.fail(path, e.to_string());
                        None
                    }
                }
            }
            "area" => {
                let r = self.required_number(map, path, "R", positive, "must be > 0");
                let clip = match map.get("clip") {
                    Some(c) => Some(self.window(c, &join(path, "clip"))?),
                    None => None,
                };
                Some(EnergyModel::Area { radius: r?, clip })
            }
            _ => {
                let r = self.required_number(map, path, "R", positive, "must be > 0");
                let two_type = self.boolean(map, path, "two_type").unwrap_or(false);
                if two_type {
                    match window {
                        Some(w) => EnergyModel::random_cluster_process(r?, *w).ok(),
                        None => {
                            self.fail(&join(path, "two_type"), "needs a top-level `window`");
                            None
                        }
                    }
                } else {
                    Some(EnergyModel::random_cluster(r?).ok()?)
                }
            }
        };
        if self.violations.len() > before {
            return None;
        }
        Some(ModelSpec { energy: energy?, z, beta })
    }

    fn required_list(&mut self, map: &Map<String, Value>, path: &str, key: &str, ok: impl Fn(f64) -> bool, rule: &str) -> Option<Vec<f64>> {
        if !map.contains_key(key) {
            self.fail(&join(path, key), "missing required key");
            return None;
        }
        self.numbers(map, path, key, ok, rule)
    }

    fn boundary(&mut self, v: &Value) -> Option<BoundarySpec> {
        if v.as_str() == Some("free") {
            return Some(BoundarySpec::Free);
        }
        if v.is_string() {
            self.fail("boundary", "expected \"free\" or {\"exclusion_band\": width}");
            return None;
        }
        let map = self.object(v, "boundary", &["exclusion_band"])?;
        if !map.contains_key("exclusion_band") {
            self.fail("boundary.exclusion_band", "missing required key");
            return None;
        }
        let w = self.number(map, "boundary", "exclusion_band", |x| x >= 0.0, "width must be >= 0")?;
        Some(BoundarySpec::ExclusionBand(w))
    }

    fn schedule(&mut self, map: &Map<String, Value>, path: &str, base: Schedule) -> Schedule {
        Schedule {
            burn_in: self.count(map, path, "burn_in", 0).unwrap_or(base.burn_in),
            sweeps: self.count(map, path, "sweeps", 1).unwrap_or(base.sweeps),
            thinning: self.count(map, path, "thinning", 1).unwrap_or(base.thinning),
        }
    }

    fn sampler(&mut self, v: &Value) -> Option<SamplerSection> {
        let p = "sampler";
        let map = self.object(v, p, &["method", "burn_in", "sweeps", "thinning", "mix", "replicates", "save_states"])?;
        let mut s = SamplerSection::default();
        if let Some(m) = self.string(map, p, "method") {
            match m {
                "mh" => s.method = SamplerMethod::Mh,
                "rejection" => s.method = SamplerMethod::Rejection,
                other => self.fail("sampler.method", format!("unknown sampler `{other}` (mh, rejection)")),
            }
        }
        s.schedule = self.schedule(map, p, s.schedule);
        if let Some(m) = map.get("mix") {
            if let Some(mm) = self.object(m, "sampler.mix", &["birth", "death", "translate"]) {
                let unit = |x: f64| (0.0..=1.0).contains(&x);
                let get = |w: &mut Self, k: &str, d: f64| w.number(mm, "sampler.mix", k, unit, "must lie in [0, 1]").unwrap_or(d);
                let mix = MoveMix {
                    birth: get(self, "birth", 0.4),
                    death: get(self, "death", 0.4),
                    translate: get(self, "translate", 0.2),
                };
                let total = mix.birth + mix.death + mix.translate;
                if (total - 1.0).abs() > 1e-9 {
                    self.fail("sampler.mix", format!("probabilities must sum to 1, got {total}"));
                } else if (mix.birth > 0.0) != (mix.death > 0.0) {
                    self.fail("sampler.mix", "birth and death must be both positive or both zero");
                }
                s.mix = mix;
            }
        }
        s.replicates = self.count(map, p, "replicates", 1).unwrap_or(1);
        s.save_states = self.boolean(map, p, "save_states").unwrap_or(false);
        Some(s)
    }

    fn test_functions(&mut self, map: &Map<String, Value>, path: &str) -> Vec<TestFunction> {
        let Some(v) = map.get("test_functions") else {
            return Vec::new();
        };
        let p = join(path, "test_functions");
        let Some(arr) = v.as_array() else {
            self.fail(&p, "expected an array of names");
            return Vec::new();
        };
        let mut out = Vec::new();
        for (i, t) in arr.iter().enumerate() {
            match t.as_str().and_then(parse_test_function) {
                Some(f) => out.push(f),
                None => self.fail(
                    &format!("{p}[{i}]"),
                    "expected one of constant_one, local_energy_h, neighbor_count:r, exposed_surface:R, isolated_indicator:R",
                ),
            }
        }
        out
    }

    fn estimator(&mut self, v: &Value) -> Option<EstimatorSection> {
        let p = "estimator";
        let map = self.object(
            v,
            p,
            &[
                "method", "border_correct", "z_range", "beta_range", "grid", "tolerance", "max_iterations",
                "quadrature_nodes", "test_functions", "reference", "mcmc",
            ],
        )?;
        let mut e = EstimatorSection::default();
        if let Some(m) = self.string(map, p, "method") {
            match m {
                "tf" => e.method = EstimatorMethod::Tf,
                "mple" => e.method = EstimatorMethod::Mple,
                "mcmle" => e.method = EstimatorMethod::Mcmle,
                "variational" => e.method = EstimatorMethod::Variational,
                "germ_grain" => e.method = EstimatorMethod::GermGrain,
                other => self.fail(
                    "estimator.method",
                    format!("unknown estimator `{other}` (tf, mple, mcmle, variational, germ_grain)"),
                ),
            }
        }
        e.border_correct = self.boolean(map, p, "border_correct").unwrap_or(true);
        let o = &mut e.optimizer;
        if let Some(r) = self.pair(map, p, "z_range", |x| x > 0.0, "must be > 0") {
            o.z_range = r;
        }
        if let Some(r) = self.pair(map, p, "beta_range", |x| x >= 0.0, "must be >= 0") {
            o.beta_range = r;
        }
        if let Some(g) = self.count(map, p, "grid", 2) {
            o.grid = g;
        }
        if let Some(t) = self.number(map, p, "tolerance", |x| x > 0.0, "must be > 0") {
            o.tolerance = t;
        }
        if let Some(n) = self.count(map, p, "max_iterations", 1) {
            o.max_iterations = n;
        }
        if let Some(n) = self.count(map, p, "quadrature_nodes", 1) {
            o.quadrature_nodes = Some(n);
        }
        if o.z_range[1] <= o.z_range[0] {
            self.fail("estimator.z_range", "upper end must exceed lower end");
        }
        if o.beta_range[1] <= o.beta_range[0] {
            self.fail("estimator.beta_range", "upper end must exceed lower end");
        }
        e.test_functions = self.test_functions(map, p);
        e.reference = self.pair(map, p, "reference", |x| x >= 0.0, "must be >= 0");
        if let Some(m) = map.get("mcmc") {
            if let Some(mm) = self.object(m, "estimator.mcmc", &["burn_in", "samples", "thinning", "iterations"]) {
                let q = "estimator.mcmc";
                let b = &mut e.mcmc;
                b.burn_in = self.count(mm, q, "burn_in", 0).unwrap_or(b.burn_in);
                b.samples = self.count(mm, q, "samples", 2).unwrap_or(b.samples);
                b.thinning = self.count(mm, q, "thinning", 1).unwrap_or(b.thinning);
                b.iterations = self.count(mm, q, "iterations", 1).unwrap_or(b.iterations);
            }
        }
        Some(e)
    }

    fn oracle(&mut self, v: &Value) -> Option<OracleSection> {
        let p = "oracle";
        let map = self.object(v, p, &["n_max", "mc_samples", "tolerance", "statistic"])?;
        let mut o = OracleSection::default();
        if let Some(n) = self.count(map, p, "n_max", 1) {
            if n > crate::oracle::MAX_TERMS {
                self.fail("oracle.n_max", format!("at most {}", crate::oracle::MAX_TERMS));
            }
            o.config.n_max = n;
        }
        o.config.mc_samples = self.count(map, p, "mc_samples", 2).unwrap_or(o.config.mc_samples);
        o.config.tolerance = self.number(map, p, "tolerance", |x| x > 0.0, "must be > 0").unwrap_or(o.config.tolerance);
        if let Some(s) = self.string(map, p, "statistic") {
            let parsed = match s.split_once(':') {
                None => match s {
                    "count" => Some(Statistic::Count),
                    "energy" => Some(Statistic::Energy),
                    "count_squared" => Some(Statistic::CountSquared),
                    _ => None,
                },
                Some(("count_at_least", k)) => k.trim().parse().ok().map(Statistic::CountAtLeast),
                Some(("count_equals", k)) => k.trim().parse().ok().map(Statistic::CountEquals),
                _ => None,
            };
            match parsed {
                Some(st) => o.statistic = st,
                None => self.fail(
                    "oracle.statistic",
                    "expected count, energy, count_squared, count_at_least:k or count_equals:k",
                ),
            }
        }
        Some(o)
    }

    fn experiment(&mut self, v: &Value) -> Option<ExperimentSection> {
        let p = "experiment";
        let map = self.object(
            v,
            p,
            &["name", "replicates", "sampling", "z_values", "sides", "beta_shift", "subwindow", "test_functions"],
        )?;
        let mut e = ExperimentSection {
            name: self.string(map, p, "name").map(str::to_string),
            replicates: self.count(map, p, "replicates", 2),
            ..Default::default()
        };
        if let Some(s) = map.get("sampling") {
            if s.as_str() == Some("exact") {
                e.sampling = Some(Sampling::Exact);
            } else if let Some(sm) = self.object(s, "experiment.sampling", &["burn_in", "sweeps", "thinning"]) {
                let schedule = self.schedule(sm, "experiment.sampling", Schedule::new(200, 200, 20));
                e.sampling = Some(Sampling::Chain { schedule });
            }
        }
        let positive = |x: f64| x > 0.0;
        e.z_values = self.numbers(map, p, "z_values", positive, "must be > 0");
        e.sides = self.numbers(map, p, "sides", positive, "must be > 0");
        e.beta_shift = self.number(map, p, "beta_shift", |_| true, "finite");
        e.subwindow = map.get("subwindow").and_then(|s| self.window(s, "experiment.subwindow"));
        e.test_functions = self.test_functions(map, p);
        Some(e)
    }

    fn output(&mut self, v: &Value) -> Option<OutputSection> {
        let map = self.object(v, "output", &["dir", "formats"])?;
        let mut o = OutputSection::default();
        o.dir = self.string(map, "output", "dir").map(PathBuf::from);
        if let Some(f) = map.get("formats") {
            match f.as_array() {
                Some(arr) => {
                    o.formats.clear();
                    for (i, x) in arr.iter().enumerate() {
                        match x.as_str() {
                            Some("json") => {
                                o.formats.insert(Format::Json);
                            }
                            Some("csv") => {
                                o.formats.insert(Format::Csv);
                            }
                            Some("svg") => {
                                o.formats.insert(Format::Svg);
                            }
                            _ => self.fail(&format!("output.formats[{i}]"), "expected json, csv or svg"),
                        }
                    }
                }
                None => self.fail("output.formats", "expected an array"),
            }
        }
        Some(o)
    }
}
