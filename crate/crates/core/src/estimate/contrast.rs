use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::disks;
use crate::energy::{self, EnergyModel};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, Point, PointConfiguration, Window};
use crate::sampler::map_replicates;

use super::optim::{minimize, OptimizerConfig};
use super::EstimationResult;

/// User-supplied `f(x, neighbors)` seeing only the points within `radius`.
pub type LocalFn = Arc<dyn Fn(&Point, &[Point]) -> f64 + Send + Sync>;

/// Test function `f(x, γ)` for the GNZ contrast.
#[derive(Clone)]
pub enum TestFunction {
    ConstantOne,
    /// The model's local energy `h(x, γ)`.
    LocalEnergy,
    /// Number of points of `γ` within `radius` of `x`.
    NeighborCount { radius: f64 },
    /// Length of `∂B(x, R)` outside `L_R(γ)`.
    ExposedSurface { radius: f64 },
    /// `1` when `B(x, R)` misses `L_R(γ)`.
    IsolatedIndicator { radius: f64 },
    Custom { name: String, radius: f64, func: LocalFn },
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl TestFunction {
    pub fn name(&self) -> String {
        match self {
            TestFunction::ConstantOne => "constant_one".into(),
            TestFunction::LocalEnergy => "local_energy_h".into(),
            TestFunction::NeighborCount { radius } => format!("neighbor_count({radius})"),
            TestFunction::ExposedSurface { radius } => format!("exposed_surface({radius})"),
            TestFunction::IsolatedIndicator { radius } => format!("isolated_indicator({radius})"),
            TestFunction::Custom { name, .. } => name.clone(),
        }
    }

    /// Radius of the ball around `x` the function may look into.
    pub fn radius(&self, model: &EnergyModel) -> f64 {
        match self {
            TestFunction::ConstantOne => 0.0,
            TestFunction::LocalEnergy => model.range(),
            TestFunction::NeighborCount { radius } | TestFunction::Custom { radius, .. } => *radius,
            TestFunction::ExposedSurface { radius } | TestFunction::IsolatedIndicator { radius } => 2.0 * radius,
        }
    }

    /// `f(x, γ ∖ {x_skip})`; `h` is the already computed local energy.
    pub(crate) fn eval(&self, x: &Point, pattern: &PointConfiguration, skip: Option<usize>, h: f64) -> f64 {
        let others = |r: f64| {
            let mut out = Vec::new();
            pattern.for_each_within(x, r, |k, q| {
                if Some(k) != skip && q != x {
                    out.push(*q);
                }
            });
            out
        };
        match self {
            TestFunction::ConstantOne => 1.0,
            TestFunction::LocalEnergy => h,
            TestFunction::NeighborCount { radius } => others(*radius).len() as f64,
            TestFunction::ExposedSurface { radius } => {
                let reach2 = 4.0 * radius * radius;
                let mut near = others(2.0 * radius);
                near.retain(|q| q.dist2(x) < reach2);
                disks::exposed_arc_length(x, &near, *radius)
            }
            TestFunction::IsolatedIndicator { radius } => f64::from(u8::from(others(2.0 * radius).is_empty())),
            TestFunction::Custom { radius, func, .. } => func(x, &others(*radius)),
        }
    }
}

/// Midpoint nodes per axis when the caller does not choose.
pub(crate) fn default_nodes(window: &Window, range: f64) -> usize {
    let side = window.width().max(window.height());
    let fine = if range > 0.0 { (4.0 * side / range).ceil() as usize } else { 0 };
    fine.max(128)
}

/// Window after border correction by `margin`.
pub(crate) fn eroded(window: &Window, margin: f64, border_correct: bool) -> Result<Window> {
    if !border_correct {
        return Ok(*window);
    }
    window.erode(margin).ok_or_else(|| {
        Error::DegenerateData(format!("window too small to erode by the interaction margin {margin}"))
    })
}

/// The pieces of the GNZ contrasts `C(f_k)` that do not depend on `(z, β)`:
/// the pattern sums and the quadrature nodes, with identical
/// `(h, f_1, …, f_K)` node tuples merged.
#[derive(Clone, Debug)]
pub struct ContrastTerms {
    pub window: Window,
    pub sums: Vec<f64>,
    /// `(h, cell weight, f values)` per distinct node tuple.
    nodes: Vec<(f64, f64, Vec<f64>)>,
}

impl ContrastTerms {
    pub fn build(
        model: &EnergyModel,
        fs: &[TestFunction],
        pattern: &PointConfiguration,
        border_correct: bool,
        quadrature_nodes: Option<usize>,
    ) -> Result<Self> {
        let margin = fs.iter().map(|f| f.radius(model)).fold(model.range(), f64::max);
        let window = eroded(pattern.window(), margin, border_correct)?;
        Self::build_on(model, fs, pattern, window, quadrature_nodes)
    }

    pub(crate) fn build_on(
        model: &EnergyModel,
        fs: &[TestFunction],
        pattern: &PointConfiguration,
        window: Window,
        quadrature_nodes: Option<usize>,
    ) -> Result<Self> {
        let pattern = pattern.reindexed(fs.iter().map(|f| f.radius(model)).fold(model.range(), f64::max));
        let bc = BoundaryCondition::Free;
        let needs_h = fs.iter().any(|f| matches!(f, TestFunction::LocalEnergy));
        let mut sums = vec![0.0; fs.len()];
        for (i, x) in pattern.points_in(&window) {
            let h = if needs_h {
                energy::local_energy_of_member(model, i, &pattern, &bc)
            } else {
                0.0
            };
            for (s, f) in sums.iter_mut().zip(fs) {
                *s += f.eval(x, &pattern, Some(i), h);
            }
        }

        let n = quadrature_nodes.unwrap_or_else(|| default_nodes(&window, model.range()));
        let (dx, dy) = (window.width() / n as f64, window.height() / n as f64);
        let weight = dx * dy;
        let rows = map_replicates(n, |j| {
            let y = window.lo[1] + (j as f64 + 0.5) * dy;
            (0..n)
                .map(|i| {
                    let x = Point::new(window.lo[0] + (i as f64 + 0.5) * dx, y);
                    let h = energy::local_energy(model, &x, &pattern, &bc);
                    let fv: Vec<f64> = fs
                        .iter()
                        .map(|f| {
                            let v = f.eval(&x, &pattern, None, h);
                            // zero Boltzmann weight kills the term whatever f is
                            if v.is_finite() {
                                v
                            } else {
                                0.0
                            }
                        })
                        .collect();
                    (h, fv)
                })
                .collect::<Vec<_>>()
        });
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut nodes: Vec<(f64, f64, Vec<f64>)> = Vec::new();
        for (h, fv) in rows.into_iter().flatten() {
            let key: Vec<u64> = std::iter::once(h.to_bits()).chain(fv.iter().map(|v| v.to_bits())).collect();
            match index.get(&key) {
                Some(&k) => nodes[k].1 += weight,
                None => {
                    index.insert(key, nodes.len());
                    nodes.push((h, weight, fv));
                }
            }
        }
        Ok(ContrastTerms { window, sums, nodes })
    }

    /// `∫_W e^{−βh(x,γ)} f_k(x, γ) dx` for each `k`.
    pub fn integrals(&self, beta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.sums.len()];
        for (h, w, fv) in &self.nodes {
            let b = energy::boltzmann(beta, *h);
            if b == 0.0 {
                continue;
            }
            for (o, f) in out.iter_mut().zip(fv) {
                *o += w * b * f;
            }
        }
        out
    }

    /// `C(f_k)` for each `k`.
    pub fn residuals(&self, z: f64, beta: f64) -> Vec<f64> {
        self.integrals(beta).iter().zip(&self.sums).map(|(i, s)| s - z * i).collect()
    }

    /// `Σ_k C(f_k)²`.
    pub fn contrast(&self, z: f64, beta: f64) -> f64 {
        self.residuals(z, beta).iter().map(|c| c * c).sum()
    }

    /// Number of distinct quadrature tuples after merging.
    pub fn distinct_nodes(&self) -> usize {
        self.nodes.len()
    }
}

/// The GNZ residual `Σ_{x∈γ_W} f(x, γ∖x) − z∫_W e^{−βh(x,γ)} f(x,γ) dx`.
pub fn gnz_statistic(
    f: &TestFunction,
    model: &EnergyModel,
    z: f64,
    beta: f64,
    pattern: &PointConfiguration,
    border_correct: bool,
    quadrature_nodes: Option<usize>,
) -> Result<f64> {
    let terms = ContrastTerms::build(model, std::slice::from_ref(f), pattern, border_correct, quadrature_nodes)?;
    Ok(terms.residuals(z, beta)[0])
}

/// Minimises `Σ_k C(f_k)²` over the search domain.
pub fn takacs_fiksel_estimate(
    fs: &[TestFunction],
    model: &EnergyModel,
    pattern: &PointConfiguration,
    oc: &OptimizerConfig,
    border_correct: bool,
) -> Result<EstimationResult> {
    fit("tf", fs, model, pattern, oc, border_correct)
}

/// Pseudo-likelihood: the Takacs–Fiksel estimator with `f = (1, h)`.
pub fn mple_estimate(
    model: &EnergyModel,
    pattern: &PointConfiguration,
    oc: &OptimizerConfig,
    border_correct: bool,
) -> Result<EstimationResult> {
    if model.is_hard_core() {
        return Err(Error::UnsupportedModel(
            "pseudo-likelihood needs a finite local energy; use Takacs-Fiksel with bounded test functions".into(),
        ));
    }
    fit(
        "mple",
        &[TestFunction::ConstantOne, TestFunction::LocalEnergy],
        model,
        pattern,
        oc,
        border_correct,
    )
}

fn fit(
    method: &str,
    fs: &[TestFunction],
    model: &EnergyModel,
    pattern: &PointConfiguration,
    oc: &OptimizerConfig,
    border_correct: bool,
) -> Result<EstimationResult> {
    if fs.len() < 2 {
        return Err(Error::InvalidParameter(
            "at least two test functions are needed to identify (z, beta)".into(),
        ));
    }
    oc.validate()?;
    let terms = ContrastTerms::build(model, fs, pattern, border_correct, oc.quadrature_nodes)?;
    let opt = minimize(|z, b| terms.contrast(z, b), oc)?;
    let mut result = EstimationResult::from_optimum(method, &opt, terms.window, border_correct);
    result.diagnostics.insert(
        "test_functions".into(),
        fs.iter().map(|f| f.name()).collect::<Vec<_>>().into(),
    );
    result.diagnostics.insert("quadrature_tuples".into(), terms.distinct_nodes().into());
    Ok(result)
}
