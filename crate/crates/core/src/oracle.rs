//! Brute-force reference values on tiny windows from the truncated series
//!
//! `Z = e^{−|Λ|} Σ_{n ≤ n_max} (z|Λ|)ⁿ/n! · E[e^{−βH(U₁..Uₙ|bc)}]`
//!
//! with `U_i` i.i.d. uniform on the window and each inner expectation
//! estimated by plain Monte Carlo. The neglected tail is bounded through the
//! stability constant: the `n`-th term is at most
//! `e^{−|Λ|}(z e^{−βA}|Λ|)ⁿ/n!`.

use serde::{Deserialize, Serialize};

use crate::energy::{self, boltzmann, EnergyModel, PairPotential};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, Point, PointConfiguration, Window};
use crate::sampler::{map_replicates, rng_for};

/// Largest supported truncation level.
pub const MAX_TERMS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n_max: usize,
    /// Monte-Carlo samples per series term.
    pub mc_samples: usize,
    pub seed: u64,
    /// Allowed truncation bound, relative to `max(|value|, 1)`.
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_max: MAX_TERMS,
            mc_samples: 10_000,
            seed: 0,
            tolerance: 1e-2,
        }
    }
}

impl OracleConfig {
    fn validate(&self) -> Result<()> {
        if self.n_max > MAX_TERMS {
            return Err(Error::InvalidParameter(format!(
                "n_max = {} exceeds the supported maximum {MAX_TERMS}",
                self.n_max
            )));
        }
        if self.mc_samples < 2 {
            return Err(Error::InvalidParameter("mc_samples must be at least 2".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub estimate: f64,
    pub std_error: f64,
    /// Bound on the error from dropping the terms `n > n_max`.
    pub truncation_bound: f64,
}

/// Statistics whose Gibbs expectation the oracle computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Count,
    Energy,
    CountSquared,
    CountAtLeast(usize),
    CountEquals(usize),
}

impl Statistic {
    fn value(&self, n: usize, h: f64) -> f64 {
        match self {
            Statistic::Count => n as f64,
            Statistic::Energy => h,
            Statistic::CountSquared => (n * n) as f64,
            Statistic::CountAtLeast(k) => f64::from(u8::from(n >= *k)),
            Statistic::CountEquals(k) => f64::from(u8::from(n == *k)),
        }
    }

    /// Upper bound on `|S|` over configurations of `n` points.
    fn bound(&self, n: usize, model: &EnergyModel) -> f64 {
        match self {
            Statistic::Count => n as f64,
            Statistic::CountSquared => (n * n) as f64,
            Statistic::CountAtLeast(_) | Statistic::CountEquals(_) => 1.0,
            Statistic::Energy => energy_bound(model, n),
        }
    }
}

/// `sup |H|` over finite-energy configurations of `n` points, or `∞`.
fn energy_bound(model: &EnergyModel, n: usize) -> f64 {
    let pairs = (n * n.saturating_sub(1) / 2) as f64;
    let n = n as f64;
    match model {
        EnergyModel::Pairwise { potential, .. } => match potential {
            PairPotential::Strauss { .. } | PairPotential::SmoothCore { .. } => pairs,
            PairPotential::HardCore { .. } => 0.0,
            PairPotential::MultiStrauss { levels, .. } => pairs * levels.iter().fold(0.0_f64, |m, a| m.max(a.abs())),
            PairPotential::LennardJones { .. } => f64::INFINITY,
        },
        EnergyModel::Area { radius, .. } => n * std::f64::consts::PI * radius * radius,
        EnergyModel::RandomCluster { .. } => n,
    }
}

/// Per-term Monte-Carlo moments of `w = e^{−βH}` and `S·w`.
struct Term {
    w: f64,
    sw: f64,
    var_w: f64,
    var_sw: f64,
    cov: f64,
}

fn integrate(
    model: &EnergyModel,
    window: &Window,
    beta: f64,
    bc: &BoundaryCondition,
    oc: &OracleConfig,
    stat: Statistic,
) -> Vec<Term> {
    map_replicates(oc.n_max + 1, |n| {
        let mut rng = rng_for(oc.seed, n as u64);
        let m = if n == 0 { 1 } else { oc.mc_samples };
        let (mut sw_sum, mut w_sum) = (0.0, 0.0);
        let (mut w2, mut sw2, mut cross) = (0.0, 0.0, 0.0);
        let cell = model.range();
        let mut pts = Vec::with_capacity(n);
        for _ in 0..m {
            pts.clear();
            pts.extend((0..n).map(|_| window.sample_uniform(&mut rng)));
            let h = configuration_energy(model, window, cell, &pts, bc);
            let w = boltzmann(beta, h);
            let s = if w == 0.0 { 0.0 } else { stat.value(n, h) * w };
            w_sum += w;
            sw_sum += s;
            w2 += w * w;
            sw2 += s * s;
            cross += s * w;
        }
        let mf = m as f64;
        let (wm, sm) = (w_sum / mf, sw_sum / mf);
        let denom = if m > 1 { mf - 1.0 } else { 1.0 };
        let var = |sq: f64, mean: f64| ((sq - mf * mean * mean) / denom).max(0.0) / mf;
        Term {
            w: wm,
            sw: sm,
            var_w: if m > 1 { var(w2, wm) } else { 0.0 },
            var_sw: if m > 1 { var(sw2, sm) } else { 0.0 },
            cov: if m > 1 { (cross - mf * wm * sm) / denom / mf } else { 0.0 },
        }
    })
}

fn configuration_energy(model: &EnergyModel, window: &Window, cell: f64, pts: &[Point], bc: &BoundaryCondition) -> f64 {
    match PointConfiguration::from_points(*window, cell, pts.iter().copied()) {
        Ok(c) => energy::total_energy(model, &c, bc),
        // coincident uniform draws have probability zero
        Err(_) => f64::INFINITY,
    }
}

/// `ln c_n = −|Λ| + n ln(z|Λ|) − ln n!`.
fn log_coefficient(z: f64, area: f64, n: usize) -> f64 {
    -area + n as f64 * (z * area).ln() - ln_factorial(n)
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `e^{−|Λ|} Σ_{n > n_max} s(n) μⁿ/n!` with `μ = z e^{−βA}|Λ|`.
fn tail_sum(mu: f64, area: f64, n_max: usize, s: impl Fn(usize) -> f64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    for n in n_max + 1..n_max + 400 {
        let term = (-area + n as f64 * mu.ln() - ln_factorial(n)).exp() * s(n);
        total += term;
        if n as f64 > mu && term < total * 1e-17 {
            break;
        }
    }
    total
}

fn dominating_mean(model: &EnergyModel, z: f64, beta: f64, area: f64) -> Result<f64> {
    let a = model.stability().ok_or_else(|| {
        Error::UnsupportedModel(format!(
            "{} has no declared stability constant; the series tail cannot be bounded",
            model.family_name()
        ))
    })?;
    Ok(z * (-beta * a).exp() * area)
}

fn check_inputs(z: f64, beta: f64, oc: &OracleConfig) -> Result<()> {
    oc.validate()?;
    if !(z > 0.0) || !(beta >= 0.0) || !z.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("need z > 0 and beta >= 0, got z={z}, beta={beta}")));
    }
    Ok(())
}

/// At `β = 0` without hard constraints the Gibbs measure is Poisson.
fn is_poisson(model: &EnergyModel, beta: f64, bc: &BoundaryCondition) -> bool {
    beta == 0.0 && !model.is_hard_core() && !matches!(bc, BoundaryCondition::ExclusionBand { .. })
}

fn guard(value: f64, bound: f64, tolerance: f64) -> Result<()> {
    let scale = value.abs().max(1.0);
    if bound > tolerance * scale {
        return Err(Error::TruncationTooLarge {
            bound: bound / scale,
            tolerance,
        });
    }
    Ok(())
}

/// Partition function `Z_Λ^{z,β}(bc)` against the unit-rate Poisson process.
pub fn partition_function(
    model: &EnergyModel,
    window: &Window,
    z: f64,
    beta: f64,
    bc: &BoundaryCondition,
    oc: &OracleConfig,
) -> Result<OracleValue> {
    check_inputs(z, beta, oc)?;
    let area = window.area();
    if is_poisson(model, beta, bc) {
        return Ok(OracleValue {
            estimate: ((z - 1.0) * area).exp(),
            std_error: 0.0,
            truncation_bound: 0.0,
        });
    }
    let mu = dominating_mean(model, z, beta, area)?;
    let terms = integrate(model, window, beta, bc, oc, Statistic::Count);
    let (mut zsum, mut var) = (0.0, 0.0);
    for (n, t) in terms.iter().enumerate() {
        let c = log_coefficient(z, area, n).exp();
        zsum += c * t.w;
        var += c * c * t.var_w;
    }
    let bound = tail_sum(mu, area, oc.n_max, |_| 1.0);
    guard(zsum, bound, oc.tolerance)?;
    Ok(OracleValue {
        estimate: zsum,
        std_error: var.sqrt(),
        truncation_bound: bound,
    })
}

/// `E[S]` under `P_Λ^{z,β}(·|bc)`.
pub fn oracle_expectation(
    stat: Statistic,
    model: &EnergyModel,
    window: &Window,
    z: f64,
    beta: f64,
    bc: &BoundaryCondition,
    oc: &OracleConfig,
) -> Result<OracleValue> {
    check_inputs(z, beta, oc)?;
    let area = window.area();
    if is_poisson(model, beta, bc) && stat != Statistic::Energy {
        return Ok(poisson_expectation(stat, z * area));
    }
    let mu = dominating_mean(model, z, beta, area)?;
    let terms = integrate(model, window, beta, bc, oc, stat);
    let (mut num, mut den) = (0.0, 0.0);
    let (mut var_num, mut var_den, mut cov) = (0.0, 0.0, 0.0);
    for (n, t) in terms.iter().enumerate() {
        let c = log_coefficient(z, area, n).exp();
        num += c * t.sw;
        den += c * t.w;
        var_num += c * c * t.var_sw;
        var_den += c * c * t.var_w;
        cov += c * c * t.cov;
    }
    if den <= 0.0 {
        return Err(Error::DegenerateData("all series weights vanished".into()));
    }
    let ratio = num / den;
    let var = (var_num - 2.0 * ratio * cov + ratio * ratio * var_den).max(0.0) / (den * den);
    let tail_num = tail_sum(mu, area, oc.n_max, |n| stat.bound(n, model));
    let tail_den = tail_sum(mu, area, oc.n_max, |_| 1.0);
    let bound = (tail_num + ratio.abs() * tail_den) / den;
    guard(ratio, bound, oc.tolerance)?;
    Ok(OracleValue {
        estimate: ratio,
        std_error: var.sqrt(),
        truncation_bound: bound,
    })
}

fn poisson_expectation(stat: Statistic, mu: f64) -> OracleValue {
    let pmf = |k: usize| (-mu + k as f64 * mu.ln() - ln_factorial(k)).exp();
    let estimate = match stat {
        Statistic::Count => mu,
        Statistic::CountSquared => mu + mu * mu,
        Statistic::CountAtLeast(k) => 1.0 - (0..k).map(pmf).sum::<f64>(),
        Statistic::CountEquals(k) => pmf(k),
        Statistic::Energy => unreachable!("energy has no closed form"),
    };
    OracleValue {
        estimate,
        std_error: 0.0,
        truncation_bound: 0.0,
    }
}

/// `Var[N]` from the first two count moments; the standard error assumes
/// the two estimates are independent, which overstates it.
pub fn count_variance(
    model: &EnergyModel,
    window: &Window,
    z: f64,
    beta: f64,
    bc: &BoundaryCondition,
    oc: &OracleConfig,
) -> Result<OracleValue> {
    let m1 = oracle_expectation(Statistic::Count, model, window, z, beta, bc, oc)?;
    let m2 = oracle_expectation(Statistic::CountSquared, model, window, z, beta, bc, oc)?;
    Ok(OracleValue {
        estimate: m2.estimate - m1.estimate * m1.estimate,
        std_error: (m2.std_error.powi(2) + (2.0 * m1.estimate * m1.std_error).powi(2)).sqrt(),
        truncation_bound: m2.truncation_bound + 2.0 * m1.estimate.abs() * m1.truncation_bound,
    })
}

/// `P(N = n)` for `n = 0..=n_max`.
pub fn count_pmf(
    model: &EnergyModel,
    window: &Window,
    z: f64,
    beta: f64,
    bc: &BoundaryCondition,
    oc: &OracleConfig,
) -> Result<Vec<OracleValue>> {
    (0..=oc.n_max)
        .map(|k| oracle_expectation(Statistic::CountEquals(k), model, window, z, beta, bc, oc))
        .collect()
}

/// Finite-volume pressure `ln Z / |Λ|` under a free boundary.
pub fn finite_pressure(
    model: &EnergyModel,
    window: &Window,
    z: f64,
    beta: f64,
    oc: &OracleConfig,
) -> Result<OracleValue> {
    let zv = partition_function(model, window, z, beta, &BoundaryCondition::Free, oc)?;
    let area = window.area();
    Ok(OracleValue {
        estimate: zv.estimate.ln() / area,
        std_error: zv.std_error / zv.estimate / area,
        truncation_bound: (1.0 + zv.truncation_bound / zv.estimate).ln() / area,
    })
}

/// Log-likelihood `N ln z − βH(γ) − ln Z` of an observed pattern.
pub fn log_likelihood(
    model: &EnergyModel,
    pattern: &PointConfiguration,
    z: f64,
    beta: f64,
    oc: &OracleConfig,
) -> Result<OracleValue> {
    let zv = partition_function(model, pattern.window(), z, beta, &BoundaryCondition::Free, oc)?;
    let h = energy::total_energy(model, pattern, &BoundaryCondition::Free);
    Ok(OracleValue {
        estimate: pattern.len() as f64 * z.ln() - beta * h - zv.estimate.ln(),
        std_error: zv.std_error / zv.estimate,
        truncation_bound: (1.0 + zv.truncation_bound / zv.estimate).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Window {
        Window::square(1.0).unwrap()
    }

    #[test]
    fn poisson_normalisation_is_exact() {
        let m = EnergyModel::strauss(0.5).unwrap();
        let oc = OracleConfig::default();
        for &z in &[0.3, 1.0, 2.5] {
            let v = partition_function(&m, &unit(), z, 0.0, &BoundaryCondition::Free, &oc).unwrap();
            assert!((v.estimate - (z - 1.0_f64).exp()).abs() < 1e-12);
            let p = finite_pressure(&m, &unit(), z, 0.0, &oc).unwrap();
            assert!((p.estimate - (z - 1.0)).abs() < 1e-12);
            let n = oracle_expectation(Statistic::Count, &m, &unit(), z, 0.0, &BoundaryCondition::Free, &oc).unwrap();
            assert_eq!(n.estimate, z);
        }
    }

    #[test]
    fn hard_core_single_occupancy() {
        let m = EnergyModel::hard_core(2.0).unwrap();
        let oc = OracleConfig {
            mc_samples: 200,
            ..OracleConfig::default()
        };
        let z = 1.7;
        let v = partition_function(&m, &unit(), z, 1.0, &BoundaryCondition::Free, &oc).unwrap();
        assert!((v.estimate - (-1.0_f64).exp() * (1.0 + z)).abs() < 1e-12);
        let n = oracle_expectation(Statistic::Count, &m, &unit(), 1.0, 1.0, &BoundaryCondition::Free, &oc).unwrap();
        assert!((n.estimate - 0.5).abs() < 1e-12);
        let p = finite_pressure(&m, &unit(), 1.0, 1.0, &oc).unwrap();
        assert!((p.estimate - (2.0_f64.ln() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn truncation_guard_fires() {
        let m = EnergyModel::strauss(0.5).unwrap();
        let oc = OracleConfig {
            n_max: 3,
            mc_samples: 100,
            ..OracleConfig::default()
        };
        let w = Window::square(3.0).unwrap();
        assert!(matches!(
            partition_function(&m, &w, 1.0, 1.0, &BoundaryCondition::Free, &oc),
            Err(Error::TruncationTooLarge { .. })
        ));
        let too_many = OracleConfig {
            n_max: 13,
            ..OracleConfig::default()
        };
        assert!(partition_function(&m, &w, 1.0, 1.0, &BoundaryCondition::Free, &too_many).is_err());
    }

    #[test]
    fn strauss_series_is_stable_in_n_max() {
        let m = EnergyModel::strauss(0.5).unwrap();
        let base = OracleConfig {
            mc_samples: 4000,
            ..OracleConfig::default()
        };
        let a = partition_function(&m, &unit(), 1.0, 1.0, &BoundaryCondition::Free, &OracleConfig { n_max: 8, ..base })
            .unwrap();
        let b = partition_function(&m, &unit(), 1.0, 1.0, &BoundaryCondition::Free, &OracleConfig { n_max: 10, ..base })
            .unwrap();
        let tol = 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt() + a.truncation_bound;
        assert!((a.estimate - b.estimate).abs() <= tol, "{a:?} {b:?}");
    }

    #[test]
    fn pmf_sums_to_one() {
        let m = EnergyModel::strauss(0.5).unwrap();
        let oc = OracleConfig {
            mc_samples: 2000,
            ..OracleConfig::default()
        };
        let pmf = count_pmf(&m, &unit(), 1.0, 1.0, &BoundaryCondition::Free, &oc).unwrap();
        let total: f64 = pmf.iter().map(|v| v.estimate).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}
