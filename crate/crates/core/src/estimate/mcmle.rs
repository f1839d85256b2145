//! Monte-Carlo maximum likelihood.
//!
//! The Gibbs likelihood `z^N e^{−βH}/Z(z,β)` is an exponential family in
//! `θ = (ln z, β)` with sufficient statistic `s = (N, −H)`, so
//! `ln Z(θ)/Z(θ₀) = ln E_{θ₀}[e^{(θ−θ₀)·s}]` is estimated from chain draws
//! at `θ₀`. The reference is moved by Newton steps computed from the chain
//! moments (gradient `s_obs − E[s]`, Hessian `−Cov[s]`) until the data lie
//! within one standard deviation of the chain mean; the estimate is the
//! maximiser of the importance-sampled likelihood around that reference,
//! searched only where the importance weights stay usable.

use serde::{Deserialize, Serialize};

use crate::energy::{self, EnergyModel};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, PointConfiguration};
use crate::sampler::{Chain, SamplerConfig, Schedule};

use super::optim::OptimizerConfig;
use super::EstimationResult;

/// Effective sample size below which the estimate is refused.
pub const MIN_ESS: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcBudget {
    /// Sweeps discarded at the start of every chain.
    pub burn_in: usize,
    /// Retained draws per chain.
    pub samples: usize,
    /// Sweeps between retained draws.
    pub thinning: usize,
    /// Maximum number of reference updates.
    pub iterations: usize,
    pub seed: u64,
}

impl Default for McmcBudget {
    fn default() -> Self {
        McmcBudget {
            burn_in: 200,
            samples: 500,
            thinning: 2,
            iterations: 8,
            seed: 0,
        }
    }
}

/// Sufficient statistics `(N, H)` of chain draws at a reference `(z₀, β₀)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSample {
    pub z0: f64,
    pub beta0: f64,
    pub stats: Vec<[f64; 2]>,
}

impl ImportanceSample {
    /// Runs a chain at `(z0, beta0)` on the pattern's window with a free
    /// boundary, started from `initial`.
    pub fn draw(
        model: &EnergyModel,
        initial: &PointConfiguration,
        z0: f64,
        beta0: f64,
        budget: &McmcBudget,
        stream: u64,
    ) -> Result<Self> {
        let schedule = Schedule::new(budget.burn_in, budget.samples * budget.thinning, budget.thinning);
        let sc = SamplerConfig::new(z0, beta0, budget.seed).with_schedule(schedule);
        let bc = BoundaryCondition::Free;
        let mut chain = Chain::from_config(model, initial.clone(), &sc, &bc, stream)?;
        chain.run_sweeps(budget.burn_in);
        let mut stats = Vec::with_capacity(budget.samples);
        for _ in 0..budget.samples {
            chain.run_sweeps(budget.thinning);
            stats.push([chain.config().len() as f64, chain.state().energy]);
        }
        Ok(ImportanceSample { z0, beta0, stats })
    }

    fn exponents(&self, z: f64, beta: f64) -> Vec<f64> {
        let dl = z.ln() - self.z0.ln();
        let db = beta - self.beta0;
        self.stats.iter().map(|[n, h]| dl * n - db * h).collect()
    }

    /// `ln(Z(z,β)/Z(z₀,β₀))` with its delta-method standard error (draws
    /// treated as independent) and the effective sample size of the weights.
    pub fn log_ratio(&self, z: f64, beta: f64) -> (f64, f64, f64) {
        let e = self.exponents(z, beta);
        let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = e.iter().map(|v| (v - max).exp()).collect();
        let n = w.len() as f64;
        let s1: f64 = w.iter().sum();
        let s2: f64 = w.iter().map(|v| v * v).sum();
        let mean = s1 / n;
        let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
        let se = (var / n).sqrt() / mean;
        (max + mean.ln(), se, s1 * s1 / s2)
    }

    /// Importance-weighted mean and covariance of `s = (N, −H)` at `(z, β)`,
    /// and the effective sample size.
    fn moments(&self, z: f64, beta: f64) -> ([f64; 2], [[f64; 2]; 2], f64) {
        let e = self.exponents(z, beta);
        let max = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = e.iter().map(|v| (v - max).exp()).collect();
        let s1: f64 = w.iter().sum();
        let s2: f64 = w.iter().map(|v| v * v).sum();
        let mut m = [0.0; 2];
        for (wi, [n, h]) in w.iter().zip(&self.stats) {
            m[0] += wi * n / s1;
            m[1] -= wi * h / s1;
        }
        let mut c = [[0.0; 2]; 2];
        for (wi, [n, h]) in w.iter().zip(&self.stats) {
            let d = [n - m[0], -h - m[1]];
            for a in 0..2 {
                for b in 0..2 {
                    c[a][b] += wi * d[a] * d[b] / s1;
                }
            }
        }
        (m, c, s1 * s1 / s2)
    }
}

fn solve(c: [[f64; 2]; 2], g: [f64; 2]) -> Option<[f64; 2]> {
    let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
    let scale = (c[0][0] * c[1][1]).abs().max(f64::MIN_POSITIVE);
    if !det.is_finite() || det.abs() <= 1e-12 * scale {
        return None;
    }
    Some([
        (c[1][1] * g[0] - c[0][1] * g[1]) / det,
        (c[0][0] * g[1] - c[1][0] * g[0]) / det,
    ])
}

fn singular() -> Error {
    Error::DegenerateData("sufficient statistics have a singular covariance under the reference".into())
}

struct Box2 {
    lz: [f64; 2],
    b: [f64; 2],
}

impl Box2 {
    fn clamp(&self, t: [f64; 2]) -> [f64; 2] {
        [t[0].clamp(self.lz[0], self.lz[1]), t[1].clamp(self.b[0], self.b[1])]
    }
}

/// One importance-weighted Newton step from `theta` for the likelihood of
/// `s_obs`, shortened until the effective sample size stays above
/// `min_ess`.
fn newton_step(
    sample: &ImportanceSample,
    theta: [f64; 2],
    s_obs: [f64; 2],
    min_ess: f64,
    bounds: &Box2,
) -> Result<[f64; 2]> {
    let (m, c, _) = sample.moments(theta[0].exp(), theta[1]);
    let g = [s_obs[0] - m[0], s_obs[1] - m[1]];
    let d = solve(c, g).ok_or_else(singular)?;
    let mut t = 1.0;
    for _ in 0..40 {
        let cand = bounds.clamp([theta[0] + t * d[0], theta[1] + t * d[1]]);
        let (_, _, ess) = sample.log_ratio(cand[0].exp(), cand[1]);
        if ess >= min_ess {
            return Ok(cand);
        }
        t *= 0.5;
    }
    Ok(theta)
}

/// Monte-Carlo maximum-likelihood estimate of `(z, β)`, starting the
/// chains at the reference `(z0, beta0)` and the observed pattern.
/// Boundary effects are ignored: the pattern and the chains share a free
/// boundary on the observation window.
pub fn mc_mle_estimate(
    model: &EnergyModel,
    pattern: &PointConfiguration,
    reference: (f64, f64),
    budget: &McmcBudget,
    oc: &OptimizerConfig,
) -> Result<EstimationResult> {
    oc.validate()?;
    let (z0, beta0) = reference;
    let inside = |v: f64, r: [f64; 2]| v >= r[0] && v <= r[1];
    if !inside(z0, oc.z_range) || !inside(beta0, oc.beta_range) {
        return Err(Error::InvalidParameter(format!(
            "reference ({z0}, {beta0}) lies outside the search domain"
        )));
    }
    if budget.samples < 2 * MIN_ESS as usize || budget.thinning == 0 {
        return Err(Error::InvalidParameter(format!(
            "MCMC budget needs at least {} samples and thinning ≥ 1",
            2 * MIN_ESS as usize
        )));
    }
    let window = *pattern.window();
    let n_obs = pattern.len() as f64;
    if model.is_null() {
        let z = (n_obs / window.area()).clamp(oc.z_range[0], oc.z_range[1]);
        let mut r = result(z, beta0, 0.0, 0, pattern, oc);
        r.warnings
            .push("energy is identically zero: beta is not identifiable and is reported at the reference".into());
        return Ok(r);
    }
    let h_obs = energy::total_energy(model, pattern, &BoundaryCondition::Free);
    if !h_obs.is_finite() {
        return Err(Error::DegenerateData("observed pattern has infinite energy".into()));
    }
    let s_obs = [n_obs, -h_obs];
    let bounds = Box2 {
        lz: [oc.z_range[0].ln(), oc.z_range[1].ln()],
        b: oc.beta_range,
    };

    let mut theta = [z0.ln(), beta0];
    let mut iterations = 0;
    let mut sample = ImportanceSample::draw(model, pattern, z0, beta0, budget, 0)?;
    let mut settled = false;
    for it in 0..budget.iterations {
        iterations = it + 1;
        let (m, c, _) = sample.moments(theta[0].exp(), theta[1]);
        let g = [s_obs[0] - m[0], s_obs[1] - m[1]];
        let d = solve(c, g).ok_or_else(singular)?;
        // squared Newton decrement: distance of the data from the chain mean
        // in standard deviations of the sufficient statistic
        if g[0] * d[0] + g[1] * d[1] <= 1.0 {
            settled = true;
            break;
        }
        theta = bounds.clamp([theta[0] + d[0].clamp(-1.0, 1.0), theta[1] + d[1].clamp(-1.0, 1.0)]);
        sample = ImportanceSample::draw(model, pattern, theta[0].exp(), theta[1], budget, it as u64 + 1)?;
    }

    // maximise the importance-sampled likelihood around the last reference
    let loglik = |t: [f64; 2]| {
        let (lr, _, _) = sample.log_ratio(t[0].exp(), t[1]);
        (t[0] - theta[0]) * s_obs[0] + (t[1] - theta[1]) * s_obs[1] - lr
    };
    let mut best = theta;
    let mut best_ll = loglik(best);
    for _ in 0..50 {
        let cand = newton_step(&sample, best, s_obs, MIN_ESS, &bounds)?;
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-6 {
            let p = [best[0] + t * (cand[0] - best[0]), best[1] + t * (cand[1] - best[1])];
            let ll = loglik(p);
            if ll >= best_ll {
                accepted = Some((p, ll));
                break;
            }
            t *= 0.5;
        }
        let Some((p, ll)) = accepted else { break };
        let moved = (p[0] - best[0]).abs().max((p[1] - best[1]).abs());
        best = p;
        best_ll = ll;
        if moved < 1e-8 {
            break;
        }
    }
    let (_, _, ess) = sample.log_ratio(best[0].exp(), best[1]);
    if ess < MIN_ESS {
        return Err(Error::LowEffectiveSampleSize { ess });
    }
    let mut r = result(best[0].exp(), best[1], -best_ll, iterations, pattern, oc);
    r.diagnostics.insert("effective_sample_size".into(), ess.into());
    r.diagnostics.insert("final_reference".into(), vec![theta[0].exp(), theta[1]].into());
    if !settled {
        r.warnings
            .push("reference updates did not settle within the iteration budget".into());
    }
    Ok(r)
}

fn result(
    z: f64,
    beta: f64,
    objective: f64,
    iterations: usize,
    pattern: &PointConfiguration,
    oc: &OptimizerConfig,
) -> EstimationResult {
    let near = |v: f64, r: [f64; 2]| (v - r[0]).abs() <= oc.tolerance || (v - r[1]).abs() <= oc.tolerance;
    let on_boundary = near(z, oc.z_range) || near(beta, oc.beta_range);
    EstimationResult {
        method: "mcmle".into(),
        z_hat: z,
        beta_hat: beta,
        contrast: objective,
        iterations,
        border_corrected: false,
        window: *pattern.window(),
        on_boundary,
        standard_errors: None,
        warnings: if on_boundary {
            vec!["optimum lies on the boundary of the search domain".into()]
        } else {
            Vec::new()
        },
        diagnostics: serde_json::Map::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Window};

    #[test]
    fn null_energy_gives_poisson_intensity() {
        let w = Window::square(10.0).unwrap();
        let p = PointConfiguration::from_points(w, 1.0, (0..37).map(|i| Point::new(0.25 * i as f64, 5.0))).unwrap();
        let m = EnergyModel::multi_strauss(vec![0.0], vec![1.0], None).unwrap();
        let r = mc_mle_estimate(&m, &p, (1.0, 0.5), &McmcBudget::default(), &OptimizerConfig::default()).unwrap();
        assert_eq!(r.z_hat, 0.37);
    }

    #[test]
    fn log_ratio_is_zero_at_reference() {
        let s = ImportanceSample {
            z0: 2.0,
            beta0: 0.5,
            stats: vec![[3.0, 1.0], [5.0, 2.0], [4.0, 0.0]],
        };
        let (lr, se, ess) = s.log_ratio(2.0, 0.5);
        assert!(lr.abs() < 1e-15 && se == 0.0);
        assert!((ess - 3.0).abs() < 1e-12);
    }

    #[test]
    fn reference_outside_domain_is_rejected() {
        let w = Window::square(2.0).unwrap();
        let p = PointConfiguration::empty(w, 0.5);
        let m = EnergyModel::strauss(0.5).unwrap();
        assert!(mc_mle_estimate(&m, &p, (100.0, 0.5), &McmcBudget::default(), &OptimizerConfig::default()).is_err());
    }
}
