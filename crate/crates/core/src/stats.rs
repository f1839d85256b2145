//! Small statistical helpers for the experiments and tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sample variance (denominator `n − 1`).
pub fn variance(xs: &[f64]) -> f64 {
    let (m, _) = mean_se(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

/// Groups adjacent bins (in order) until each group reaches `min` in the
/// `key` weight; a short last group is folded into the previous one.
fn group_bins(keys: &[f64], min: f64) -> Vec<std::ops::Range<usize>> {
    let mut groups = Vec::new();
    let mut start = 0;
    let mut acc = 0.0;
    for (i, k) in keys.iter().enumerate() {
        acc += k;
        if acc >= min {
            groups.push(start..i + 1);
            start = i + 1;
            acc = 0.0;
        }
    }
    if start < keys.len() {
        match groups.last_mut() {
            Some(last) => last.end = keys.len(),
            None => groups.push(0..keys.len()),
        }
    }
    groups
}

fn chi_square_p(statistic: f64, dof: f64) -> f64 {
    if dof <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(dof).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
}

/// Chi-square test that two samples of counts share one distribution.
/// Adjacent count values are pooled until each bin expects at least five
/// observations.
pub fn chi_square_two_sample(a: &[usize], b: &[usize]) -> TestOutcome {
    let max = a.iter().chain(b).copied().max().unwrap_or(0);
    let mut ha = vec![0.0; max + 1];
    let mut hb = vec![0.0; max + 1];
    for &x in a {
        ha[x] += 1.0;
    }
    for &x in b {
        hb[x] += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let n = na + nb;
    let pooled: Vec<f64> = ha.iter().zip(&hb).map(|(x, y)| x + y).collect();
    let min_share = na.min(nb) / n;
    let groups = group_bins(&pooled, 5.0 / min_share);
    let mut stat = 0.0;
    for g in &groups {
        let oa: f64 = ha[g.clone()].iter().sum();
        let ob: f64 = hb[g.clone()].iter().sum();
        let tot = oa + ob;
        let (ea, eb) = (tot * na / n, tot * nb / n);
        if ea > 0.0 {
            stat += (oa - ea).powi(2) / ea;
        }
        if eb > 0.0 {
            stat += (ob - eb).powi(2) / eb;
        }
    }
    let dof = groups.len() as f64 - 1.0;
    TestOutcome {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
    }
}

/// Chi-square goodness of fit of observed counts to `pmf`, pooling the
/// upper tail into the last bin and adjacent bins to expect at least five.
pub fn chi_square_gof(sample: &[usize], pmf: impl Fn(usize) -> f64) -> TestOutcome {
    let n = sample.len() as f64;
    let max = sample.iter().copied().max().unwrap_or(0);
    let mut obs = vec![0.0; max + 1];
    for &x in sample {
        obs[x] += 1.0;
    }
    let mut expected: Vec<f64> = (0..=max).map(|k| n * pmf(k)).collect();
    let below: f64 = expected.iter().sum();
    *expected.last_mut().expect("non-empty") += (n - below).max(0.0);
    let groups = group_bins(&expected, 5.0);
    let mut stat = 0.0;
    for g in &groups {
        let o: f64 = obs[g.clone()].iter().sum();
        let e: f64 = expected[g.clone()].iter().sum();
        if e > 0.0 {
            stat += (o - e).powi(2) / e;
        }
    }
    let dof = groups.len() as f64 - 1.0;
    TestOutcome {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
    }
}

/// `P(N = k)` for `N ~ Poisson(mean)`.
pub fn poisson_pmf(mean: f64, k: usize) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    Poisson::new(mean).map(|d| d.pmf(k as u64)).unwrap_or(f64::NAN)
}

/// `P(N ≥ k)` for `N ~ Poisson(mean)`.
pub fn poisson_survival(mean: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).map(|d| d.sf(k as u64 - 1)).unwrap_or(f64::NAN)
}

/// Two-sided exact sign test for `successes` out of `trials` at `p = ½`.
pub fn sign_test(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let d = Binomial::new(0.5, trials).expect("valid binomial");
    let lo = successes.min(trials - successes);
    (2.0 * d.cdf(lo)).min(1.0)
}

/// Least-squares line `y ≈ a + b x`; returns `(a, b)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}
