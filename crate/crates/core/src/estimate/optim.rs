//! Bounded two-parameter minimisation: a coarse grid followed by a
//! Nelder–Mead simplex clamped to the box.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Search box `[z_lo, z_hi] × [β_lo, β_hi]`.
    pub z_range: [f64; 2],
    pub beta_range: [f64; 2],
    /// Grid points per axis for the coarse search.
    pub grid: usize,
    /// Simplex size at which refinement stops, in parameter units.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Midpoint-rule nodes per window axis for the integral terms; `None`
    /// picks `max(128, ⌈4·side/range⌉)`.
    pub quadrature_nodes: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            z_range: [1e-3, 10.0],
            beta_range: [0.0, 5.0],
            grid: 32,
            tolerance: 1e-4,
            max_iterations: 2000,
            quadrature_nodes: None,
        }
    }
}

impl OptimizerConfig {
    pub fn with_domain(mut self, z_range: [f64; 2], beta_range: [f64; 2]) -> Self {
        self.z_range = z_range;
        self.beta_range = beta_range;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let [zl, zh] = self.z_range;
        let [bl, bh] = self.beta_range;
        let finite = [zl, zh, bl, bh].iter().all(|v| v.is_finite());
        if !finite || !(zl > 0.0) || !(zh > zl) || !(bl >= 0.0) || !(bh > bl) {
            return Err(Error::InvalidParameter(format!(
                "search domain must be a bounded box in (0,∞)×[0,∞), got z {:?}, beta {:?}",
                self.z_range, self.beta_range
            )));
        }
        if self.grid < 2 || !(self.tolerance > 0.0) || self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "optimizer needs grid ≥ 2, tolerance > 0 and max_iterations ≥ 1".into(),
            ));
        }
        if self.quadrature_nodes == Some(0) {
            return Err(Error::InvalidParameter("quadrature_nodes must be positive".into()));
        }
        Ok(())
    }

    fn lo(&self) -> [f64; 2] {
        [self.z_range[0], self.beta_range[0]]
    }

    fn hi(&self) -> [f64; 2] {
        [self.z_range[1], self.beta_range[1]]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub point: [f64; 2],
    pub value: f64,
    pub iterations: usize,
    pub on_boundary: bool,
    /// Ratio of the smallest to the largest Hessian eigenvalue magnitude.
    pub conditioning: f64,
}

fn clamp(p: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> [f64; 2] {
    [p[0].clamp(lo[0], hi[0]), p[1].clamp(lo[1], hi[1])]
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Minimises `f` over the box of `oc`.
pub fn minimize(f: impl Fn(f64, f64) -> f64, oc: &OptimizerConfig) -> Result<Optimum> {
    oc.validate()?;
    let (lo, hi) = (oc.lo(), oc.hi());
    let eval = |p: [f64; 2]| {
        let v = f(p[0], p[1]);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let step = [(hi[0] - lo[0]) / (oc.grid - 1) as f64, (hi[1] - lo[1]) / (oc.grid - 1) as f64];
    let mut best = (lo, f64::INFINITY);
    for i in 0..oc.grid {
        for j in 0..oc.grid {
            let p = [lo[0] + i as f64 * step[0], lo[1] + j as f64 * step[1]];
            let v = eval(p);
            if v < best.1 {
                best = (p, v);
            }
        }
    }

    let start = best.0;
    let mut simplex = [
        start,
        clamp([start[0] + step[0], start[1]], lo, hi),
        clamp([start[0], start[1] + step[1]], lo, hi),
    ];
    // a vertex clamped onto the start point leaves a degenerate simplex
    for (k, v) in simplex.iter_mut().enumerate().skip(1) {
        if *v == start {
            v[k - 1] = (start[k - 1] - step[k - 1]).max(lo[k - 1]);
        }
    }
    let mut values = simplex.map(eval);
    let mut iterations = 0;
    while iterations < oc.max_iterations {
        iterations += 1;
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);
        let size = simplex[1..]
            .iter()
            .map(|v| (v[0] - simplex[0][0]).abs().max((v[1] - simplex[0][1]).abs()))
            .fold(0.0, f64::max);
        if size < oc.tolerance {
            break;
        }
        let centroid = lerp(simplex[0], simplex[1], 0.5);
        let reflected = clamp(lerp(simplex[2], centroid, 2.0), lo, hi);
        let fr = eval(reflected);
        if fr < values[0] {
            let expanded = clamp(lerp(simplex[2], centroid, 3.0), lo, hi);
            let fe = eval(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = clamp(
                if fr < values[2] {
                    lerp(simplex[2], centroid, 1.5)
                } else {
                    lerp(simplex[2], centroid, 0.5)
                },
                lo,
                hi,
            );
            let fc = eval(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = lerp(simplex[0], simplex[k], 0.5);
                    values[k] = eval(simplex[k]);
                }
            }
        }
    }
    let (mut point, mut value) = (simplex[0], values[0]);
    for k in 1..3 {
        if values[k] < value {
            point = simplex[k];
            value = values[k];
        }
    }
    if best.1 < value {
        point = best.0;
        value = best.1;
    }
    let near = |x: f64, a: f64| (x - a).abs() <= oc.tolerance;
    let on_boundary = near(point[0], lo[0]) || near(point[0], hi[0]) || near(point[1], lo[1]) || near(point[1], hi[1]);
    Ok(Optimum {
        point,
        value,
        iterations,
        on_boundary,
        conditioning: conditioning(&eval, point, lo, hi),
    })
}

/// Eigenvalue ratio of a central-difference Hessian, steps kept in the box.
fn conditioning(f: &impl Fn([f64; 2]) -> f64, p: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let h = [1e-3 * (hi[0] - lo[0]), 1e-3 * (hi[1] - lo[1])];
    let c = [p[0].clamp(lo[0] + h[0], hi[0] - h[0]), p[1].clamp(lo[1] + h[1], hi[1] - h[1])];
    let at = |dx: f64, dy: f64| f([c[0] + dx * h[0], c[1] + dy * h[1]]);
    let f0 = at(0.0, 0.0);
    let a = (at(1.0, 0.0) - 2.0 * f0 + at(-1.0, 0.0)) / (h[0] * h[0]);
    let d = (at(0.0, 1.0) - 2.0 * f0 + at(0.0, -1.0)) / (h[1] * h[1]);
    let b = (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h[0] * h[1]);
    let mean = 0.5 * (a + d);
    let disc = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let (l1, l2) = ((mean + disc).abs(), (mean - disc).abs());
    let big = l1.max(l2);
    if !big.is_finite() || big == 0.0 {
        return 0.0;
    }
    l1.min(l2) / big
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_minimum() {
        let oc = OptimizerConfig::default();
        let o = minimize(|z, b| (z - 2.0).powi(2) + 3.0 * (b - 0.8).powi(2) + 0.5 * (z - 2.0) * (b - 0.8), &oc).unwrap();
        assert!((o.point[0] - 2.0).abs() < 1e-3 && (o.point[1] - 0.8).abs() < 1e-3);
        assert!(!o.on_boundary);
        assert!(o.conditioning > 0.1);
    }

    #[test]
    fn flags_boundary_minimum() {
        let oc = OptimizerConfig::default();
        let o = minimize(|z, b| z + (b - 1.0).powi(2), &oc).unwrap();
        assert!(o.on_boundary);
        assert!((o.point[0] - oc.z_range[0]).abs() < 1e-9);
    }

    #[test]
    fn flat_direction_has_small_conditioning() {
        let oc = OptimizerConfig::default();
        let o = minimize(|z, b| (z - 2.0 * b - 1.0).powi(2), &oc).unwrap();
        assert!(o.conditioning < 1e-6);
    }

    #[test]
    fn rejects_bad_domain() {
        let oc = OptimizerConfig::default().with_domain([0.0, 1.0], [0.0, 1.0]);
        assert!(minimize(|_, _| 0.0, &oc).is_err());
    }
}
