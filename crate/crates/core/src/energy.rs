//! Finite-range energy functions: pairwise potentials, the area
//! (Widom–Rowlinson) interaction and the connected-component interaction.

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::disks;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, CellGrid, Point, PointConfiguration, Window};

/// Pair potential `φ(r)`, zero beyond its range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairPotential {
    /// `φ = 1` on `[0, R]`.
    Strauss { range: f64 },
    /// `φ = a_i` on `(R_{i−1}, R_i]`, `R_0 = 0`.
    MultiStrauss { levels: Vec<f64>, radii: Vec<f64> },
    /// `φ = +∞` on `[0, R]`.
    HardCore { range: f64 },
    /// `φ(r) = (1 − r/R)²` on `[0, R]`; continuously differentiable.
    SmoothCore { range: f64 },
    /// `φ(r) = a r⁻¹² + b r⁻⁶` truncated at `cutoff` (not shifted).
    LennardJones { a: f64, b: f64, cutoff: f64 },
}

impl PairPotential {
    pub fn range(&self) -> f64 {
        match self {
            PairPotential::Strauss { range }
            | PairPotential::HardCore { range }
            | PairPotential::SmoothCore { range } => *range,
            PairPotential::MultiStrauss { radii, .. } => radii.last().copied().unwrap_or(0.0),
            PairPotential::LennardJones { cutoff, .. } => *cutoff,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let range = self.range();
        if !(range > 0.0) || !range.is_finite() {
            return bad(format!("potential range must be positive and finite, got {range}"));
        }
        if let PairPotential::MultiStrauss { levels, radii } = self {
            if levels.is_empty() || levels.len() != radii.len() {
                return bad("multi-Strauss needs as many levels as radii (at least one)".into());
            }
            if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] <= 0.0 {
                return bad("multi-Strauss radii must be positive and strictly increasing".into());
            }
            if levels.iter().any(|a| !a.is_finite()) {
                return bad("multi-Strauss levels must be finite".into());
            }
        }
        if let PairPotential::LennardJones { a, b, .. } = self {
            if !(*a > 0.0) || !b.is_finite() {
                return bad("Lennard-Jones needs a > 0 and finite b".into());
            }
        }
        Ok(())
    }

    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        match self {
            PairPotential::Strauss { range } => {
                if r <= *range {
                    1.0
                } else {
                    0.0
                }
            }
            PairPotential::HardCore { range } => {
                if r <= *range {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            PairPotential::SmoothCore { range } => {
                if r <= *range {
                    let u = 1.0 - r / range;
                    u * u
                } else {
                    0.0
                }
            }
            PairPotential::MultiStrauss { levels, radii } => {
                if r <= 0.0 {
                    return 0.0;
                }
                for (a, &rk) in levels.iter().zip(radii) {
                    if r <= rk {
                        return *a;
                    }
                }
                0.0
            }
            PairPotential::LennardJones { a, b, cutoff } => {
                if r > *cutoff {
                    0.0
                } else if r == 0.0 {
                    f64::INFINITY
                } else {
                    let r6 = r.powi(-6);
                    a * r6 * r6 + b * r6
                }
            }
        }
    }

    /// `φ′(r)`, for the differentiable kinds.
    pub fn derivative(&self, r: f64) -> Option<f64> {
        match self {
            PairPotential::SmoothCore { range } => Some(if r < *range {
                -2.0 * (1.0 - r / range) / range
            } else {
                0.0
            }),
            PairPotential::LennardJones { a, b, cutoff } => Some(if r < *cutoff {
                -12.0 * a * r.powi(-13) - 6.0 * b * r.powi(-7)
            } else {
                0.0
            }),
            _ => None,
        }
    }

    /// `φ″(r)`, for the differentiable kinds.
    pub fn second_derivative(&self, r: f64) -> Option<f64> {
        match self {
            PairPotential::SmoothCore { range } => Some(if r < *range { 2.0 / (range * range) } else { 0.0 }),
            PairPotential::LennardJones { a, b, cutoff } => Some(if r < *cutoff {
                156.0 * a * r.powi(-14) + 42.0 * b * r.powi(-8)
            } else {
                0.0
            }),
            _ => None,
        }
    }

    /// Stability constant known without user input (non-negative potentials).
    fn known_stability(&self) -> Option<f64> {
        match self {
            PairPotential::Strauss { .. } | PairPotential::HardCore { .. } | PairPotential::SmoothCore { .. } => {
                Some(0.0)
            }
            PairPotential::MultiStrauss { levels, .. } if levels.iter().all(|a| *a >= 0.0) => Some(0.0),
            _ => None,
        }
    }
}

/// An energy function `H` on finite configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EnergyModel {
    /// `H(γ) = Σ_{x,y} φ(|x − y|)` with stability constant `A` when known.
    Pairwise {
        potential: PairPotential,
        stability: Option<f64>,
        /// Set when `stability` is only a rough figure (truncated
        /// Lennard-Jones).
        #[serde(default)]
        approximate_stability: bool,
    },
    /// `H(γ) = Area(L_R(γ) ∩ clip)`; range `2R`.
    Area { radius: f64, clip: Option<Window> },
    /// `H(γ) = ±Ncc(L_{R/2}(γ))`, counting only the components whose disks
    /// all lie in `inside` when that window is given.
    RandomCluster {
        radius: f64,
        inside: Option<Window>,
        negate: bool,
    },
}

impl EnergyModel {
    fn pairwise(potential: PairPotential, stability: Option<f64>, approximate: bool) -> Result<Self> {
        potential.validate()?;
        Ok(EnergyModel::Pairwise {
            potential,
            stability,
            approximate_stability: approximate,
        })
    }

    pub fn strauss(range: f64) -> Result<Self> {
        Self::pairwise(PairPotential::Strauss { range }, Some(0.0), false)
    }

    pub fn hard_core(range: f64) -> Result<Self> {
        Self::pairwise(PairPotential::HardCore { range }, Some(0.0), false)
    }

    pub fn smooth_core(range: f64) -> Result<Self> {
        Self::pairwise(PairPotential::SmoothCore { range }, Some(0.0), false)
    }

    /// Multi-Strauss with a user-declared stability constant (required when
    /// some level is negative).
    pub fn multi_strauss(levels: Vec<f64>, radii: Vec<f64>, stability: Option<f64>) -> Result<Self> {
        let p = PairPotential::MultiStrauss { levels, radii };
        let a = stability.or_else(|| p.known_stability());
        Self::pairwise(p, a, false)
    }

    pub fn lennard_jones(a: f64, b: f64, cutoff: f64, stability: Option<f64>) -> Result<Self> {
        Self::pairwise(PairPotential::LennardJones { a, b, cutoff }, stability, true)
    }

    pub fn area(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(EnergyModel::Area { radius, clip: None })
    }

    /// `Area(clip ∩ L_R(γ))`.
    pub fn area_clipped(radius: f64, clip: Window) -> Result<Self> {
        check_radius(radius)?;
        Ok(EnergyModel::Area {
            radius,
            clip: Some(clip),
        })
    }

    /// `H = Ncc(L_{R/2}(γ))`.
    pub fn random_cluster(radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(EnergyModel::RandomCluster {
            radius,
            inside: None,
            negate: false,
        })
    }

    /// `H = −Ncc^Λ(L_{R/2}(γ))`: at `β = ln 2` the Gibbs density is
    /// `z^N 2^{Ncc^Λ}`, the random-cluster companion of the two-type
    /// Widom–Rowlinson model on `window`.
    pub fn random_cluster_process(radius: f64, window: Window) -> Result<Self> {
        check_radius(radius)?;
        Ok(EnergyModel::RandomCluster {
            radius,
            inside: Some(window),
            negate: true,
        })
    }

    /// Interaction range: potential range, or `2R` for the germ-grain models.
    pub fn range(&self) -> f64 {
        match self {
            EnergyModel::Pairwise { potential, .. } => potential.range(),
            EnergyModel::Area { radius, .. } | EnergyModel::RandomCluster { radius, .. } => 2.0 * radius,
        }
    }

    /// Stability constant `A` with `H(γ) ≥ A·#γ`, if known.
    pub fn stability(&self) -> Option<f64> {
        match self {
            EnergyModel::Pairwise { stability, .. } => *stability,
            EnergyModel::Area { .. } => Some(0.0),
            EnergyModel::RandomCluster { negate, .. } => Some(if *negate { -1.0 } else { 0.0 }),
        }
    }

    /// Uniform lower bound `C ≤ h(x, γ)`, when one is known.
    pub fn local_energy_lower_bound(&self) -> Option<f64> {
        match self {
            EnergyModel::Pairwise { potential, .. } => match potential {
                PairPotential::MultiStrauss { levels, .. } if levels.iter().any(|a| *a < 0.0) => None,
                PairPotential::LennardJones { .. } => None,
                _ => Some(0.0),
            },
            EnergyModel::Area { .. } => Some(0.0),
            // one new disk merges at most five components in the plane
            EnergyModel::RandomCluster { negate, .. } => Some(if *negate { -1.0 } else { -4.0 }),
        }
    }

    pub fn is_hard_core(&self) -> bool {
        matches!(
            self,
            EnergyModel::Pairwise {
                potential: PairPotential::HardCore { .. },
                ..
            }
        )
    }

    /// True when `H ≡ 0` (all multi-Strauss levels zero).
    pub fn is_null(&self) -> bool {
        matches!(self, EnergyModel::Pairwise { potential: PairPotential::MultiStrauss { levels, .. }, .. }
            if levels.iter().all(|a| *a == 0.0))
    }

    pub fn pair_potential(&self) -> Option<&PairPotential> {
        match self {
            EnergyModel::Pairwise { potential, .. } => Some(potential),
            _ => None,
        }
    }

    /// Short family name used in descriptors and reports.
    pub fn family_name(&self) -> &'static str {
        match self {
            EnergyModel::Pairwise { potential, .. } => match potential {
                PairPotential::Strauss { .. } => "strauss",
                PairPotential::MultiStrauss { .. } => "multi_strauss",
                PairPotential::HardCore { .. } => "hard_core",
                PairPotential::SmoothCore { .. } => "smooth_core",
                PairPotential::LennardJones { .. } => "lennard_jones",
            },
            EnergyModel::Area { .. } => "area",
            EnergyModel::RandomCluster { .. } => "random_cluster",
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive and finite, got {r}")))
    }
}

/// `e^{−βh}` with hard constraints kept at every `β` (`h = +∞ ↦ 0`).
#[inline]
pub fn boltzmann(beta: f64, h: f64) -> f64 {
    if h == f64::INFINITY {
        0.0
    } else if beta == 0.0 {
        1.0
    } else {
        (-beta * h).exp()
    }
}

/// `a − b` with `∞ − ∞ = 0`.
#[inline]
pub fn energy_difference(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY && b == f64::INFINITY {
        0.0
    } else {
        a - b
    }
}

/// Energy of `config` given the boundary condition:
/// `H(γ ∪ γ_out) − H(γ_out)`, i.e. `H(γ)` under a free boundary. Returns
/// `+∞` when a point sits in an exclusion band.
pub fn total_energy(model: &EnergyModel, config: &PointConfiguration, bc: &BoundaryCondition) -> f64 {
    let window = config.window();
    if config.points().iter().any(|p| bc.forbids(window, p)) {
        return f64::INFINITY;
    }
    match model {
        EnergyModel::Pairwise { potential, .. } => {
            let range = potential.range();
            let mut h = 0.0;
            config.for_each_pair_within(range, |_, _, d| h += potential.value(d));
            for p in config.points() {
                bc.for_each_within(p, range, |q| h += potential.value(p.dist(q)));
            }
            h
        }
        EnergyModel::Area { radius, clip } => {
            let mut all: Vec<Point> = config.points().to_vec();
            let outside = bc.outside();
            all.extend_from_slice(outside);
            let with = indexed_union_area(&all, *radius, clip.as_ref());
            let without = indexed_union_area(outside, *radius, clip.as_ref());
            with - without
        }
        EnergyModel::RandomCluster { radius, inside, negate } => {
            let mut all: Vec<Point> = config.points().to_vec();
            let outside = bc.outside();
            all.extend_from_slice(outside);
            let with = count_components(&all, *radius, inside.as_ref()) as f64;
            let without = count_components(outside, *radius, inside.as_ref()) as f64;
            let d = with - without;
            if *negate {
                -d
            } else {
                d
            }
        }
    }
}

/// `H` of a bare point list (no boundary condition).
pub fn energy_of_points(model: &EnergyModel, window: &Window, points: &[Point]) -> Result<f64> {
    let config = PointConfiguration::from_points(*window, model.range(), points.iter().copied())?;
    Ok(total_energy(model, &config, &BoundaryCondition::Free))
}

fn indexed_union_area(centers: &[Point], r: f64, clip: Option<&Window>) -> f64 {
    if centers.len() < 32 {
        return disks::union_area(centers, r, clip);
    }
    let grid = build_grid(centers, 2.0 * r);
    disks::union_area_with(centers, r, clip, |i, out| {
        let c = centers[i];
        grid.for_candidates(&c, 2.0 * r, |k| {
            if k != i && centers[k].dist2(&c) < 4.0 * r * r {
                out.push(centers[k]);
            }
        });
    })
}

fn build_grid(points: &[Point], cell: f64) -> CellGrid {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        lo = [lo[0].min(p.x), lo[1].min(p.y)];
        hi = [hi[0].max(p.x), hi[1].max(p.y)];
    }
    if points.is_empty() {
        lo = [0.0, 0.0];
        hi = [1.0, 1.0];
    }
    let mut grid = CellGrid::new(lo, hi, cell);
    for (i, p) in points.iter().enumerate() {
        grid.insert(i, p);
    }
    grid
}

/// Union-find over disks of radius `R/2` (linked when `|x − y| ≤ R`).
fn cluster_labels(points: &[Point], radius: f64) -> UnionFind<usize> {
    let mut uf = UnionFind::new(points.len());
    if points.is_empty() {
        return uf;
    }
    let grid = build_grid(points, radius);
    let r2 = radius * radius;
    for (i, p) in points.iter().enumerate() {
        grid.for_candidates(p, radius, |k| {
            if k > i && points[k].dist2(p) <= r2 {
                uf.union(i, k);
            }
        });
    }
    uf
}

/// Whether each component root has all of its radius-`R/2` disks inside.
fn inside_flags(points: &[Point], uf: &UnionFind<usize>, radius: f64, inside: &Window) -> Vec<bool> {
    let mut flags = vec![true; points.len()];
    for (i, p) in points.iter().enumerate() {
        if !(inside.contains(p) && inside.depth(p) >= 0.5 * radius) {
            flags[uf.find(i)] = false;
        }
    }
    flags
}

fn count_components(points: &[Point], radius: f64, inside: Option<&Window>) -> usize {
    let uf = cluster_labels(points, radius);
    let flags = inside.map(|w| inside_flags(points, &uf, radius, w));
    (0..points.len())
        .filter(|&i| uf.find(i) == i && flags.as_ref().is_none_or(|f| f[i]))
        .count()
}

/// Local energy `h(x, γ) = H(γ ∪ {x}) − H(γ)` given the boundary condition.
///
/// Returns 0 when `x` is already in `γ` and `+∞` inside an exclusion band.
/// Computed from the neighbors of `x` only, so `H(γ)` is assumed finite.
pub fn local_energy(model: &EnergyModel, x: &Point, config: &PointConfiguration, bc: &BoundaryCondition) -> f64 {
    if config.contains(x) {
        return 0.0;
    }
    local_energy_impl(model, x, config, bc, None)
}

/// `h(x_i, γ ∖ {x_i})` for the point stored at `index`.
pub fn local_energy_of_member(
    model: &EnergyModel,
    index: usize,
    config: &PointConfiguration,
    bc: &BoundaryCondition,
) -> f64 {
    let x = config.points()[index];
    local_energy_impl(model, &x, config, bc, Some(index))
}

pub(crate) fn local_energy_impl(
    model: &EnergyModel,
    x: &Point,
    config: &PointConfiguration,
    bc: &BoundaryCondition,
    skip: Option<usize>,
) -> f64 {
    if bc.forbids(config.window(), x) {
        return f64::INFINITY;
    }
    match model {
        EnergyModel::Pairwise { potential, .. } => {
            let range = potential.range();
            let mut h = 0.0;
            config.for_each_within(x, range, |k, q| {
                if Some(k) != skip {
                    h += potential.value(q.dist(x));
                }
            });
            bc.for_each_within(x, range, |q| h += potential.value(q.dist(x)));
            h
        }
        EnergyModel::Area { radius, clip } => {
            let reach = 2.0 * radius;
            let mut near = Vec::new();
            config.for_each_within(x, reach, |k, q| {
                if Some(k) != skip {
                    near.push(*q);
                }
            });
            bc.for_each_within(x, reach, |q| near.push(*q));
            disks::uncovered_disk_area(x, &near, *radius, clip.as_ref())
        }
        EnergyModel::RandomCluster { radius, inside, negate } => {
            let d = cluster_delta(x, config, bc, skip, *radius, inside.as_ref());
            if *negate {
                -d
            } else {
                d
            }
        }
    }
}

/// `Ncc(γ ∪ {x}) − Ncc(γ)` (restricted to inside components when asked).
fn cluster_delta(
    x: &Point,
    config: &PointConfiguration,
    bc: &BoundaryCondition,
    skip: Option<usize>,
    radius: f64,
    inside: Option<&Window>,
) -> f64 {
    let mut pts: Vec<Point> = config
        .points()
        .iter()
        .enumerate()
        .filter(|(k, _)| Some(*k) != skip)
        .map(|(_, p)| *p)
        .collect();
    pts.extend_from_slice(bc.outside());
    let r2 = radius * radius;
    let touching: Vec<usize> = pts
        .iter()
        .enumerate()
        .filter(|(_, p)| p.dist2(x) <= r2)
        .map(|(i, _)| i)
        .collect();
    if touching.is_empty() {
        let counts = inside.is_none_or(|w| w.contains(x) && w.depth(x) >= 0.5 * radius);
        return if counts { 1.0 } else { 0.0 };
    }
    let uf = cluster_labels(&pts, radius);
    let mut roots: Vec<usize> = touching.iter().map(|&i| uf.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    match inside {
        None => 1.0 - roots.len() as f64,
        Some(w) => {
            let flags = inside_flags(&pts, &uf, radius, w);
            let before = roots.iter().filter(|&&r| flags[r]).count() as f64;
            let x_inside = w.contains(x) && w.depth(x) >= 0.5 * radius;
            let after = if x_inside && roots.iter().all(|&r| flags[r]) { 1.0 } else { 0.0 };
            after - before
        }
    }
}

fn smooth_potential<'a>(model: &'a EnergyModel) -> Result<&'a PairPotential> {
    match model {
        EnergyModel::Pairwise { potential, .. } if potential.derivative(1.0).is_some() => Ok(potential),
        _ => Err(Error::UnsupportedModel(format!(
            "{} has no differentiable local energy",
            model.family_name()
        ))),
    }
}

fn for_each_neighbor_vector(
    x: &Point,
    config: &PointConfiguration,
    bc: &BoundaryCondition,
    skip: Option<usize>,
    range: f64,
    mut f: impl FnMut(f64, Point),
) {
    config.for_each_within(x, range, |k, q| {
        if Some(k) != skip && q != x {
            f(q.dist(x), x.sub(q));
        }
    });
    bc.for_each_within(x, range, |q| {
        if q != x {
            f(q.dist(x), x.sub(q));
        }
    });
}

/// `∇ₓh(x, γ) = Σ_y φ′(|x − y|)(x − y)/|x − y|` for smooth pair potentials.
pub fn local_energy_gradient(
    model: &EnergyModel,
    x: &Point,
    config: &PointConfiguration,
    bc: &BoundaryCondition,
) -> Result<Point> {
    gradient_impl(model, x, config, bc, None)
}

pub(crate) fn gradient_impl(
    model: &EnergyModel,
    x: &Point,
    config: &PointConfiguration,
    bc: &BoundaryCondition,
    skip: Option<usize>,
) -> Result<Point> {
    let phi = smooth_potential(model)?;
    let mut g = Point::new(0.0, 0.0);
    for_each_neighbor_vector(x, config, bc, skip, phi.range(), |r, v| {
        let d = phi.derivative(r).unwrap_or(0.0);
        g = g.add(&v.scale(d / r));
    });
    Ok(g)
}

/// `Δₓh(x, γ) = Σ_y φ″(r) + φ′(r)/r` in the plane.
pub fn local_energy_laplacian(
    model: &EnergyModel,
    x: &Point,
    config: &PointConfiguration,
    bc: &BoundaryCondition,
) -> Result<f64> {
    laplacian_impl(model, x, config, bc, None)
}

pub(crate) fn laplacian_impl(
    model: &EnergyModel,
    x: &Point,
    config: &PointConfiguration,
    bc: &BoundaryCondition,
    skip: Option<usize>,
) -> Result<f64> {
    let phi = smooth_potential(model)?;
    let mut l = 0.0;
    for_each_neighbor_vector(x, config, bc, skip, phi.range(), |r, _| {
        l += phi.second_derivative(r).unwrap_or(0.0) + phi.derivative(r).unwrap_or(0.0) / r;
    });
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(window: Window, cell: f64, pts: &[(f64, f64)]) -> PointConfiguration {
        PointConfiguration::from_points(window, cell, pts.iter().map(|&p| Point::from(p))).unwrap()
    }

    fn big() -> Window {
        Window::new([-10.0, -10.0], [10.0, 10.0]).unwrap()
    }

    fn lens(t: f64) -> f64 {
        2.0 * (t / 2.0).acos() - (t / 2.0) * (4.0 - t * t).sqrt()
    }

    #[test]
    fn strauss_counts_close_pairs() {
        let m = EnergyModel::strauss(1.0).unwrap();
        let c = cfg(big(), 1.0, &[(0.0, 0.0), (0.5, 0.0), (3.0, 0.0)]);
        assert_eq!(total_energy(&m, &c, &BoundaryCondition::Free), 1.0);
    }

    #[test]
    fn area_examples() {
        let m = EnergyModel::area(1.0).unwrap();
        let one = cfg(big(), 2.0, &[(0.0, 0.0)]);
        assert!((total_energy(&m, &one, &BoundaryCondition::Free) - PI).abs() < 1e-12);
        let two = cfg(big(), 2.0, &[(0.0, 0.0), (1.0, 0.0)]);
        let want = 2.0 * PI - lens(1.0);
        assert!((total_energy(&m, &two, &BoundaryCondition::Free) - want).abs() < 1e-12);
        assert!((lens(1.0) - 1.2284).abs() < 1e-4);
        let empty = PointConfiguration::empty(big(), 2.0);
        let h = local_energy(&m, &Point::new(3.0, 3.0), &empty, &BoundaryCondition::Free);
        assert!((h - PI).abs() < 1e-12);
        let h = local_energy(&m, &Point::new(1.0, 0.0), &one, &BoundaryCondition::Free);
        assert!((h - (PI - lens(1.0))).abs() < 1e-12);
        assert!((h - 1.9132).abs() < 1e-4);
    }

    #[test]
    fn random_cluster_disjoint_disks() {
        let m = EnergyModel::random_cluster(1.0).unwrap();
        let c = cfg(big(), 2.0, &[(0.0, 0.0), (2.0, 0.0)]);
        assert_eq!(total_energy(&m, &c, &BoundaryCondition::Free), 2.0);
        // a disk bridging both merges them
        let h = local_energy(&m, &Point::new(1.0, 0.0), &c, &BoundaryCondition::Free);
        assert_eq!(h, -1.0);
    }

    #[test]
    fn strauss_and_hard_core_local_energy() {
        let m = EnergyModel::strauss(0.3).unwrap();
        let c = cfg(big(), 0.3, &[(0.0, 0.0), (0.5, 0.0)]);
        assert_eq!(local_energy(&m, &Point::new(0.25, 0.0), &c, &BoundaryCondition::Free), 2.0);
        assert_eq!(local_energy(&m, &Point::new(0.0, 0.0), &c, &BoundaryCondition::Free), 0.0);
        let hc = EnergyModel::hard_core(0.5).unwrap();
        let c = cfg(big(), 0.5, &[(0.0, 0.0)]);
        assert_eq!(
            local_energy(&hc, &Point::new(0.4, 0.0), &c, &BoundaryCondition::Free),
            f64::INFINITY
        );
    }

    #[test]
    fn smooth_core_gradient_example() {
        let m = EnergyModel::smooth_core(1.0).unwrap();
        let c = cfg(big(), 1.0, &[(0.0, 0.0)]);
        let g = local_energy_gradient(&m, &Point::new(0.5, 0.0), &c, &BoundaryCondition::Free).unwrap();
        assert!((g.x + 1.0).abs() < 1e-15 && g.y.abs() < 1e-15);
        let e = PointConfiguration::empty(big(), 1.0);
        let g = local_energy_gradient(&m, &Point::new(0.5, 0.0), &e, &BoundaryCondition::Free).unwrap();
        assert_eq!(g, Point::new(0.0, 0.0));
    }

    #[test]
    fn gradient_unsupported_for_step_potentials() {
        let m = EnergyModel::strauss(1.0).unwrap();
        let e = PointConfiguration::empty(big(), 1.0);
        assert!(matches!(
            local_energy_gradient(&m, &Point::new(0.0, 0.0), &e, &BoundaryCondition::Free),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn exclusion_band_makes_energy_infinite() {
        let m = EnergyModel::area(1.0).unwrap();
        let w = Window::square(4.0).unwrap();
        let bc = BoundaryCondition::exclusion_band(0.5).unwrap();
        let c = cfg(w, 2.0, &[(0.1, 2.0)]);
        assert_eq!(total_energy(&m, &c, &bc), f64::INFINITY);
        let e = PointConfiguration::empty(w, 2.0);
        assert_eq!(local_energy(&m, &Point::new(3.9, 1.0), &e, &bc), f64::INFINITY);
        assert!(local_energy(&m, &Point::new(2.0, 2.0), &e, &bc).is_finite());
    }

    #[test]
    fn multi_strauss_levels() {
        let m = EnergyModel::multi_strauss(vec![2.0, -0.5], vec![0.5, 1.0], Some(-3.0)).unwrap();
        let p = m.pair_potential().unwrap();
        assert_eq!(p.value(0.2), 2.0);
        assert_eq!(p.value(0.7), -0.5);
        assert_eq!(p.value(1.2), 0.0);
        assert_eq!(m.stability(), Some(-3.0));
        let unknown = EnergyModel::multi_strauss(vec![2.0, -0.5], vec![0.5, 1.0], None).unwrap();
        assert_eq!(unknown.stability(), None);
        assert!(EnergyModel::multi_strauss(vec![1.0], vec![1.0, 2.0], None).is_err());
    }

    #[test]
    fn infinite_differences_are_zero() {
        assert_eq!(energy_difference(f64::INFINITY, f64::INFINITY), 0.0);
        assert_eq!(energy_difference(f64::INFINITY, 1.0), f64::INFINITY);
        assert_eq!(boltzmann(0.0, f64::INFINITY), 0.0);
        assert_eq!(boltzmann(0.0, 5.0), 1.0);
    }

    #[test]
    fn random_cluster_inside_only_counts_interior_components() {
        let w = Window::square(4.0).unwrap();
        let m = EnergyModel::random_cluster_process(1.0, w).unwrap();
        // one component touching the edge, one interior
        let c = cfg(w, 2.0, &[(0.2, 2.0), (2.5, 2.5)]);
        assert_eq!(total_energy(&m, &c, &BoundaryCondition::Free), -1.0);
        // joining the interior component to the edge one removes it
        let h = local_energy(&m, &Point::new(1.2, 2.0), &c, &BoundaryCondition::Free);
        assert_eq!(h, 0.0);
        // joining the interior component changes nothing
        let h = local_energy(&m, &Point::new(1.7, 2.3), &c, &BoundaryCondition::Free);
        assert_eq!(h, 0.0);
        // a fresh interior disk adds a component
        let h = local_energy(&m, &Point::new(2.0, 0.8), &c, &BoundaryCondition::Free);
        assert_eq!(h, -1.0);
    }
}
