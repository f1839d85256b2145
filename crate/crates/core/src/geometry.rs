//! Planar point configurations on rectangular windows, with a cell grid for
//! finite-range neighbor queries.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn dist2(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        self.dist2(other).sqrt()
    }

    #[inline]
    pub fn sub(&self, other: &Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    #[inline]
    pub fn add(&self, other: &Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Closed axis-aligned rectangle `[lo.x, hi.x] × [lo.y, hi.y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Window {
    pub fn new(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        let finite = lo.iter().chain(hi.iter()).all(|v| v.is_finite());
        if !finite || hi[0] <= lo[0] || hi[1] <= lo[1] {
            return Err(Error::InvalidWindow { lo, hi });
        }
        Ok(Window { lo, hi })
    }

    /// `[0, side]²`.
    pub fn square(side: f64) -> Result<Self> {
        Window::new([0.0, 0.0], [side, side])
    }

    pub fn width(&self) -> f64 {
        self.hi[0] - self.lo[0]
    }

    pub fn height(&self) -> f64 {
        self.hi[1] - self.lo[1]
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
        )
    }

    #[inline]
    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.lo[0] && p.x <= self.hi[0] && p.y >= self.lo[1] && p.y <= self.hi[1]
    }

    /// The window shrunk by `r` on every side (`Λ ⊖ B(0, r)` for a rectangle),
    /// or `None` when nothing is left.
    pub fn erode(&self, r: f64) -> Option<Window> {
        Window::new(
            [self.lo[0] + r, self.lo[1] + r],
            [self.hi[0] - r, self.hi[1] - r],
        )
        .ok()
    }

    pub fn dilate(&self, r: f64) -> Window {
        Window {
            lo: [self.lo[0] - r, self.lo[1] - r],
            hi: [self.hi[0] + r, self.hi[1] + r],
        }
    }

    /// Centered sub-window whose sides are `fraction` of the original ones.
    pub fn central(&self, fraction: f64) -> Result<Window> {
        let c = self.center();
        let hw = 0.5 * self.width() * fraction;
        let hh = 0.5 * self.height() * fraction;
        Window::new([c.x - hw, c.y - hh], [c.x + hw, c.y + hh])
    }

    /// Distance from an interior point to the window boundary.
    pub fn depth(&self, p: &Point) -> f64 {
        (p.x - self.lo[0])
            .min(self.hi[0] - p.x)
            .min(p.y - self.lo[1])
            .min(self.hi[1] - p.y)
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point::new(
            self.lo[0] + rng.random::<f64>() * self.width(),
            self.lo[1] + rng.random::<f64>() * self.height(),
        )
    }
}

/// Uniform square cells over a rectangle, each holding indices into an
/// external point array. Points outside the rectangle are clamped into the
/// border cells, so queries stay correct for any coordinates.
#[derive(Clone, Debug)]
pub(crate) struct CellGrid {
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

const MAX_CELLS_PER_AXIS: usize = 4096;

impl CellGrid {
    pub(crate) fn new(lo: [f64; 2], hi: [f64; 2], cell: f64) -> Self {
        let w = (hi[0] - lo[0]).max(0.0);
        let h = (hi[1] - lo[1]).max(0.0);
        let mut cell = cell;
        if !(cell > 0.0) || !cell.is_finite() {
            cell = w.max(h).max(1.0);
        }
        // keep the table bounded for very small cells
        let longest = w.max(h);
        if longest / cell > MAX_CELLS_PER_AXIS as f64 {
            cell = longest / MAX_CELLS_PER_AXIS as f64;
        }
        let nx = ((w / cell).ceil() as usize).max(1);
        let ny = ((h / cell).ceil() as usize).max(1);
        CellGrid {
            origin: lo,
            cell,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        }
    }

    pub(crate) fn cell_side(&self) -> f64 {
        self.cell
    }

    #[inline]
    fn coord(&self, v: f64, axis: usize) -> isize {
        ((v - self.origin[axis]) / self.cell).floor() as isize
    }

    #[inline]
    fn clamp(&self, i: isize, axis: usize) -> usize {
        let n = if axis == 0 { self.nx } else { self.ny };
        i.clamp(0, n as isize - 1) as usize
    }

    #[inline]
    fn slot(&self, p: &Point) -> usize {
        let i = self.clamp(self.coord(p.x, 0), 0);
        let j = self.clamp(self.coord(p.y, 1), 1);
        j * self.nx + i
    }

    pub(crate) fn insert(&mut self, idx: usize, p: &Point) {
        let s = self.slot(p);
        self.cells[s].push(idx as u32);
    }

    pub(crate) fn remove(&mut self, idx: usize, p: &Point) {
        let s = self.slot(p);
        let cell = &mut self.cells[s];
        if let Some(pos) = cell.iter().position(|&k| k as usize == idx) {
            cell.swap_remove(pos);
        }
    }

    pub(crate) fn relabel(&mut self, from: usize, to: usize, p: &Point) {
        let s = self.slot(p);
        for k in self.cells[s].iter_mut() {
            if *k as usize == from {
                *k = to as u32;
            }
        }
    }

    /// Calls `f(index)` for every stored index whose cell may hold points
    /// within distance `r` of `p`.
    #[inline]
    pub(crate) fn for_candidates(&self, p: &Point, r: f64, mut f: impl FnMut(usize)) {
        let reach = (r / self.cell).ceil().max(0.0) as isize;
        let ci = self.coord(p.x, 0);
        let cj = self.coord(p.y, 1);
        let i0 = self.clamp(ci - reach, 0);
        let i1 = self.clamp(ci + reach, 0);
        let j0 = self.clamp(cj - reach, 1);
        let j1 = self.clamp(cj + reach, 1);
        for j in j0..=j1 {
            let row = j * self.nx;
            for i in i0..=i1 {
                for &k in &self.cells[row + i] {
                    f(k as usize);
                }
            }
        }
    }
}

/// A finite simple configuration of points inside a window.
///
/// The grid is rebuilt lazily only through [`PointConfiguration::reindexed`];
/// queries with a radius larger than the cell side scan more cells and stay
/// exact.
#[derive(Clone, Debug)]
pub struct PointConfiguration {
    window: Window,
    points: Vec<Point>,
    grid: CellGrid,
}

/// A single elementary modification of a configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Move {
    Birth(Point),
    Death(usize),
    Translate(usize, Point),
}

impl PointConfiguration {
    /// Empty configuration with grid cells of side `cell` (normally the
    /// interaction range of the model in use).
    pub fn empty(window: Window, cell: f64) -> Self {
        PointConfiguration {
            window,
            points: Vec::new(),
            grid: CellGrid::new(window.lo, window.hi, cell),
        }
    }

    pub fn from_points(window: Window, cell: f64, points: impl IntoIterator<Item = Point>) -> Result<Self> {
        let mut config = PointConfiguration::empty(window, cell);
        for p in points {
            config.insert(p)?;
        }
        Ok(config)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn cell_side(&self) -> f64 {
        self.grid.cell_side()
    }

    /// Same points, new cell side.
    pub fn reindexed(&self, cell: f64) -> Self {
        let mut grid = CellGrid::new(self.window.lo, self.window.hi, cell);
        for (i, p) in self.points.iter().enumerate() {
            grid.insert(i, p);
        }
        PointConfiguration {
            window: self.window,
            points: self.points.clone(),
            grid,
        }
    }

    /// Index of a point with exactly these coordinates.
    pub fn position(&self, p: &Point) -> Option<usize> {
        let mut found = None;
        self.grid.for_candidates(p, 0.0, |k| {
            if found.is_none() && self.points[k] == *p {
                found = Some(k);
            }
        });
        found
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.position(p).is_some()
    }

    /// Adds a point, returning its index.
    pub fn insert(&mut self, p: Point) -> Result<usize> {
        if !p.is_finite() {
            return Err(Error::NonFinitePoint);
        }
        if !self.window.contains(&p) {
            return Err(Error::OutsideWindow { x: p.x, y: p.y });
        }
        if self.contains(&p) {
            return Err(Error::DuplicatePoint { x: p.x, y: p.y });
        }
        let idx = self.points.len();
        self.points.push(p);
        self.grid.insert(idx, &p);
        Ok(idx)
    }

    /// Removes the point at `idx`; the last point takes its index.
    pub fn remove(&mut self, idx: usize) -> Result<Point> {
        let n = self.points.len();
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
        let p = self.points[idx];
        self.grid.remove(idx, &p);
        let last = n - 1;
        if idx != last {
            let q = self.points[last];
            self.grid.relabel(last, idx, &q);
        }
        self.points.swap_remove(idx);
        Ok(p)
    }

    /// Moves the point at `idx` to `to`, keeping its index.
    pub fn translate(&mut self, idx: usize, to: Point) -> Result<Point> {
        let n = self.points.len();
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
        if !to.is_finite() {
            return Err(Error::NonFinitePoint);
        }
        if !self.window.contains(&to) {
            return Err(Error::OutsideWindow { x: to.x, y: to.y });
        }
        if let Some(k) = self.position(&to) {
            if k != idx {
                return Err(Error::DuplicatePoint { x: to.x, y: to.y });
            }
        }
        let from = self.points[idx];
        self.grid.remove(idx, &from);
        self.points[idx] = to;
        self.grid.insert(idx, &to);
        Ok(from)
    }

    /// Value-semantics move: the receiver is left untouched.
    pub fn apply_move(&self, mv: Move) -> Result<Self> {
        let mut next = self.clone();
        next.apply_move_in_place(mv)?;
        Ok(next)
    }

    pub fn apply_move_in_place(&mut self, mv: Move) -> Result<()> {
        match mv {
            Move::Birth(p) => self.insert(p).map(|_| ()),
            Move::Death(i) => self.remove(i).map(|_| ()),
            Move::Translate(i, p) => self.translate(i, p).map(|_| ()),
        }
    }

    /// Calls `f(index, point)` for every point within distance `r` of `x`
    /// (closed ball), `x` itself included if present.
    #[inline]
    pub fn for_each_within(&self, x: &Point, r: f64, mut f: impl FnMut(usize, &Point)) {
        let r2 = r * r;
        self.grid.for_candidates(x, r, |k| {
            let q = &self.points[k];
            if q.dist2(x) <= r2 {
                f(k, q);
            }
        });
    }

    pub fn count_within(&self, x: &Point, r: f64) -> usize {
        let mut n = 0;
        self.for_each_within(x, r, |_, q| {
            if q != x {
                n += 1;
            }
        });
        n
    }

    /// Points of the restriction to a sub-window (same ambient window).
    pub fn points_in(&self, w: &Window) -> impl Iterator<Item = (usize, &Point)> + '_ {
        let w = *w;
        self.points
            .iter()
            .enumerate()
            .filter(move |(_, p)| w.contains(p))
    }

    /// Calls `f(i, j, d)` once for each unordered pair with `|x_i − x_j| ≤ r`.
    pub fn for_each_pair_within(&self, r: f64, mut f: impl FnMut(usize, usize, f64)) {
        for (i, p) in self.points.iter().enumerate() {
            self.for_each_within(p, r, |j, q| {
                if j > i {
                    f(i, j, p.dist(q));
                }
            });
        }
    }
}

impl PartialEq for PointConfiguration {
    /// Equality of windows and of point sets (order ignored).
    fn eq(&self, other: &Self) -> bool {
        if self.window != other.window || self.len() != other.len() {
            return false;
        }
        self.points.iter().all(|p| other.contains(p))
    }
}

/// Frozen points outside the window, indexed for range queries.
#[derive(Clone, Debug)]
pub struct OutsidePoints {
    points: Vec<Point>,
    grid: CellGrid,
}

impl OutsidePoints {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    #[inline]
    pub fn for_each_within(&self, x: &Point, r: f64, mut f: impl FnMut(&Point)) {
        let r2 = r * r;
        self.grid.for_candidates(x, r, |k| {
            let q = &self.points[k];
            if q.dist2(x) <= r2 {
                f(q);
            }
        });
    }
}

/// What lies outside (or along the edge of) the simulation window.
#[derive(Clone, Debug, Default)]
pub enum BoundaryCondition {
    /// Nothing outside the window.
    #[default]
    Free,
    /// A fixed outside configuration interacting with points inside.
    Frozen(OutsidePoints),
    /// No outside points and no inside points within `width` of the window
    /// edge.
    ExclusionBand { width: f64 },
}

impl BoundaryCondition {
    /// Frozen outside configuration; every point must lie outside `window`.
    pub fn frozen(window: &Window, points: Vec<Point>, cell: f64) -> Result<Self> {
        for p in &points {
            if !p.is_finite() {
                return Err(Error::NonFinitePoint);
            }
            if window.contains(p) {
                return Err(Error::BoundaryInsideWindow { x: p.x, y: p.y });
            }
        }
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &points {
            lo = [lo[0].min(p.x), lo[1].min(p.y)];
            hi = [hi[0].max(p.x), hi[1].max(p.y)];
        }
        if points.is_empty() {
            lo = window.lo;
            hi = window.hi;
        }
        let mut grid = CellGrid::new(lo, hi, cell);
        for (i, p) in points.iter().enumerate() {
            grid.insert(i, p);
        }
        Ok(BoundaryCondition::Frozen(OutsidePoints { points, grid }))
    }

    pub fn exclusion_band(width: f64) -> Result<Self> {
        if !(width >= 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "exclusion band width must be a finite non-negative number, got {width}"
            )));
        }
        Ok(BoundaryCondition::ExclusionBand { width })
    }

    pub fn outside(&self) -> &[Point] {
        match self {
            BoundaryCondition::Frozen(o) => o.points(),
            _ => &[],
        }
    }

    /// Whether the reference measure forbids a point at `p`.
    #[inline]
    pub fn forbids(&self, window: &Window, p: &Point) -> bool {
        match self {
            BoundaryCondition::ExclusionBand { width } => window.depth(p) < *width,
            _ => false,
        }
    }

    #[inline]
    pub fn for_each_within(&self, x: &Point, r: f64, f: impl FnMut(&Point)) {
        if let BoundaryCondition::Frozen(o) = self {
            o.for_each_within(x, r, f);
        }
    }
}

/// All points of `config` and of the boundary condition within distance `r`
/// of `x`, excluding `x` itself.
pub fn neighbors_within(config: &PointConfiguration, bc: &BoundaryCondition, x: &Point, r: f64) -> Vec<Point> {
    let mut out = Vec::new();
    config.for_each_within(x, r, |_, q| {
        if q != x {
            out.push(*q);
        }
    });
    bc.for_each_within(x, r, |q| {
        if q != x {
            out.push(*q);
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> Window {
        Window::square(1.0).unwrap()
    }

    #[test]
    fn window_volume_is_product_of_sides() {
        let w = Window::new([-1.5, 2.0], [3.0, 2.25]).unwrap();
        assert_eq!(w.area(), 4.5 * 0.25);
        assert!(Window::new([0.0, 0.0], [0.0, 1.0]).is_err());
        assert!(Window::new([0.0, 0.0], [f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn two_points_both_within_query_radius() {
        let w = Window::new([-1.0, -1.0], [1.0, 1.0]).unwrap();
        let c = PointConfiguration::from_points(w, 0.3, [Point::new(0.0, 0.0), Point::new(0.5, 0.0)]).unwrap();
        let got = neighbors_within(&c, &BoundaryCondition::Free, &Point::new(0.25, 0.0), 0.3);
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn empty_configuration_has_no_neighbors() {
        let c = PointConfiguration::empty(unit(), 0.1);
        assert!(neighbors_within(&c, &BoundaryCondition::Free, &Point::new(0.5, 0.5), 10.0).is_empty());
    }

    #[test]
    fn grid_query_matches_brute_force_for_uniform_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = unit();
        let pts: Vec<Point> = (0..100).map(|_| w.sample_uniform(&mut rng)).collect();
        let c = PointConfiguration::from_points(w, 0.1, pts.clone()).unwrap();
        for _ in 0..200 {
            let x = w.sample_uniform(&mut rng);
            let mut got = neighbors_within(&c, &BoundaryCondition::Free, &x, 0.2);
            let mut want: Vec<Point> = pts.iter().copied().filter(|p| p.dist(&x) <= 0.2).collect();
            let key = |p: &Point| (p.x.to_bits(), p.y.to_bits());
            got.sort_by_key(key);
            want.sort_by_key(key);
            assert_eq!(got, want);
        }
    }

    #[test]
    fn birth_then_death() {
        let w = Window::square(2.0).unwrap();
        let c = PointConfiguration::empty(w, 0.5);
        let c1 = c.apply_move(Move::Birth(Point::new(1.0, 1.0))).unwrap();
        assert_eq!(c1.len(), 1);
        assert!(c.is_empty());
        let c2 = c1.apply_move(Move::Death(0)).unwrap();
        assert!(c2.is_empty());
        assert_eq!(c1.len(), 1);
    }

    #[test]
    fn birth_outside_window_is_rejected() {
        let c = PointConfiguration::empty(unit(), 0.5);
        assert!(matches!(
            c.apply_move(Move::Birth(Point::new(1.5, 0.5))),
            Err(Error::OutsideWindow { .. })
        ));
        assert!(matches!(c.apply_move(Move::Death(0)), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn duplicates_rejected() {
        let mut c = PointConfiguration::empty(unit(), 0.5);
        c.insert(Point::new(0.2, 0.2)).unwrap();
        assert!(matches!(c.insert(Point::new(0.2, 0.2)), Err(Error::DuplicatePoint { .. })));
    }

    #[test]
    fn frozen_boundary_points_must_be_outside() {
        let w = unit();
        assert!(BoundaryCondition::frozen(&w, vec![Point::new(0.5, 0.5)], 0.2).is_err());
        let bc = BoundaryCondition::frozen(&w, vec![Point::new(1.1, 0.5)], 0.2).unwrap();
        let c = PointConfiguration::empty(w, 0.2);
        assert_eq!(neighbors_within(&c, &bc, &Point::new(0.95, 0.5), 0.2).len(), 1);
    }

    #[test]
    fn exclusion_band_forbids_edge_points() {
        let w = Window::square(4.0).unwrap();
        let bc = BoundaryCondition::exclusion_band(0.5).unwrap();
        assert!(bc.forbids(&w, &Point::new(0.2, 2.0)));
        assert!(!bc.forbids(&w, &Point::new(2.0, 2.0)));
        assert!(BoundaryCondition::exclusion_band(-1.0).is_err());
    }

    #[test]
    fn queries_beyond_cell_side_are_exact() {
        let w = Window::square(10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<Point> = (0..300).map(|_| w.sample_uniform(&mut rng)).collect();
        let c = PointConfiguration::from_points(w, 0.25, pts.clone()).unwrap();
        let x = Point::new(5.0, 5.0);
        let got = neighbors_within(&c, &BoundaryCondition::Free, &x, 3.1);
        let want = pts.iter().filter(|p| p.dist(&x) <= 3.1).count();
        assert_eq!(got.len(), want);
    }
}
