//! Boundary length, isolated balls and area of the germ-grain set `L_R(γ)`.

use serde::{Deserialize, Serialize};

use crate::disks;
use crate::geometry::{Point, PointConfiguration, Window};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GermGrainSummary {
    /// Boundary length of the union contributed by the balls of `γ_W`.
    pub exposed_length: f64,
    /// Balls whose nearest other center is farther than `2R`.
    pub isolated_count: usize,
    /// Area of `L_R(γ_W)`, not clipped to the window.
    pub union_area: f64,
    /// Exposed arc length of each ball, in the order of the points of `γ_W`.
    pub arcs: Vec<f64>,
}

/// Summary of the balls of radius `R` centered at the points of `config`
/// lying in `window`.
///
/// Arcs and isolation are measured against every ball of `config`, so a
/// sub-window gives border-corrected sums; the union area counts only the
/// balls centered in `window`.
pub fn germ_grain_summary(config: &PointConfiguration, radius: f64, window: &Window) -> GermGrainSummary {
    let centers: Vec<Point> = config.points_in(window).map(|(_, p)| *p).collect();
    let reach = 2.0 * radius;
    let mut arcs = Vec::with_capacity(centers.len());
    let mut isolated_count = 0;
    let mut near = Vec::new();
    for c in &centers {
        near.clear();
        config.for_each_within(c, reach, |_, q| {
            if q != c {
                near.push(*q);
            }
        });
        // `for_each_within` is closed at `2R`; isolation needs strict `> 2R`
        if near.is_empty() {
            isolated_count += 1;
        }
        near.retain(|q| q.dist2(c) < reach * reach);
        arcs.push(disks::exposed_arc_length(c, &near, radius));
    }
    let union_area = disks::union_area_with(&centers, radius, None, |i, out| {
        let c = centers[i];
        config.for_each_within(&c, reach, |_, q| {
            if *q != c && window.contains(q) && q.dist2(&c) < reach * reach {
                out.push(*q);
            }
        });
    });
    GermGrainSummary {
        exposed_length: arcs.iter().sum(),
        isolated_count,
        union_area,
        arcs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn summary(pts: &[(f64, f64)]) -> GermGrainSummary {
        let w = Window::new([-10.0, -10.0], [10.0, 10.0]).unwrap();
        let c = PointConfiguration::from_points(w, 2.0, pts.iter().map(|&p| Point::from(p))).unwrap();
        germ_grain_summary(&c, 1.0, &w)
    }

    #[test]
    fn single_ball() {
        let s = summary(&[(0.0, 0.0)]);
        assert!((s.exposed_length - 2.0 * PI).abs() < 1e-12);
        assert_eq!(s.isolated_count, 1);
        assert!((s.union_area - PI).abs() < 1e-12);
    }

    #[test]
    fn two_overlapping_balls() {
        let s = summary(&[(0.0, 0.0), (1.0, 0.0)]);
        assert!((s.exposed_length - 8.0 * PI / 3.0).abs() < 1e-9);
        assert_eq!(s.isolated_count, 0);
        for a in &s.arcs {
            assert!((a - (2.0 * PI - 2.0 * PI / 3.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn two_far_balls() {
        let s = summary(&[(0.0, 0.0), (5.0, 0.0)]);
        assert!((s.exposed_length - 4.0 * PI).abs() < 1e-12);
        assert_eq!(s.isolated_count, 2);
    }

    #[test]
    fn tangent_balls_are_not_isolated() {
        let s = summary(&[(0.0, 0.0), (2.0, 0.0)]);
        assert_eq!(s.isolated_count, 0);
        assert!((s.exposed_length - 4.0 * PI).abs() < 1e-12);
    }
}
