//! Exact geometry of unions of equal-radius disks in the plane.
//!
//! Areas are obtained from Green's theorem, `A = ½∮(x dy − y dx)`, summed
//! over the boundary pieces of the region: uncovered arcs of the circles and,
//! when a clipping rectangle is present, the covered parts of its edges.
//! Every region handled here has the form `(∪P ∖ ∪M) ∩ clip` for two finite
//! sets of disk centers `P` and `M`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::geometry::{Point, Window};

/// Sorted, disjoint closed intervals on a line or on `[0, 2π]`.
type Intervals = Vec<(f64, f64)>;

fn merge(mut v: Intervals) -> Intervals {
    if v.len() < 2 {
        return v;
    }
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Intervals = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn complement(merged: &Intervals, lo: f64, hi: f64) -> Intervals {
    let mut out = Vec::with_capacity(merged.len() + 1);
    let mut cur = lo;
    for &(a, b) in merged {
        if a > cur {
            out.push((cur, a.min(hi)));
        }
        cur = cur.max(b);
        if cur >= hi {
            break;
        }
    }
    if cur < hi {
        out.push((cur, hi));
    }
    out
}

fn intersect(a: &Intervals, b: &Intervals) -> Intervals {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo < hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Pushes the arc `[mid − half, mid + half]` onto `out`, split at 0/2π.
fn push_arc(out: &mut Intervals, mid: f64, half: f64) {
    if half >= PI {
        out.push((0.0, TAU));
        return;
    }
    let a = (mid - half).rem_euclid(TAU);
    let b = a + 2.0 * half;
    if b <= TAU {
        out.push((a, b));
    } else {
        out.push((a, TAU));
        out.push((0.0, b - TAU));
    }
}

/// Arc of the circle `(c, r)` covered by the closed disk `(o, r)`.
#[inline]
fn push_disk_cover(out: &mut Intervals, c: &Point, o: &Point, r: f64) {
    let dx = o.x - c.x;
    let dy = o.y - c.y;
    let d2 = dx * dx + dy * dy;
    if d2 >= 4.0 * r * r {
        return;
    }
    if d2 == 0.0 {
        out.push((0.0, TAU));
        return;
    }
    let half = (d2.sqrt() / (2.0 * r)).acos();
    push_arc(out, dy.atan2(dx), half);
}

/// Arcs of the circle `(c, r)` lying outside the rectangle.
fn push_clip_cover(out: &mut Intervals, c: &Point, r: f64, clip: &Window) {
    // (signed depth of the center behind the edge, outward normal angle)
    let edges = [
        (c.x - clip.lo[0], PI),
        (clip.hi[0] - c.x, 0.0),
        (c.y - clip.lo[1], 3.0 * FRAC_PI_2),
        (clip.hi[1] - c.y, FRAC_PI_2),
    ];
    for (s, normal) in edges {
        if s >= r {
            continue;
        }
        if s <= -r {
            out.push((0.0, TAU));
            return;
        }
        push_arc(out, normal, (s / r).acos());
    }
}

/// `½∫(x dy − y dx)` along the counter-clockwise arc `θ ∈ [t0, t1]` of the
/// circle `(c, r)`.
#[inline]
fn arc_green(c: &Point, r: f64, t0: f64, t1: f64) -> f64 {
    let (s0, c0) = t0.sin_cos();
    let (s1, c1) = t1.sin_cos();
    0.5 * (r * c.x * (s1 - s0) - r * c.y * (c1 - c0) + r * r * (t1 - t0))
}

/// Boundary contribution of a disk of `P`: arcs not covered by `blockers`
/// and lying inside `clip`. Returns `(green, uncovered angle)`.
fn positive_circle(c: &Point, r: f64, blockers: &[Point], clip: Option<&Window>, buf: &mut Intervals) -> (f64, f64) {
    buf.clear();
    for o in blockers {
        push_disk_cover(buf, c, o, r);
    }
    if let Some(w) = clip {
        push_clip_cover(buf, c, r, w);
    }
    let covered = merge(std::mem::take(buf));
    let mut green = 0.0;
    let mut angle = 0.0;
    for (a, b) in complement(&covered, 0.0, TAU) {
        green += arc_green(c, r, a, b);
        angle += b - a;
    }
    *buf = covered;
    (green, angle)
}

/// Boundary contribution of a disk of `M`: arcs inside some disk of `inside`,
/// outside every disk of `blockers` and inside `clip`, run clockwise.
fn negative_circle(c: &Point, r: f64, inside: &[Point], blockers: &[Point], clip: Option<&Window>) -> f64 {
    let mut ins = Vec::new();
    for o in inside {
        push_disk_cover(&mut ins, c, o, r);
    }
    if ins.is_empty() {
        return 0.0;
    }
    let ins = merge(ins);
    let mut out = Vec::new();
    for o in blockers {
        push_disk_cover(&mut out, c, o, r);
    }
    if let Some(w) = clip {
        push_clip_cover(&mut out, c, r, w);
    }
    let free = complement(&merge(out), 0.0, TAU);
    intersect(&ins, &free)
        .into_iter()
        .map(|(a, b)| -arc_green(c, r, a, b))
        .sum()
}

/// Part of the segment `a + t·e`, `t ∈ [0, len]`, inside the disk `(o, r)`.
#[inline]
fn push_segment_cover(out: &mut Intervals, a: &Point, e: &Point, len: f64, o: &Point, r: f64) {
    let qx = a.x - o.x;
    let qy = a.y - o.y;
    let qe = qx * e.x + qy * e.y;
    let disc = qe * qe - (qx * qx + qy * qy) + r * r;
    if disc <= 0.0 {
        return;
    }
    let s = disc.sqrt();
    let t0 = (-qe - s).max(0.0);
    let t1 = (-qe + s).min(len);
    if t0 < t1 {
        out.push((t0, t1));
    }
}

/// Edge contribution: covered by `P`, not covered by `M`, walked
/// counter-clockwise around the rectangle.
fn clip_edges(clip: &Window, r: f64, pos: &[Point], neg: &[Point]) -> f64 {
    let corners = [
        Point::new(clip.lo[0], clip.lo[1]),
        Point::new(clip.hi[0], clip.lo[1]),
        Point::new(clip.hi[0], clip.hi[1]),
        Point::new(clip.lo[0], clip.hi[1]),
    ];
    let mut total = 0.0;
    for k in 0..4 {
        let a = corners[k];
        let b = corners[(k + 1) % 4];
        let len = a.dist(&b);
        let e = b.sub(&a).scale(1.0 / len);
        let mut ins = Vec::new();
        for o in pos {
            push_segment_cover(&mut ins, &a, &e, len, o, r);
        }
        if ins.is_empty() {
            continue;
        }
        let ins = merge(ins);
        let mut outs = Vec::new();
        for o in neg {
            push_segment_cover(&mut outs, &a, &e, len, o, r);
        }
        let keep = intersect(&ins, &complement(&merge(outs), 0.0, len));
        for (t0, t1) in keep {
            let p = a.add(&e.scale(t0));
            let q = a.add(&e.scale(t1));
            total += 0.5 * (p.x * q.y - q.x * p.y);
        }
    }
    total
}

fn shifted(points: &[Point], o: &Point) -> Vec<Point> {
    points.iter().map(|p| p.sub(o)).collect()
}

fn shifted_window(w: &Window, o: &Point) -> Window {
    Window {
        lo: [w.lo[0] - o.x, w.lo[1] - o.y],
        hi: [w.hi[0] - o.x, w.hi[1] - o.y],
    }
}

/// Area of `(B(x, r) ∖ ∪_{y ∈ others} B(y, r)) ∩ clip`.
///
/// `others` should hold every center within `2r` of `x`; farther centers
/// are harmless.
pub fn uncovered_disk_area(x: &Point, others: &[Point], r: f64, clip: Option<&Window>) -> f64 {
    let origin = *x;
    let c = Point::new(0.0, 0.0);
    let near: Vec<Point> = others
        .iter()
        .filter(|p| p.dist2(x) < 4.0 * r * r)
        .map(|p| p.sub(&origin))
        .collect();
    let clip = clip.map(|w| shifted_window(w, &origin));
    let clip = clip.as_ref();
    let mut buf = Vec::new();
    let (mut area, _) = positive_circle(&c, r, &near, clip, &mut buf);
    let pos = [c];
    let mut rest: Vec<Point> = Vec::with_capacity(near.len());
    for (j, y) in near.iter().enumerate() {
        rest.clear();
        rest.extend(
            near.iter()
                .enumerate()
                .filter(|&(k, q)| k != j && q.dist2(y) < 4.0 * r * r)
                .map(|(_, q)| *q),
        );
        area += negative_circle(y, r, &pos, &rest, clip);
    }
    if let Some(w) = clip {
        area += clip_edges(w, r, &pos, &near);
    }
    area.max(0.0)
}

/// Area of `(∪_{p ∈ centers} B(p, r)) ∩ clip`, for a small set of centers
/// (quadratic in their number). See [`union_area_with`] for large sets.
pub fn union_area(centers: &[Point], r: f64, clip: Option<&Window>) -> f64 {
    union_area_with(centers, r, clip, |i, out| {
        let c = centers[i];
        out.extend(
            centers
                .iter()
                .enumerate()
                .filter(|&(k, q)| k != i && q.dist2(&c) < 4.0 * r * r)
                .map(|(_, q)| *q),
        );
    })
}

/// Union area where `near(i, out)` appends the centers within `2r` of
/// center `i` (excluding `i`).
pub fn union_area_with(
    centers: &[Point],
    r: f64,
    clip: Option<&Window>,
    mut near: impl FnMut(usize, &mut Vec<Point>),
) -> f64 {
    if centers.is_empty() {
        return 0.0;
    }
    let origin = centers[0];
    let clip_s = clip.map(|w| shifted_window(w, &origin));
    let mut buf = Vec::new();
    let mut nb = Vec::new();
    let mut area = 0.0;
    for (i, c) in centers.iter().enumerate() {
        nb.clear();
        near(i, &mut nb);
        let nb_s = shifted(&nb, &origin);
        let (g, _) = positive_circle(&c.sub(&origin), r, &nb_s, clip_s.as_ref(), &mut buf);
        area += g;
    }
    if let (Some(w), Some(ws)) = (clip, clip_s.as_ref()) {
        let touching: Vec<Point> = centers
            .iter()
            .filter(|p| {
                // disks meeting the rectangle edge band
                p.x > w.lo[0] - r && p.x < w.hi[0] + r && p.y > w.lo[1] - r && p.y < w.hi[1] + r
                    && (p.x - w.lo[0] < r || w.hi[0] - p.x < r || p.y - w.lo[1] < r || w.hi[1] - p.y < r)
            })
            .map(|p| p.sub(&origin))
            .collect();
        area += clip_edges(ws, r, &touching, &[]);
    }
    area.max(0.0)
}

/// Length of the part of the circle `∂B(c, r)` outside every disk
/// `B(o, r)`, `o ∈ others` (centers equal to `c` are ignored).
pub fn exposed_arc_length(c: &Point, others: &[Point], r: f64) -> f64 {
    let near: Vec<Point> = others
        .iter()
        .filter(|p| *p != c && p.dist2(c) < 4.0 * r * r)
        .map(|p| p.sub(c))
        .collect();
    let mut buf = Vec::new();
    let (_, angle) = positive_circle(&Point::new(0.0, 0.0), r, &near, None, &mut buf);
    angle * r
}
