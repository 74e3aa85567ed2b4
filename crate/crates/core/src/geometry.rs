//! Planar primitives: points, disks, distances and the single-disk touring step.

use serde::{Deserialize, Serialize};

/// Tolerance for geometric predicates (containment, coincidence).
pub const GEOM_EPS: f64 = 1e-12;

/// Absolute tolerance on the objective of the boundary search.
pub const OBJECTIVE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Linear interpolation `self + t (other - self)`.
    pub fn lerp(&self, other: Point2, t: f64) -> Point2 {
        Point2::new(self.x + t * (other.x - self.x), self.y + t * (other.y - self.y))
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Point2::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

/// Closed disk. A zero radius encodes a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Point2,
    pub radius: f64,
}

impl Disk {
    pub const fn new(center: Point2, radius: f64) -> Self {
        Self { center, radius }
    }

    pub const fn point(center: Point2) -> Self {
        Self { center, radius: 0.0 }
    }

    pub fn is_fixed(&self) -> bool {
        self.radius <= 0.0
    }

    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        dist(p, self.center) <= self.radius + tol
    }
}

#[inline]
pub fn dist(a: Point2, b: Point2) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

/// Closest point of `d` to `p`.
pub fn project_to_disk(p: Point2, d: &Disk) -> Point2 {
    let r = dist(p, d.center);
    if r <= d.radius {
        return p;
    }
    if d.radius <= 0.0 {
        return d.center;
    }
    d.center + (p - d.center) * (d.radius / r)
}

/// Parameter interval `[t0, t1]` (within `[0, 1]`) of the segment `a + t (b - a)`
/// lying inside `d`, or `None` when the segment misses the disk.
pub fn segment_disk_interval(a: Point2, b: Point2, d: &Disk) -> Option<(f64, f64)> {
    let dir = b - a;
    let f = a - d.center;
    let qa = dir.x * dir.x + dir.y * dir.y;
    let qc = f.x * f.x + f.y * f.y - d.radius * d.radius;
    if qa <= 0.0 {
        return (qc <= GEOM_EPS).then_some((0.0, 0.0));
    }
    let qb = 2.0 * (f.x * dir.x + f.y * dir.y);
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        // Tangency within rounding still counts as touching.
        let t = (-qb / (2.0 * qa)).clamp(0.0, 1.0);
        let closest = a.lerp(b, t);
        return (dist(closest, d.center) <= d.radius + GEOM_EPS).then_some((t, t));
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    if t0 <= t1 {
        Some((t0, t1))
    } else {
        None
    }
}

fn path_via(a: Point2, p: Point2, b: Point2) -> f64 {
    dist(a, p) + dist(p, b)
}

/// Point of `d` minimizing `dist(a, p) + dist(p, b)`, with that minimum.
///
/// When the segment `a`–`b` meets the disk the minimum is `dist(a, b)` and the
/// returned point is the meeting point nearest `a`. Otherwise the minimizer is
/// on the boundary arc facing the segment and is found by golden-section search
/// over the boundary angle.
pub fn best_point_on_disk(a: Point2, b: Point2, d: &Disk) -> (Point2, f64) {
    if d.radius <= 0.0 {
        return (d.center, path_via(a, d.center, b));
    }
    if dist(a, b) <= GEOM_EPS {
        let p = project_to_disk(a, d);
        return (p, path_via(a, p, b));
    }
    if let Some((t0, _)) = segment_disk_interval(a, b, d) {
        let p = project_to_disk(a.lerp(b, t0), d);
        return (p, path_via(a, p, b));
    }

    boundary_search(a, b, d, |p| path_via(a, p, b))
}

/// Minimizes `objective` over the boundary circle of `d`, assuming it grows
/// with angular distance from the bearings of `a` and `b` (as seen from the
/// center) so the minimizer lies on the shorter arc between them.
pub(crate) fn boundary_search(a: Point2, b: Point2, d: &Disk, objective: impl Fn(Point2) -> f64) -> (Point2, f64) {
    let c = d.center;
    let r = d.radius;
    let on_circle = |theta: f64| Point2::new(c.x + r * theta.cos(), c.y + r * theta.sin());
    let eval = |theta: f64| objective(on_circle(theta));

    let ta = (a.y - c.y).atan2(a.x - c.x);
    let tb = (b.y - c.y).atan2(b.x - c.x);
    let mut span = tb - ta;
    while span > std::f64::consts::PI {
        span -= 2.0 * std::f64::consts::PI;
    }
    while span < -std::f64::consts::PI {
        span += 2.0 * std::f64::consts::PI;
    }

    const SAMPLES: usize = 16;
    let step = span / SAMPLES as f64;
    let mut best_k = 0;
    let mut best_v = f64::INFINITY;
    for k in 0..=SAMPLES {
        let v = eval(ta + step * k as f64);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let lo_k = best_k.saturating_sub(1);
    let hi_k = (best_k + 1).min(SAMPLES);
    let (mut lo, mut hi) = (ta + step * lo_k as f64, ta + step * hi_k as f64);
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }

    let theta = golden_section(eval, lo, hi, 1e-13);
    let mut best_theta = ta + step * best_k as f64;
    let mut best = best_v;
    let v = eval(theta);
    if v < best {
        best = v;
        best_theta = theta;
    }
    (on_circle(best_theta), best)
}

/// Minimizer of a unimodal function on `[lo, hi]` to bracket width `tol`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Intersection points of two circles (boundaries of `d1`, `d2`).
pub fn circle_intersections(d1: &Disk, d2: &Disk) -> Vec<Point2> {
    let dd = dist(d1.center, d2.center);
    if dd <= GEOM_EPS || dd > d1.radius + d2.radius || dd < (d1.radius - d2.radius).abs() {
        return Vec::new();
    }
    let along = (d1.radius * d1.radius - d2.radius * d2.radius + dd * dd) / (2.0 * dd);
    let h = (d1.radius * d1.radius - along * along).max(0.0).sqrt();
    let u = (d2.center - d1.center) * (1.0 / dd);
    let mid = d1.center + u * along;
    let n = Point2::new(-u.y, u.x);
    if h <= GEOM_EPS {
        vec![mid]
    } else {
        vec![mid + n * h, mid + n * (-h)]
    }
}
