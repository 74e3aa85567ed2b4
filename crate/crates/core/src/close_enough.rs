//! Representative-point optimization for a fixed visiting sequence.
//!
//! For a route with fixed task order, each required node may be visited at any
//! point of its disk. The resulting problem, minimizing the chain length over
//! one point per disk, is convex. It is solved by cyclic block coordinate
//! descent where every block step is solved exactly by
//! [`best_point_on_disk`]. Plain coordinate descent can stall where two
//! consecutive free points coincide, since the objective is not differentiable
//! there. Two devices handle that: each pass also tries joint moves that place
//! a run of consecutive free points at one common point of their disks'
//! intersection, and a stalled iterate with overlapping consecutive disks is
//! re-solved through a smoothing continuation and polished again.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{best_point_on_disk, boundary_search, circle_intersections, dist, segment_disk_interval, Disk, Point2};
use crate::instance::{Instance, TaskRef};
use crate::solution::{chain_length, vertex_sequence, PointAssignment, Solution, SolutionError};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 1000;

/// Longest run of consecutive free points merged in a joint move.
const MAX_JOINT_RUN: usize = 4;
const INSIDE_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum TouringError {
    #[error("a touring chain needs at least two vertices")]
    TooShort,
    #[error("the chain must start and end at the same fixed point")]
    OpenChain,
}

/// Ordered disks of one route; first and last are the depot.
#[derive(Debug, Clone, PartialEq)]
pub struct TouringProblem {
    disks: Vec<Disk>,
}

impl TouringProblem {
    pub fn new(disks: Vec<Disk>) -> Result<Self, TouringError> {
        if disks.len() < 2 {
            return Err(TouringError::TooShort);
        }
        let (first, last) = (disks[0], disks[disks.len() - 1]);
        if !first.is_fixed() || !last.is_fixed() || first.center != last.center {
            return Err(TouringError::OpenChain);
        }
        Ok(Self { disks })
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TouringResult {
    pub points: Vec<Point2>,
    pub objective: f64,
    /// Completed passes.
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes the chain length over one point per disk.
///
/// Starts from the disk centers and stops once a full pass improves the
/// objective by less than `tol`. Hitting `max_iter` returns the current
/// iterate with `converged = false`.
pub fn optimize_points(problem: &TouringProblem, tol: f64, max_iter: usize) -> TouringResult {
    optimize_points_traced(problem, tol, max_iter, |_, _| {})
}

/// [`optimize_points`] reporting the best iterate so far, as objective and
/// points, after every pass.
pub fn optimize_points_traced(
    problem: &TouringProblem,
    tol: f64,
    max_iter: usize,
    mut on_pass: impl FnMut(f64, &[Point2]),
) -> TouringResult {
    let disks = &problem.disks;
    let n = disks.len();
    let points: Vec<Point2> = disks.iter().map(|d| d.center).collect();
    let free: Vec<usize> = (1..n - 1).filter(|&i| !disks[i].is_fixed()).collect();
    if free.is_empty() {
        let objective = chain_length(&points);
        return TouringResult { points, objective, iterations: 0, converged: true };
    }
    let runs = joint_runs(disks);

    let mut best = exact_descent(disks, &free, &runs, points, tol, max_iter, None, &mut on_pass);
    // A coordinate-wise fixed point is optimal unless two consecutive free
    // points meet at a kink, which needs overlapping consecutive disks.
    for _ in 0..MAX_ESCAPES {
        if runs.is_empty() || best.iterations >= max_iter {
            break;
        }
        let warm = smoothed_continuation(disks, &free, best.points.clone());
        let budget = max_iter - best.iterations;
        let polished = exact_descent(disks, &free, &runs, warm, tol, budget, Some((&best.points, best.objective)), &mut on_pass);
        let iterations = best.iterations + polished.iterations;
        if polished.objective < best.objective - tol {
            best = TouringResult { iterations, ..polished };
        } else {
            best.iterations = iterations;
            break;
        }
    }
    best
}

const MAX_ESCAPES: usize = 3;

/// Exact block coordinate descent from `points` until a pass gains less than
/// `tol`. The trace reports the better of `incumbent` (the caller's best
/// iterate) and the current one.
#[allow(clippy::too_many_arguments)]
fn exact_descent(
    disks: &[Disk],
    free: &[usize],
    runs: &[(usize, usize)],
    mut points: Vec<Point2>,
    tol: f64,
    max_iter: usize,
    incumbent: Option<(&[Point2], f64)>,
    on_pass: &mut impl FnMut(f64, &[Point2]),
) -> TouringResult {
    let mut objective = chain_length(&points);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let before = objective;

        for &i in free {
            let (a, b) = (points[i - 1], points[i + 1]);
            let current = dist(a, points[i]) + dist(points[i], b);
            let (q, v) = best_point_on_disk(a, b, &disks[i]);
            if v < current {
                points[i] = q;
            }
        }

        for &(s, e) in runs {
            let (a, b) = (points[s - 1], points[e + 1]);
            let current = chain_length(&points[s - 1..=e + 1]);
            if let Some((q, v)) = best_point_in_disks(a, b, &disks[s..=e]) {
                if v < current {
                    points[s..=e].fill(q);
                }
            }
        }

        objective = chain_length(&points);
        match incumbent {
            Some((pts, f)) if f <= objective => on_pass(f, pts),
            _ => on_pass(objective, &points),
        }
        if before - objective < tol {
            converged = true;
            break;
        }
    }
    TouringResult { points, objective, iterations, converged }
}

/// Block coordinate descent on the smoothed objective
/// `sum sqrt(|p_i - p_(i+1)|^2 + eps^2)` for a decreasing sequence of `eps`.
/// The smoothed problem is differentiable, so coordinate descent cannot stall
/// at kinks; its minimizer approaches the true one as `eps` shrinks.
fn smoothed_continuation(disks: &[Disk], free: &[usize], mut points: Vec<Point2>) -> Vec<Point2> {
    let scale = free.iter().map(|&i| disks[i].radius).fold(0.0, f64::max);
    let mut eps = 0.5 * scale;
    while eps > 1e-9 * scale {
        for _ in 0..SMOOTH_PASSES {
            let mut moved = 0.0f64;
            for &i in free {
                let q = smoothed_step(points[i - 1], points[i + 1], &disks[i], eps);
                moved = moved.max(dist(q, points[i]));
                points[i] = q;
            }
            if moved < 1e-3 * eps {
                break;
            }
        }
        eps *= 0.2;
    }
    points
}

const SMOOTH_PASSES: usize = 200;

/// Minimizer over `d` of `sqrt(|p - a|^2 + eps^2) + sqrt(|p - b|^2 + eps^2)`.
/// Unconstrained, that is the midpoint of `a` and `b`.
fn smoothed_step(a: Point2, b: Point2, d: &Disk, eps: f64) -> Point2 {
    let mid = a.lerp(b, 0.5);
    if dist(mid, d.center) <= d.radius {
        return mid;
    }
    let e2 = eps * eps;
    let f = |p: Point2| {
        let (u, v) = (p - a, p - b);
        (u.x * u.x + u.y * u.y + e2).sqrt() + (v.x * v.x + v.y * v.y + e2).sqrt()
    };
    boundary_search(a, b, d, f).0
}

/// Runs `[s, e]` of consecutive free disks (length 2..=MAX_JOINT_RUN) whose
/// disks pairwise overlap, i.e. candidates for a shared representative point.
fn joint_runs(disks: &[Disk]) -> Vec<(usize, usize)> {
    let n = disks.len();
    let mut runs = Vec::new();
    for s in 1..n - 1 {
        if disks[s].is_fixed() {
            continue;
        }
        let mut e = s;
        while e + 1 < n - 1 && e + 1 - s < MAX_JOINT_RUN {
            let next = &disks[e + 1];
            if next.is_fixed()
                || !(s..=e).all(|k| dist(disks[k].center, next.center) <= disks[k].radius + next.radius)
            {
                break;
            }
            e += 1;
            runs.push((s, e));
        }
    }
    runs
}

/// Point of the intersection of `disks` minimizing `dist(a, q) + dist(q, b)`.
///
/// The minimizer either lies on segment a–b, or is the single-disk optimum of
/// one disk that happens to lie in all others, or is a corner where two
/// boundary circles cross. Returns `None` when the intersection is empty.
pub(crate) fn best_point_in_disks(a: Point2, b: Point2, disks: &[Disk]) -> Option<(Point2, f64)> {
    let inside_all = |q: Point2| disks.iter().all(|d| dist(q, d.center) <= d.radius + INSIDE_TOL);

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut on_segment = true;
    for d in disks {
        match segment_disk_interval(a, b, d) {
            Some((t0, t1)) => {
                lo = lo.max(t0);
                hi = hi.min(t1);
            }
            None => {
                on_segment = false;
                break;
            }
        }
    }
    if on_segment && lo <= hi {
        let q = a.lerp(b, lo);
        if inside_all(q) {
            return Some((q, dist(a, q) + dist(q, b)));
        }
    }

    let mut best: Option<(Point2, f64)> = None;
    let mut consider = |q: Point2| {
        if inside_all(q) {
            let v = dist(a, q) + dist(q, b);
            if best.is_none_or(|(_, bv)| v < bv) {
                best = Some((q, v));
            }
        }
    };
    for d in disks {
        consider(best_point_on_disk(a, b, d).0);
    }
    for (k, d1) in disks.iter().enumerate() {
        for d2 in &disks[k + 1..] {
            for q in circle_intersections(d1, d2) {
                consider(q);
            }
        }
    }
    best
}

/// Optimized points for a whole solution.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOptimization {
    pub points: PointAssignment,
    /// Sum of optimized route lengths.
    pub objective: f64,
    /// Whether every route converged within the iteration cap.
    pub converged: bool,
}

/// Optimizes each route independently.
pub fn optimize_solution(
    solution: &Solution,
    instance: &Instance,
    tol: f64,
    max_iter: usize,
) -> Result<PointOptimization, SolutionError> {
    let mut routes = Vec::with_capacity(solution.routes.len());
    let mut objective = 0.0;
    let mut converged = true;
    for route in &solution.routes {
        let problem = TouringProblem::new(vertex_sequence(route, instance)?).expect("route chains are closed");
        let res = optimize_points(&problem, tol, max_iter);
        objective += res.objective;
        converged &= res.converged;
        routes.push(res.points);
    }
    Ok(PointOptimization { points: PointAssignment { routes }, objective, converged })
}

/// Memo of per-route results keyed by task sequence, so that only routes that
/// changed since an earlier call are re-optimized.
#[derive(Debug, Default)]
pub struct PointCache {
    tol: f64,
    max_iter: usize,
    memo: HashMap<Vec<TaskRef>, TouringResult>,
}

impl PointCache {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self { tol, max_iter, memo: HashMap::new() }
    }

    pub fn optimize(&mut self, solution: &Solution, instance: &Instance) -> Result<PointOptimization, SolutionError> {
        let mut routes = Vec::with_capacity(solution.routes.len());
        let mut objective = 0.0;
        let mut converged = true;
        for route in &solution.routes {
            let res = match self.memo.get(&route.tasks) {
                Some(r) => r,
                None => {
                    let problem =
                        TouringProblem::new(vertex_sequence(route, instance)?).expect("route chains are closed");
                    let r = optimize_points(&problem, self.tol, self.max_iter);
                    self.memo.entry(route.tasks.clone()).or_insert(r)
                }
            };
            objective += res.objective;
            converged &= res.converged;
            routes.push(res.points.clone());
        }
        Ok(PointOptimization { points: PointAssignment { routes }, objective, converged })
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }
}
