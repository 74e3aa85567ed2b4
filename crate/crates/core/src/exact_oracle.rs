//! Exact machinery for small cases: optimal sequencing of one route's tasks by
//! subset dynamic programming, and a global solver that enumerates every
//! partition, order and orientation of a tiny instance.

use std::collections::HashMap;

use thiserror::Error;

use crate::close_enough::{optimize_points, TouringProblem, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::geometry::{dist, Point2};
use crate::insertion::can_open_route;
use crate::instance::{Instance, TaskKey, TaskKind, TaskRef, RANGE_EPS};
use crate::solution::{tasks_length, vertex_sequence, PointAssignment, Route, Solution};

/// Largest route the sequencing DP accepts.
pub const ROUTE_DP_CAP: usize = 12;
/// Largest instance the global enumerator accepts.
pub const GLOBAL_CAP: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance has {tasks} tasks; the exact solver handles at most {cap}")]
    TooManyTasks { tasks: usize, cap: usize },
    #[error("no feasible partition of the tasks exists")]
    Infeasible,
}

/// Center-optimal order and orientations of `keys` in one route, with its
/// length. Held-Karp over (visited subset, last task, its exit endpoint).
///
/// Panics if more than [`ROUTE_DP_CAP`] keys are given.
pub fn optimal_sequence(keys: &[TaskKey], instance: &Instance) -> (Vec<TaskRef>, f64) {
    let n = keys.len();
    assert!(n <= ROUTE_DP_CAP, "route of {n} tasks exceeds the DP cap");
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // Two states per task; a node's second state is a duplicate and is skipped.
    let refs: Vec<[TaskRef; 2]> = keys
        .iter()
        .map(|&k| {
            let mut it = TaskRef::orientations(k);
            let a = it.next().expect("one orientation");
            [a, it.next().unwrap_or(a)]
        })
        .collect();
    let states = |i: usize| if keys[i].kind == TaskKind::Edge { 2 } else { 1 };
    let ends: Vec<[(Point2, Point2); 2]> = refs.iter().map(|r| [instance.endpoints(r[0]), instance.endpoints(r[1])]).collect();
    let service: Vec<f64> = refs.iter().map(|r| instance.service_length(r[0])).collect();
    let depot = instance.depot();

    let full = 1usize << n;
    let idx = |mask: usize, i: usize, o: usize| (mask * n + i) * 2 + o;
    let mut cost = vec![f64::INFINITY; full * n * 2];
    let mut parent = vec![u32::MAX; full * n * 2];
    for i in 0..n {
        for o in 0..states(i) {
            cost[idx(1 << i, i, o)] = dist(depot, ends[i][o].0) + service[i];
        }
    }
    for mask in 1..full {
        for i in 0..n {
            if mask & (1 << i) == 0 {
                continue;
            }
            for o in 0..states(i) {
                let c = cost[idx(mask, i, o)];
                if !c.is_finite() {
                    continue;
                }
                let exit = ends[i][o].1;
                for j in 0..n {
                    if mask & (1 << j) != 0 {
                        continue;
                    }
                    let next = mask | (1 << j);
                    for p in 0..states(j) {
                        let v = c + dist(exit, ends[j][p].0) + service[j];
                        let k = idx(next, j, p);
                        if v < cost[k] {
                            cost[k] = v;
                            parent[k] = (i * 2 + o) as u32;
                        }
                    }
                }
            }
        }
    }
    let last = full - 1;
    let mut best = (f64::INFINITY, 0, 0);
    for i in 0..n {
        for o in 0..states(i) {
            let v = cost[idx(last, i, o)] + dist(ends[i][o].1, depot);
            if v < best.0 {
                best = (v, i, o);
            }
        }
    }
    let (length, mut i, mut o) = best;
    let mut mask = last;
    let mut seq = Vec::with_capacity(n);
    loop {
        seq.push(refs[i][o]);
        let p = parent[idx(mask, i, o)];
        mask &= !(1 << i);
        if p == u32::MAX {
            break;
        }
        i = p as usize / 2;
        o = p as usize % 2;
    }
    seq.reverse();
    (seq, length)
}

/// Re-sequences one route optimally on center coordinates. Routes above
/// [`ROUTE_DP_CAP`] tasks are returned unchanged. Never lengthens the route.
pub fn refine_route_exact(route: &Route, instance: &Instance) -> Route {
    if route.len() > ROUTE_DP_CAP {
        log::debug!("route of {} tasks above the exact refinement cap; left as is", route.len());
        return route.clone();
    }
    let keys: Vec<TaskKey> = route.tasks.iter().map(|t| t.key()).collect();
    let (seq, length) = optimal_sequence(&keys, instance);
    if length < tasks_length(&route.tasks, instance) {
        Route::new(seq)
    } else {
        route.clone()
    }
}

/// Best oriented sequence of one route, its touring points and length.
type Block = (Vec<TaskRef>, Vec<Point2>, f64);

/// Exact optimum of a tiny instance under the close-enough objective:
/// every partition into routes, every order and orientation per route, each
/// evaluated with optimal representative points.
pub fn solve_exact_global(instance: &Instance) -> Result<(Solution, PointAssignment, f64), OracleError> {
    let keys = instance.task_keys();
    let n = keys.len();
    if n > GLOBAL_CAP {
        return Err(OracleError::TooManyTasks { tasks: n, cap: GLOBAL_CAP });
    }
    let full = (1usize << n) - 1;
    let mut blocks: HashMap<usize, Option<Block>> = HashMap::new();
    let max_routes = instance.fleet().max_vehicles.map_or(n, |m| (m as usize).min(n));

    // best[k][mask]: cheapest cover of `mask` with exactly k routes.
    let mut best = vec![vec![f64::INFINITY; full + 1]; max_routes + 1];
    let mut choice = vec![vec![0usize; full + 1]; max_routes + 1];
    best[0][0] = 0.0;
    for k in 1..=max_routes {
        for mask in 1..=full {
            let low = mask & mask.wrapping_neg();
            let rest = mask & !low;
            // Sub-blocks always contain the lowest task so each partition is seen once.
            let mut sub = rest;
            loop {
                let block = sub | low;
                let tail = best[k - 1][mask & !block];
                if tail.is_finite() {
                    let entry = blocks.entry(block).or_insert_with(|| best_block(&keys, block, instance));
                    if let Some((_, _, f)) = entry {
                        let v = *f + tail;
                        if v < best[k][mask] {
                            best[k][mask] = v;
                            choice[k][mask] = block;
                        }
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
    }

    let mut k_best = None;
    for k in 1..=max_routes {
        if best[k][full].is_finite() && k_best.is_none_or(|kb: usize| best[k][full] < best[kb][full]) {
            k_best = Some(k);
        }
    }
    let Some(mut k) = k_best else {
        return Err(OracleError::Infeasible);
    };
    debug_assert!(can_open_route(k - 1, instance));
    let objective = best[k][full];
    let mut mask = full;
    let mut routes = Vec::new();
    let mut points = Vec::new();
    while mask != 0 {
        let block = choice[k][mask];
        let (seq, pts, _) = blocks[&block].clone().expect("chosen blocks are feasible");
        routes.push(Route::new(seq));
        points.push(pts);
        mask &= !block;
        k -= 1;
    }
    Ok((Solution::new(routes), PointAssignment { routes: points }, objective))
}

/// Best single route over the tasks in `block`, or `None` if no order of them
/// respects capacity and flight range.
fn best_block(keys: &[TaskKey], block: usize, instance: &Instance) -> Option<Block> {
    let members: Vec<TaskKey> = (0..keys.len()).filter(|i| block & (1 << i) != 0).map(|i| keys[i]).collect();
    let nodes = members.iter().filter(|k| k.kind == TaskKind::Node).count();
    if nodes > instance.fleet().node_capacity as usize {
        return None;
    }
    let limit = instance.fleet().flight_range + RANGE_EPS;
    let all_fixed = members
        .iter()
        .all(|k| k.kind == TaskKind::Edge || instance.node(k.id).is_some_and(|n| n.radius == 0.0));
    if all_fixed {
        // Points coincide with centers, so the center-optimal order is optimal.
        let (seq, length) = optimal_sequence(&members, instance);
        if length > limit {
            return None;
        }
        let route = Route::new(seq);
        let pts = vertex_sequence(&route, instance).expect("known tasks").iter().map(|d| d.center).collect();
        return Some((route.tasks, pts, length));
    }

    let mut best: Option<(Vec<TaskRef>, Vec<Point2>, f64)> = None;
    let m = members.len();
    let mut perm: Vec<usize> = (0..m).collect();
    loop {
        // A route and its reversal have equal length; keep one of each pair.
        if m < 2 || perm[0] < perm[m - 1] {
            let edge_slots: Vec<usize> = (0..m).filter(|&p| members[perm[p]].kind == TaskKind::Edge).collect();
            for orient in 0..(1usize << edge_slots.len()) {
                let mut seq: Vec<TaskRef> = perm.iter().map(|&i| TaskRef::orientations(members[i]).next().expect("one orientation")).collect();
                for (bit, &p) in edge_slots.iter().enumerate() {
                    if orient & (1 << bit) != 0 {
                        seq[p] = seq[p].flipped();
                    }
                }
                if tasks_length(&seq, instance) > limit {
                    continue;
                }
                let route = Route::new(seq);
                let problem = TouringProblem::new(vertex_sequence(&route, instance).expect("known tasks")).expect("closed chain");
                let r = optimize_points(&problem, DEFAULT_TOL, DEFAULT_MAX_ITER);
                if best.as_ref().is_none_or(|b| r.objective < b.2) {
                    best = Some((route.tasks, r.points, r.objective));
                }
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    best
}

/// Advances to the next lexicographic permutation; false after the last.
fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}
