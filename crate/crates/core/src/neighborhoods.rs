//! Variable neighborhood descent over five move structures, evaluated on
//! center coordinates.
//!
//! Every operator returns `None` or a feasible solution whose center length is
//! lower by at least [`IMPROVEMENT_EPS`].

use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construction::regret_from_costs;
use crate::geometry::{dist, Point2};
use crate::insertion::{best_insertion, can_open_route, new_route_insertion, remove_tasks, RouteLoad};
use crate::instance::{Instance, TaskRef, RANGE_EPS};
use crate::solution::{solution_length, tasks_length, Route, Solution};

pub const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NeighborhoodId {
    TwoOpt,
    Flip,
    DestroyRepair,
    ChainInsert,
    ChainExchange,
}

impl NeighborhoodId {
    /// Exploration order.
    pub const ALL: [NeighborhoodId; 5] = [
        NeighborhoodId::TwoOpt,
        NeighborhoodId::Flip,
        NeighborhoodId::DestroyRepair,
        NeighborhoodId::ChainInsert,
        NeighborhoodId::ChainExchange,
    ];

    pub fn ordinal(self) -> usize {
        self as usize + 1
    }
}

impl fmt::Display for NeighborhoodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NeighborhoodId::TwoOpt => "2-opt",
            NeighborhoodId::Flip => "flip",
            NeighborhoodId::DestroyRepair => "destroy-repair",
            NeighborhoodId::ChainInsert => "chain-insert",
            NeighborhoodId::ChainExchange => "chain-exchange",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VndParams {
    /// Cap on neighborhood evaluations.
    pub l_max: usize,
    pub zeta_min: usize,
    pub zeta_max: usize,
    /// Destroy-repair probes without improvement before giving up.
    pub xi: usize,
    pub gamma_max: usize,
}

impl Default for VndParams {
    fn default() -> Self {
        Self { l_max: 200, zeta_min: 2, zeta_max: 8, xi: 5, gamma_max: 3 }
    }
}

/// Runs VND from `start` and returns the best solution found.
pub fn vnd(start: &Solution, instance: &Instance, params: &VndParams, rng: &mut ChaCha8Rng) -> Solution {
    vnd_traced(start, instance, params, rng, |_, _| {})
}

/// [`vnd`] reporting every accepted move with the new center length.
pub fn vnd_traced(
    start: &Solution,
    instance: &Instance,
    params: &VndParams,
    rng: &mut ChaCha8Rng,
    mut on_accept: impl FnMut(NeighborhoodId, f64),
) -> Solution {
    let mut current = start.clone();
    let mut f = solution_length(&current, instance);
    let mut mu = 0;
    for _ in 0..params.l_max {
        if mu == NeighborhoodId::ALL.len() {
            break;
        }
        let id = NeighborhoodId::ALL[mu];
        let found = match id {
            NeighborhoodId::TwoOpt => two_opt_best(&current, instance),
            NeighborhoodId::Flip => flip_first(&current, instance),
            NeighborhoodId::DestroyRepair => destroy_repair_probe(
                &current,
                instance,
                params.zeta_min,
                params.zeta_max,
                params.xi,
                rng,
            ),
            NeighborhoodId::ChainInsert => chain_insert(&current, instance, params.gamma_max),
            NeighborhoodId::ChainExchange => chain_exchange(&current, instance, params.gamma_max),
        };
        match found {
            Some(s) => {
                let fs = solution_length(&s, instance);
                debug_assert!(fs < f - IMPROVEMENT_EPS);
                current = s;
                f = fs;
                mu = 0;
                on_accept(id, f);
            }
            None => mu += 1,
        }
    }
    current
}

/// Exit point of the task before index `i`, or the depot.
#[inline]
fn exit_before(tasks: &[TaskRef], i: usize, instance: &Instance) -> Point2 {
    if i == 0 {
        instance.depot()
    } else {
        instance.endpoints(tasks[i - 1]).1
    }
}

/// Entry point of the task at index `j`, or the depot past the end.
#[inline]
fn entry_at(tasks: &[TaskRef], j: usize, instance: &Instance) -> Point2 {
    if j >= tasks.len() {
        instance.depot()
    } else {
        instance.endpoints(tasks[j]).0
    }
}

/// Length of a chain of tasks from its first entry to its last exit.
fn chain_internal(chain: &[TaskRef], instance: &Instance) -> f64 {
    let mut total = 0.0;
    let mut prev: Option<Point2> = None;
    for &t in chain {
        let (entry, exit) = instance.endpoints(t);
        if let Some(p) = prev {
            total += dist(p, entry);
        }
        total += dist(entry, exit);
        prev = Some(exit);
    }
    total
}

fn node_count(tasks: &[TaskRef]) -> usize {
    tasks.iter().filter(|t| t.is_node()).count()
}

/// Best intra-route segment reversal over all routes. The two replaced legs
/// are free flights; required edges inside the segment flip orientation.
pub fn two_opt_best(solution: &Solution, instance: &Instance) -> Option<Solution> {
    let mut best: Option<(usize, usize, usize, f64)> = None;
    for (ri, route) in solution.routes.iter().enumerate() {
        let tasks = &route.tasks;
        for i in 0..tasks.len() {
            let prev = exit_before(tasks, i, instance);
            let entry_i = instance.endpoints(tasks[i]).0;
            for j in i + 1..tasks.len() {
                let exit_j = instance.endpoints(tasks[j]).1;
                let next = entry_at(tasks, j + 1, instance);
                let delta = dist(prev, exit_j) + dist(entry_i, next) - dist(prev, entry_i) - dist(exit_j, next);
                if delta < -IMPROVEMENT_EPS && best.is_none_or(|b| delta < b.3) {
                    best = Some((ri, i, j, delta));
                }
            }
        }
    }
    let (ri, i, j, _) = best?;
    let mut out = solution.clone();
    let seg = &mut out.routes[ri].tasks[i..=j];
    seg.reverse();
    for t in seg.iter_mut() {
        *t = t.flipped();
    }
    Some(out)
}

/// Reverses the first required edge, in id order, whose flip shortens its route.
pub fn flip_first(solution: &Solution, instance: &Instance) -> Option<Solution> {
    let mut edges: Vec<(u32, usize, usize)> = solution
        .routes
        .iter()
        .enumerate()
        .flat_map(|(ri, r)| {
            r.tasks.iter().enumerate().filter_map(move |(pos, t)| match t {
                TaskRef::Edge(id, _) => Some((*id, ri, pos)),
                TaskRef::Node(_) => None,
            })
        })
        .collect();
    edges.sort_unstable();
    for (_, ri, pos) in edges {
        let tasks = &solution.routes[ri].tasks;
        let prev = exit_before(tasks, pos, instance);
        let next = entry_at(tasks, pos + 1, instance);
        let (a, b) = instance.endpoints(tasks[pos]);
        let delta = dist(prev, b) + dist(a, next) - dist(prev, a) - dist(b, next);
        if delta < -IMPROVEMENT_EPS {
            let mut out = solution.clone();
            out.routes[ri].tasks[pos] = tasks[pos].flipped();
            return Some(out);
        }
    }
    None
}

/// Up to `xi` probes, each removing `zeta` uniformly drawn tasks
/// (`zeta` uniform in `[zeta_min, zeta_max]`, clamped to the task count) and
/// reinserting them with [`regret_repair`]. Returns the first improvement.
pub fn destroy_repair_probe(
    solution: &Solution,
    instance: &Instance,
    zeta_min: usize,
    zeta_max: usize,
    xi: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Solution> {
    let keys: Vec<_> = solution.tasks().map(|t| t.key()).collect();
    if keys.is_empty() {
        return None;
    }
    let f = solution_length(solution, instance);
    let hi = zeta_max.min(keys.len()).max(1);
    let lo = zeta_min.clamp(1, hi);
    for _ in 0..xi {
        let zeta = rng.gen_range(lo..=hi);
        let chosen: Vec<_> = sample(rng, keys.len(), zeta).into_iter().map(|i| keys[i]).collect();
        let (partial, removed) = remove_tasks(solution, &chosen);
        if let Some(s) = regret_repair(&partial, &removed, instance) {
            if solution_length(&s, instance) < f - IMPROVEMENT_EPS {
                return Some(s);
            }
        }
    }
    None
}

/// Reinserts `removed` by regret over best-position insertion costs in the
/// existing routes. The task with the largest regret goes first into its best
/// route; a task that fits no existing route opens a new one. Ties go to the
/// earlier task in `removed`. Returns `None` when a task fits nowhere and the
/// fleet cap or its own round trip forbids a new route.
pub fn regret_repair(partial: &Solution, removed: &[TaskRef], instance: &Instance) -> Option<Solution> {
    let mut routes: Vec<Vec<TaskRef>> = partial.routes.iter().map(|r| r.tasks.clone()).collect();
    let mut loads: Vec<RouteLoad> = routes.iter().map(|r| RouteLoad::of(r, instance)).collect();
    let mut pending: Vec<TaskRef> = removed.to_vec();
    // options[t][r]: best insertion of pending[t] into route r.
    let mut options: Vec<Vec<Option<(usize, TaskRef, f64)>>> = pending
        .iter()
        .map(|t| routes.iter().zip(&loads).map(|(r, &l)| best_insertion(r, l, t.key(), instance)).collect())
        .collect();

    while !pending.is_empty() {
        let mut pick = 0;
        let mut pick_rv = f64::NEG_INFINITY;
        for (ti, opts) in options.iter().enumerate() {
            let costs: Vec<f64> = opts.iter().map(|o| o.map_or(f64::INFINITY, |x| x.2)).collect();
            let rv = regret_from_costs(&costs);
            if rv > pick_rv {
                pick = ti;
                pick_rv = rv;
            }
        }

        let mut target: Option<(usize, usize, TaskRef, f64)> = None;
        for (ri, o) in options[pick].iter().enumerate() {
            if let Some((pos, t, d)) = *o {
                if target.is_none_or(|b| d < b.3) {
                    target = Some((ri, pos, t, d));
                }
            }
        }
        let modified = match target {
            Some((ri, pos, t, _)) => {
                routes[ri].insert(pos, t);
                ri
            }
            None => {
                if !can_open_route(routes.len(), instance) {
                    return None;
                }
                let (t, d) = new_route_insertion(pending[pick].key(), instance);
                if d > instance.fleet().flight_range + RANGE_EPS {
                    return None;
                }
                routes.push(vec![t]);
                loads.push(RouteLoad { length: 0.0, nodes: 0 });
                routes.len() - 1
            }
        };
        loads[modified] = RouteLoad::of(&routes[modified], instance);

        pending.remove(pick);
        options.remove(pick);
        for (t, opts) in pending.iter().zip(options.iter_mut()) {
            let o = best_insertion(&routes[modified], loads[modified], t.key(), instance);
            if modified == opts.len() {
                opts.push(o);
            } else {
                opts[modified] = o;
            }
        }
    }
    Some(Solution::new(routes.into_iter().map(Route::new).collect()))
}

/// Relocates a chain of consecutive tasks into another route, keeping the
/// chain's order and orientations. Chain lengths 1..=`gamma_max` are tried in
/// turn; the best move of the first level that improves is applied.
pub fn chain_insert(solution: &Solution, instance: &Instance, gamma_max: usize) -> Option<Solution> {
    let routes = &solution.routes;
    if routes.len() < 2 {
        return None;
    }
    let fleet = instance.fleet();
    let lengths: Vec<f64> = routes.iter().map(|r| tasks_length(&r.tasks, instance)).collect();
    let nodes: Vec<usize> = routes.iter().map(|r| node_count(&r.tasks)).collect();

    for gamma in 1..=gamma_max {
        // (delta, source route, start, target route, position)
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for (rs, src) in routes.iter().enumerate() {
            let src = &src.tasks;
            if src.len() < gamma {
                continue;
            }
            for s in 0..=src.len() - gamma {
                let chain = &src[s..s + gamma];
                let inner = chain_internal(chain, instance);
                let head = instance.endpoints(chain[0]).0;
                let tail = instance.endpoints(chain[gamma - 1]).1;
                let prev = exit_before(src, s, instance);
                let next = entry_at(src, s + gamma, instance);
                let gain = dist(prev, head) + inner + dist(tail, next) - dist(prev, next);
                let chain_nodes = node_count(chain);

                for (rt, dst) in routes.iter().enumerate() {
                    if rt == rs || nodes[rt] + chain_nodes > fleet.node_capacity as usize {
                        continue;
                    }
                    let dst = &dst.tasks;
                    for p in 0..=dst.len() {
                        let a = exit_before(dst, p, instance);
                        let b = entry_at(dst, p, instance);
                        let add = dist(a, head) + inner + dist(tail, b) - dist(a, b);
                        if lengths[rt] + add > fleet.flight_range + RANGE_EPS {
                            continue;
                        }
                        let delta = add - gain;
                        if delta < -IMPROVEMENT_EPS && best.is_none_or(|b| delta < b.0) {
                            best = Some((delta, rs, s, rt, p));
                        }
                    }
                }
            }
        }
        if let Some((_, rs, s, rt, p)) = best {
            let mut out: Vec<Vec<TaskRef>> = routes.iter().map(|r| r.tasks.clone()).collect();
            let chain: Vec<TaskRef> = out[rs].drain(s..s + gamma).collect();
            out[rt].splice(p..p, chain);
            return Some(Solution::new(out.into_iter().map(Route::new).collect()));
        }
    }
    None
}

/// Swaps a chain of `g1` tasks of one route with a chain of `g2` tasks of
/// another. `(g1, g2)` ascends lexicographically from `(1, 1)` to
/// `(gamma_max, gamma_max)`; the best move of the first improving pair is
/// applied.
pub fn chain_exchange(solution: &Solution, instance: &Instance, gamma_max: usize) -> Option<Solution> {
    let routes = &solution.routes;
    if routes.len() < 2 {
        return None;
    }
    let fleet = instance.fleet();
    let lengths: Vec<f64> = routes.iter().map(|r| tasks_length(&r.tasks, instance)).collect();
    let nodes: Vec<usize> = routes.iter().map(|r| node_count(&r.tasks)).collect();

    // Per route and chain start: (inner length, head, tail, nodes, prev, next) for a given length.
    let chains = |tasks: &[TaskRef], g: usize| -> Vec<(f64, Point2, Point2, usize, Point2, Point2)> {
        if tasks.len() < g {
            return Vec::new();
        }
        (0..=tasks.len() - g)
            .map(|s| {
                let c = &tasks[s..s + g];
                (
                    chain_internal(c, instance),
                    instance.endpoints(c[0]).0,
                    instance.endpoints(c[g - 1]).1,
                    node_count(c),
                    exit_before(tasks, s, instance),
                    entry_at(tasks, s + g, instance),
                )
            })
            .collect()
    };
    let q = fleet.node_capacity as usize;
    let l = fleet.flight_range + RANGE_EPS;

    for g1 in 1..=gamma_max {
        let c1: Vec<_> = routes.iter().map(|r| chains(&r.tasks, g1)).collect();
        for g2 in 1..=gamma_max {
            let c2: Vec<_> = routes.iter().map(|r| chains(&r.tasks, g2)).collect();
            // (delta, r1, s1, r2, s2)
            let mut best: Option<(f64, usize, usize, usize, usize)> = None;
            for r1 in 0..routes.len() {
                for r2 in 0..routes.len() {
                    if r1 == r2 {
                        continue;
                    }
                    for (s1, &(in1, h1, t1, n1, p1, x1)) in c1[r1].iter().enumerate() {
                        for (s2, &(in2, h2, t2, n2, p2, x2)) in c2[r2].iter().enumerate() {
                            if nodes[r1] - n1 + n2 > q || nodes[r2] - n2 + n1 > q {
                                continue;
                            }
                            let d1 = dist(p1, h2) + in2 + dist(t2, x1) - dist(p1, h1) - in1 - dist(t1, x1);
                            let d2 = dist(p2, h1) + in1 + dist(t1, x2) - dist(p2, h2) - in2 - dist(t2, x2);
                            if lengths[r1] + d1 > l || lengths[r2] + d2 > l {
                                continue;
                            }
                            let delta = d1 + d2;
                            if delta < -IMPROVEMENT_EPS && best.is_none_or(|b| delta < b.0) {
                                best = Some((delta, r1, s1, r2, s2));
                            }
                        }
                    }
                }
            }
            if let Some((_, r1, s1, r2, s2)) = best {
                let mut out: Vec<Vec<TaskRef>> = routes.iter().map(|r| r.tasks.clone()).collect();
                let a: Vec<TaskRef> = out[r1][s1..s1 + g1].to_vec();
                let b: Vec<TaskRef> = out[r2][s2..s2 + g2].to_vec();
                out[r1].splice(s1..s1 + g1, b);
                out[r2].splice(s2..s2 + g2, a);
                return Some(Solution::new(out.into_iter().map(Route::new).collect()));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{FleetSpec, Orientation, RequiredEdge, RequiredNode};
    use crate::solution::validate;
    use rand::SeedableRng;

    fn fleet(l: f64, q: u32) -> FleetSpec {
        FleetSpec { flight_range: l, node_capacity: q, max_vehicles: None }
    }

    fn nodes_instance(pts: &[(f64, f64)], l: f64, q: u32) -> Instance {
        let nodes = pts
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| RequiredNode { id: i as u32 + 1, center: Point2::new(x, y), radius: 0.0 })
            .collect();
        Instance::new("t", Point2::new(0.0, 0.0), nodes, vec![], fleet(l, q)).unwrap()
    }

    fn one_route(tasks: Vec<TaskRef>) -> Solution {
        Solution::new(vec![Route::new(tasks)])
    }

    fn all_orders(ids: &[u32]) -> Vec<Vec<TaskRef>> {
        if ids.len() <= 1 {
            return vec![ids.iter().map(|&i| TaskRef::Node(i)).collect()];
        }
        let mut out = Vec::new();
        for k in 0..ids.len() {
            let mut rest = ids.to_vec();
            let head = rest.remove(k);
            for mut tail in all_orders(&rest) {
                tail.insert(0, TaskRef::Node(head));
                out.push(tail);
            }
        }
        out
    }

    #[test]
    fn two_opt_uncrosses_square() {
        let inst = nodes_instance(&[(0.0, 1.0), (1.0, 0.0), (1.0, 1.0)], 100.0, 5);
        let crossing = one_route(vec![TaskRef::Node(1), TaskRef::Node(2), TaskRef::Node(3)]);
        assert!((solution_length(&crossing, &inst) - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        let optimum = all_orders(&[1, 2, 3])
            .into_iter()
            .map(|t| solution_length(&one_route(t), &inst))
            .fold(f64::INFINITY, f64::min);
        // The square tour around the unit cell.
        assert!((optimum - 4.0).abs() < 1e-12);
        let s = two_opt_best(&crossing, &inst).unwrap();
        assert!((solution_length(&s, &inst) - optimum).abs() < 1e-12);
        assert!(two_opt_best(&s, &inst).is_none());
    }

    #[test]
    fn two_opt_flips_contained_edges() {
        let inst = Instance::new(
            "t",
            Point2::new(0.0, 0.0),
            vec![
                RequiredNode { id: 1, center: Point2::new(0.0, 10.0), radius: 0.0 },
                RequiredNode { id: 2, center: Point2::new(10.0, 10.0), radius: 0.0 },
            ],
            vec![RequiredEdge { id: 1, a: Point2::new(10.0, 1.0), b: Point2::new(10.0, 0.0) }],
            fleet(1000.0, 5),
        )
        .unwrap();
        let s = one_route(vec![TaskRef::Node(1), TaskRef::Edge(1, Orientation::Forward), TaskRef::Node(2)]);
        let better = two_opt_best(&s, &inst).unwrap();
        let expected = vec![TaskRef::Node(1), TaskRef::Node(2), TaskRef::Edge(1, Orientation::Reverse)];
        assert_eq!(better.routes[0].tasks, expected);
        // 10 + 10 + 10 + 1 + |(10,1)|
        let f = 31.0 + 101f64.sqrt();
        assert!((solution_length(&better, &inst) - f).abs() < 1e-12);
    }

    #[test]
    fn two_opt_absent_cases() {
        let inst = nodes_instance(&[(1.0, 1.0), (-1.0, 1.0)], 100.0, 5);
        assert!(two_opt_best(&one_route(vec![TaskRef::Node(1)]), &inst).is_none());
        let two = Solution::new(vec![Route::new(vec![TaskRef::Node(1)]), Route::new(vec![TaskRef::Node(2)])]);
        assert!(two_opt_best(&two, &inst).is_none());
    }

    fn edge_instance(nodes: Vec<RequiredNode>, a: (f64, f64), b: (f64, f64)) -> Instance {
        Instance::new(
            "t",
            Point2::new(0.0, 0.0),
            nodes,
            vec![RequiredEdge { id: 1, a: Point2::new(a.0, a.1), b: Point2::new(b.0, b.1) }],
            fleet(1000.0, 5),
        )
        .unwrap()
    }

    #[test]
    fn flip_symmetric_cases_absent() {
        let inst = edge_instance(vec![], (5.0, 0.0), (5.0, 5.0));
        assert!(flip_first(&one_route(vec![TaskRef::Edge(1, Orientation::Forward)]), &inst).is_none());
        let inst = edge_instance(vec![], (1.0, 0.0), (10.0, 0.0));
        let s = one_route(vec![TaskRef::Edge(1, Orientation::Forward)]);
        assert!((solution_length(&s, &inst) - 20.0).abs() < 1e-12);
        assert!(flip_first(&s, &inst).is_none());
    }

    #[test]
    fn flip_improves_connection_legs() {
        let node = RequiredNode { id: 1, center: Point2::new(10.0, 1.0), radius: 0.0 };
        let inst = edge_instance(vec![node], (10.0, 0.0), (2.0, 0.0));
        let fwd = one_route(vec![TaskRef::Node(1), TaskRef::Edge(1, Orientation::Forward)]);
        let rev = one_route(vec![TaskRef::Node(1), TaskRef::Edge(1, Orientation::Reverse)]);
        let (ff, fr) = (solution_length(&fwd, &inst), solution_length(&rev, &inst));
        // Forward: |(0,0)-(10,1)| + 1 + 8 + 2; Reverse: |(0,0)-(10,1)| + |(10,1)-(2,0)| + 8 + 10.
        assert!(ff < fr);
        let s = flip_first(&rev, &inst).unwrap();
        assert_eq!(s, fwd);
        assert!(flip_first(&fwd, &inst).is_none());
    }

    #[test]
    fn regret_repair_single_gap() {
        let inst = nodes_instance(&[(10.0, 0.0), (5.0, 1.0)], 100.0, 5);
        let partial = one_route(vec![TaskRef::Node(1)]);
        let s = regret_repair(&partial, &[TaskRef::Node(2)], &inst).unwrap();
        assert_eq!(s.routes[0].tasks, vec![TaskRef::Node(2), TaskRef::Node(1)]);
    }

    #[test]
    fn regret_repair_opens_route_on_capacity() {
        let inst = nodes_instance(&[(10.0, 0.0), (5.0, 1.0)], 100.0, 1);
        let partial = one_route(vec![TaskRef::Node(1)]);
        let s = regret_repair(&partial, &[TaskRef::Node(2)], &inst).unwrap();
        assert_eq!(s.routes.len(), 2);
        assert!(validate(&s, &inst).is_ok());
    }

    #[test]
    fn regret_repair_into_empty_fleet() {
        let inst = nodes_instance(&[(10.0, 0.0), (5.0, 1.0)], 100.0, 5);
        let s = regret_repair(&Solution::default(), &[TaskRef::Node(1), TaskRef::Node(2)], &inst).unwrap();
        assert!(validate(&s, &inst).is_ok());
    }

    #[test]
    fn regret_repair_respects_fleet_cap() {
        let inst = nodes_instance(&[(10.0, 0.0), (5.0, 1.0)], 100.0, 1);
        let inst = inst.with_fleet(FleetSpec { max_vehicles: Some(1), ..*inst.fleet() });
        let partial = one_route(vec![TaskRef::Node(1)]);
        assert!(regret_repair(&partial, &[TaskRef::Node(2)], &inst).is_none());
    }

    #[test]
    fn probe_is_seed_deterministic_and_absent_at_optimum() {
        let inst = nodes_instance(&[(10.0, 0.0), (10.0, 1.0)], 100.0, 5);
        let opt = one_route(vec![TaskRef::Node(1), TaskRef::Node(2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert!(destroy_repair_probe(&opt, &inst, 2, 8, 5, &mut rng).is_none());

        let inst = nodes_instance(&[(10.0, 0.0), (0.0, 10.0), (10.0, 10.0), (-5.0, 3.0)], 1000.0, 5);
        let bad = Solution::new(vec![
            Route::new(vec![TaskRef::Node(1), TaskRef::Node(2)]),
            Route::new(vec![TaskRef::Node(3)]),
            Route::new(vec![TaskRef::Node(4)]),
        ]);
        let run = |seed| destroy_repair_probe(&bad, &inst, 2, 8, 5, &mut ChaCha8Rng::seed_from_u64(seed));
        assert_eq!(run(3), run(3));
    }

    #[test]
    fn chain_insert_relocates_single_task() {
        // Node 3 sits next to node 1 but is served alone.
        let inst = nodes_instance(&[(10.0, 0.0), (0.0, 10.0), (10.0, 1.0)], 1000.0, 5);
        let s = Solution::new(vec![
            Route::new(vec![TaskRef::Node(1)]),
            Route::new(vec![TaskRef::Node(2)]),
            Route::new(vec![TaskRef::Node(3)]),
        ]);
        let out = chain_insert(&s, &inst, 3).unwrap();
        assert_eq!(out.routes.len(), 2);
        assert!(validate(&out, &inst).is_ok());
        // The applied move is the best single relocation.
        let f = solution_length(&out, &inst);
        let mut brute = f64::INFINITY;
        for (rs, src) in s.routes.iter().enumerate() {
            for (i, &t) in src.tasks.iter().enumerate() {
                for (rt, dst) in s.routes.iter().enumerate() {
                    if rt == rs {
                        continue;
                    }
                    for p in 0..=dst.len() {
                        let mut r: Vec<Vec<TaskRef>> = s.routes.iter().map(|r| r.tasks.clone()).collect();
                        r[rs].remove(i);
                        r[rt].insert(p, t);
                        let cand = Solution::new(r.into_iter().map(Route::new).collect());
                        brute = brute.min(solution_length(&cand, &inst));
                    }
                }
            }
        }
        assert!((f - brute).abs() < 1e-9);
        assert!(chain_insert(&one_route(vec![TaskRef::Node(1)]), &inst, 3).is_none());
    }

    #[test]
    fn chain_exchange_swaps_misassigned_nodes() {
        // Mirrored pairs: each route holds one node from each side.
        let inst = nodes_instance(&[(10.0, 10.0), (-10.0, 10.0), (10.0, 11.0), (-10.0, 11.0)], 1000.0, 2);
        let s = Solution::new(vec![
            Route::new(vec![TaskRef::Node(1), TaskRef::Node(2)]),
            Route::new(vec![TaskRef::Node(3), TaskRef::Node(4)]),
        ]);
        let out = chain_exchange(&s, &inst, 3).unwrap();
        assert!(validate(&out, &inst).is_ok());
        assert!(solution_length(&out, &inst) < solution_length(&s, &inst) - 1.0);

        let same = nodes_instance(&[(10.0, 0.0), (10.0, 0.0)], 1000.0, 1);
        let twin = Solution::new(vec![Route::new(vec![TaskRef::Node(1)]), Route::new(vec![TaskRef::Node(2)])]);
        assert!(chain_exchange(&twin, &same, 3).is_none());
    }

    #[test]
    fn chain_exchange_skips_capacity_violations() {
        // Swapping a 2-node chain for 1 node would exceed Q = 2.
        let inst = nodes_instance(&[(10.0, 0.0), (11.0, 0.0), (-10.0, 0.0), (-11.0, 0.0)], 1000.0, 2);
        let s = Solution::new(vec![
            Route::new(vec![TaskRef::Node(1), TaskRef::Node(2)]),
            Route::new(vec![TaskRef::Node(3), TaskRef::Node(4)]),
        ]);
        assert!(chain_exchange(&s, &inst, 3).is_none());
    }

    #[test]
    fn vnd_fixed_point_and_improvement() {
        let inst = nodes_instance(&[(0.0, 1.0), (1.0, 0.0), (1.0, 1.0)], 100.0, 5);
        let crossing = one_route(vec![TaskRef::Node(1), TaskRef::Node(2), TaskRef::Node(3)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut trace = Vec::new();
        let s = vnd_traced(&crossing, &inst, &VndParams::default(), &mut rng, |_, f| trace.push(f));
        assert!((solution_length(&s, &inst) - 4.0).abs() < 1e-12);
        assert!(trace.windows(2).all(|w| w[1] < w[0]));
        let again = vnd(&s, &inst, &VndParams::default(), &mut rng);
        assert_eq!(again, s);
        assert!(validate(&s, &inst).is_ok());
    }
}
