//! Destroy/repair perturbation with adaptive intensity.

use std::fmt;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::insertion::{best_insertion, can_open_route, feasible_slots, new_route_insertion, remove_tasks, removal_gain, RouteLoad};
use crate::instance::{Instance, TaskKey, TaskKind, TaskRef, RANGE_EPS};
use crate::neighborhoods::regret_repair;
use crate::solution::{Route, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DestroyOp {
    Random,
    Worst,
    Node,
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepairOp {
    Regret,
    Random,
    Greedy,
}

impl DestroyOp {
    pub const ALL: [DestroyOp; 4] = [DestroyOp::Random, DestroyOp::Worst, DestroyOp::Node, DestroyOp::Edge];
}

impl RepairOp {
    pub const ALL: [RepairOp; 3] = [RepairOp::Regret, RepairOp::Random, RepairOp::Greedy];
}

impl fmt::Display for DestroyOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DestroyOp::Random => "random",
            DestroyOp::Worst => "worst",
            DestroyOp::Node => "node",
            DestroyOp::Edge => "edge",
        })
    }
}

impl fmt::Display for RepairOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepairOp::Regret => "regret",
            RepairOp::Random => "random",
            RepairOp::Greedy => "greedy",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationConfig {
    pub tau_min: usize,
    pub tau_max: usize,
    /// Attempts per perturbation.
    pub lambda: usize,
    pub destroy_ops: Vec<DestroyOp>,
    pub repair_ops: Vec<RepairOp>,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            tau_min: 3,
            tau_max: 8,
            lambda: 5,
            destroy_ops: DestroyOp::ALL.to_vec(),
            repair_ops: RepairOp::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed {
    pub solution: Solution,
    /// Operator pair of the last attempt.
    pub destroy: DestroyOp,
    pub repair: RepairOp,
    pub changed: bool,
}

/// Up to `lambda` attempts of a random destroy/repair pair; returns the first
/// result that differs from `solution`, or `solution` itself.
pub fn perturb(
    solution: &Solution,
    instance: &Instance,
    tau: usize,
    config: &PerturbationConfig,
    rng: &mut ChaCha8Rng,
) -> Perturbed {
    let mut last = (
        *config.destroy_ops.first().expect("at least one destroy operator"),
        *config.repair_ops.first().expect("at least one repair operator"),
    );
    for _ in 0..config.lambda {
        let d = *config.destroy_ops.choose(rng).expect("non-empty");
        let r = *config.repair_ops.choose(rng).expect("non-empty");
        last = (d, r);
        let (partial, removed) = apply_destroy(d, solution, instance, tau, rng);
        let repaired = apply_repair(r, &partial, &removed, instance, rng);
        if let Some(s) = repaired {
            if &s != solution {
                return Perturbed { solution: s, destroy: d, repair: r, changed: true };
            }
        }
    }
    Perturbed { solution: solution.clone(), destroy: last.0, repair: last.1, changed: false }
}

pub fn apply_destroy(
    op: DestroyOp,
    solution: &Solution,
    instance: &Instance,
    tau: usize,
    rng: &mut ChaCha8Rng,
) -> (Solution, Vec<TaskRef>) {
    match op {
        DestroyOp::Random => destroy_random(solution, tau, rng),
        DestroyOp::Worst => destroy_worst(solution, instance, tau),
        DestroyOp::Node => destroy_node(solution, tau, rng),
        DestroyOp::Edge => destroy_edge(solution, tau, rng),
    }
}

/// `None` when some task could not be placed within the fleet cap.
pub fn apply_repair(
    op: RepairOp,
    partial: &Solution,
    removed: &[TaskRef],
    instance: &Instance,
    rng: &mut ChaCha8Rng,
) -> Option<Solution> {
    match op {
        RepairOp::Regret => regret_repair(partial, removed, instance),
        RepairOp::Random => repair_random(partial, removed, instance, rng),
        RepairOp::Greedy => repair_greedy(partial, removed, instance),
    }
}

fn destroy_among(solution: &Solution, keys: Vec<TaskKey>, tau: usize, rng: &mut ChaCha8Rng) -> (Solution, Vec<TaskRef>) {
    let k = tau.min(keys.len());
    let chosen: Vec<TaskKey> = sample(rng, keys.len(), k).into_iter().map(|i| keys[i]).collect();
    remove_tasks(solution, &chosen)
}

/// Removes `tau` uniformly drawn tasks (all of them if fewer exist).
pub fn destroy_random(solution: &Solution, tau: usize, rng: &mut ChaCha8Rng) -> (Solution, Vec<TaskRef>) {
    let keys = solution.tasks().map(|t| t.key()).collect();
    destroy_among(solution, keys, tau, rng)
}

/// Removes `min(tau, node tasks)` uniformly drawn node tasks.
pub fn destroy_node(solution: &Solution, tau: usize, rng: &mut ChaCha8Rng) -> (Solution, Vec<TaskRef>) {
    let keys = solution.tasks().filter(|t| t.is_node()).map(|t| t.key()).collect();
    destroy_among(solution, keys, tau, rng)
}

/// Removes `min(tau, edge tasks)` uniformly drawn edge tasks.
pub fn destroy_edge(solution: &Solution, tau: usize, rng: &mut ChaCha8Rng) -> (Solution, Vec<TaskRef>) {
    let keys = solution.tasks().filter(|t| t.is_edge()).map(|t| t.key()).collect();
    destroy_among(solution, keys, tau, rng)
}

/// Removes the task whose removal shortens the solution most, `tau` times,
/// re-evaluating after each removal. Ties go to the lower id, nodes first.
pub fn destroy_worst(solution: &Solution, instance: &Instance, tau: usize) -> (Solution, Vec<TaskRef>) {
    let mut current = solution.clone();
    let mut removed = Vec::new();
    for _ in 0..tau {
        let mut pick: Option<(f64, (u32, TaskKind), usize, usize)> = None;
        for (ri, route) in current.routes.iter().enumerate() {
            for pos in 0..route.tasks.len() {
                let gain = removal_gain(&route.tasks, pos, instance);
                let key = route.tasks[pos].key();
                let order = (key.id, key.kind);
                let better = match pick {
                    None => true,
                    Some((g, o, _, _)) => gain > g || (gain == g && order < o),
                };
                if better {
                    pick = Some((gain, order, ri, pos));
                }
            }
        }
        let Some((_, _, ri, pos)) = pick else { break };
        removed.push(current.routes[ri].tasks.remove(pos));
        current.drop_empty_routes();
    }
    (current, removed)
}

fn open_route(routes: &mut Vec<Vec<TaskRef>>, task: TaskRef, instance: &Instance) -> Option<()> {
    if !can_open_route(routes.len(), instance) {
        return None;
    }
    let (t, d) = new_route_insertion(task.key(), instance);
    if d > instance.fleet().flight_range + RANGE_EPS {
        return None;
    }
    routes.push(vec![t]);
    Some(())
}

/// Inserts tasks in removal order, each at a uniformly drawn feasible
/// (route, position) slot in its cheaper orientation there; a task with no
/// feasible slot opens a new route.
pub fn repair_random(
    partial: &Solution,
    removed: &[TaskRef],
    instance: &Instance,
    rng: &mut ChaCha8Rng,
) -> Option<Solution> {
    let mut routes: Vec<Vec<TaskRef>> = partial.routes.iter().map(|r| r.tasks.clone()).collect();
    for &task in removed {
        let slots: Vec<(usize, usize, TaskRef)> = routes
            .iter()
            .enumerate()
            .flat_map(|(ri, r)| {
                feasible_slots(r, RouteLoad::of(r, instance), task.key(), instance)
                    .into_iter()
                    .map(move |(pos, t, _)| (ri, pos, t))
            })
            .collect();
        match slots.choose(rng) {
            Some(&(ri, pos, t)) => routes[ri].insert(pos, t),
            None => open_route(&mut routes, task, instance)?,
        }
    }
    Some(Solution::new(routes.into_iter().map(Route::new).collect()))
}

/// Repeatedly inserts the cheapest (task, route, position, orientation) over
/// all pending tasks. A task that fits no existing route competes with its
/// new-route cost. Ties go to the earlier task, route and position.
pub fn repair_greedy(partial: &Solution, removed: &[TaskRef], instance: &Instance) -> Option<Solution> {
    let mut routes: Vec<Vec<TaskRef>> = partial.routes.iter().map(|r| r.tasks.clone()).collect();
    let mut loads: Vec<RouteLoad> = routes.iter().map(|r| RouteLoad::of(r, instance)).collect();
    let mut pending: Vec<TaskRef> = removed.to_vec();
    // options[t][r]: best insertion of pending[t] into route r.
    let mut options: Vec<Vec<Option<(usize, TaskRef, f64)>>> = pending
        .iter()
        .map(|t| routes.iter().zip(&loads).map(|(r, &l)| best_insertion(r, l, t.key(), instance)).collect())
        .collect();

    while !pending.is_empty() {
        // (cost, task index, route index or None for a new route, position, oriented task)
        let mut pick: Option<(f64, usize, Option<usize>, usize, TaskRef)> = None;
        for (ti, opts) in options.iter().enumerate() {
            let mut any = false;
            for (ri, o) in opts.iter().enumerate() {
                if let Some((pos, t, d)) = *o {
                    any = true;
                    if pick.is_none_or(|p| d < p.0) {
                        pick = Some((d, ti, Some(ri), pos, t));
                    }
                }
            }
            if !any {
                let (t, d) = new_route_insertion(pending[ti].key(), instance);
                if pick.is_none_or(|p| d < p.0) {
                    pick = Some((d, ti, None, 0, t));
                }
            }
        }
        let (_, ti, target, pos, t) = pick.expect("pending is non-empty");
        let modified = match target {
            Some(ri) => {
                routes[ri].insert(pos, t);
                ri
            }
            None => {
                open_route(&mut routes, t, instance)?;
                loads.push(RouteLoad { length: 0.0, nodes: 0 });
                routes.len() - 1
            }
        };
        loads[modified] = RouteLoad::of(&routes[modified], instance);
        pending.remove(ti);
        options.remove(ti);
        for (task, opts) in pending.iter().zip(options.iter_mut()) {
            let o = best_insertion(&routes[modified], loads[modified], task.key(), instance);
            if modified == opts.len() {
                opts.push(o);
            } else {
                opts[modified] = o;
            }
        }
    }
    Some(Solution::new(routes.into_iter().map(Route::new).collect()))
}
