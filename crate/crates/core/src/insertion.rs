//! Insertion-cost primitives shared by construction, repair and VND moves.
//! All costs are center-evaluated.

use crate::geometry::{dist, Point2};
use crate::instance::{Instance, TaskKey, TaskRef, RANGE_EPS};
use crate::solution::{tasks_length, Solution};

/// Exit point before slot `pos` and entry point after it.
#[inline]
fn slot_neighbors(tasks: &[TaskRef], pos: usize, instance: &Instance) -> (Point2, Point2) {
    let prev = if pos == 0 { instance.depot() } else { instance.endpoints(tasks[pos - 1]).1 };
    let next = if pos == tasks.len() { instance.depot() } else { instance.endpoints(tasks[pos]).0 };
    (prev, next)
}

/// Length increase from inserting `task` before index `pos`.
#[inline]
pub fn insertion_delta(tasks: &[TaskRef], pos: usize, task: TaskRef, instance: &Instance) -> f64 {
    let (prev, next) = slot_neighbors(tasks, pos, instance);
    let (entry, exit) = instance.endpoints(task);
    dist(prev, entry) + instance.service_length(task) + dist(exit, next) - dist(prev, next)
}

/// Length decrease from removing the task at `pos`.
#[inline]
pub fn removal_gain(tasks: &[TaskRef], pos: usize, instance: &Instance) -> f64 {
    let prev = if pos == 0 { instance.depot() } else { instance.endpoints(tasks[pos - 1]).1 };
    let next = if pos + 1 == tasks.len() { instance.depot() } else { instance.endpoints(tasks[pos + 1]).0 };
    let t = tasks[pos];
    let (entry, exit) = instance.endpoints(t);
    dist(prev, entry) + instance.service_length(t) + dist(exit, next) - dist(prev, next)
}

/// Cached per-route quantities needed for feasibility checks.
#[derive(Debug, Clone, Copy)]
pub struct RouteLoad {
    pub length: f64,
    pub nodes: usize,
}

impl RouteLoad {
    pub fn of(tasks: &[TaskRef], instance: &Instance) -> Self {
        Self { length: tasks_length(tasks, instance), nodes: tasks.iter().filter(|t| t.is_node()).count() }
    }

    /// Whether adding a task of this kind with this delta keeps the route feasible.
    #[inline]
    pub fn admits(&self, is_node: bool, delta: f64, instance: &Instance) -> bool {
        let fleet = instance.fleet();
        (!is_node || self.nodes < fleet.node_capacity as usize)
            && self.length + delta <= fleet.flight_range + RANGE_EPS
    }
}

/// Cheapest feasible `(position, oriented task, delta)` in one route.
/// Ties go to the earliest position, then Forward before Reverse.
pub fn best_insertion(
    tasks: &[TaskRef],
    load: RouteLoad,
    key: TaskKey,
    instance: &Instance,
) -> Option<(usize, TaskRef, f64)> {
    let mut best: Option<(usize, TaskRef, f64)> = None;
    for pos in 0..=tasks.len() {
        for t in TaskRef::orientations(key) {
            let delta = insertion_delta(tasks, pos, t, instance);
            if !load.admits(t.is_node(), delta, instance) {
                continue;
            }
            if best.is_none_or(|(_, _, d)| delta < d) {
                best = Some((pos, t, delta));
            }
        }
    }
    best
}

/// All feasible insertion slots of one route, cheapest orientation per slot.
pub fn feasible_slots(
    tasks: &[TaskRef],
    load: RouteLoad,
    key: TaskKey,
    instance: &Instance,
) -> Vec<(usize, TaskRef, f64)> {
    (0..=tasks.len())
        .filter_map(|pos| {
            TaskRef::orientations(key)
                .map(|t| (pos, t, insertion_delta(tasks, pos, t, instance)))
                .filter(|&(_, t, d)| load.admits(t.is_node(), d, instance))
                .min_by(|a, b| a.2.total_cmp(&b.2))
        })
        .collect()
}

/// Cost of serving `key` alone in a fresh route, cheapest orientation.
pub fn new_route_insertion(key: TaskKey, instance: &Instance) -> (TaskRef, f64) {
    TaskRef::orientations(key)
        .map(|t| (t, insertion_delta(&[], 0, t, instance)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("every task has an orientation")
}

/// Whether the fleet cap allows one more route.
pub fn can_open_route(routes: usize, instance: &Instance) -> bool {
    instance.fleet().max_vehicles.is_none_or(|m| routes < m as usize)
}

/// Removes every task whose key is in `keys` from the solution, returning the
/// removed refs in the order given and dropping emptied routes.
pub fn remove_tasks(solution: &Solution, keys: &[TaskKey]) -> (Solution, Vec<TaskRef>) {
    let mut out = solution.clone();
    let mut removed = Vec::with_capacity(keys.len());
    for &k in keys {
        if let Some((ri, pos)) = out.locate(k) {
            removed.push(out.routes[ri].tasks.remove(pos));
        }
    }
    out.drop_empty_routes();
    (out, removed)
}
