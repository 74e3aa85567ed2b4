//! Regret-insertion construction of the initial solution.
//!
//! Each round computes, for every unrouted task, the cost of appending it to
//! the end of each route (plus the option of opening a fresh route) and
//! inserts the task whose best and second-best options differ the most.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, TaskKey, TaskRef};
use crate::insertion::{can_open_route, insertion_delta, new_route_insertion, RouteLoad};
use crate::solution::{solution_length, Route, Solution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("task {task} is infeasible: depot round trip {round_trip:.3} exceeds flight range {limit}")]
    InfeasibleTask { task: TaskKey, round_trip: f64, limit: f64 },
    #[error("task {0} cannot be placed without exceeding the vehicle limit")]
    FleetExhausted(TaskKey),
    #[error("rho must be at least 1")]
    NoCandidates,
}

const TIE_EPS: f64 = 1e-12;

/// Regret over a set of option costs: second-lowest minus lowest, or `+inf`
/// when fewer than two finite options exist.
pub fn regret_from_costs(costs: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    let mut second = f64::INFINITY;
    for &c in costs {
        if c < best {
            second = best;
            best = c;
        } else if c < second {
            second = c;
        }
    }
    if second.is_finite() {
        second - best
    } else {
        f64::INFINITY
    }
}

/// Cost of appending `key` at the end of `tasks` in its cheaper orientation,
/// or `None` if that breaks capacity or range.
fn end_insertion(tasks: &[TaskRef], load: RouteLoad, key: TaskKey, instance: &Instance) -> Option<(TaskRef, f64)> {
    TaskRef::orientations(key)
        .map(|t| (t, insertion_delta(tasks, tasks.len(), t, instance)))
        .filter(|&(t, d)| load.admits(t.is_node(), d, instance))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Regret value of `task` for end-of-route insertion into `solution`.
/// The option of opening a new route always participates when the fleet cap
/// allows it.
pub fn regret_value_endpoint(task: TaskKey, solution: &Solution, instance: &Instance) -> f64 {
    let mut costs: Vec<f64> = solution
        .routes
        .iter()
        .map(|r| {
            end_insertion(&r.tasks, RouteLoad::of(&r.tasks, instance), task, instance)
                .map_or(f64::INFINITY, |(_, d)| d)
        })
        .collect();
    if can_open_route(solution.routes.len(), instance) {
        costs.push(new_route_cost(task, instance));
    }
    regret_from_costs(&costs)
}

fn new_route_cost(key: TaskKey, instance: &Instance) -> f64 {
    let (_, d) = new_route_insertion(key, instance);
    if d <= instance.fleet().flight_range + crate::instance::RANGE_EPS {
        d
    } else {
        f64::INFINITY
    }
}

/// Fails if some task cannot be served by any single vehicle.
pub fn check_task_feasibility(instance: &Instance) -> Result<(), ConstructionError> {
    if let Some(&task) = instance.infeasible_tasks().first() {
        return Err(ConstructionError::InfeasibleTask {
            task,
            round_trip: instance.round_trip(task),
            limit: instance.fleet().flight_range,
        });
    }
    Ok(())
}

/// Runs `rho` randomized regret constructions and returns the shortest.
///
/// Candidate `c` draws from stream `c` of a generator seeded with `seed`, so
/// the first `rho` candidates are identical for any larger `rho`.
pub fn regret_insertion(instance: &Instance, rho: usize, seed: u64) -> Result<Solution, ConstructionError> {
    if rho == 0 {
        return Err(ConstructionError::NoCandidates);
    }
    check_task_feasibility(instance)?;
    let mut best: Option<(f64, Solution)> = None;
    for c in 0..rho {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let s = construct_once(instance, &mut rng)?;
        let f = solution_length(&s, instance);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, s));
        }
    }
    Ok(best.expect("rho >= 1").1)
}

/// One regret construction. Only the column of the route modified last is
/// recomputed each round.
fn construct_once(instance: &Instance, rng: &mut ChaCha8Rng) -> Result<Solution, ConstructionError> {
    let mut remaining: Vec<TaskKey> = instance.task_keys();
    let mut routes: Vec<Vec<TaskRef>> = Vec::new();
    let mut loads: Vec<RouteLoad> = Vec::new();
    // options[t][r]: end insertion of remaining[t] into route r.
    let mut options: Vec<Vec<Option<(TaskRef, f64)>>> = vec![Vec::new(); remaining.len()];
    let fresh: Vec<(TaskRef, f64)> = remaining
        .iter()
        .map(|&k| {
            let (t, _) = new_route_insertion(k, instance);
            (t, new_route_cost(k, instance))
        })
        .collect();
    let mut fresh = fresh;

    while !remaining.is_empty() {
        let open = can_open_route(routes.len(), instance);
        let mut regrets = Vec::with_capacity(remaining.len());
        for (ti, &key) in remaining.iter().enumerate() {
            let mut costs: Vec<f64> = options[ti].iter().map(|o| o.map_or(f64::INFINITY, |(_, d)| d)).collect();
            if open {
                costs.push(fresh[ti].1);
            }
            if costs.iter().all(|c| c.is_infinite()) {
                return Err(ConstructionError::FleetExhausted(key));
            }
            regrets.push(regret_from_costs(&costs));
        }

        let max = regrets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = regrets
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == max || (r - max).abs() <= TIE_EPS)
            .map(|(i, _)| i)
            .collect();
        let ti = *tied.choose(rng).expect("at least one remaining task");

        // Best option; existing routes win ties over opening a new one.
        let mut target: Option<(usize, TaskRef, f64)> = None;
        for (ri, o) in options[ti].iter().enumerate() {
            if let Some((t, d)) = *o {
                if target.is_none_or(|(_, _, bd)| d < bd) {
                    target = Some((ri, t, d));
                }
            }
        }
        let open_fresh = open && target.is_none_or(|(_, _, bd)| fresh[ti].1 < bd);
        let modified = if open_fresh {
            routes.push(vec![fresh[ti].0]);
            loads.push(RouteLoad::of(&routes[routes.len() - 1], instance));
            routes.len() - 1
        } else {
            let (ri, t, _) = target.expect("a finite option exists");
            routes[ri].push(t);
            loads[ri] = RouteLoad::of(&routes[ri], instance);
            ri
        };

        remaining.swap_remove(ti);
        options.swap_remove(ti);
        fresh.swap_remove(ti);
        for (k, opts) in remaining.iter().zip(options.iter_mut()) {
            let o = end_insertion(&routes[modified], loads[modified], *k, instance);
            if modified == opts.len() {
                opts.push(o);
            } else {
                opts[modified] = o;
            }
        }
    }
    Ok(Solution::new(routes.into_iter().map(Route::new).collect()))
}
