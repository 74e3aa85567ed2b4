//! Properties of the search loop read back from its run log.

mod common;

use cegrp::driver::{solve, DriverParams, RunLog};
use cegrp::instance::generate_instance;
use cegrp::solution::{total_distance, validate, validate_points};
use common::{medium_params, tiny_params};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn run_log_invariants(
        seed in 0u64..1000, nodes in 1usize..6, edges in 0usize..8, radius in 0.0f64..80.0,
        max_it in 5usize..60, it_max in 3usize..20, beta in 1usize..6, reincrease: bool,
    ) {
        let inst = generate_instance(seed, &tiny_params(nodes, edges, radius)).unwrap();
        let params = DriverParams { seed, max_it, it_max, beta, theta: 4, l_max: 3, threshold_reincrease: reincrease, ..DriverParams::default() };
        let res = solve(&inst, &params).unwrap();
        let recs = &res.log.records;

        prop_assert!(!recs.is_empty() && recs.len() <= max_it + 1);
        for (i, r) in recs.iter().enumerate() {
            prop_assert_eq!(r.iteration, i);
            prop_assert!(r.eta_after >= 1.0 && r.eta_before >= 1.0);
            prop_assert!(r.f_p_new <= r.f_s_new + 1e-6, "disks never lengthen a tour");
        }
        let tau_hi = params.tau_max.min(inst.task_count());
        let tau_lo = params.tau_min.min(tau_hi);
        let mut unimproved = 0;
        for w in recs.windows(2) {
            let (prev, r) = (&w[0], &w[1]);
            prop_assert!(r.tau >= tau_lo && r.tau <= tau_hi);
            if r.improved {
                prop_assert!(r.f_p_new < prev.f_p_best - 1e-9);
                prop_assert_eq!(r.f_p_best, r.f_p_new);
                unimproved = 0;
            } else {
                prop_assert_eq!(r.f_p_best, prev.f_p_best);
                unimproved += 1;
            }
            // Acceptance uses the threshold in force when the candidate was built.
            prop_assert_eq!(r.accepted, r.f_p_new <= r.eta_before * r.f_p_best);
            prop_assert_eq!(r.reset_to_best, unimproved > 0 && unimproved % params.theta == 0);
            if !reincrease && !r.accepted {
                prop_assert_eq!(r.eta_after, r.eta_before);
            }
        }
        let stopped_early = recs.len() < max_it + 1;
        prop_assert_eq!(stopped_early, unimproved == it_max && recs.len() < max_it + 1);
        if stopped_early {
            prop_assert_eq!(unimproved, it_max);
        }

        let last = recs.last().unwrap();
        prop_assert_eq!(res.objective, last.f_p_best);
        prop_assert!(validate(&res.solution, &inst).is_ok());
        prop_assert!(validate_points(&res.solution, &inst, &res.points).is_ok());
        let recomputed = total_distance(&res.solution, &inst, Some(&res.points)).unwrap();
        prop_assert!((recomputed - res.objective).abs() <= 1e-9 * res.objective.max(1.0));
        prop_assert_eq!(RunLog::from_jsonl(&res.log.to_jsonl()).unwrap(), res.log.clone());
    }
}

#[test]
fn seeds_change_the_trajectory() {
    let inst = generate_instance(3, &medium_params(30.0)).unwrap();
    let a = solve(&inst, &DriverParams { seed: 1, ..DriverParams::default() }).unwrap();
    let b = solve(&inst, &DriverParams { seed: 2, ..DriverParams::default() }).unwrap();
    assert_ne!(a.log.to_jsonl(), b.log.to_jsonl());
}

#[test]
fn fleet_cap_is_honored() {
    let base = generate_instance(17, &medium_params(25.0)).unwrap();
    let free = solve(&base, &DriverParams::default()).unwrap();
    let cap = free.solution.routes.len() as u32 + 1;
    let capped = base.with_fleet(cegrp::FleetSpec { max_vehicles: Some(cap), ..*base.fleet() });
    let r = solve(&capped, &DriverParams { seed: 5, ..DriverParams::default() }).unwrap();
    assert!(r.solution.routes.len() <= cap as usize);
    assert!(validate(&r.solution, &capped).is_ok());
}

#[test]
fn impossible_fleet_cap_is_reported() {
    let mut params = tiny_params(3, 0, 10.0);
    params.fleet = cegrp::FleetSpec { flight_range: 3000.0, node_capacity: 1, max_vehicles: Some(2) };
    let inst = generate_instance(4, &params).unwrap();
    let err = solve(&inst, &DriverParams::default()).unwrap_err();
    assert!(matches!(
        err,
        cegrp::driver::SolveError::Construction(cegrp::construction::ConstructionError::FleetExhausted(_))
    ));
}
