//! The adaptive iterated local search loop.
//!
//! Construction, descent and exact route refinement produce the first
//! incumbent. Each iteration then perturbs the incumbent, descends again,
//! optimizes representative points and decides acceptance with an adaptive
//! threshold on the close-enough objective.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::close_enough::{PointCache, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::construction::{regret_insertion, ConstructionError};
use crate::exact_oracle::refine_route_exact;
use crate::geometry::OBJECTIVE_EPS;
use crate::instance::Instance;
use crate::neighborhoods::{vnd, VndParams};
use crate::perturbation::{perturb, DestroyOp, PerturbationConfig, RepairOp};
use crate::solution::{solution_length, PointAssignment, Solution};

/// Search parameters. Serialized names follow the usual parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriverParams {
    #[serde(rename = "MaxIt")]
    pub max_it: usize,
    pub it_max: usize,
    pub rho: usize,
    pub tau_min: usize,
    pub tau_max: usize,
    #[serde(rename = "L_max")]
    pub l_max: usize,
    pub lambda: usize,
    pub beta: usize,
    pub theta: usize,
    pub zeta_min: usize,
    pub zeta_max: usize,
    pub xi: usize,
    pub gamma_max: usize,
    /// Neighborhood evaluations per descent.
    pub vnd_l_max: usize,
    pub threshold_reincrease: bool,
    pub point_tol: f64,
    pub point_max_iter: usize,
    pub seed: u64,
}

impl Default for DriverParams {
    fn default() -> Self {
        Self {
            max_it: 100,
            it_max: 30,
            rho: 10,
            tau_min: 3,
            tau_max: 8,
            l_max: 8,
            lambda: 5,
            beta: 10,
            theta: 10,
            zeta_min: 2,
            zeta_max: 8,
            xi: 5,
            gamma_max: 3,
            vnd_l_max: 200,
            threshold_reincrease: true,
            point_tol: DEFAULT_TOL,
            point_max_iter: DEFAULT_MAX_ITER,
            seed: 0,
        }
    }
}

impl DriverParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        let positive = [
            ("MaxIt", self.max_it),
            ("it_max", self.it_max),
            ("rho", self.rho),
            ("tau_min", self.tau_min),
            ("L_max", self.l_max),
            ("lambda", self.lambda),
            ("beta", self.beta),
            ("theta", self.theta),
            ("zeta_min", self.zeta_min),
            ("xi", self.xi),
            ("gamma_max", self.gamma_max),
            ("vnd_l_max", self.vnd_l_max),
            ("point_max_iter", self.point_max_iter),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(SolveError::Params(format!("{name} must be positive")));
        }
        if self.tau_min > self.tau_max {
            return Err(SolveError::Params("tau_min exceeds tau_max".into()));
        }
        if self.zeta_min > self.zeta_max {
            return Err(SolveError::Params("zeta_min exceeds zeta_max".into()));
        }
        if self.point_tol.is_nan() || self.point_tol <= 0.0 {
            return Err(SolveError::Params("point_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn vnd_params(&self) -> VndParams {
        VndParams {
            l_max: self.vnd_l_max,
            zeta_min: self.zeta_min,
            zeta_max: self.zeta_max,
            xi: self.xi,
            gamma_max: self.gamma_max,
        }
    }

    /// Perturbation settings with the intensity bounds clamped to `tasks`.
    pub fn perturbation_config(&self, tasks: usize) -> PerturbationConfig {
        let tau_max = self.tau_max.min(tasks).max(1);
        PerturbationConfig {
            tau_min: self.tau_min.min(tau_max),
            tau_max,
            lambda: self.lambda,
            ..PerturbationConfig::default()
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("invalid parameters: {0}")]
    Params(String),
}

/// Mutable state of one search run.
#[derive(Debug, Clone)]
pub struct SearchState {
    pub current: Solution,
    pub current_points: PointAssignment,
    pub f_current: f64,
    pub best: Solution,
    pub best_points: PointAssignment,
    pub f_best: f64,
    /// Center objective of the constructed solution.
    pub f_s0: f64,
    pub unimproved: usize,
    pub rejected: usize,
    pub improved: usize,
    pub noim: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub eta: f64,
    pub tau: usize,
    pub iteration: usize,
}

impl SearchState {
    pub fn new(solution: Solution, points: PointAssignment, f: f64, f_s0: f64, tau_min: usize) -> Self {
        Self {
            current: solution.clone(),
            current_points: points.clone(),
            f_current: f,
            best: solution,
            best_points: points,
            f_best: f,
            f_s0,
            unimproved: 0,
            rejected: 0,
            improved: 0,
            noim: 0,
            alpha1: 1.0,
            alpha2: 1.0,
            eta: 2.0,
            tau: tau_min,
            iteration: 0,
        }
    }
}

/// Recomputes both threshold factors and the threshold; applied when a
/// solution is accepted.
pub fn threshold_update(state: &mut SearchState) -> f64 {
    state.alpha1 = if state.f_s0 > 0.0 { state.f_best / state.f_s0 } else { 1.0 };
    state.alpha2 = if state.iteration > 0 { state.improved as f64 / state.iteration as f64 } else { 1.0 };
    state.eta = 1.0 + state.alpha1 * state.alpha2;
    state.eta
}

/// Raises the threshold by `alpha1 * alpha2` once `rejected` reaches a
/// positive multiple of `beta`, and resets the counter.
pub fn threshold_reincrease(state: &mut SearchState, beta: usize) -> f64 {
    if state.rejected > 0 && state.rejected.is_multiple_of(beta) {
        state.eta += state.alpha1 * state.alpha2;
        state.rejected = 0;
    }
    state.eta
}

/// One line of the run log. Iteration 0 describes the initial solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Center objective of the new solution.
    pub f_s_new: f64,
    /// Close-enough objective of the new solution.
    pub f_p_new: f64,
    pub f_p_best: f64,
    pub eta_before: f64,
    pub eta_after: f64,
    pub tau: usize,
    pub accepted: bool,
    pub improved: bool,
    pub reset_to_best: bool,
    pub destroy: Option<DestroyOp>,
    pub repair: Option<RepairOp>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<IterationRecord>,
}

impl RunLog {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(Self { records })
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solution: Solution,
    pub points: PointAssignment,
    /// Close-enough objective of `solution` with `points`.
    pub objective: f64,
    pub log: RunLog,
}

/// Runs the full search on `instance`.
pub fn solve(instance: &Instance, params: &DriverParams) -> Result<SolveResult, SolveError> {
    params.validate()?;
    let vnd_params = params.vnd_params();
    let perturbation = params.perturbation_config(instance.task_count());
    let mut cache = PointCache::new(params.point_tol, params.point_max_iter);
    let mut optimize = |s: &Solution| {
        let r = cache.optimize(s, instance).expect("search solutions reference known tasks");
        (r.points, r.objective)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    // Construction candidates use streams 0..rho of the same seed.
    rng.set_stream(u64::MAX);

    let s0 = regret_insertion(instance, params.rho, params.seed)?;
    let f_s0 = solution_length(&s0, instance);
    let s1 = vnd(&s0, instance, &vnd_params, &mut rng);
    let s = Solution::new(s1.routes.iter().map(|r| refine_route_exact(r, instance)).collect());
    let (p, f_p) = optimize(&s);

    let mut st = SearchState::new(s, p, f_p, f_s0, perturbation.tau_min);
    let mut log = RunLog::default();
    log.records.push(IterationRecord {
        iteration: 0,
        f_s_new: solution_length(&st.current, instance),
        f_p_new: f_p,
        f_p_best: f_p,
        eta_before: st.eta,
        eta_after: st.eta,
        tau: st.tau,
        accepted: true,
        improved: true,
        reset_to_best: false,
        destroy: None,
        repair: None,
    });

    for i in 1..=params.max_it {
        st.iteration = i;
        let eta_before = st.eta;
        let tau = st.tau;
        let perturbed = perturb(&st.current, instance, tau, &perturbation, &mut rng);
        let s_new = vnd(&perturbed.solution, instance, &vnd_params, &mut rng);
        let (p_new, f_new) = optimize(&s_new);

        let improved = f_new < st.f_best - OBJECTIVE_EPS;
        if improved {
            st.best = s_new.clone();
            st.best_points = p_new.clone();
            st.f_best = f_new;
            st.unimproved = 0;
            st.rejected = 0;
            st.improved += 1;
            st.noim = 0;
        } else {
            st.unimproved += 1;
            st.rejected += 1;
            st.noim += 1;
        }

        let accepted = f_new <= eta_before * st.f_best;
        let f_s_new = solution_length(&s_new, instance);
        if accepted {
            st.current = s_new;
            st.current_points = p_new;
            st.f_current = f_new;
            threshold_update(&mut st);
        }
        if params.threshold_reincrease {
            threshold_reincrease(&mut st, params.beta);
        }

        if st.noim >= params.l_max {
            st.tau = (st.tau + 1).min(perturbation.tau_max);
            st.noim = 0;
        } else if st.noim == 0 {
            st.tau = perturbation.tau_min;
        }

        let reset = st.unimproved > 0 && st.unimproved.is_multiple_of(params.theta);
        if reset {
            st.current = st.best.clone();
            st.current_points = st.best_points.clone();
            st.f_current = st.f_best;
        }

        log.records.push(IterationRecord {
            iteration: i,
            f_s_new,
            f_p_new: f_new,
            f_p_best: st.f_best,
            eta_before,
            eta_after: st.eta,
            tau,
            accepted,
            improved,
            reset_to_best: reset,
            destroy: Some(perturbed.destroy),
            repair: Some(perturbed.repair),
        });

        if st.unimproved == params.it_max {
            break;
        }
    }

    Ok(SolveResult { solution: st.best, points: st.best_points, objective: st.f_best, log })
}
