//! Slack minimization over Gaussian state slots with a Nelder-Mead simplex.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{evaluate, evaluate_sides, URReport, UrId};
use crate::error::{Result, UrError};
use crate::kernel::Tolerances;
use crate::quantum::sample::{derive_seed, rng};
use crate::quantum::{gaussian_state, GaussianParams, HilbertDim, Observable, QuantumState, DEFAULT_TAIL_TOL};

/// Objective value assigned to parameters whose state does not fit the truncation.
pub const INFEASIBLE_PENALTY: f64 = 1e6;
/// Window and threshold of the convergence test on the best value.
pub const STALL_WINDOW: usize = 20;
pub const STALL_IMPROVEMENT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Free,
    Fixed(GaussianParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_iterations: usize,
    pub restarts: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            restarts: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeProblem {
    pub ur: UrId,
    pub observables: Vec<Observable>,
    pub slots: Vec<Slot>,
    pub dim: HilbertDim,
    /// Starting point of the first restart, one entry per free slot.
    pub init: Option<Vec<GaussianParams>>,
    pub budget: Budget,
    pub seed: u64,
    pub tol: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizationResult {
    pub ur_id: UrId,
    /// Parameters of every slot at the optimum, fixed slots included.
    pub params: Vec<GaussianParams>,
    pub slack: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub best_restart: usize,
    pub report: URReport,
}

/// Folds `r < 0` into `phi + pi` and wraps `phi` into `[0, 2 pi)`.
fn canonical(p: GaussianParams) -> GaussianParams {
    let (r, phi) = if p.r < 0.0 { (-p.r, p.phi + std::f64::consts::PI) } else { (p.r, p.phi) };
    GaussianParams {
        alpha: p.alpha,
        r,
        phi: phi.rem_euclid(std::f64::consts::TAU),
    }
}

fn unpack(x: &[f64]) -> Vec<GaussianParams> {
    x.chunks(4)
        .map(|c| {
            canonical(GaussianParams {
                alpha: Complex64::new(c[0], c[1]),
                r: c[2],
                phi: c[3],
            })
        })
        .collect()
}

fn pack(params: &[GaussianParams]) -> Vec<f64> {
    params.iter().flat_map(|p| [p.alpha.re, p.alpha.im, p.r, p.phi]).collect()
}

impl MinimizeProblem {
    fn free_count(&self) -> usize {
        self.slots.iter().filter(|s| matches!(s, Slot::Free)).count()
    }

    fn all_params(&self, free: &[GaussianParams]) -> Vec<GaussianParams> {
        let mut it = free.iter();
        self.slots
            .iter()
            .map(|s| match s {
                Slot::Free => *it.next().expect("one parameter set per free slot"),
                Slot::Fixed(p) => *p,
            })
            .collect()
    }

    fn states(&self, params: &[GaussianParams]) -> Result<Vec<QuantumState>> {
        params
            .iter()
            .map(|p| gaussian_state(p, self.dim, DEFAULT_TAIL_TOL).map(QuantumState::from))
            .collect()
    }

    fn objective(&self, x: &[f64]) -> Result<f64> {
        let params = self.all_params(&unpack(x));
        let states = match self.states(&params) {
            Ok(s) => s,
            Err(UrError::Truncation { .. }) | Err(UrError::Input(_)) => return Ok(INFEASIBLE_PENALTY),
            Err(e) => return Err(e),
        };
        let (lhs, rhs) = evaluate_sides(&self.ur, &self.observables, &states, &self.tol)?;
        let f = lhs - rhs;
        Ok(if f.is_finite() { f } else { INFEASIBLE_PENALTY })
    }
}

struct RunOutcome {
    x: Vec<f64>,
    value: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
}

fn stalled(history: &[f64]) -> bool {
    history.len() > STALL_WINDOW && history[history.len() - 1 - STALL_WINDOW] - history[history.len() - 1] < STALL_IMPROVEMENT
}

/// Nelder-Mead with standard coefficients. Stops when the best value has
/// stalled and the simplex values have collapsed, or when the budget runs out.
fn nelder_mead<F>(f: F, x0: &[f64], step: f64, max_iterations: usize) -> Result<RunOutcome>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let k = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| -> Result<f64> {
        evaluations += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
    simplex.push((x0.to_vec(), eval(x0)?));
    for i in 0..k {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x)?;
        simplex.push((x, v));
    }
    let mut history = Vec::with_capacity(max_iterations);
    let mut iterations = 0;
    while iterations < max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        history.push(simplex[0].1);
        let spread = simplex[k].1 - simplex[0].1;
        if stalled(&history) && spread <= 1e-12 * simplex[0].1.abs().max(1.0) {
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..k).map(|j| simplex[..k].iter().map(|p| p.0[j]).sum::<f64>() / k as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..k).map(|j| centroid[j] + t * (simplex[k].0[j] - centroid[j])).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe)?;
            simplex[k] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[k - 1].1 {
            simplex[k] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[k].1 {
                let xc = along(-0.5);
                let fc = eval(&xc)?;
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc)?;
                (xc, fc)
            };
            if fc < fr.min(simplex[k].1) {
                simplex[k] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = (0..k).map(|j| best[j] + 0.5 * (p.0[j] - best[j])).collect();
                    let v = eval(&x)?;
                    *p = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    history.push(simplex[0].1);
    let converged = stalled(&history);
    let (x, value) = simplex.swap_remove(0);
    Ok(RunOutcome {
        x,
        value,
        iterations,
        evaluations,
        converged,
    })
}

fn random_start(free: usize, seed: u64) -> Vec<GaussianParams> {
    let mut g = rng(seed);
    (0..free)
        .map(|_| GaussianParams {
            alpha: Complex64::new(g.random_range(-1.0..1.0), g.random_range(-1.0..1.0)),
            r: g.random_range(0.0..0.6),
            phi: g.random_range(0.0..std::f64::consts::TAU),
        })
        .collect()
}

/// Minimizes the slack of `problem.ur` over the free Gaussian slots. Restarts
/// run in parallel; the best restart (lowest index on ties) is returned.
pub fn minimize_slack(problem: &MinimizeProblem) -> Result<MinimizationResult> {
    let free = problem.free_count();
    if free == 0 {
        return Err(UrError::input("minimization needs at least one free slot"));
    }
    if let Some(init) = &problem.init {
        if init.len() != free {
            return Err(UrError::input(format!("init has {} entries for {free} free slots", init.len())));
        }
    }
    let restarts = problem.budget.restarts.max(1);
    let outcomes: Vec<Result<RunOutcome>> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let start = match (&problem.init, k) {
                (Some(init), 0) => init.clone(),
                _ => random_start(free, derive_seed(problem.seed, k as u64)),
            };
            nelder_mead(|x| problem.objective(x), &pack(&start), 0.25, problem.budget.max_iterations)
        })
        .collect();
    let mut best: Option<(usize, RunOutcome)> = None;
    let mut evaluations = 0;
    for (k, o) in outcomes.into_iter().enumerate() {
        let o = o?;
        evaluations += o.evaluations;
        if best.as_ref().is_none_or(|(_, b)| o.value < b.value) {
            best = Some((k, o));
        }
    }
    let (best_restart, run) = best.expect("at least one restart");
    let params = problem.all_params(&unpack(&run.x));
    let states = problem.states(&params)?;
    let report = evaluate(&problem.ur, &problem.observables, &states, &problem.tol)?;
    Ok(MinimizationResult {
        ur_id: problem.ur,
        params,
        slack: report.slack,
        iterations: run.iterations,
        evaluations,
        converged: run.converged,
        best_restart,
        report,
    })
}
