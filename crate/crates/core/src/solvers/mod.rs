//! Riemannian solvers: steepest descent (RSD), conjugate gradient (RCG),
//! trust region (RTR) with a truncated-CG subproblem solver, and stochastic
//! gradient (RSGD).
//!
//! Solvers are generic over [`Objective`]; swapping the geometry changes no
//! solver code path except through that interface. A run is single-threaded
//! and owns its iterate; traces are fully determined by config and seed.

mod tcg;

pub use tcg::{truncated_cg, TcgReason, TcgResult};

use crate::manifold::{Objective, StochasticObjective, TangentArith};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStep {
    /// Start each line search from `initial_step`.
    Fixed,
    /// Start from the quadratic-model minimizer along the direction,
    /// `-<g,d>/<d,H d>`, falling back to `initial_step` when curvature is
    /// not positive. On a quadratic cost this makes the line search exact.
    QuadraticModel,
}

#[derive(Debug, Clone)]
pub struct LineSearchConfig {
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub sufficient_decrease: f64,
    pub max_backtracks: usize,
    pub trial: TrialStep,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            backtrack_factor: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 50,
            trial: TrialStep::Fixed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrConfig {
    pub delta0: f64,
    pub delta_max: f64,
    /// Step acceptance threshold for the agreement ratio; at most 1/4.
    pub rho_accept: f64,
    pub kappa_tcg: f64,
    pub theta_tcg: f64,
    pub max_inner: usize,
}

impl TrConfig {
    /// Defaults scaled to the problem: `delta_max = 10 sqrt(n)` for matrix
    /// dimension `n`, `delta0 = delta_max / 8`, inner budget equal to the
    /// manifold dimension.
    pub fn for_dims(matrix_dim: usize, manifold_dim: usize) -> Self {
        let delta_max = 10.0 * (matrix_dim as f64).sqrt();
        Self {
            delta0: delta_max / 8.0,
            delta_max,
            rho_accept: 0.1,
            kappa_tcg: 0.1,
            theta_tcg: 1.0,
            max_inner: manifold_dim,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SgdConfig {
    pub batch_size: usize,
    pub eta0: f64,
    /// Step decay: `eta_t = eta0 / (1 + eta0 * decay * t)`.
    pub decay: f64,
    /// Seed for the batch schedule.
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            batch_size: 50,
            eta0: 0.1,
            decay: 0.01,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_outer_iters: usize,
    /// Stop when the Riemannian gradient norm drops to this value.
    pub grad_tol: f64,
    /// Wall-clock budget in seconds.
    pub max_time: f64,
    pub line_search: LineSearchConfig,
    pub tr: TrConfig,
    pub sgd: SgdConfig,
}

impl SolverConfig {
    pub fn for_dims(matrix_dim: usize, manifold_dim: usize) -> Self {
        Self {
            max_outer_iters: 500,
            grad_tol: 1e-10,
            max_time: f64::INFINITY,
            line_search: LineSearchConfig::default(),
            tr: TrConfig::for_dims(matrix_dim, manifold_dim),
            sgd: SgdConfig::default(),
        }
    }

    fn validate(&self) {
        assert!(self.max_outer_iters > 0);
        assert!(self.grad_tol >= 0.0);
        assert!(self.tr.rho_accept > 0.0 && self.tr.rho_accept <= 0.25);
        assert!(self.line_search.backtrack_factor > 0.0 && self.line_search.backtrack_factor < 1.0);
        assert!(
            self.line_search.sufficient_decrease > 0.0 && self.line_search.sufficient_decrease < 1.0
        );
    }
}

/// Per-iteration log row. `cum_inner_iters` counts truncated-CG iterations
/// for RTR and equals the outer iteration otherwise; convergence plots for
/// RTR use it as the x-axis.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    pub outer_iter: usize,
    pub cum_inner_iters: usize,
    pub wall_time: f64,
    pub loss: f64,
    /// `||X_t - X*||_F`, NaN when the minimizer is unknown.
    pub dist_to_sol: f64,
    pub egrad_mod_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    GradTol,
    MaxIters,
    MaxTime,
    /// Line search exhausted its backtracking budget; the best iterate so
    /// far is returned.
    Stalled,
    Failed(String),
}

#[derive(Debug)]
pub struct SolveResult<P> {
    pub x: P,
    pub traces: Vec<TraceRecord>,
    pub status: SolveStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineSearchError {
    /// `<grad, direction>` was not negative; RCG restarts on this signal.
    NotDescent,
    /// All backtracks failed the sufficient-decrease test.
    Exhausted,
}

#[derive(Debug)]
pub struct LineSearchOutcome<P> {
    pub step: f64,
    pub point: P,
    pub cost: f64,
    pub backtracks: usize,
}

/// Armijo backtracking along `direction` from `x`.
///
/// Accepts the first step with
/// `f(Exp_x(t d)) <= f(x) + c1 t <grad, d>`; step failures from the
/// geometry (e.g. the BW cone boundary) count as backtracks.
pub fn armijo_backtrack<O: Objective>(
    obj: &O,
    x: &O::Point,
    cost_x: f64,
    direction: &O::Tangent,
    slope: f64,
    trial_step: f64,
    ls: &LineSearchConfig,
) -> Result<LineSearchOutcome<O::Point>, LineSearchError> {
    if !(slope < 0.0) {
        return Err(LineSearchError::NotDescent);
    }
    let mut t = trial_step;
    for backtracks in 0..=ls.max_backtracks {
        if let Ok(point) = obj.retract(x, &direction.scaled(t)) {
            let cost = obj.cost(&point);
            if cost.is_finite() && cost <= cost_x + ls.sufficient_decrease * t * slope {
                return Ok(LineSearchOutcome {
                    step: t,
                    point,
                    cost,
                    backtracks,
                });
            }
        }
        t *= ls.backtrack_factor;
    }
    Err(LineSearchError::Exhausted)
}

fn record<O: Objective>(
    obj: &O,
    x: &O::Point,
    outer: usize,
    cum_inner: usize,
    start: Instant,
) -> TraceRecord {
    let obs = obj.observe(x);
    TraceRecord {
        outer_iter: outer,
        cum_inner_iters: cum_inner,
        wall_time: start.elapsed().as_secs_f64(),
        loss: obs.loss,
        dist_to_sol: obs.dist_to_sol,
        egrad_mod_norm: obs.egrad_mod_norm,
    }
}

/// Chooses the line-search starting step.
fn trial_step<O: Objective>(
    obj: &O,
    x: &O::Point,
    direction: &O::Tangent,
    slope: f64,
    ls: &LineSearchConfig,
) -> f64 {
    match ls.trial {
        TrialStep::Fixed => ls.initial_step,
        TrialStep::QuadraticModel => match obj.hess_vec(x, direction) {
            Ok(hd) => {
                let curvature = obj.inner(x, direction, &hd);
                if curvature > 0.0 && curvature.is_finite() {
                    -slope / curvature
                } else {
                    ls.initial_step
                }
            }
            Err(_) => ls.initial_step,
        },
    }
}

/// Riemannian steepest descent: `x_{t+1} = Exp_x(-eta_t grad f(x_t))` with
/// Armijo backtracking.
pub fn rsd_solve<O: Objective>(
    obj: &O,
    config: &SolverConfig,
    x0: O::Point,
) -> SolveResult<O::Point> {
    config.validate();
    let start = Instant::now();
    let mut x = x0;
    let mut traces = Vec::new();
    let mut cost = obj.cost(&x);
    let mut grad = match obj.grad(&x) {
        Ok(g) => g,
        Err(e) => {
            return SolveResult {
                x,
                traces,
                status: SolveStatus::Failed(e.to_string()),
            }
        }
    };
    traces.push(record(obj, &x, 0, 0, start));
    let mut status = SolveStatus::MaxIters;
    for outer in 1..=config.max_outer_iters {
        if start.elapsed().as_secs_f64() > config.max_time {
            status = SolveStatus::MaxTime;
            break;
        }
        let gnorm = obj.norm(&x, &grad);
        if gnorm <= config.grad_tol {
            status = SolveStatus::GradTol;
            break;
        }
        let direction = grad.scaled(-1.0);
        let slope = -gnorm * gnorm;
        let t0 = trial_step(obj, &x, &direction, slope, &config.line_search);
        match armijo_backtrack(obj, &x, cost, &direction, slope, t0, &config.line_search) {
            Ok(out) => {
                x = out.point;
                cost = out.cost;
            }
            Err(_) => {
                status = SolveStatus::Stalled;
                break;
            }
        }
        grad = match obj.grad(&x) {
            Ok(g) => g,
            Err(e) => {
                status = SolveStatus::Failed(e.to_string());
                break;
            }
        };
        traces.push(record(obj, &x, outer, outer, start));
    }
    SolveResult { x, traces, status }
}

/// Riemannian conjugate gradient with Polak-Ribiere+ beta (clamped at zero,
/// which restarts to steepest descent) and identity vector transport.
///
/// The line search starts from the quadratic-model step so that the method
/// terminates in finitely many iterations on quadratics over flat geometry.
pub fn rcg_solve<O: Objective>(
    obj: &O,
    config: &SolverConfig,
    x0: O::Point,
) -> SolveResult<O::Point> {
    config.validate();
    let mut ls = config.line_search.clone();
    ls.trial = TrialStep::QuadraticModel;
    let start = Instant::now();
    let mut x = x0;
    let mut traces = Vec::new();
    let mut cost = obj.cost(&x);
    let mut grad = match obj.grad(&x) {
        Ok(g) => g,
        Err(e) => {
            return SolveResult {
                x,
                traces,
                status: SolveStatus::Failed(e.to_string()),
            }
        }
    };
    let mut gg = obj.inner(&x, &grad, &grad);
    let mut direction = grad.scaled(-1.0);
    traces.push(record(obj, &x, 0, 0, start));
    let mut status = SolveStatus::MaxIters;
    for outer in 1..=config.max_outer_iters {
        if start.elapsed().as_secs_f64() > config.max_time {
            status = SolveStatus::MaxTime;
            break;
        }
        if gg.max(0.0).sqrt() <= config.grad_tol {
            status = SolveStatus::GradTol;
            break;
        }
        let mut slope = obj.inner(&x, &grad, &direction);
        if slope >= 0.0 {
            // Restart on a non-descent direction.
            direction = grad.scaled(-1.0);
            slope = -gg;
        }
        let t0 = trial_step(obj, &x, &direction, slope, &ls);
        let out = match armijo_backtrack(obj, &x, cost, &direction, slope, t0, &ls) {
            Ok(out) => out,
            Err(_) => {
                status = SolveStatus::Stalled;
                break;
            }
        };
        let x_new = out.point;
        cost = out.cost;
        let grad_new = match obj.grad(&x_new) {
            Ok(g) => g,
            Err(e) => {
                status = SolveStatus::Failed(e.to_string());
                x = x_new;
                break;
            }
        };
        let gg_new = obj.inner(&x_new, &grad_new, &grad_new);
        // PR+ with identity transport of the previous gradient.
        let old_transported = obj.transport(&x, &x_new, &grad);
        let mixed = obj.inner(&x_new, &grad_new, &old_transported);
        let beta = ((gg_new - mixed) / gg).max(0.0);
        let mut dir_new = grad_new.scaled(-1.0);
        dir_new.axpy(beta, &obj.transport(&x, &x_new, &direction));
        x = x_new;
        grad = grad_new;
        gg = gg_new;
        direction = dir_new;
        traces.push(record(obj, &x, outer, outer, start));
    }
    SolveResult { x, traces, status }
}

/// Riemannian trust region with truncated-CG subproblem solves.
///
/// The agreement ratio `rho` drives the classic radius policy: quartered
/// below 1/4, doubled above 3/4 when the step ended on the boundary, and
/// the step is rejected when `rho < rho_accept`. Steps that the geometry
/// rejects (cone boundary) quarter the radius. Every truncated-CG iteration
/// increments the cumulative inner counter; a trace row is written for
/// every outer iteration, accepted or not.
pub fn rtr_solve<O: Objective>(
    obj: &O,
    config: &SolverConfig,
    x0: O::Point,
) -> SolveResult<O::Point> {
    config.validate();
    let start = Instant::now();
    let mut x = x0;
    let mut traces = Vec::new();
    let mut cost = obj.cost(&x);
    let mut grad = match obj.grad(&x) {
        Ok(g) => g,
        Err(e) => {
            return SolveResult {
                x,
                traces,
                status: SolveStatus::Failed(e.to_string()),
            }
        }
    };
    let mut delta = config.tr.delta0.min(config.tr.delta_max);
    let mut cum_inner = 0usize;
    traces.push(record(obj, &x, 0, 0, start));
    let mut status = SolveStatus::MaxIters;
    for outer in 1..=config.max_outer_iters {
        if start.elapsed().as_secs_f64() > config.max_time {
            status = SolveStatus::MaxTime;
            break;
        }
        let gnorm = obj.norm(&x, &grad);
        if gnorm <= config.grad_tol {
            status = SolveStatus::GradTol;
            break;
        }
        let tcg_out = match truncated_cg(
            |u| obj.hess_vec(&x, u),
            |u, v| obj.inner(&x, u, v),
            &grad,
            delta,
            config.tr.kappa_tcg,
            config.tr.theta_tcg,
            config.tr.max_inner,
        ) {
            Ok(out) => out,
            Err(e) => {
                status = SolveStatus::Failed(e.to_string());
                break;
            }
        };
        cum_inner += tcg_out.inner_iters;
        let model_decrease = tcg_out.model_decrease.max(f64::EPSILON * cost.abs().max(1.0));
        match obj.retract(&x, &tcg_out.u) {
            Ok(candidate) => {
                let cost_new = obj.cost(&candidate);
                let rho = if cost_new.is_finite() {
                    (cost - cost_new) / model_decrease
                } else {
                    f64::NEG_INFINITY
                };
                if rho >= config.tr.rho_accept && cost_new <= cost {
                    x = candidate;
                    cost = cost_new;
                    grad = match obj.grad(&x) {
                        Ok(g) => g,
                        Err(e) => {
                            status = SolveStatus::Failed(e.to_string());
                            break;
                        }
                    };
                }
                if rho < 0.25 {
                    delta *= 0.25;
                } else if rho > 0.75 && tcg_out.reason.hit_boundary() {
                    delta = (2.0 * delta).min(config.tr.delta_max);
                }
            }
            Err(e) if e.is_step_failure() => {
                delta *= 0.25;
            }
            Err(e) => {
                status = SolveStatus::Failed(e.to_string());
                break;
            }
        }
        traces.push(record(obj, &x, outer, cum_inner, start));
    }
    SolveResult { x, traces, status }
}

/// Riemannian stochastic gradient with decaying steps
/// `eta_t = eta0 / (1 + eta0 decay t)` over epoch-shuffled minibatches.
///
/// A step that leaves the admissible set halves the step for this
/// iteration only. The batch schedule is driven by a ChaCha stream seeded
/// from the config, so traces are bit-reproducible.
pub fn rsgd_solve<O: StochasticObjective>(
    obj: &O,
    config: &SolverConfig,
    x0: O::Point,
) -> SolveResult<O::Point> {
    config.validate();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.sgd.seed);
    let n_samples = obj.num_samples();
    let batch_size = config.sgd.batch_size.min(n_samples).max(1);
    let mut order: Vec<usize> = (0..n_samples).collect();
    let mut offset = n_samples; // force a shuffle on first use
    let mut x = x0;
    let mut traces = vec![record(obj, &x, 0, 0, start)];
    let mut status = SolveStatus::MaxIters;
    for outer in 1..=config.max_outer_iters {
        if start.elapsed().as_secs_f64() > config.max_time {
            status = SolveStatus::MaxTime;
            break;
        }
        if offset + batch_size > n_samples {
            order.shuffle(&mut rng);
            offset = 0;
        }
        let batch = &order[offset..offset + batch_size];
        offset += batch_size;
        let g = match obj.batch_grad(&x, batch) {
            Ok(g) => g,
            Err(e) => {
                status = SolveStatus::Failed(e.to_string());
                break;
            }
        };
        let t = (outer - 1) as f64;
        let mut eta = config.sgd.eta0 / (1.0 + config.sgd.eta0 * config.sgd.decay * t);
        let mut stepped = false;
        for _ in 0..60 {
            match obj.retract(&x, &g.scaled(-eta)) {
                Ok(next) => {
                    x = next;
                    stepped = true;
                    break;
                }
                Err(e) if e.is_step_failure() => eta *= 0.5,
                Err(e) => {
                    status = SolveStatus::Failed(e.to_string());
                    break;
                }
            }
        }
        if let SolveStatus::Failed(_) = status {
            break;
        }
        if !stepped {
            status = SolveStatus::Stalled;
            break;
        }
        traces.push(record(obj, &x, outer, outer, start));
    }
    SolveResult { x, traces, status }
}
