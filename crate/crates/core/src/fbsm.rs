//! Forward–backward sweep for the optimal defense problem.
//!
//! Each sweep integrates the state forward under the current strategy, the
//! costate backward, recomputes the pointwise Hamiltonian minimizer and moves
//! the strategy toward it, with weight `ω_x` for prevention and `ω_y` for
//! recovery. A step that raises `J` is retried with both weights halved, so
//! the accepted objective values never increase.
//!
//! The recovery rate enters the Hamiltonian linearly. Its minimizer is
//! bang-bang, and on singular arcs (where `λ_i·C_i ≈ 1`) it flips between the
//! bounds from sweep to sweep. `ω_y` is therefore halved whenever a window of
//! `stall_patience` sweeps fails to halve the strategy change, which turns
//! the `y` update into a Frank–Wolfe step with decaying step size and lets the
//! blend settle on an interior singular value. `ω_x` recovers after rejected
//! steps. Once the main loop stops, a few prevention-only sweeps with full
//! steps put `x` exactly on its (smooth) characterization.
//!
//! The returned strategy is the final iterate, together with its own state
//! and costate trajectories. [`SolveReport::hamiltonian_gap`] measures how
//! far it is from minimizing the Hamiltonian pointwise.

use crate::control::{characterize_trajectory, validate, Bounds, ControlTrajectory};
use crate::dynamics::{
    attack_pressure, backward_integrate, forward_integrate, loss_weights, AdjointTrajectory,
    AttackStrategy, ModelParams, StateTrajectory,
};
use crate::error::{check_len, Error, Result};
use crate::metrics::{
    curves, hamiltonian_node_term, objective, DiagnosticCurves, ObjectiveBreakdown,
};
use crate::netgraph::Network;
use crate::scalar::{trapezoid, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Initial blend weight `ω ∈ (0, 1]`.
    pub relaxation: T,
    /// Stop once the relative change of the strategy is at most `tol`.
    pub tol: T,
    pub max_iters: usize,
    /// Length of the window over which the strategy change must halve before
    /// the recovery weight is halved.
    pub stall_patience: usize,
    /// Maximum prevention-only sweeps after the main loop.
    pub polish_iters: usize,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            relaxation: T::lit(0.5),
            tol: T::lit(1e-4),
            max_iters: 500,
            stall_patience: 10,
            polish_iters: 200,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.relaxation > T::zero() && self.relaxation <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "relaxation must lie in (0, 1], got {}",
                self.relaxation
            )));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be > 0, got {}",
                self.tol
            )));
        }
        if self.max_iters < 1 {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        if self.stall_patience < 1 {
            return Err(Error::InvalidParameter(
                "stall_patience must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of [`solve`].
#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub u_star: ControlTrajectory<T>,
    pub c_star: StateTrajectory<T>,
    pub lambda_star: AdjointTrajectory<T>,
    pub j_star: T,
    pub loss_star: T,
    pub cost_star: T,
    pub curves: DiagnosticCurves<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative strategy change of every accepted sweep.
    pub residual_history: Vec<T>,
    /// Objective after every accepted sweep.
    pub objective_history: Vec<T>,
    /// Final recovery blend weight after step-halving.
    pub final_relaxation: T,
    /// Prevention-only sweeps run after the main loop.
    pub polish_sweeps: usize,
    /// Grid changes of the bang-bang recovery strategy obtained by
    /// characterizing the returned state and costate (chattering count).
    pub recovery_switches: usize,
    /// `∫ Σ_i [h_i(u*) − h_i(û)] dt ≥ 0`, where `h_i` is node `i`'s share of the
    /// Hamiltonian and `û` its pointwise minimizer along `(C*, λ*)`. Zero iff
    /// `u*` satisfies the characterization everywhere.
    pub hamiltonian_gap: T,
}

impl<T: Scalar> SolveReport<T> {
    pub fn objective(&self) -> ObjectiveBreakdown<T> {
        ObjectiveBreakdown {
            loss: self.loss_star,
            cost: self.cost_star,
            j: self.j_star,
        }
    }
}

/// Constant strategy at the midpoint of the admissible box.
pub fn initial_guess<T: Scalar>(
    bounds: &Bounds<T>,
    params: &ModelParams<T>,
    n: usize,
) -> ControlTrajectory<T> {
    ControlTrajectory::constant(bounds, bounds.x_mid(), bounds.y_mid(), params, n)
        .expect("box midpoint is admissible")
}

/// Everything that stays fixed across sweeps.
struct Problem<'a, T> {
    net: &'a Network,
    atk: &'a AttackStrategy<T>,
    params: &'a ModelParams<T>,
    bounds: &'a Bounds<T>,
    c0: &'a [T],
    w: Vec<T>,
}

struct Evaluated<T> {
    u: ControlTrajectory<T>,
    c: StateTrajectory<T>,
    obj: ObjectiveBreakdown<T>,
}

impl<T: Scalar> Problem<'_, T> {
    fn evaluate(&self, u: ControlTrajectory<T>) -> Result<Evaluated<T>> {
        let c = forward_integrate(self.c0, &u, self.net, self.atk, self.params)?;
        let obj = objective(&c, &u, &self.w, self.params)?;
        Ok(Evaluated { u, c, obj })
    }

    fn costate(&self, e: &Evaluated<T>) -> Result<AdjointTrajectory<T>> {
        backward_integrate(&e.c, &e.u, self.net, self.atk, self.params, &self.w)
    }

    fn characterize(
        &self,
        e: &Evaluated<T>,
        adj: &AdjointTrajectory<T>,
    ) -> Result<ControlTrajectory<T>> {
        characterize_trajectory(&e.c, adj, self.net, self.atk, self.params.beta, self.bounds)
    }
}

/// Solves the optimal defense problem from the midpoint initial guess.
pub fn solve<T: Scalar>(
    net: &Network,
    atk: &AttackStrategy<T>,
    params: &ModelParams<T>,
    bounds: &Bounds<T>,
    c0: &[T],
    cfg: &SolverConfig<T>,
) -> Result<SolveReport<T>> {
    let guess = initial_guess(bounds, params, net.n());
    solve_from(net, atk, params, bounds, c0, cfg, guess)
}

/// Like [`solve`] but starts the sweep from `start`.
pub fn solve_from<T: Scalar>(
    net: &Network,
    atk: &AttackStrategy<T>,
    params: &ModelParams<T>,
    bounds: &Bounds<T>,
    c0: &[T],
    cfg: &SolverConfig<T>,
    start: ControlTrajectory<T>,
) -> Result<SolveReport<T>> {
    params.validate()?;
    bounds.validate()?;
    cfg.validate()?;
    check_len("initial state", net.n(), c0.len())?;
    check_len("attack strategy", net.n(), atk.len())?;
    if let Err(v) = validate(&start, bounds) {
        return Err(Error::Validation(format!("starting strategy: {v}")));
    }
    let problem = Problem {
        net,
        atk,
        params,
        bounds,
        c0,
        w: loss_weights(net),
    };

    let min_omega = T::lit(1e-12);
    let half = T::lit(0.5);
    let mut omega_x = cfg.relaxation;
    let mut omega_y = cfg.relaxation;
    let mut current = problem.evaluate(start)?;
    let mut residuals = Vec::new();
    let mut objectives = Vec::new();
    let mut converged = false;
    let mut best_change = T::infinity();
    let mut window_ref = T::infinity();
    let mut window_len = 0usize;

    while residuals.len() < cfg.max_iters {
        let adj = problem.costate(&current)?;
        let target = problem.characterize(&current, &adj)?;
        let next = loop {
            let candidate = problem.evaluate(current.u.blend_split(&target, omega_x, omega_y)?)?;
            if candidate.obj.j <= current.obj.j || omega_x.max(omega_y) <= min_omega {
                break candidate;
            }
            omega_x = (omega_x * half).max(min_omega);
            omega_y = (omega_y * half).max(min_omega);
        };
        let change = current.u.max_relative_change(&next.u)?;
        residuals.push(change);
        objectives.push(next.obj.j);
        current = next;
        if change <= cfg.tol {
            converged = true;
            break;
        }
        // The prevention weight recovers after a rejected step; the recovery
        // weight only shrinks, and does so whenever a whole window of sweeps
        // fails to halve the smallest change seen before it.
        omega_x = (omega_x + omega_x).min(cfg.relaxation);
        best_change = best_change.min(change);
        window_len += 1;
        if window_len >= cfg.stall_patience {
            if !(best_change <= half * window_ref) {
                omega_y = (omega_y * half).max(min_omega);
            }
            window_ref = best_change;
            window_len = 0;
        }
    }

    let polish_sweeps = polish_prevention(&problem, &mut current, cfg)?;

    let lambda = problem.costate(&current)?;
    let target = problem.characterize(&current, &lambda)?;
    let gap = hamiltonian_gap(&current, &lambda, &target, &problem);
    let cv = curves(&current.c, &current.u, &problem.w, params)?;
    Ok(SolveReport {
        recovery_switches: target.recovery_switches(),
        hamiltonian_gap: gap,
        j_star: current.obj.j,
        loss_star: current.obj.loss,
        cost_star: current.obj.cost,
        u_star: current.u,
        c_star: current.c,
        lambda_star: lambda,
        curves: cv,
        iterations: residuals.len(),
        converged,
        residual_history: residuals,
        objective_history: objectives,
        final_relaxation: omega_y,
        polish_sweeps,
    })
}

/// Holds `y` fixed and replaces `x` by its characterization until `x` stops
/// moving. The prevention rate enters the Hamiltonian smoothly, so these
/// full steps settle it onto its stationarity condition without disturbing
/// the recovery rate. A step that raises `J` ends the phase.
fn polish_prevention<T: Scalar>(
    problem: &Problem<'_, T>,
    current: &mut Evaluated<T>,
    cfg: &SolverConfig<T>,
) -> Result<usize> {
    let tol = T::epsilon().sqrt() * T::epsilon().powf(T::lit(0.25));
    for sweep in 0..cfg.polish_iters {
        let adj = problem.costate(current)?;
        let target = problem.characterize(current, &adj)?;
        let candidate = problem.evaluate(current.u.blend_split(&target, T::one(), T::zero())?)?;
        let change = current.u.max_relative_change(&candidate.u)?;
        if candidate.obj.j > current.obj.j + tol * current.obj.j.abs() {
            return Ok(sweep);
        }
        *current = candidate;
        if change <= tol {
            return Ok(sweep + 1);
        }
    }
    Ok(cfg.polish_iters)
}

fn hamiltonian_gap<T: Scalar>(
    e: &Evaluated<T>,
    lambda: &AdjointTrajectory<T>,
    target: &ControlTrajectory<T>,
    problem: &Problem<'_, T>,
) -> T {
    let samples: Vec<T> = (0..e.u.len())
        .map(|k| {
            let c = e.c.row(k);
            let l = lambda.row(k);
            let p = attack_pressure(c, problem.net, problem.atk, problem.params.beta);
            (0..c.len())
                .map(|i| {
                    let h = |x: T, y: T| hamiltonian_node_term(x, y, l[i], c[i], p[i]);
                    h(e.u.x().get(k, i), e.u.y().get(k, i))
                        - h(target.x().get(k, i), target.y().get(k, i))
                })
                .sum()
        })
        .collect();
    trapezoid(&samples, problem.params.dt())
}
