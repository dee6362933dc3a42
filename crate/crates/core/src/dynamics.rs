//! Expected-state dynamics, their adjoint, and the fixed-step Euler sweeps.
//!
//! The state equation is
//!
//! ```text
//! dC_i/dt = (1/x_i)·[a_i + β·Σ_j a_ji·C_j]·(1 − C_i) − y_i·C_i
//! ```
//!
//! and the costate obeys
//!
//! ```text
//! dλ_i/dt = −w_i + y_i·λ_i + (λ_i/x_i)·[a_i + β·Σ_j a_ji·C_j] − β·Σ_j a_ij·(1 − C_j)·λ_j/x_j
//! ```
//!
//! with `λ(T) = 0`. The bracket `a_i + β·Σ_j a_ji·C_j` appears everywhere and is
//! called the *attack pressure* on node `i`.

use crate::control::ControlTrajectory;
use crate::error::{check_len, Error, Result};
use crate::grid::TimeGrid;
use crate::netgraph::Network;
use crate::scalar::Scalar;

/// Per-node external attack cost rates `a_i ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackStrategy<T>(Vec<T>);

impl<T: Scalar> AttackStrategy<T> {
    pub fn new(rates: Vec<T>) -> Result<Self> {
        if let Some((i, a)) = rates
            .iter()
            .enumerate()
            .find(|(_, a)| !(**a >= T::zero()) || !a.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "attack rate of node {i} must be finite and >= 0, got {a}"
            )));
        }
        Ok(Self(rates))
    }

    pub fn uniform(n: usize, rate: T) -> Result<Self> {
        Self::new(vec![rate; n])
    }

    pub fn rates(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Infection force `β`, horizon `T` and number of grid intervals `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub beta: T,
    pub horizon: T,
    pub steps: usize,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(beta: T, horizon: T, steps: usize) -> Result<Self> {
        let p = Self {
            beta,
            horizon,
            steps,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > T::zero()) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "infection force must be > 0, got {}",
                self.beta
            )));
        }
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "horizon must be > 0, got {}",
                self.horizon
            )));
        }
        if self.steps < 1 {
            return Err(Error::InvalidParameter(
                "need at least one time step".into(),
            ));
        }
        Ok(())
    }

    /// Grid spacing `T / M`.
    pub fn dt(&self) -> T {
        self.horizon / T::from_count(self.steps)
    }

    /// Time of grid row `k`.
    pub fn time(&self, k: usize) -> T {
        T::from_count(k) * self.dt()
    }

    /// Largest tolerated pre-clip excursion outside `[0, 1]`: `10·dt`.
    pub fn clip_tolerance(&self) -> T {
        T::lit(10.0) * self.dt()
    }
}

/// Expected compromise probabilities `C_i(t_k)` on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory<T>(pub(crate) TimeGrid<T>);

/// Costates `λ_i(t_k)` on the time grid; the last row is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointTrajectory<T>(pub(crate) TimeGrid<T>);

macro_rules! trajectory_accessors {
    ($ty:ident) => {
        impl<T: Scalar> $ty<T> {
            pub fn grid(&self) -> &TimeGrid<T> {
                &self.0
            }

            pub fn row(&self, k: usize) -> &[T] {
                self.0.row(k)
            }

            /// Number of time samples, `M + 1`.
            pub fn len(&self) -> usize {
                self.0.rows()
            }

            pub fn is_empty(&self) -> bool {
                self.0.rows() == 0
            }

            pub fn nodes(&self) -> usize {
                self.0.cols()
            }

            pub fn into_grid(self) -> TimeGrid<T> {
                self.0
            }
        }
    };
}

trajectory_accessors!(StateTrajectory);
trajectory_accessors!(AdjointTrajectory);

impl<T: Scalar> StateTrajectory<T> {
    pub fn from_grid(grid: TimeGrid<T>) -> Self {
        Self(grid)
    }
}

impl<T: Scalar> AdjointTrajectory<T> {
    pub fn from_grid(grid: TimeGrid<T>) -> Self {
        Self(grid)
    }
}

/// Loss weights `w_i` (out-degrees) in the scalar type.
pub fn loss_weights<T: Scalar>(net: &Network) -> Vec<T> {
    (0..net.n())
        .map(|i| T::from_count(net.out_degree(i)))
        .collect()
}

/// Writes `a_i + β·Σ_j a_ji·C_j` into `out`.
pub(crate) fn attack_pressure_into<T: Scalar>(
    c: &[T],
    net: &Network,
    atk: &[T],
    beta: T,
    out: &mut [T],
) {
    for (i, p) in out.iter_mut().enumerate() {
        let inflow: T = net.in_neighbors(i).iter().map(|&j| c[j]).sum();
        *p = atk[i] + beta * inflow;
    }
}

/// Attack pressure `a_i + β·Σ_j a_ji·C_j` for every node.
pub fn attack_pressure<T: Scalar>(
    c: &[T],
    net: &Network,
    atk: &AttackStrategy<T>,
    beta: T,
) -> Vec<T> {
    let mut out = vec![T::zero(); c.len()];
    attack_pressure_into(c, net, atk.rates(), beta, &mut out);
    out
}

fn check_node_vectors<T: Scalar>(
    net: &Network,
    atk: &AttackStrategy<T>,
    vecs: &[(&'static str, &[T])],
) -> Result<()> {
    let n = net.n();
    check_len("attack strategy", n, atk.len())?;
    for (what, v) in vecs {
        check_len(what, n, v.len())?;
    }
    Ok(())
}

fn guard_division<T: Scalar>(x: &[T]) -> Result<()> {
    match x.iter().position(|v| *v == T::zero()) {
        Some(node) => Err(Error::DivisionGuard { node }),
        None => Ok(()),
    }
}

fn state_rhs_into<T: Scalar>(c: &[T], x: &[T], y: &[T], pressure: &[T], out: &mut [T]) {
    for i in 0..c.len() {
        out[i] = pressure[i] / x[i] * (T::one() - c[i]) - y[i] * c[i];
    }
}

/// Time derivative of the expected state.
pub fn state_rhs<T: Scalar>(
    c: &[T],
    x: &[T],
    y: &[T],
    net: &Network,
    atk: &AttackStrategy<T>,
    beta: T,
) -> Result<Vec<T>> {
    check_node_vectors(
        net,
        atk,
        &[("state", c), ("prevention", x), ("recovery", y)],
    )?;
    guard_division(x)?;
    let pressure = attack_pressure(c, net, atk, beta);
    let mut out = vec![T::zero(); c.len()];
    state_rhs_into(c, x, y, &pressure, &mut out);
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn adjoint_rhs_into<T: Scalar>(
    lambda: &[T],
    c: &[T],
    x: &[T],
    y: &[T],
    net: &Network,
    pressure: &[T],
    beta: T,
    w: &[T],
    out: &mut [T],
) {
    for i in 0..lambda.len() {
        let spill: T = net
            .out_neighbors(i)
            .iter()
            .map(|&j| (T::one() - c[j]) * lambda[j] / x[j])
            .sum();
        out[i] = -w[i] + y[i] * lambda[i] + lambda[i] / x[i] * pressure[i] - beta * spill;
    }
}

/// Time derivative of the costate.
#[allow(clippy::too_many_arguments)]
pub fn adjoint_rhs<T: Scalar>(
    lambda: &[T],
    c: &[T],
    x: &[T],
    y: &[T],
    net: &Network,
    atk: &AttackStrategy<T>,
    beta: T,
    w: &[T],
) -> Result<Vec<T>> {
    check_node_vectors(
        net,
        atk,
        &[
            ("costate", lambda),
            ("state", c),
            ("prevention", x),
            ("recovery", y),
            ("loss weights", w),
        ],
    )?;
    guard_division(x)?;
    let pressure = attack_pressure(c, net, atk, beta);
    let mut out = vec![T::zero(); lambda.len()];
    adjoint_rhs_into(lambda, c, x, y, net, &pressure, beta, w, &mut out);
    Ok(out)
}

fn check_control_shape<T: Scalar>(
    u: &ControlTrajectory<T>,
    n: usize,
    params: &ModelParams<T>,
) -> Result<()> {
    check_len("control time samples", params.steps + 1, u.len())?;
    check_len("control nodes", n, u.nodes())
}

/// Explicit Euler forward sweep from `c0` under control `u`.
///
/// Each step is clipped to `[0, 1]`; an excursion larger than
/// [`ModelParams::clip_tolerance`] is reported as [`Error::StepSize`].
pub fn forward_integrate<T: Scalar>(
    c0: &[T],
    u: &ControlTrajectory<T>,
    net: &Network,
    atk: &AttackStrategy<T>,
    params: &ModelParams<T>,
) -> Result<StateTrajectory<T>> {
    params.validate()?;
    let n = net.n();
    check_node_vectors(net, atk, &[("initial state", c0)])?;
    check_control_shape(u, n, params)?;
    if let Some(i) = c0.iter().position(|c| !(*c >= T::zero() && *c <= T::one())) {
        return Err(Error::InvalidParameter(format!(
            "initial state of node {i} must lie in [0, 1], got {}",
            c0[i]
        )));
    }
    guard_division(u.x().as_slice())?;

    let dt = params.dt();
    let limit = params.clip_tolerance();
    let mut grid = TimeGrid::zeros(params.steps + 1, n);
    grid.row_mut(0).copy_from_slice(c0);
    let mut pressure = vec![T::zero(); n];
    let mut deriv = vec![T::zero(); n];
    for k in 0..params.steps {
        let (head, tail) = grid.as_mut_slice().split_at_mut((k + 1) * n);
        let cur = &head[k * n..];
        let next = &mut tail[..n];
        attack_pressure_into(cur, net, atk.rates(), params.beta, &mut pressure);
        state_rhs_into(cur, u.x().row(k), u.y().row(k), &pressure, &mut deriv);
        for i in 0..n {
            let v = cur[i] + dt * deriv[i];
            let overshoot = (-v).max(v - T::one()).max(T::zero());
            if overshoot > limit || !v.is_finite() {
                return Err(Error::StepSize {
                    step: k,
                    node: i,
                    overshoot: overshoot.as_f64(),
                    limit: limit.as_f64(),
                });
            }
            next[i] = v.max(T::zero()).min(T::one());
        }
    }
    Ok(StateTrajectory(grid))
}

/// Backward Euler-type sweep for the costate, starting from `λ(T) = 0`.
///
/// `λ(t_k) = λ(t_{k+1}) − dt·adjoint_rhs(λ(t_{k+1}), C(t_{k+1}), u(t_{k+1}))`.
pub fn backward_integrate<T: Scalar>(
    traj: &StateTrajectory<T>,
    u: &ControlTrajectory<T>,
    net: &Network,
    atk: &AttackStrategy<T>,
    params: &ModelParams<T>,
    w: &[T],
) -> Result<AdjointTrajectory<T>> {
    params.validate()?;
    let n = net.n();
    check_node_vectors(net, atk, &[("loss weights", w)])?;
    check_control_shape(u, n, params)?;
    check_len("state time samples", params.steps + 1, traj.len())?;
    check_len("state nodes", n, traj.nodes())?;
    guard_division(u.x().as_slice())?;

    let dt = params.dt();
    let mut grid = TimeGrid::zeros(params.steps + 1, n);
    let mut pressure = vec![T::zero(); n];
    let mut deriv = vec![T::zero(); n];
    for k in (0..params.steps).rev() {
        let c = traj.row(k + 1);
        attack_pressure_into(c, net, atk.rates(), params.beta, &mut pressure);
        let (head, tail) = grid.as_mut_slice().split_at_mut((k + 1) * n);
        let later = &tail[..n];
        adjoint_rhs_into(
            later,
            c,
            u.x().row(k + 1),
            u.y().row(k + 1),
            net,
            &pressure,
            params.beta,
            w,
            &mut deriv,
        );
        for (i, slot) in head[k * n..].iter_mut().enumerate() {
            *slot = later[i] - dt * deriv[i];
        }
    }
    Ok(AdjointTrajectory(grid))
}
