//! Admissible defense strategies and their pointwise characterization.

use std::fmt;

use crate::dynamics::{
    attack_pressure_into, AdjointTrajectory, AttackStrategy, ModelParams, StateTrajectory,
};
use crate::error::{check_len, Error, Result};
use crate::grid::TimeGrid;
use crate::netgraph::Network;
use crate::scalar::Scalar;

/// Box constraints on prevention (`x`) and recovery (`y`) cost rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds<T> {
    pub x_lo: T,
    pub x_hi: T,
    pub y_lo: T,
    pub y_hi: T,
}

impl<T: Scalar> Bounds<T> {
    pub fn new(x_lo: T, x_hi: T, y_lo: T, y_hi: T) -> Result<Self> {
        let b = Self {
            x_lo,
            x_hi,
            y_lo,
            y_hi,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |lo: T, hi: T| lo > T::zero() && lo <= hi && hi.is_finite();
        if !ok(self.x_lo, self.x_hi) {
            return Err(Error::InvalidParameter(format!(
                "prevention bounds need 0 < lo <= hi, got [{}, {}]",
                self.x_lo, self.x_hi
            )));
        }
        if !ok(self.y_lo, self.y_hi) {
            return Err(Error::InvalidParameter(format!(
                "recovery bounds need 0 < lo <= hi, got [{}, {}]",
                self.y_lo, self.y_hi
            )));
        }
        Ok(())
    }

    pub fn x_mid(&self) -> T {
        T::lit(0.5) * (self.x_lo + self.x_hi)
    }

    pub fn y_mid(&self) -> T {
        T::lit(0.5) * (self.y_lo + self.y_hi)
    }

    pub fn contains(&self, x: T, y: T) -> bool {
        x >= self.x_lo && x <= self.x_hi && y >= self.y_lo && y <= self.y_hi
    }

    /// The three static comparison strategies: all-lower, midpoint, all-upper.
    pub fn static_levels(&self) -> [StaticLevel<T>; 3] {
        [
            StaticLevel {
                label: "static-lower",
                x: self.x_lo,
                y: self.y_lo,
            },
            StaticLevel {
                label: "static-mid",
                x: self.x_mid(),
                y: self.y_mid(),
            },
            StaticLevel {
                label: "static-upper",
                x: self.x_hi,
                y: self.y_hi,
            },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaticLevel<T> {
    pub label: &'static str,
    pub x: T,
    pub y: T,
}

/// Prevention rates `x_i(t_k)` and recovery rates `y_i(t_k)` on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrajectory<T> {
    x: TimeGrid<T>,
    y: TimeGrid<T>,
}

impl<T: Scalar> ControlTrajectory<T> {
    pub fn new(x: TimeGrid<T>, y: TimeGrid<T>) -> Result<Self> {
        x.same_shape(&y, "prevention/recovery grids")?;
        Ok(Self { x, y })
    }

    /// Constant-in-time, uniform-across-nodes strategy on the grid of `params`.
    pub fn constant(
        bounds: &Bounds<T>,
        x_level: T,
        y_level: T,
        params: &ModelParams<T>,
        n: usize,
    ) -> Result<Self> {
        if !bounds.contains(x_level, y_level) {
            return Err(Error::Validation(format!(
                "static levels (x = {x_level}, y = {y_level}) outside the admissible box"
            )));
        }
        let rows = params.steps + 1;
        Ok(Self {
            x: TimeGrid::filled(rows, n, x_level),
            y: TimeGrid::filled(rows, n, y_level),
        })
    }

    pub fn x(&self) -> &TimeGrid<T> {
        &self.x
    }

    pub fn y(&self) -> &TimeGrid<T> {
        &self.y
    }

    pub fn x_mut(&mut self) -> &mut TimeGrid<T> {
        &mut self.x
    }

    pub fn y_mut(&mut self) -> &mut TimeGrid<T> {
        &mut self.y
    }

    /// Number of time samples.
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn nodes(&self) -> usize {
        self.x.cols()
    }

    /// `(1 − ω)·self + ω·target`, entrywise.
    pub fn blend(&self, target: &Self, omega: T) -> Result<Self> {
        self.blend_split(target, omega, omega)
    }

    /// Like [`blend`](Self::blend) with separate weights for `x` and `y`.
    pub fn blend_split(&self, target: &Self, omega_x: T, omega_y: T) -> Result<Self> {
        self.x.same_shape(&target.x, "blended controls")?;
        // Clamped to the segment between the two values so rounding can
        // never leave the admissible box.
        let mix = |a: &TimeGrid<T>, b: &TimeGrid<T>, omega: T| {
            let mut out = a.clone();
            for (o, &v) in out.as_mut_slice().iter_mut().zip(b.as_slice()) {
                let m = *o + omega * (v - *o);
                *o = m.max(o.min(v)).min(o.max(v));
            }
            out
        };
        Ok(Self {
            x: mix(&self.x, &target.x, omega_x),
            y: mix(&self.y, &target.y, omega_y),
        })
    }

    /// `max |other − self| / max(|self|, 1e-12)` over both grids.
    pub fn max_relative_change(&self, other: &Self) -> Result<T> {
        self.x.same_shape(&other.x, "compared controls")?;
        let floor = T::lit(1e-12);
        let rel = |a: &TimeGrid<T>, b: &TimeGrid<T>| {
            a.as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(&old, &new)| (new - old).abs() / old.abs().max(floor))
                .fold(T::zero(), T::max)
        };
        Ok(rel(&self.x, &other.x).max(rel(&self.y, &other.y)))
    }

    /// Number of changes of `y_i` between consecutive grid points, summed over
    /// nodes. Counts chattering of the bang-bang recovery strategy.
    pub fn recovery_switches(&self) -> usize {
        (0..self.nodes())
            .map(|i| {
                (1..self.len())
                    .filter(|&k| self.y.get(k, i) != self.y.get(k - 1, i))
                    .count()
            })
            .sum()
    }
}

/// Static strategy at fixed levels; see [`ControlTrajectory::constant`].
pub fn static_control<T: Scalar>(
    x_level: T,
    y_level: T,
    bounds: &Bounds<T>,
    params: &ModelParams<T>,
    n: usize,
) -> Result<ControlTrajectory<T>> {
    ControlTrajectory::constant(bounds, x_level, y_level, params, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlKind {
    Prevention,
    Recovery,
}

impl fmt::Display for ControlKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlKind::Prevention => f.write_str("prevention"),
            ControlKind::Recovery => f.write_str("recovery"),
        }
    }
}

/// First out-of-bounds entry found by [`validate`], in row-major order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundViolation<T> {
    pub step: usize,
    pub node: usize,
    pub kind: ControlKind,
    pub value: T,
}

impl<T: Scalar> fmt::Display for BoundViolation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} rate {} of node {} at step {} is outside its bounds",
            self.kind, self.value, self.node, self.step
        )
    }
}

/// Checks every entry against the admissible box.
pub fn validate<T: Scalar>(
    u: &ControlTrajectory<T>,
    bounds: &Bounds<T>,
) -> Result<(), BoundViolation<T>> {
    for k in 0..u.len() {
        for i in 0..u.nodes() {
            let (x, y) = (u.x.get(k, i), u.y.get(k, i));
            if !(x >= bounds.x_lo && x <= bounds.x_hi) {
                return Err(BoundViolation {
                    step: k,
                    node: i,
                    kind: ControlKind::Prevention,
                    value: x,
                });
            }
            if !(y >= bounds.y_lo && y <= bounds.y_hi) {
                return Err(BoundViolation {
                    step: k,
                    node: i,
                    kind: ControlKind::Recovery,
                    value: y,
                });
            }
        }
    }
    Ok(())
}

/// Hamiltonian-minimizing prevention rate for a given attack pressure.
///
/// The radicand is floored at zero: when `λ_i·p_i·(1 − C_i) ≤ 0` the
/// Hamiltonian is increasing in `x_i` and the minimizer is `x_lo`.
#[inline]
pub(crate) fn optimal_prevention<T: Scalar>(lambda: T, pressure: T, c: T, bounds: &Bounds<T>) -> T {
    let radicand = (lambda * pressure * (T::one() - c)).max(T::zero());
    radicand.sqrt().min(bounds.x_hi).max(bounds.x_lo)
}

/// Bang-bang recovery rate; `λ_i·C_i = 1` resolves to `y_lo`.
#[inline]
pub(crate) fn optimal_recovery<T: Scalar>(lambda: T, c: T, bounds: &Bounds<T>) -> T {
    if lambda * c > T::one() {
        bounds.y_hi
    } else {
        bounds.y_lo
    }
}

/// Pointwise control characterization at one time instant.
pub fn characterize<T: Scalar>(
    c: &[T],
    lambda: &[T],
    net: &Network,
    atk: &AttackStrategy<T>,
    beta: T,
    bounds: &Bounds<T>,
) -> Result<(Vec<T>, Vec<T>)> {
    let n = net.n();
    check_len("state", n, c.len())?;
    check_len("costate", n, lambda.len())?;
    check_len("attack strategy", n, atk.len())?;
    let mut pressure = vec![T::zero(); n];
    attack_pressure_into(c, net, atk.rates(), beta, &mut pressure);
    let x = (0..n)
        .map(|i| optimal_prevention(lambda[i], pressure[i], c[i], bounds))
        .collect();
    let y = (0..n)
        .map(|i| optimal_recovery(lambda[i], c[i], bounds))
        .collect();
    Ok((x, y))
}

/// Applies [`characterize`] at every grid point.
pub fn characterize_trajectory<T: Scalar>(
    traj: &StateTrajectory<T>,
    adj: &AdjointTrajectory<T>,
    net: &Network,
    atk: &AttackStrategy<T>,
    beta: T,
    bounds: &Bounds<T>,
) -> Result<ControlTrajectory<T>> {
    traj.grid().same_shape(adj.grid(), "state/costate grids")?;
    let n = net.n();
    check_len("state nodes", n, traj.nodes())?;
    check_len("attack strategy", n, atk.len())?;
    let rows = traj.len();
    let mut x = TimeGrid::zeros(rows, n);
    let mut y = TimeGrid::zeros(rows, n);
    let mut pressure = vec![T::zero(); n];
    for k in 0..rows {
        let (c, lambda) = (traj.row(k), adj.row(k));
        attack_pressure_into(c, net, atk.rates(), beta, &mut pressure);
        let (xr, yr) = (x.row_mut(k), y.row_mut(k));
        for i in 0..n {
            xr[i] = optimal_prevention(lambda[i], pressure[i], c[i], bounds);
        }
        for i in 0..n {
            yr[i] = optimal_recovery(lambda[i], c[i], bounds);
        }
    }
    ControlTrajectory::new(x, y)
}
