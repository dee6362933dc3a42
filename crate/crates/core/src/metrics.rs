//! Objective functional, Hamiltonian and the CE/SC diagnostic curves.
//!
//! Every time integral uses the trapezoidal rule on the integration grid, so
//! `CE(T) = J` holds up to rounding.

use crate::control::{Bounds, ControlTrajectory};
use crate::dynamics::{attack_pressure, AttackStrategy, ModelParams, StateTrajectory};
use crate::error::{check_len, Result};
use crate::netgraph::Network;
use crate::scalar::{cumulative_trapezoid, trapezoid, Scalar};

/// Expected loss, control cost and their sum `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveBreakdown<T> {
    pub loss: T,
    pub cost: T,
    pub j: T,
}

/// Cumulative effectiveness and superposed control sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticCurves<T> {
    pub ce: Vec<T>,
    pub sc: Vec<T>,
}

fn check_grid<T: Scalar>(
    traj: &StateTrajectory<T>,
    u: &ControlTrajectory<T>,
    w: &[T],
    params: &ModelParams<T>,
) -> Result<()> {
    check_len("state time samples", params.steps + 1, traj.len())?;
    check_len("control time samples", params.steps + 1, u.len())?;
    check_len("control nodes", traj.nodes(), u.nodes())?;
    check_len("loss weights", traj.nodes(), w.len())
}

fn loss_rate<T: Scalar>(c: &[T], w: &[T]) -> T {
    c.iter().zip(w).map(|(&c, &w)| w * c).sum()
}

fn spending_rate<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&x, &y)| x + y).sum()
}

/// `Σ_i (w_i·C_i + x_i + y_i)`.
pub fn running_cost<T: Scalar>(c: &[T], x: &[T], y: &[T], w: &[T]) -> T {
    loss_rate(c, w) + spending_rate(x, y)
}

pub fn objective<T: Scalar>(
    traj: &StateTrajectory<T>,
    u: &ControlTrajectory<T>,
    w: &[T],
    params: &ModelParams<T>,
) -> Result<ObjectiveBreakdown<T>> {
    check_grid(traj, u, w, params)?;
    let dt = params.dt();
    let losses: Vec<T> = (0..traj.len()).map(|k| loss_rate(traj.row(k), w)).collect();
    let costs: Vec<T> = (0..u.len())
        .map(|k| spending_rate(u.x().row(k), u.y().row(k)))
        .collect();
    let loss = trapezoid(&losses, dt);
    let cost = trapezoid(&costs, dt);
    Ok(ObjectiveBreakdown {
        loss,
        cost,
        j: loss + cost,
    })
}

/// Running cost plus costate-weighted dynamics.
#[allow(clippy::too_many_arguments)]
pub fn hamiltonian<T: Scalar>(
    c: &[T],
    x: &[T],
    y: &[T],
    lambda: &[T],
    net: &Network,
    atk: &AttackStrategy<T>,
    beta: T,
    w: &[T],
) -> Result<T> {
    check_len("costate", c.len(), lambda.len())?;
    check_len("loss weights", c.len(), w.len())?;
    let f = crate::dynamics::state_rhs(c, x, y, net, atk, beta)?;
    let coupling: T = lambda.iter().zip(&f).map(|(&l, &f)| l * f).sum();
    Ok(running_cost(c, x, y, w) + coupling)
}

/// The part of the Hamiltonian that depends on node `i`'s own controls:
/// `x_i + y_i + λ_i·[(p_i/x_i)·(1 − C_i) − y_i·C_i]`, with `p_i` the attack
/// pressure. Differences of this term equal differences of the full
/// Hamiltonian when only `(x_i, y_i)` changes.
pub fn hamiltonian_node_term<T: Scalar>(x: T, y: T, lambda: T, c: T, pressure: T) -> T {
    x + y + lambda * (pressure / x * (T::one() - c) - y * c)
}

/// Attack pressure convenience re-export for Hamiltonian checks.
pub fn pressures<T: Scalar>(c: &[T], net: &Network, atk: &AttackStrategy<T>, beta: T) -> Vec<T> {
    attack_pressure(c, net, atk, beta)
}

pub fn curves<T: Scalar>(
    traj: &StateTrajectory<T>,
    u: &ControlTrajectory<T>,
    w: &[T],
    params: &ModelParams<T>,
) -> Result<DiagnosticCurves<T>> {
    check_grid(traj, u, w, params)?;
    let sc: Vec<T> = (0..u.len())
        .map(|k| spending_rate(u.x().row(k), u.y().row(k)))
        .collect();
    let running: Vec<T> = (0..traj.len())
        .map(|k| loss_rate(traj.row(k), w) + sc[k])
        .collect();
    Ok(DiagnosticCurves {
        ce: cumulative_trapezoid(&running, params.dt()),
        sc,
    })
}

/// `(1 / max(x_hi, y_hi))·∫ ||u(t)||₂² dt`, a lower bound on `J(u)` for every
/// admissible `u`.
pub fn control_energy_bound<T: Scalar>(
    u: &ControlTrajectory<T>,
    bounds: &Bounds<T>,
    params: &ModelParams<T>,
) -> T {
    let sq: Vec<T> = (0..u.len())
        .map(|k| {
            u.x()
                .row(k)
                .iter()
                .chain(u.y().row(k))
                .map(|&v| v * v)
                .sum()
        })
        .collect();
    trapezoid(&sq, params.dt()) / bounds.x_hi.max(bounds.y_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::static_control;
    use crate::grid::TimeGrid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn bounds() -> Bounds<f64> {
        Bounds::new(0.1, 0.7, 0.1, 0.7).unwrap()
    }

    #[test]
    fn objective_of_constants() {
        let p = ModelParams::new(0.001, 20.0, 200).unwrap();
        let traj = StateTrajectory::from_grid(TimeGrid::zeros(201, 1));
        let u = static_control(0.1, 0.1, &bounds(), &p, 1).unwrap();
        let o = objective(&traj, &u, &[0.0], &p).unwrap();
        assert_eq!(o.loss, 0.0);
        assert_relative_eq!(o.cost, 4.0, max_relative = 1e-12);
        assert_relative_eq!(o.j, 4.0, max_relative = 1e-12);

        let p = ModelParams::new(0.001, 2.0, 50).unwrap();
        let traj = StateTrajectory::from_grid(TimeGrid::filled(51, 1, 0.5));
        let u = static_control(0.2, 0.3, &bounds(), &p, 1).unwrap();
        let o = objective(&traj, &u, &[3.0], &p).unwrap();
        assert_relative_eq!(o.loss, 3.0, max_relative = 1e-12);
        assert_relative_eq!(o.cost, 1.0, max_relative = 1e-12);
        assert_relative_eq!(o.j, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn objective_rejects_mismatched_grids() {
        let p = ModelParams::new(0.001, 2.0, 50).unwrap();
        let traj = StateTrajectory::from_grid(TimeGrid::filled(40, 1, 0.5));
        let u = static_control(0.2, 0.3, &bounds(), &p, 1).unwrap();
        assert!(objective(&traj, &u, &[1.0], &p).is_err());
        assert!(curves(&traj, &u, &[1.0], &p).is_err());
    }

    #[test]
    fn running_cost_examples() {
        assert_eq!(
            running_cost(&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0], &[1.0, 2.0]),
            0.0
        );
        let l = running_cost(&[0.5, 0.5], &[0.1, 0.1], &[0.1, 0.1], &[1.0, 2.0]);
        assert_relative_eq!(l, 1.9, max_relative = 1e-14);
    }

    #[test]
    fn hamiltonian_examples() {
        let net = Network::from_edges(1, []).unwrap();
        let atk = AttackStrategy::uniform(1, 0.1).unwrap();
        let h = hamiltonian(&[0.5], &[0.5], &[0.2], &[1.0], &net, &atk, 0.001, &[1.0]).unwrap();
        assert_relative_eq!(h, 1.2, max_relative = 1e-14);
        let h0 = hamiltonian(&[0.5], &[0.5], &[0.2], &[0.0], &net, &atk, 0.001, &[1.0]).unwrap();
        assert_eq!(h0, running_cost(&[0.5], &[0.5], &[0.2], &[1.0]));
    }

    #[test]
    fn curves_of_static_control() {
        let p = ModelParams::new(0.001, 20.0, 100).unwrap();
        let traj = StateTrajectory::from_grid(TimeGrid::filled(101, 100, 0.3));
        let u = static_control(0.1, 0.1, &bounds(), &p, 100).unwrap();
        let w = vec![2.0; 100];
        let cv = curves(&traj, &u, &w, &p).unwrap();
        assert_eq!(cv.ce[0], 0.0);
        assert!(cv.sc.iter().all(|&s| (s - 20.0).abs() < 1e-12));
        let o = objective(&traj, &u, &w, &p).unwrap();
        assert_relative_eq!(*cv.ce.last().unwrap(), o.j, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn lemma_bound_holds_pointwise(
            x in prop::collection::vec(0.1f64..=0.7, 5),
            y in prop::collection::vec(0.1f64..=0.7, 5),
            c in prop::collection::vec(0.0f64..=1.0, 5),
        ) {
            let w = [1.0, 0.0, 3.0, 2.0, 5.0];
            let l = running_cost(&c, &x, &y, &w);
            let sq: f64 = x.iter().chain(&y).map(|v| v * v).sum();
            prop_assert!(l >= sq / 0.7 - 1e-12);
        }

        #[test]
        fn ce_is_nondecreasing(vals in prop::collection::vec(0.0f64..=1.0, 11)) {
            let p = ModelParams::new(0.001, 1.0, 10).unwrap();
            let traj = StateTrajectory::from_grid(TimeGrid::from_rows(vals.iter().map(|&v| vec![v]).collect()).unwrap());
            let u = static_control(0.3, 0.2, &bounds(), &p, 1).unwrap();
            let cv = curves(&traj, &u, &[4.0], &p).unwrap();
            prop_assert!(cv.ce.windows(2).all(|w| w[1] >= w[0]));
            let o = objective(&traj, &u, &[4.0], &p).unwrap();
            prop_assert!((cv.ce[10] - o.j).abs() <= 1e-12 * o.j);
            prop_assert!(o.j >= control_energy_bound(&u, &bounds(), &p) - 1e-12);
        }
    }
}
