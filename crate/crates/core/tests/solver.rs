use aptdefense::control::{static_control, validate, Bounds, ControlTrajectory};
use aptdefense::dynamics::{forward_integrate, loss_weights, AttackStrategy, ModelParams};
use aptdefense::experiments::{run_baseline_compare, NodeValues, ProblemTemplate, OPTIMAL_LABEL};
use aptdefense::fbsm::{initial_guess, solve, solve_from, SolveReport, SolverConfig};
use aptdefense::metrics::objective;
use aptdefense::netgraph::{generate_scale_free, Network};

fn standard_bounds() -> Bounds<f64> {
    Bounds::new(0.1, 0.7, 0.1, 0.7).unwrap()
}

/// A scaled-down version of the standard setup: 30-node scale-free network,
/// T = 10, dt = 0.01.
fn small_instance() -> (Network, AttackStrategy<f64>, ModelParams<f64>, Vec<f64>) {
    let net = generate_scale_free(30, 2, 4).unwrap();
    let atk = AttackStrategy::uniform(30, 0.1).unwrap();
    let params = ModelParams::new(0.001, 10.0, 1000).unwrap();
    (net, atk, params, vec![0.1; 30])
}

fn solve_small() -> SolveReport<f64> {
    let (net, atk, params, c0) = small_instance();
    solve(
        &net,
        &atk,
        &params,
        &standard_bounds(),
        &c0,
        &SolverConfig::default(),
    )
    .unwrap()
}

fn j_of(
    u: &ControlTrajectory<f64>,
    net: &Network,
    atk: &AttackStrategy<f64>,
    params: &ModelParams<f64>,
    c0: &[f64],
) -> f64 {
    let c = forward_integrate(c0, u, net, atk, params).unwrap();
    objective(&c, u, &loss_weights(net), params).unwrap().j
}

#[test]
fn isolated_node_without_attack_spends_lower_bounds() {
    let net = Network::from_edges(1, []).unwrap();
    let atk = AttackStrategy::uniform(1, 0.0).unwrap();
    let params = ModelParams::new(0.001, 20.0, 2000).unwrap();
    let r = solve(
        &net,
        &atk,
        &params,
        &standard_bounds(),
        &[0.0],
        &SolverConfig::default(),
    )
    .unwrap();
    assert!(r.converged);
    assert!((r.j_star - 4.0).abs() <= 4.0 * 1e-3, "J* = {}", r.j_star);
    assert_eq!(r.loss_star, 0.0);
    assert!(r.lambda_star.grid().as_slice().iter().all(|&l| l == 0.0));
}

#[test]
fn initial_guess_is_box_midpoint() {
    let p = ModelParams::new(0.001, 1.0, 10).unwrap();
    let g = initial_guess(&standard_bounds(), &p, 3);
    assert!(g.x().as_slice().iter().all(|&v| (v - 0.4).abs() < 1e-15));
    assert!(g.y().as_slice().iter().all(|&v| (v - 0.4).abs() < 1e-15));
    let degenerate = Bounds::new(0.2, 0.2, 0.3, 0.3).unwrap();
    let g = initial_guess(&degenerate, &p, 3);
    assert!(g.x().as_slice().iter().all(|&v| v == 0.2));
    assert!(g.y().as_slice().iter().all(|&v| v == 0.3));
    assert!(validate(&g, &degenerate).is_ok());
}

#[test]
fn converged_report_is_consistent() {
    let r = solve_small();
    assert!(r.converged);
    assert!(*r.residual_history.last().unwrap() <= 1e-4);
    assert_eq!(r.iterations, r.residual_history.len());
    assert!(validate(&r.u_star, &standard_bounds()).is_ok());
    assert!(r
        .c_star
        .grid()
        .as_slice()
        .iter()
        .all(|&c| (0.0..=1.0).contains(&c)));
    let last = r.lambda_star.len() - 1;
    assert!(r.lambda_star.row(last).iter().all(|&l| l == 0.0));
    assert!((r.j_star - (r.loss_star + r.cost_star)).abs() <= 1e-9 * r.j_star);
    assert!((r.curves.ce.last().unwrap() - r.j_star).abs() <= 1e-9 * r.j_star);
    assert!(r.hamiltonian_gap >= -1e-9);
}

#[test]
fn accepted_objectives_never_increase() {
    let r = solve_small();
    let h = &r.objective_history;
    assert!(
        h.windows(2).all(|w| w[1] <= w[0]),
        "objective rose between sweeps"
    );
    let tail = &h[h.len().saturating_sub(11)..];
    assert!(tail.windows(2).all(|w| w[1] <= w[0] + 1e-6));
}

#[test]
fn every_iterate_stays_admissible() {
    let (net, atk, params, c0) = small_instance();
    let b = standard_bounds();
    for iters in [1, 2, 5, 20] {
        let cfg = SolverConfig {
            max_iters: iters,
            polish_iters: 0,
            ..SolverConfig::default()
        };
        let r = solve(&net, &atk, &params, &b, &c0, &cfg).unwrap();
        assert!(
            validate(&r.u_star, &b).is_ok(),
            "iterate {iters} left the box"
        );
    }
}

#[test]
fn restarting_from_the_solution_is_a_fixed_point() {
    let (net, atk, params, c0) = small_instance();
    let r = solve_small();
    let cfg = SolverConfig {
        relaxation: r.final_relaxation,
        ..SolverConfig::default()
    };
    let again = solve_from(
        &net,
        &atk,
        &params,
        &standard_bounds(),
        &c0,
        &cfg,
        r.u_star.clone(),
    )
    .unwrap();
    assert!(again.converged);
    assert!(again.iterations <= 2, "took {} sweeps", again.iterations);
    assert!((again.j_star - r.j_star).abs() <= 1e-6 * r.j_star);
}

#[test]
fn beats_every_static_baseline() {
    let (net, atk, params, c0) = small_instance();
    let r = solve_small();
    let b = standard_bounds();
    for level in b.static_levels() {
        let u = static_control(level.x, level.y, &b, &params, net.n()).unwrap();
        let j = j_of(&u, &net, &atk, &params, &c0);
        assert!(
            r.j_star < j,
            "{}: optimal {} vs static {}",
            level.label,
            r.j_star,
            j
        );
    }
}

#[test]
fn compare_table_puts_optimal_first() {
    let (net, _, params, _) = small_instance();
    let t = ProblemTemplate {
        attack: NodeValues::Uniform(0.1),
        initial_state: NodeValues::Uniform(0.1),
        params,
        bounds: standard_bounds(),
        solver: SolverConfig::default(),
    };
    let rows = run_baseline_compare(&t.instantiate(net).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0].label, OPTIMAL_LABEL);
    assert_eq!(rows[0].converged, Some(true));
}

/// Perturbing one interior prevention value changes `J` only at second order
/// (relative to the `dt`-weighted first-order term a non-stationary control
/// would show).
#[test]
fn interior_prevention_is_stationary_for_the_discrete_objective() {
    let (net, atk, params, c0) = small_instance();
    let r = solve_small();
    let b = standard_bounds();
    let dt = params.dt();
    let delta = 1e-4;
    let mut checked = 0;
    for k in (50..params.steps - 50).step_by(97) {
        for i in 0..net.n() {
            let x = r.u_star.x().get(k, i);
            if x - delta <= b.x_lo || x + delta >= b.x_hi {
                continue;
            }
            let mut plus = r.u_star.clone();
            plus.x_mut().set(k, i, x + delta);
            let mut minus = r.u_star.clone();
            minus.x_mut().set(k, i, x - delta);
            let slope = (j_of(&plus, &net, &atk, &params, &c0)
                - j_of(&minus, &net, &atk, &params, &c0))
                / (2.0 * delta);
            // A unit slope of H in x moves J by dt per unit of x.
            assert!(slope.abs() <= 0.05 * dt, "k={k} i={i}: dJ/dx = {slope:e}");
            checked += 1;
        }
    }
    assert!(checked > 20);
}

#[test]
fn prevention_at_a_bound_pushes_back() {
    let (net, atk, params, c0) = small_instance();
    let r = solve_small();
    let b = standard_bounds();
    let base = j_of(&r.u_star, &net, &atk, &params, &c0);
    let (delta, dt) = (1e-4, params.dt());
    let mut checked = 0;
    for k in (0..params.steps).step_by(37) {
        for i in 0..net.n() {
            let x = r.u_star.x().get(k, i);
            let dir = if x == b.x_lo {
                1.0
            } else if x == b.x_hi {
                -1.0
            } else {
                continue;
            };
            let mut moved = r.u_star.clone();
            moved.x_mut().set(k, i, x + dir * delta);
            // The solver uses the continuous costate, so where the unclipped
            // optimum sits right at the bound the discrete slope may be off
            // by O(dt); compare against the unit-slope change `delta·dt`.
            let change = j_of(&moved, &net, &atk, &params, &c0) - base;
            assert!(change >= -0.05 * delta * dt, "k={k} i={i}: {change:e}");
            checked += 1;
        }
    }
    assert!(checked > 0);
}

/// Explicit Euler makes the objective of a fixed strategy first order in
/// `dt`; the optimal objective is stable across grids to well within that.
#[test]
fn objective_converges_at_first_order_in_dt() {
    let net = generate_scale_free(10, 2, 2).unwrap();
    let atk = AttackStrategy::uniform(10, 0.1).unwrap();
    let c0 = vec![0.1; 10];
    let b = standard_bounds();
    let grids = [250, 500, 1000, 2000];
    let fixed: Vec<f64> = grids
        .iter()
        .map(|&m| {
            let p = ModelParams::new(0.001, 5.0, m).unwrap();
            j_of(
                &static_control(0.4, 0.4, &b, &p, 10).unwrap(),
                &net,
                &atk,
                &p,
                &c0,
            )
        })
        .collect();
    for w in fixed.windows(3) {
        let ratio = (w[0] - w[1]) / (w[1] - w[2]);
        assert!((1.9..=2.1).contains(&ratio), "refinement ratio {ratio}");
    }
    let optimal: Vec<f64> = grids
        .iter()
        .map(|&m| {
            let p = ModelParams::new(0.001, 5.0, m).unwrap();
            solve(&net, &atk, &p, &b, &c0, &SolverConfig::default())
                .unwrap()
                .j_star
        })
        .collect();
    let spread = optimal.iter().cloned().fold(f64::MIN, f64::max)
        - optimal.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        spread <= 1e-3 * optimal[0],
        "optimal J across grids: {optimal:?}"
    );
}

#[test]
fn single_precision_solve_tracks_double() {
    let net = generate_scale_free(10, 2, 2).unwrap();
    let p64 = ModelParams::new(0.001, 5.0, 250).unwrap();
    let r64 = solve(
        &net,
        &AttackStrategy::uniform(10, 0.1).unwrap(),
        &p64,
        &standard_bounds(),
        &[0.1; 10],
        &SolverConfig::default(),
    )
    .unwrap();
    let p32 = ModelParams::<f32>::new(0.001, 5.0, 250).unwrap();
    let r32 = solve(
        &net,
        &AttackStrategy::uniform(10, 0.1f32).unwrap(),
        &p32,
        &Bounds::new(0.1f32, 0.7, 0.1, 0.7).unwrap(),
        &[0.1f32; 10],
        &SolverConfig {
            tol: 1e-3,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    assert!(r32.converged);
    assert!(((r32.j_star as f64) - r64.j_star).abs() <= 1e-3 * r64.j_star);
}

/// Independent check against every uniform-in-time strategy on a 5-level
/// grid per control.
#[test]
fn no_uniform_strategy_beats_the_solver() {
    let net = Network::from_undirected_edges(2, [(0, 1)]).unwrap();
    let atk = AttackStrategy::new(vec![0.3, 0.1]).unwrap();
    let params = ModelParams::new(0.5, 2.0, 8).unwrap();
    let c0 = [0.5, 0.2];
    let b = standard_bounds();
    let r = solve(&net, &atk, &params, &b, &c0, &SolverConfig::default()).unwrap();
    let levels = [0.1, 0.25, 0.4, 0.55, 0.7];
    let mut best = f64::INFINITY;
    for idx in 0..levels.len().pow(4) {
        let pick = |d: usize| levels[(idx / levels.len().pow(d as u32)) % levels.len()];
        let mut u = static_control(0.4, 0.4, &b, &params, 2).unwrap();
        for k in 0..=params.steps {
            u.x_mut().set(k, 0, pick(0));
            u.x_mut().set(k, 1, pick(1));
            u.y_mut().set(k, 0, pick(2));
            u.y_mut().set(k, 1, pick(3));
        }
        best = best.min(j_of(&u, &net, &atk, &params, &c0));
    }
    assert!(
        r.j_star <= best * (1.0 + 1e-9),
        "solver {} vs best uniform {}",
        r.j_star,
        best
    );
}

#[test]
fn interior_prevention_zeroes_the_hamiltonian_slope() {
    use aptdefense::metrics::{hamiltonian_node_term, pressures};
    let (net, atk, params, _) = small_instance();
    let r = solve_small();
    let b = standard_bounds();
    let h = 1e-6;
    let mut interior = 0;
    for k in 0..r.u_star.len() {
        let c = r.c_star.row(k);
        let l = r.lambda_star.row(k);
        let p = pressures(c, &net, &atk, params.beta);
        for i in 0..net.n() {
            let (x, y) = (r.u_star.x().get(k, i), r.u_star.y().get(k, i));
            if x > b.x_lo && x < b.x_hi {
                let d = (hamiltonian_node_term(x + h, y, l[i], c[i], p[i])
                    - hamiltonian_node_term(x - h, y, l[i], c[i], p[i]))
                    / (2.0 * h);
                assert!(d.abs() <= 1e-6, "k={k} i={i}: dH/dx = {d:e}");
                interior += 1;
            }
        }
    }
    assert!(interior > 1000);
}
