use tbopt::*;

fn flagship() -> ScenarioConfig {
    builtin_scenario("seirs-fig1").unwrap()
}

struct Setup {
    model: Model,
    objective: Objective,
    x0: Vec<f64>,
    grid: TimeGrid,
}

fn setup(s: &ScenarioConfig) -> Setup {
    Setup {
        model: s.model().unwrap(),
        objective: s.objective(),
        x0: s.initial_state().unwrap(),
        grid: s.time_grid().unwrap(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn zero_dynamics_keep_state() {
    let mut s = flagship();
    for k in ["mu", "beta"] {
        s.parameters.set(k, 0.0);
    }
    s.parameters.set("Lambda", 0.0);
    let st = setup(&s);
    let x0 = [10_000.0, 0.0, 0.0, 0.0];
    let u = Series::constant(st.grid.len(), &[0.3]);
    let x = integrate_forward(&st.model, &x0, &u, &st.grid).unwrap();
    for row in x.rows() {
        assert_eq!(row, &x0);
    }
}

#[test]
fn uncontrolled_population_is_conserved() {
    let st = setup(&flagship());
    let u = Series::zeros(st.grid.len(), 1);
    let x = integrate_forward(&st.model, &st.x0, &u, &st.grid).unwrap();
    assert_eq!(x.row(0), st.x0.as_slice());
    for row in x.rows() {
        let n: f64 = row.iter().sum();
        assert!((n - 10_000.0).abs() / 10_000.0 < 1e-10);
    }
}

#[test]
fn uncontrolled_terminal_state_matches_reference() {
    // Reference from an adaptive 8th-order integrator at rtol 1e-13.
    let want = [
        29.03278937034733,
        3855.1610815127574,
        3782.850517087116,
        2332.955612029783,
    ];
    let st = setup(&flagship());
    let u = Series::zeros(st.grid.len(), 1);
    let x = integrate_forward(&st.model, &st.x0, &u, &st.grid).unwrap();
    let last = x.row(st.grid.len() - 1);
    for (a, b) in last.iter().zip(want) {
        assert!(rel(*a, b) < 1e-8, "{a} vs {b}");
    }

    let fine = st.grid.refined(2);
    let xf = integrate_forward(&st.model, &st.x0, &Series::zeros(fine.len(), 1), &fine).unwrap();
    for (a, b) in last.iter().zip(xf.row(fine.len() - 1)) {
        assert!(rel(*a, *b) < 1e-6);
    }
}

#[test]
fn uncontrolled_cost_matches_reference() {
    // Richardson-refined trapezoid of I1 over [0, 5] with A = 1.
    let st = setup(&flagship());
    let (_, cost) = simulate(
        &st.model,
        &st.objective,
        &st.x0,
        Series::zeros(st.grid.len(), 1),
        &st.grid,
    )
    .unwrap();
    assert!(rel(cost, 14870.082116804217) < 1e-6, "{cost}");
}

#[test]
fn dimension_and_sign_errors() {
    let st = setup(&flagship());
    let u = Series::zeros(st.grid.len(), 1);
    assert!(matches!(
        integrate_forward(&st.model, &[1.0; 3], &u, &st.grid),
        Err(Error::Dimension { .. })
    ));
    assert!(integrate_forward(&st.model, &[-1.0, 1.0, 1.0, 1.0], &u, &st.grid).is_err());
    let short = Series::zeros(10, 1);
    assert!(integrate_forward(&st.model, &st.x0, &short, &st.grid).is_err());
}

#[test]
fn adjoint_vanishes_without_state_cost() {
    let mut s = flagship();
    s.cost.a1 = 0.0;
    let st = setup(&s);
    let u = Series::constant(st.grid.len(), &[0.4]);
    let x = integrate_forward(&st.model, &st.x0, &u, &st.grid).unwrap();
    let lam = integrate_adjoint_backward(&st.model, &st.objective, &x, &u, &st.grid).unwrap();
    assert_eq!(lam.sup_norm(), 0.0);
}

#[test]
fn adjoint_terminal_condition_and_refinement() {
    let s = flagship();
    let sol = solve_fbs(&s).unwrap();
    let last = sol.adjoint().row(s.grid.n_steps);
    assert!(last.iter().all(|&v| v == 0.0));
    assert_eq!(sol.report.terminal_adjoint_residual, 0.0);

    let mut fine = s.clone();
    fine.grid.n_steps *= 2;
    let solf = solve_fbs(&fine).unwrap();
    let a = sol.adjoint().row(0)[2];
    let b = solf.adjoint().row(0)[2];
    assert!(rel(a, b) < 1e-5, "{a} vs {b}");
}

#[test]
fn flagship_beats_constant_controls() {
    let s = flagship();
    let st = setup(&s);
    let sol = solve_fbs(&s).unwrap();
    assert!(sol.report.converged);
    assert!(sol.report.iterations <= 500);
    assert_eq!(sol.report.cost_history.len(), sol.report.iterations);
    assert_eq!(*sol.report.cost_history.last().unwrap(), sol.cost);
    assert!(sol.trajectory.nonnegative);
    for v in [0.0, 1.0] {
        let u = Series::constant(st.grid.len(), &[v]);
        let (_, c) = simulate(&st.model, &st.objective, &st.x0, u, &st.grid).unwrap();
        assert!(sol.cost <= c, "u = {v}: {} > {c}", sol.cost);
    }
    let recomputed = total_cost(&st.model, &sol.trajectory, &st.objective).unwrap();
    assert_eq!(recomputed, sol.cost);
}

#[test]
fn converged_solution_is_a_fixed_point() {
    let s = flagship();
    let st = setup(&s);
    let sol = solve_fbs(&s).unwrap();
    let u = sol.control();
    let target = tbopt::solver::characterize(
        &st.model,
        &st.objective,
        &sol.trajectory.state,
        sol.adjoint(),
        &st.grid,
    )
    .unwrap();
    let c = s.solver.relaxation;
    let next: Vec<f64> = u
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(a, b)| c * a + (1.0 - c) * b)
        .collect();
    let diff: f64 = next
        .iter()
        .zip(u.as_slice())
        .map(|(a, b)| (a - b).abs())
        .sum();
    let norm: f64 = next.iter().map(|v| v.abs()).sum();
    assert!(diff <= s.solver.tolerance * norm);
}

#[test]
fn huge_control_weight_gives_zero_control() {
    let mut s = flagship();
    s.cost.b = vec![1e12];
    let st = setup(&s);
    let sol = solve_fbs(&s).unwrap();
    assert!(sol.report.converged);
    assert!(sol.control().sup_norm() < 1e-6);
    let x = integrate_forward(
        &st.model,
        &st.x0,
        &Series::zeros(st.grid.len(), 1),
        &st.grid,
    )
    .unwrap();
    for (a, b) in sol.trajectory.state.as_slice().iter().zip(x.as_slice()) {
        assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0));
    }
}

#[test]
fn no_state_cost_converges_immediately() {
    let mut s = flagship();
    s.cost.a1 = 0.0;
    let sol = solve_fbs(&s).unwrap();
    assert!(sol.report.converged);
    assert_eq!(sol.report.iterations, 1);
    assert_eq!(sol.control().sup_norm(), 0.0);
    assert_eq!(sol.adjoint().sup_norm(), 0.0);
}

#[test]
fn iteration_cap_returns_best_iterate() {
    let mut s = flagship();
    s.solver.max_iterations = 3;
    let sol = solve_fbs(&s).unwrap();
    assert!(!sol.report.converged);
    assert_eq!(sol.report.iterations, 3);
    let best = sol
        .report
        .cost_history
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    assert_eq!(sol.cost, best);
}

#[test]
fn blow_up_reports_iteration() {
    let mut s = flagship();
    s.parameters.set("beta", 1e9);
    s.grid.n_steps = 4;
    match solve_fbs(&s) {
        Err(Error::NonFinite { iteration, .. }) => assert!(iteration.is_some()),
        other => panic!("expected a non-finite error, got {other:?}"),
    }
}

#[test]
fn invalid_settings_rejected() {
    let mut s = flagship();
    s.solver.relaxation = 1.0;
    assert!(solve_fbs(&s).is_err());
    let mut s = flagship();
    s.solver.tolerance = 0.0;
    assert!(solve_fbs(&s).is_err());
}

#[test]
fn warm_start_from_trajectory() {
    let s = flagship();
    let sol = solve_fbs(&s).unwrap();
    let mut warm = s.clone();
    warm.solver.initial_control = Some(InitialControl::Trajectory(sol.control().clone()));
    let again = solve_fbs(&warm).unwrap();
    assert!(again.report.converged);
    assert!(again.report.iterations < sol.report.iterations);
    assert!(rel(again.cost, sol.cost) < 1e-8);
}

#[test]
fn every_builtin_converges_with_default_settings() {
    for s in builtin_scenarios() {
        let mut s = s;
        s.sweep = None;
        s.solver = FbsSettings::default();
        let sol = solve_fbs(&s).unwrap_or_else(|e| panic!("{}: {e}", s.name));
        assert!(sol.report.converged, "{}", s.name);
        assert!(sol.report.min_relative_state >= -1e-9, "{}", s.name);
    }
}

#[test]
fn reduced_gradient_needs_adjoint() {
    let s = flagship();
    let st = setup(&s);
    let (traj, _) = simulate(
        &st.model,
        &st.objective,
        &st.x0,
        Series::zeros(st.grid.len(), 1),
        &st.grid,
    )
    .unwrap();
    assert!(reduced_gradient(&st.model, &st.objective, &traj).is_err());
}
