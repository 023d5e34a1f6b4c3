use proptest::prelude::*;
use tbopt::models::baseline::{neutral_control, uncontrolled_rhs};
use tbopt::pmp::{hamiltonian, verify_adjoint_consistency};
use tbopt::*;

fn model_id() -> impl Strategy<Value = ModelId> {
    (0..ModelId::ALL.len()).prop_map(|i| ModelId::ALL[i])
}

fn objective_for(id: ModelId, a: f64, b: f64) -> Objective {
    let def = id.definition();
    let mut w = CostWeights::new(a, a, vec![b; def.control_dim()]);
    if !def.isolated.is_empty() {
        w.a_isolated = a / 2.0;
    }
    Objective::new(def.default_cost, w)
}

/// Default parameters with every constant scaled by a factor in [0.5, 1].
fn scaled_params(id: ModelId, factors: &[f64]) -> ParameterSet {
    let mut p = ParameterSet::new();
    for ((name, v), f) in default_parameters(id).iter().zip(factors.iter().cycle()) {
        match v {
            ParamValue::Constant(c) if name != "N" => p.set(name, c * f),
            other => p.set(name, other.clone()),
        };
    }
    p
}

fn state(id: ModelId, raw: &[f64]) -> Vec<f64> {
    raw.iter()
        .take(id.definition().state_dim())
        .map(|v| v * 10_000.0)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn control_law_stays_in_box_and_minimises(
        id in model_id(),
        raw in prop::collection::vec(0.01f64..1.0, 6),
        lam in prop::collection::vec(-2.0f64..2.0, 6),
        probe in prop::collection::vec(0.0f64..1.0, 3),
        t in 0.0f64..5.0,
        b in 1.0f64..500.0,
    ) {
        let model = Model::new(id, &default_parameters(id)).unwrap();
        let x = state(id, &raw);
        let lam = &lam[..x.len()];
        let obj = objective_for(id, 1.0, b);
        let u = model.eval_control(t, &x, lam, &obj).unwrap();
        prop_assert!(u.iter().all(|v| (0.0..=1.0).contains(v)));
        let h = hamiltonian(&model, t, &x, lam, &u, &obj).unwrap();
        let v = &probe[..u.len()];
        let hv = hamiltonian(&model, t, &x, lam, v, &obj).unwrap();
        prop_assert!(h <= hv + 1e-10 * h.abs().max(1.0));
    }

    #[test]
    fn control_law_invariant_under_weight_scaling(
        id in model_id(),
        raw in prop::collection::vec(0.01f64..1.0, 6),
        lam in prop::collection::vec(-1.0f64..1.0, 6),
        k in 0.1f64..10.0,
    ) {
        // Scaling every weight by k scales lambda by k; u* is unchanged.
        let model = Model::new(id, &default_parameters(id)).unwrap();
        let x = state(id, &raw);
        let lam = &lam[..x.len()];
        let scaled: Vec<f64> = lam.iter().map(|l| l * k).collect();
        let u = model.eval_control(1.0, &x, lam, &objective_for(id, 1.0, 100.0)).unwrap();
        let v = model.eval_control(1.0, &x, &scaled, &objective_for(id, k, 100.0 * k)).unwrap();
        for (a, b) in u.iter().zip(&v) {
            prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn hamiltonian_is_affine_in_adjoint(
        id in model_id(),
        raw in prop::collection::vec(0.01f64..1.0, 6),
        l1 in prop::collection::vec(-1.0f64..1.0, 6),
        l2 in prop::collection::vec(-1.0f64..1.0, 6),
        u in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        let model = Model::new(id, &default_parameters(id)).unwrap();
        let x = state(id, &raw);
        let n = x.len();
        let u = &u[..model.control_dim()];
        let obj = objective_for(id, 1.0, 50.0);
        let sum: Vec<f64> = l1[..n].iter().zip(&l2[..n]).map(|(a, b)| a + b).collect();
        let g = hamiltonian(&model, 0.5, &x, &vec![0.0; n], u, &obj).unwrap();
        let h1 = hamiltonian(&model, 0.5, &x, &l1[..n], u, &obj).unwrap();
        let h2 = hamiltonian(&model, 0.5, &x, &l2[..n], u, &obj).unwrap();
        let h12 = hamiltonian(&model, 0.5, &x, &sum, u, &obj).unwrap();
        prop_assert!((h12 - (h1 + h2 - g)).abs() <= 1e-9 * (h1.abs() + h2.abs() + g.abs()).max(1.0));
    }

    #[test]
    fn seirs_population_balance(
        raw in prop::collection::vec(0.01f64..1.0, 4),
        u in 0.0f64..1.0,
        f in prop::collection::vec(0.5f64..1.0, 9),
        d1 in 0.0f64..0.5,
    ) {
        let mut p = scaled_params(ModelId::SeirsControlled, &f);
        p.set("d1", d1);
        p.set("Lambda", 150.0);
        let model = Model::new(ModelId::SeirsControlled, &p).unwrap();
        let x = state(ModelId::SeirsControlled, &raw);
        let dx = model.eval_dynamics(0.0, &x, &[u]).unwrap();
        let mu = p.constant("mu").unwrap();
        let want = 150.0 - mu * x.iter().sum::<f64>() - d1 * x[2];
        let got: f64 = dx.iter().sum();
        prop_assert!((got - want).abs() <= 1e-9 * x.iter().sum::<f64>());
    }

    #[test]
    fn neutral_control_reduces_exactly(
        id in model_id(),
        raw in prop::collection::vec(0.001f64..1.0, 6),
        f in prop::collection::vec(0.5f64..1.0, 19),
        t in 0.0f64..5.0,
    ) {
        let mut p = scaled_params(id, &f);
        let x = state(id, &raw);
        if id == ModelId::SeirsControlled {
            p.set("N", x.iter().sum::<f64>());
            p.remove("d1");
        }
        if id == ModelId::TwoStrainControlled {
            p.set("N", x.iter().sum::<f64>());
        }
        let model = Model::new(id, &p).unwrap();
        let a = model.eval_dynamics(t, &x, &neutral_control(id)).unwrap();
        let b = uncontrolled_rhs(id, t, &x, &p).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn adjoint_consistent_for_perturbed_parameters(
        id in model_id(),
        f in prop::collection::vec(0.5f64..1.0, 19),
        seed in any::<u64>(),
    ) {
        let p = scaled_params(id, &f);
        let model = Model::new(id, &p).unwrap();
        let rep = verify_adjoint_consistency(&model, &objective_for(id, 1.0, 100.0), 20, 1e-6, seed)
            .unwrap();
        prop_assert!(rep.max_adjoint_residual < 1e-6, "{:?}", rep);
    }

    #[test]
    fn forward_run_stays_nonnegative(
        id in model_id(),
        u in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        let s = builtin_scenarios().into_iter().find(|s| s.model == id).unwrap();
        let model = s.model().unwrap();
        let grid = TimeGrid::new(0.0, 5.0, 1000).unwrap();
        let control = Series::constant(grid.len(), &u[..model.control_dim()]);
        let x = integrate_forward(&model, &s.initial_state().unwrap(), &control, &grid).unwrap();
        let traj = Trajectory::new(grid, x, control).unwrap();
        prop_assert!(traj.nonnegative);
    }

    #[test]
    fn larger_control_weight_never_lowers_optimal_cost(b in 20.0f64..400.0, extra in 1.0f64..200.0) {
        let mut s = builtin_scenario("seirs-fig1").unwrap();
        s.grid.n_steps = 1000;
        s.cost.b = vec![b];
        let low = solve_fbs(&s).unwrap();
        s.cost.b = vec![b + extra];
        let high = solve_fbs(&s).unwrap();
        prop_assert!(high.cost >= low.cost * (1.0 - 1e-9));
    }
}
