use nalgebra::DVector;
use ro_init::lm::{lm_solve, random_init, residuals_and_jacobian_with, LmOptions, Parameterization};
use ro_init::qcqp::LiftModel;
use ro_init::scenario::{sample_scenario, simulate_measurements, Preset, Scenario};

fn scenario(preset: Preset, sigma: f64, seed: u64) -> Scenario {
    let (mut s, t) = sample_scenario(&preset.config(sigma), seed).unwrap();
    s.measurements = simulate_measurements(&s, &t, seed + 1000);
    s
}

#[test]
fn analytic_jacobian_matches_central_differences() {
    let h = 1e-6;
    for (preset, model) in Preset::ALL
        .into_iter()
        .flat_map(|p| [(p, LiftModel::Exact), (p, LiftModel::FirstOrder)])
    {
        let s = scenario(preset, 0.05, 1);
        let par = Parameterization::new(&s);
        let eval = |e: &ro_init::scenario::Estimate| residuals_and_jacobian_with(&s, e, model);
        let mut worst = 0.0f64;
        for trial in 0..100 {
            let est = random_init(&s, trial);
            let (_, jac) = eval(&est);
            for k in 0..par.len() {
                let mut e = DVector::zeros(par.len());
                e[k] = h;
                let (rp, _) = eval(&par.retract(&est, &e));
                let (rm, _) = eval(&par.retract(&est, &(-&e)));
                let fd = (rp - rm) / (2.0 * h);
                let col = jac.column(k);
                let rel = (&fd - col).amax() / col.amax().max(1e-8);
                worst = worst.max(rel);
            }
        }
        println!("{preset} {model:?}: worst relative Jacobian error {worst:.3e}");
        assert!(worst < 1e-5, "{preset} {model:?}: {worst}");
    }
}

#[test]
fn accepted_steps_never_increase_cost() {
    for preset in Preset::ALL {
        let s = scenario(preset, 0.05, 2);
        for seed in 0..10 {
            let rep = lm_solve(&s, &random_init(&s, seed), &LmOptions::default());
            assert!(rep.cost_trace.windows(2).all(|w| w[1] <= w[0]));
            assert_eq!(*rep.cost_trace.last().unwrap(), rep.final_cost);
        }
    }
}

#[test]
fn random_init_is_reproducible_and_in_range() {
    for preset in Preset::ALL {
        let s = scenario(preset, 0.0, 3);
        assert_eq!(random_init(&s, 42), random_init(&s, 42));
        for seed in 0..200 {
            let est = random_init(&s, seed);
            assert!(est.pose.translation.iter().all(|v| v.abs() <= 4.0));
            if let Some(t) = est.twist {
                assert!(t.angular.iter().all(|w| w.abs() <= 0.3));
            }
        }
    }
}
