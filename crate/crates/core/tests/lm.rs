use ro_init::lm::*;
use ro_init::scenario::{sample_scenario, simulate_measurements, Preset};

#[test]
fn truth_is_stationary_without_noise() {
    for preset in Preset::ALL {
        let (mut s, t) = sample_scenario(&preset.config(0.0), 4).unwrap();
        s.measurements = simulate_measurements(&s, &t, 5);
        let init = t.estimate(s.mode);
        let rep = lm_solve(&s, &init, &LmOptions::default());
        assert!(rep.converged);
        assert!(rep.final_cost < 1e-16, "{preset}: {}", rep.final_cost);
        assert_eq!(rep.state, init);
    }
}

#[test]
fn cost_matches_scenario() {
    let (mut s, t) = sample_scenario(&Preset::Dynamic2d.config(0.05), 6).unwrap();
    s.measurements = simulate_measurements(&s, &t, 7);
    let est = random_init(&s, 3);
    let (r, _) = residuals_and_jacobian(&s, &est);
    assert!((r.norm_squared() - s.map_cost(&est)).abs() < 1e-9 * s.map_cost(&est));
}

use proptest::prelude::*;
use ro_init::pipeline::{Pipeline, PipelineOptions};

#[test]
fn relaxation_bounds_the_cost_at_truth() {
    let pipeline = Pipeline::new(PipelineOptions::default());
    for sigma in [0.0, 0.05] {
        let (mut s, t) = sample_scenario(&Preset::Static2d.config(sigma), 8).unwrap();
        s.measurements = simulate_measurements(&s, &t, 9);
        let relaxation = pipeline.relax(&s).unwrap();
        let at_truth = cost(&s, &t.estimate(s.mode));
        assert!(relaxation.solution.dual_obj <= at_truth + 1e-7 * (1.0 + at_truth));
        if sigma == 0.0 {
            assert!(relaxation.solution.primal_obj.abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn local_minima_never_beat_the_relaxation(seed in 0u64..10_000, init in 0u64..10_000, sigma in 0.0..0.1f64) {
        let (mut s, t) = sample_scenario(&Preset::Static2d.config(sigma), seed).unwrap();
        s.measurements = simulate_measurements(&s, &t, seed + 1);
        let relaxation = Pipeline::new(PipelineOptions::default()).relax(&s).unwrap();
        let rep = lm_solve(&s, &random_init(&s, init), &LmOptions::default());
        let bound = relaxation.solution.dual_obj;
        prop_assert!(bound <= rep.final_cost + 1e-7 * (1.0 + rep.final_cost), "{bound} > {}", rep.final_cost);
    }
}
