use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ro_init::lie::{exp_se, Pose, Rotation, Twist};
use ro_init::qcqp::*;
use ro_init::scenario::{sample_scenario, sample_state, simulate_measurements, Estimate, Mode, Preset, Scenario};

fn scenario(preset: Preset, sigma: f64, seed: u64) -> Scenario {
    let (mut s, truth) = sample_scenario(&preset.config(sigma), seed).unwrap();
    s.measurements = simulate_measurements(&s, &truth, seed.wrapping_mul(31) + 7);
    s
}

fn variants() -> Vec<(Preset, Variant)> {
    vec![
        (Preset::Static2d, Variant::Static),
        (Preset::Static3d, Variant::Static),
        (Preset::Dynamic2d, Variant::Dynamic),
        (Preset::Dynamic25d, Variant::Dynamic25),
        (Preset::Dynamic2d, Variant::DynamicExact),
    ]
}

#[test]
fn random_states_are_feasible() {
    for (preset, variant) in variants() {
        let s = scenario(preset, 0.05, 11);
        let p = build(&s, variant).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let est = sample_state(&mut rng, s.dimension, s.mode);
            let x = lift(&p.layout, &est, LiftModel::FirstOrder).unwrap();
            let h = p.homogenization().matrix.quad_form(&x);
            assert!((h - 1.0).abs() < 1e-12);
            let scale = x.norm_squared();
            let r = p.max_residual(&x);
            assert!(r < 1e-10 * scale.max(1.0), "{variant}: residual {r}");
        }
    }
}

#[test]
fn cost_matches_direct_map_objective() {
    for (preset, variant) in variants() {
        let s = scenario(preset, 0.05, 12);
        let p = build(&s, variant).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let est = sample_state(&mut rng, s.dimension, s.mode);
            let x = lift(&p.layout, &est, LiftModel::FirstOrder).unwrap();
            let direct = if variant.is_first_order() {
                s.map_cost_first_order(&est)
            } else {
                s.map_cost(&est)
            };
            let lifted = p.objective(&x);
            assert!(
                (lifted - direct).abs() <= 1e-10 * direct.abs().max(1e-300),
                "{variant}: {lifted} vs {direct}"
            );
        }
    }
}

#[test]
fn noiseless_truth_has_zero_cost_and_residuals() {
    for (preset, variant) in variants() {
        for seed in 0..50 {
            let s = scenario(preset, 0.0, 100 + seed);
            let p = build(&s, variant).unwrap();
            let est = s.ground_truth.as_ref().unwrap().estimate(s.mode);
            let model = if variant.is_first_order() { LiftModel::FirstOrder } else { LiftModel::Exact };
            let x = lift(&p.layout, &est, model).unwrap();
            assert!(p.max_residual(&x) < 1e-10, "{variant} seed {seed}");
            if !variant.is_first_order() {
                assert!(p.objective(&x).abs() < 1e-10, "{variant} seed {seed}: {}", p.objective(&x));
            }
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    for (preset, variant) in variants() {
        let s = scenario(preset, 0.05, 13);
        let p = build(&s, variant).unwrap();
        let q = p.cost.to_dense();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let est = sample_state(&mut rng, s.dimension, s.mode);
        let x = lift(&p.layout, &est, LiftModel::FirstOrder).unwrap();
        let grad = &q * &x * 2.0;
        let h = 1e-6;
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (p.objective(&xp) - p.objective(&xm)) / (2.0 * h);
            let scale = grad.amax().max(1.0);
            assert!((fd - grad[i]).abs() <= 1e-6 * scale, "{variant} slot {i}: {fd} vs {}", grad[i]);
        }
    }
}

/// First-order motion residuals of exact lifts stay under `(c‖ϖ‖)² ‖p̄‖`.
#[test]
fn motion_residual_obeys_taylor_bound() {
    for preset in [Preset::Dynamic2d, Preset::Dynamic25d] {
        let s = scenario(preset, 0.0, 14);
        let p = build(&s, Variant::for_mode(s.mode, false)).unwrap();
        let motion: Vec<_> = p
            .constraints
            .iter()
            .filter(|c| c.kind == ConstraintKind::Motion)
            .collect();
        let d = s.dimension;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let mut est = sample_state(&mut rng, d, s.mode);
            let t = est.twist.clone().unwrap();
            let w = if d == 2 { vec![0.3 * t.angular[0].signum()] } else { vec![0.0, 0.0, 0.3] };
            est.twist = Some(Twist::new(DVector::from_vec(w), t.linear));
            let x = lift_state(&p.layout, &est).unwrap();
            let twist_norm = est.twist.as_ref().unwrap().to_vector().norm();
            for (e, ep) in p.layout.epochs().iter().enumerate() {
                let tag = &s.tags[ep.l];
                let bound = (ep.c * twist_norm).powi(2) * (tag.norm_squared() + 1.0).sqrt();
                for c in &motion[e * d..(e + 1) * d] {
                    let r = c.matrix.quad_form(&x).abs();
                    assert!(r <= bound + 1e-12, "epoch {e}: {r} > {bound}");
                }
            }
        }
    }
}

#[test]
fn exact_builder_has_no_approximation_error() {
    let s = scenario(Preset::Dynamic2d, 0.0, 15);
    let p = build(&s, Variant::DynamicExact).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let est = sample_state(&mut rng, 2, s.mode);
        let x = lift_state(&p.layout, &est).unwrap();
        assert!(p.max_residual(&x) < 1e-10);
    }
}

#[test]
fn static2d_counts() {
    let p = build_static(&scenario(Preset::Static2d, 0.01, 1)).unwrap();
    assert_eq!(p.n(), 13);
    assert_eq!(p.count(ConstraintKind::Homogenization), 1);
    assert_eq!(p.count(ConstraintKind::LeverArm), 4);
    assert_eq!(p.count(ConstraintKind::NormLink), 2);
    assert_eq!(p.count(ConstraintKind::Orthonormality), 6);
    assert_eq!(p.count(ConstraintKind::Handedness), 2);
    assert_eq!(p.constraints.len(), 15);
}

#[test]
fn layout_sizes() {
    let s = scenario(Preset::Dynamic2d, 0.01, 2);
    assert_eq!(StateLayout::new(&s, Variant::Dynamic).unwrap().n(), 46);
    // 12 epochs x 3, 12 pose blocks x 6, delta 6, h
    assert_eq!(StateLayout::new(&s, Variant::DynamicExact).unwrap().n(), 36 + 72 + 6 + 1);
    let s = scenario(Preset::Dynamic25d, 0.01, 2);
    assert_eq!(StateLayout::new(&s, Variant::Dynamic25).unwrap().n(), 4 * 12 + 2 + 3 + 1 + 3 + 1);
    let s = scenario(Preset::Static3d, 0.01, 2);
    assert_eq!(StateLayout::new(&s, Variant::Static).unwrap().n(), 4 * 3 + 9 + 3 + 1);
}

#[test]
fn slots_tile_the_state() {
    for preset in Preset::ALL {
        let s = scenario(preset, 0.01, 3);
        let mut variants = vec![Variant::for_mode(s.mode, false)];
        if s.mode == Mode::Dynamic {
            variants.push(Variant::DynamicExact);
        }
        for v in variants {
            let layout = StateLayout::new(&s, v).unwrap();
            let mut next = 0;
            for slot in layout.slots() {
                assert_eq!(slot.offset, next, "{v} {}", slot.name);
                next += slot.len;
            }
            assert_eq!(next, layout.n());
            assert_eq!(layout.slots().last().unwrap().name, "h");
        }
    }
}

#[test]
fn lift_identity_pose() {
    let s = scenario(Preset::Static2d, 0.0, 4);
    let layout = StateLayout::new(&s, Variant::Static).unwrap();
    let x = lift_state(&layout, &Estimate::static_pose(Pose::identity(2))).unwrap();
    assert_eq!(x.rows(0, 3).as_slice(), &[0.0, 0.095, 0.095 * 0.095]);
    assert_eq!(x[layout.h()], 1.0);
}

#[test]
fn lift_matches_matrix_product() {
    let s = scenario(Preset::Static2d, 0.0, 4);
    let layout = StateLayout::new(&s, Variant::Static).unwrap();
    let pose = Pose::new(Rotation::from_angle(std::f64::consts::FRAC_PI_2), DVector::from_vec(vec![1.0, 0.0]));
    let x = lift_state(&layout, &Estimate::static_pose(pose.clone())).unwrap();
    let hom = pose.matrix() * DVector::from_vec(vec![0.0, 0.095, 1.0]);
    assert!((x[0] - hom[0]).abs() < 1e-15 && (x[1] - hom[1]).abs() < 1e-15);
    assert!((x[0] - (1.0 - 0.095)).abs() < 1e-15);
}

#[test]
fn wrong_mode_is_rejected() {
    let s = scenario(Preset::Static2d, 0.0, 4);
    assert!(matches!(build_dynamic_exact(&s), Err(QcqpError::ModeMismatch { .. })));
    let d = scenario(Preset::Dynamic2d, 0.0, 4);
    let layout = StateLayout::new(&d, Variant::Dynamic).unwrap();
    assert!(lift_state(&layout, &Estimate::static_pose(Pose::identity(2))).is_err());
}

#[test]
fn all_matrices_symmetric_and_homogenization_first() {
    let p = build_dynamic(&scenario(Preset::Dynamic2d, 0.01, 5)).unwrap();
    assert_eq!(p.constraints[0].kind, ConstraintKind::Homogenization);
    assert_eq!(p.constraints[0].rhs, 1.0);
    assert!(p.constraints[1..].iter().all(|c| c.rhs == 0.0));
    assert_eq!(p.count(ConstraintKind::Motion), 2 * 12);
    let q = p.cost.to_dense();
    assert!((&q - q.transpose()).amax() < 1e-14);
}

#[test]
fn zero_twist_motion_reduces_to_lever_arm() {
    let mut s = scenario(Preset::Dynamic2d, 0.0, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut est = sample_state(&mut rng, 2, Mode::Dynamic);
    est.twist = Some(Twist::zero(2));
    s.ground_truth = None;
    let p = build_dynamic(&s).unwrap();
    let x = lift(&p.layout, &est, LiftModel::Exact).unwrap();
    assert!(p.max_residual(&x) < 1e-12);
}

#[test]
fn exact_delta_slot_is_exponential() {
    let s = scenario(Preset::Dynamic2d, 0.0, 7);
    let layout = StateLayout::new(&s, Variant::DynamicExact).unwrap();
    let gt = s.ground_truth.as_ref().unwrap();
    let x = lift_state(&layout, &gt.estimate(s.mode)).unwrap();
    let delta = exp_se(&gt.twist, 0.1);
    let (dr, dp) = layout.delta_offsets().unwrap();
    let r = delta.rotation.matrix();
    assert!((x[dr] - r[(0, 0)]).abs() < 1e-15 && (x[dr + 1] - r[(1, 0)]).abs() < 1e-15);
    assert!((x[dp] - delta.translation[0]).abs() < 1e-15);
}
