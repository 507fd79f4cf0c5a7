use nalgebra::DVector;
use ro_init::lie::{Pose, Twist};
use ro_init::scenario::*;

fn sampled(preset: Preset, sigma: f64, seed: u64) -> Scenario {
    let (mut s, truth) = sample_scenario(&preset.config(sigma), seed).unwrap();
    s.measurements = simulate_measurements(&s, &truth, seed ^ 0xabc);
    s
}

#[test]
fn preset_shapes() {
    let s = sampled(Preset::Static2d, 0.01, 1);
    assert_eq!((s.anchors.len(), s.tags.len(), s.n_measurements()), (3, 2, 6));
    let s = sampled(Preset::Static3d, 0.01, 1);
    assert_eq!((s.anchors.len(), s.tags.len(), s.n_measurements()), (4, 3, 12));
    assert_eq!(s.tags[2].as_slice(), &[-0.57, 0.02, 0.0]);
    let s = sampled(Preset::Dynamic25d, 0.01, 1);
    assert_eq!((s.anchors.len(), s.tags.len(), s.n_measurements()), (4, 2, 12));
    let s = sampled(Preset::Dynamic2d, 0.01, 1);
    assert_eq!(s.n_measurements(), 12);
    assert_eq!(Window { t_v: 1.1, dt_r: 0.1 }.steps(), 12);
}

#[test]
fn three_four_five() {
    let s = Scenario {
        dimension: 2,
        mode: Mode::Static,
        anchors: vec![
            DVector::from_vec(vec![3.0, 4.0]),
            DVector::from_vec(vec![-1.0, 0.0]),
            DVector::from_vec(vec![0.0, 2.0]),
        ],
        tags: vec![DVector::zeros(2), DVector::from_vec(vec![0.0, 1.0])],
        sigma_r: 0.0,
        window: None,
        seed: 0,
        measurements: vec![],
        ground_truth: None,
    };
    let truth = GroundTruth::new(Pose::identity(2), Twist::zero(2), None);
    let m = simulate_measurements(&s, &truth, 0);
    assert_eq!(m[0].value, 25.0);
}

#[test]
fn noiseless_cost_is_zero_at_truth() {
    for p in Preset::ALL {
        let s = sampled(p, 0.0, 9);
        let est = s.ground_truth.as_ref().unwrap().estimate(s.mode);
        assert!(s.map_cost(&est) < 1e-20, "{p}");
    }
}

#[test]
fn seeded_generation_is_deterministic() {
    let a = sampled(Preset::Dynamic2d, 0.01, 42);
    let b = sampled(Preset::Dynamic2d, 0.01, 42);
    assert_eq!(a, b);
    for (x, y) in a.measurements.iter().zip(&b.measurements) {
        assert_eq!(x.value.to_bits(), y.value.to_bits());
    }
}

#[test]
fn dynamic_schedule_covers_all_pairs() {
    for (na, nl) in [(3, 2), (4, 2), (5, 2), (4, 3)] {
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..na * nl * 2 {
            seen.insert(dynamic_pair(i, na, nl));
        }
        assert_eq!(seen.len(), na * nl, "{na} anchors {nl} tags");
    }
}

#[test]
fn json_roundtrip_is_lossless() {
    let s = sampled(Preset::Dynamic25d, 0.05, 3);
    let back = Scenario::from_json(&s.to_json()).unwrap();
    assert_eq!(back.anchors, s.anchors);
    assert_eq!(back.measurements, s.measurements);
    assert_eq!(back.seed, s.seed);
    let gt = s.ground_truth.unwrap();
    let gb = back.ground_truth.unwrap();
    assert_eq!(gb.initial_pose, gt.initial_pose);
    assert_eq!(gb.twist, gt.twist);
}

#[test]
fn floats_have_seventeen_digits() {
    let s = sampled(Preset::Static2d, 0.01, 3);
    let json = s.to_json();
    assert!(json.contains("\"sigma_r\": 1.0000000000000000e-2"), "{json}");
}

#[test]
fn load_rejects_collinear_anchors_and_missing_fields() {
    let mut s = sampled(Preset::Static2d, 0.01, 3);
    s.anchors = vec![
        DVector::from_vec(vec![0.0, 0.0]),
        DVector::from_vec(vec![1.0, 1.0]),
        DVector::from_vec(vec![2.0, 2.0]),
    ];
    let err = Scenario::from_json(&s.to_json()).unwrap_err();
    assert!(matches!(err, ScenarioError::Invalid(ref m) if m.contains("collinear")), "{err}");

    let good = sampled(Preset::Static2d, 0.01, 3).to_json();
    let stripped: String = good.lines().filter(|l| !l.contains("sigma_r")).collect::<Vec<_>>().join("\n");
    let err = Scenario::from_json(&stripped).unwrap_err();
    assert!(matches!(err, ScenarioError::Parse { ref message, .. } if message.contains("sigma_r")), "{err}");

    let wrong = good.replacen("\"version\": 1", "\"version\": 2", 1);
    assert!(matches!(
        Scenario::from_json(&wrong),
        Err(ScenarioError::SchemaVersionMismatch { found: 2, .. })
    ));
}

#[test]
fn noiseless_measurements_match_independent_distance() {
    let s = sampled(Preset::Static3d, 0.0, 5);
    let gt = s.ground_truth.as_ref().unwrap();
    for m in &s.measurements {
        let r = gt.initial_pose.rotation.matrix();
        let t = &gt.initial_pose.translation;
        let mut dist2 = 0.0;
        for i in 0..3 {
            let mut w = t[i];
            for c in 0..3 {
                w += r[(i, c)] * s.tags[m.l][c];
            }
            dist2 += (s.anchors[m.j][i] - w).powi(2);
        }
        assert!((m.value - dist2).abs() < 1e-12);
    }
}
