//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ro_init::bench::{run_experiment, tightness_from, trials_csv, Experiment, ExperimentSpec, TrialRecord};
use ro_init::extraction::rank1_threshold;
use ro_init::lie::{exp_se, log_se, Twist};
use ro_init::lm::{random_init, residuals_and_jacobian_with, Parameterization};
use ro_init::pipeline::{Method, PipelineOptions};
use ro_init::qcqp::{build, LiftModel, Variant};
use ro_init::redundancy::{discover_constraints, DiscoveryOptions};
use ro_init::scenario::{sample_scenario, simulate_measurements, Preset};
use ro_init::sdp::{sym_eig, SdpStatus};
use std::path::Path;
use std::time::Instant;

const SEED: u64 = 0;
const THREADS: usize = 4;
/// Baseline optimizer seconds per solve for the soft timing budget.
const REFERENCE_SDP_SECONDS: [(Preset, f64); 4] = [
    (Preset::Static2d, 0.02),
    (Preset::Static3d, 0.05),
    (Preset::Dynamic2d, 0.83),
    (Preset::Dynamic25d, 3.15),
];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: u32, name: &'static str, pass: bool, detail: String) -> Outcome {
    let o = Outcome { id, name, pass, detail };
    println!(
        "criterion {:>2} [{}] {}: {}",
        o.id,
        if o.pass { "PASS" } else { "FAIL" },
        o.name,
        o.detail
    );
    o
}

fn spec(cache: &Path, preset: Preset, sigmas: &[f64], trials: usize, threads: usize) -> ExperimentSpec {
    ExperimentSpec {
        pipeline: PipelineOptions {
            cache_dir: Some(cache.to_path_buf()),
            ..PipelineOptions::default()
        },
        threads: Some(threads),
        ..ExperimentSpec::new(preset, sigmas.to_vec(), trials, SEED)
    }
}

fn records(e: &Experiment, sigma: f64, method: Method) -> Vec<&TrialRecord> {
    e.records
        .iter()
        .filter(|r| r.method == method && r.sigma_r.to_bits() == sigma.to_bits())
        .collect()
}

/// Failed trials count as infinite error.
fn error_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// trials.csv with the wall-time columns blanked.
fn masked_csv(e: &Experiment) -> String {
    trials_csv(&e.records)
        .lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            if f.len() == 12 {
                for k in 8..11 {
                    f[k] = "";
                }
            }
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

struct Runs {
    noiseless: Vec<(Preset, Experiment, f64)>,
    static2d: Experiment,
    dynamic2d: Experiment,
    real_like: Experiment,
}

const STATIC_SIGMAS: [f64; 3] = [0.01, 0.05, 0.1];
const DYNAMIC_SIGMAS: [f64; 5] = [0.01, 0.03, 0.05, 0.08, 0.1];

fn run_all(cache: &Path, threads: usize) -> Runs {
    let noiseless = Preset::ALL
        .into_iter()
        .map(|p| {
            let t = Instant::now();
            let e = run_experiment(&spec(cache, p, &[0.0], 20, threads)).unwrap();
            (p, e, t.elapsed().as_secs_f64())
        })
        .collect();
    Runs {
        noiseless,
        static2d: run_experiment(&spec(cache, Preset::Static2d, &STATIC_SIGMAS, 100, threads)).unwrap(),
        dynamic2d: run_experiment(&spec(cache, Preset::Dynamic2d, &DYNAMIC_SIGMAS, 100, threads)).unwrap(),
        real_like: run_experiment(&spec(cache, Preset::Dynamic25d, &[0.08], 10, threads)).unwrap(),
    }
}

impl Runs {
    fn all(&self) -> Vec<&Experiment> {
        let mut v: Vec<&Experiment> = self.noiseless.iter().map(|(_, e, _)| e).collect();
        v.extend([&self.static2d, &self.dynamic2d, &self.real_like]);
        v
    }
}

fn criterion_1(runs: &Runs) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (preset, e, secs) in &runs.noiseless {
        let sdp = records(e, 0.0, Method::Sdp);
        let threshold = rank1_threshold(preset.mode());
        let worst_pos = sdp.iter().map(|r| error_or_inf(r.pos_err)).fold(0.0, f64::max);
        let worst_rot = sdp.iter().map(|r| error_or_inf(r.rot_err)).fold(0.0, f64::max);
        let min_f = sdp.iter().map(|r| r.f_eig.unwrap_or(0.0)).fold(f64::INFINITY, f64::min);
        let below = sdp.iter().filter(|r| r.f_eig.unwrap_or(0.0) < threshold).count();
        let ok = worst_pos < 1e-4 && worst_rot < 1e-4 && below == 0 && *secs < 60.0;
        pass &= ok;
        parts.push(format!(
            "{preset} pos {worst_pos:.1e} rot {worst_rot:.1e} min f_eig {min_f:.2} ({below}/{} below {threshold}) {secs:.1}s",
            sdp.len()
        ));
    }
    outcome(1, "noiseless exactness", pass, parts.join("; "))
}

fn criterion_2(runs: &Runs) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (preset, e) in [(Preset::Static2d, &runs.static2d), (Preset::Dynamic2d, &runs.dynamic2d)] {
        for sigma in STATIC_SIGMAS {
            let med = |m: Method, f: fn(&TrialRecord) -> f64| {
                median(records(e, sigma, m).iter().map(|r| error_or_inf(f(r))).collect())
            };
            let (sp, lp) = (med(Method::Sdp, |r| r.pos_err), med(Method::Ls, |r| r.pos_err));
            let (sr, lr) = (med(Method::Sdp, |r| r.rot_err), med(Method::Ls, |r| r.rot_err));
            let ok = sp < lp && sr < lr;
            pass &= ok;
            parts.push(format!("{preset} σ={sigma}: pos {sp:.2e}<{lp:.2e} rot {sr:.2e}<{lr:.2e}{}", if ok { "" } else { " ✗" }));
        }
        let ls = records(e, 0.01, Method::Ls);
        let tail = ls.iter().filter(|r| error_or_inf(r.pos_err) > 1.0).count() as f64 / ls.len() as f64;
        pass &= tail >= 0.10;
        parts.push(format!("{preset} LS > 1 m at σ=0.01: {:.0}%", 100.0 * tail));
    }
    outcome(2, "local-minimum dominance", pass, parts.join("; "))
}

fn criterion_3(runs: &Runs) -> Outcome {
    let sweep = tightness_from(&runs.dynamic2d.records);
    let medians: Vec<String> = sweep
        .rows
        .iter()
        .map(|r| format!("σ={} {:.3}", r.sigma_r, r.f_eig.median))
        .collect();
    outcome(
        3,
        "tightness-vs-noise monotonicity",
        sweep.rows.len() == 5 && sweep.nonincreasing,
        format!("median f_eig {}", medians.join(", ")),
    )
}

fn criterion_4(runs: &Runs) -> Outcome {
    let e = &runs.real_like;
    let pos = |m: Method| mean(&records(e, 0.08, m).iter().map(|r| error_or_inf(r.pos_err)).collect::<Vec<_>>());
    let rot = |m: Method| mean(&records(e, 0.08, m).iter().map(|r| error_or_inf(r.rot_err)).collect::<Vec<_>>());
    let (sp, sr, lp) = (pos(Method::Sdp), rot(Method::Sdp), pos(Method::Ls));
    outcome(
        4,
        "2.5D dynamic at σ_r = 0.08",
        sp <= 0.1 && sr <= 0.2 && lp >= 3.0 * sp,
        format!("SDP mean pos {sp:.3} m, rot {sr:.3}; LS mean pos {lp:.3} m ({:.1}×)", lp / sp),
    )
}

fn criterion_5(runs: &Runs) -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for e in runs.all() {
        for s in e.records.iter().filter(|r| r.method == Method::Sdp) {
            let Some(primal) = s.primal_obj else { continue };
            let ls = e
                .records
                .iter()
                .find(|r| r.method == Method::Ls && r.trial == s.trial && r.sigma_r.to_bits() == s.sigma_r.to_bits())
                .expect("paired LS record");
            let c = ls.relaxed_cost;
            let excess = (primal - c) / (1.0 + c.abs());
            worst = worst.max(excess);
            checked += 1;
            if excess > 1e-7 {
                violations += 1;
            }
        }
    }
    outcome(
        5,
        "lower-bound property",
        violations == 0 && checked > 0,
        format!("{violations} violations over {checked} solved instances; max (primal − LM cost)/(1+|LM cost|) = {worst:.2e}"),
    )
}

fn criterion_6(runs: &Runs) -> Outcome {
    let optimal: Vec<&TrialRecord> = runs
        .all()
        .into_iter()
        .flat_map(|e| e.records.iter())
        .filter(|r| r.sdp_status == Some(SdpStatus::Optimal))
        .collect();
    let worst_gap = optimal.iter().filter_map(|r| r.gap).fold(0.0, f64::max);
    let worst_slack = optimal.iter().filter_map(|r| r.min_dual_slack).fold(f64::INFINITY, f64::min);
    outcome(
        6,
        "duality gap",
        worst_gap <= 1e-8 && worst_slack >= -1e-8,
        format!(
            "{} optimal solves, max rel_gap {worst_gap:.2e}, min dual slack eigenvalue {worst_slack:.2e}",
            optimal.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let (mut s, truth) = sample_scenario(&Preset::Static2d.config(0.0), 1).unwrap();
    s.measurements = simulate_measurements(&s, &truth, 2);
    let p = build(&s, Variant::Static).unwrap();
    let basis = discover_constraints(&p.layout, &DiscoveryOptions::default()).unwrap();
    let residuals: Vec<(String, f64)> = common::hand_derived_constraints(&p.layout)
        .into_iter()
        .map(|(name, m)| {
            let m = &m / m.norm();
            (name, basis.projection_residual(&m))
        })
        .collect();
    let worst = residuals.iter().map(|(_, r)| *r).fold(0.0, f64::max);
    outcome(
        7,
        "redundancy discovery recovers the hand-coded examples",
        worst < 1e-8,
        format!(
            "{} examples (h(r1 − r4), h(r2 + r3), lever-arm relations), max projection residual {worst:.1e}; basis size {}",
            residuals.len(),
            basis.len()
        ),
    )
}

fn criterion_8(cache: &Path) -> Outcome {
    let approx = run_experiment(&ExperimentSpec {
        methods: vec![Method::Sdp],
        ..spec(cache, Preset::Dynamic2d, &[0.0], 5, 1)
    })
    .unwrap();
    let mut exact_spec = ExperimentSpec {
        methods: vec![Method::Sdp],
        ..spec(cache, Preset::Dynamic2d, &[0.0], 5, 1)
    };
    exact_spec.pipeline.exact_dynamic = true;
    let exact = run_experiment(&exact_spec).unwrap();
    let worst = |e: &Experiment| e.records.iter().map(|r| error_or_inf(r.pos_err)).fold(0.0, f64::max);
    let dim = |e: &Experiment| e.records.iter().filter_map(|r| r.state_dim).min().unwrap_or(0);
    let time = |e: &Experiment| mean(&e.records.iter().map(|r| r.t_sdp).collect::<Vec<_>>());
    let (wa, we) = (worst(&approx), worst(&exact));
    let (da, de) = (dim(&approx), dim(&exact));
    let (ta, te) = (time(&approx), time(&exact));
    outcome(
        8,
        "approximation-free vs approximate dynamic",
        wa < 1e-3 && we < 1e-3 && de > da && te > ta,
        format!("pos error approx {wa:.1e} / exact {we:.1e} m; state dim {da} / {de}; mean SDP time {ta:.3}s / {te:.3}s"),
    )
}

fn criterion_9() -> Outcome {
    let h = 1e-6;
    let mut worst_jac = 0.0f64;
    for preset in Preset::ALL {
        let (mut s, truth) = sample_scenario(&preset.config(0.05), 5).unwrap();
        s.measurements = simulate_measurements(&s, &truth, 6);
        let par = Parameterization::new(&s);
        for model in [LiftModel::Exact, LiftModel::FirstOrder] {
            for k in 0..100 {
                let est = random_init(&s, 100 + k);
                let (_, jac) = residuals_and_jacobian_with(&s, &est, model);
                for c in 0..par.len() {
                    let mut e = DVector::zeros(par.len());
                    e[c] = h;
                    let (rp, _) = residuals_and_jacobian_with(&s, &par.retract(&est, &e), model);
                    let (rm, _) = residuals_and_jacobian_with(&s, &par.retract(&est, &(-&e)), model);
                    let fd = (rp - rm) / (2.0 * h);
                    let col = jac.column(c);
                    worst_jac = worst_jac.max((&fd - col).amax() / col.amax().max(1e-8));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_eig = 0.0f64;
    for _ in 0..20 {
        let a = DMatrix::from_fn(30, 30, |_, _| rng.random_range(-1.0..1.0));
        let m = &a + a.transpose();
        let eig = sym_eig(&m);
        let rec = &eig.vectors * DMatrix::from_diagonal(&eig.values) * eig.vectors.transpose();
        worst_eig = worst_eig.max((rec - &m).norm() / m.norm());
    }
    let mut worst_log = 0.0f64;
    for k in 0..1000 {
        let d = if k % 2 == 0 { 2 } else { 3 };
        let angular_len = if d == 2 { 1 } else { 3 };
        let mut angular = DVector::from_fn(angular_len, |_, _| rng.random_range(-1.0..1.0));
        let angle = rng.random_range(0.0..3.0);
        angular *= angle / angular.norm();
        let twist = Twist::new(angular, DVector::from_fn(d, |_, _| rng.random_range(-4.0..4.0)));
        let back = log_se(&exp_se(&twist, 1.0)).unwrap();
        let err = (&back.angular - &twist.angular).amax().max((&back.linear - &twist.linear).amax());
        worst_log = worst_log.max(err);
    }
    outcome(
        9,
        "numerical hygiene",
        worst_jac < 1e-5 && worst_eig < 1e-9 && worst_log < 1e-9,
        format!("Jacobian {worst_jac:.1e}, sym_eig reconstruction {worst_eig:.1e}, exp/log roundtrip {worst_log:.1e}"),
    )
}

fn criterion_10(cache: &Path, runs: &Runs) -> Outcome {
    let again = run_all(cache, 1);
    let pairs = runs.all().into_iter().zip(again.all());
    let differing = pairs.filter(|(a, b)| masked_csv(a) != masked_csv(b)).count();
    outcome(
        10,
        "determinism across thread counts",
        differing == 0,
        format!("{differing} of {} trial tables differ between {THREADS} threads and 1 thread (timing columns masked)", runs.all().len()),
    )
}

fn soft_timing(runs: &Runs) {
    for (preset, reference) in REFERENCE_SDP_SECONDS {
        let e = match preset {
            Preset::Static2d => &runs.static2d,
            Preset::Dynamic2d => &runs.dynamic2d,
            Preset::Dynamic25d => &runs.real_like,
            Preset::Static3d => &runs.noiseless.iter().find(|(p, _, _)| *p == preset).unwrap().1,
        };
        let t: Vec<f64> = e.records.iter().filter(|r| r.method == Method::Sdp).map(|r| r.t_sdp).collect();
        let avg = mean(&t);
        println!(
            "soft budget {preset}: mean SDP solve {avg:.3}s vs 10× reference {:.2}s ({})",
            10.0 * reference,
            if avg <= 10.0 * reference { "within" } else { "over" }
        );
    }
}

fn main() {
    let cache = tempfile::tempdir().expect("temporary cache directory");
    let start = Instant::now();
    let runs = run_all(cache.path(), THREADS);
    let outcomes = vec![
        criterion_1(&runs),
        criterion_2(&runs),
        criterion_3(&runs),
        criterion_4(&runs),
        criterion_5(&runs),
        criterion_6(&runs),
        criterion_7(),
        criterion_8(cache.path()),
        criterion_9(),
        criterion_10(cache.path(), &runs),
    ];
    soft_timing(&runs);
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.0}s",
        outcomes.len() - failed.len(),
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
