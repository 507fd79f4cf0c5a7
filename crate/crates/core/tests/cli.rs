use ro_init::redundancy::load_basis;
use ro_init::scenario::{sample_scenario, simulate_measurements, Preset};
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn ro_init(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ro-init")).args(args).output().unwrap()
}

fn write_scenario(path: &Path, preset: Preset, sigma: f64) {
    let (mut s, truth) = sample_scenario(&preset.config(sigma), 11).unwrap();
    s.measurements = simulate_measurements(&s, &truth, 12);
    s.save(path).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn discover_writes_a_loadable_basis() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("static2d.basis");
    let run = ro_init(&["discover", "--preset", "static2d", "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let basis = load_basis(&out).unwrap();
    assert_eq!(basis.n(), 13);
    assert_eq!(basis.q(), 7);
}

#[test]
fn solve_static_with_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    write_scenario(&scenario, Preset::Static2d, 0.0);

    let sdp = dir.path().join("sdp.json");
    let run = ro_init(&["solve", "--scenario", scenario.to_str().unwrap(), "--method", "sdp", "--out", sdp.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let v = read_json(&sdp);
    assert_eq!(v["method"], "SDP");
    assert!(v["position_error"].as_f64().unwrap() < 1e-4);
    assert!(v["sdp"]["rank1"].as_bool().unwrap());
    assert_eq!(v["rotation"].as_array().unwrap().len(), 2);

    let ls = dir.path().join("ls.json");
    let run = ro_init(&[
        "solve",
        "--scenario",
        scenario.to_str().unwrap(),
        "--method",
        "ls",
        "--seed",
        "4",
        "--out",
        ls.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    let v = read_json(&ls);
    assert_eq!(v["method"], "LS");
    assert!(v.get("sdp").is_none());
    assert!(v["map_cost"].as_f64().unwrap() >= 0.0);
}

#[test]
fn solve_dynamic_reports_a_twist() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    write_scenario(&scenario, Preset::Dynamic2d, 0.01);
    let out = dir.path().join("est.json");
    let run = ro_init(&["solve", "--scenario", scenario.to_str().unwrap(), "--method", "sdp", "--out", out.to_str().unwrap()]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let v = read_json(&out);
    assert_eq!(v["twist"]["angular"].as_array().unwrap().len(), 1);
    assert_eq!(v["twist"]["linear"].as_array().unwrap().len(), 2);
}

#[test]
fn tiny_bench_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let run = ro_init(&[
        "bench",
        "--preset",
        "static2d",
        "--sigma",
        "0.01,0.05",
        "--trials",
        "3",
        "--threads",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    for f in ["trials.csv", "summary.csv", "f_eig.svg", "boxplot_sigma_0.01.svg", "boxplot_sigma_0.05.svg"] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let trials = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 2 * 3 * 2);
}

#[test]
fn bad_arguments_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(ro_init(&["bench", "--preset", "nope", "--out", out]).status.code(), Some(2));
    assert_eq!(ro_init(&["bench", "--preset", "static2d", "--trials", "0", "--out", out]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    let est = dir.path().join("est.json");
    let run = ro_init(&["solve", "--scenario", missing.to_str().unwrap(), "--method", "ls", "--out", est.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(!ro_init(&["frobnicate"]).status.success());
}
