use clap::{Parser, Subcommand, ValueEnum};
use ro_init::bench::{emit_outputs, run_experiment, tightness_from, ExperimentSpec, DEFAULT_SIGMAS, REAL_LIKE_SIGMA};
use ro_init::pipeline::{EstimateReport, Method, Pipeline, PipelineOptions};
use ro_init::qcqp::{StateLayout, Variant};
use ro_init::redundancy::{discover_constraints, save_basis, DiscoveryOptions};
use ro_init::scenario::{sample_scenario, Preset, Scenario};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ro-init", version, about = "Certifiable range-only pose and trajectory initialization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo comparison of the SDP pipeline against LM from random starts.
    Bench {
        /// static2d, static3d, dynamic2d, dynamic25d, or real-like (simulated dynamic25d at σ_r = 0.08).
        #[arg(long)]
        preset: String,
        /// Comma-separated noise levels (standard deviation of squared-range noise).
        #[arg(long, value_delimiter = ',')]
        sigma: Option<Vec<f64>>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Use the approximation-free dynamic relaxation.
        #[arg(long)]
        exact_dynamic: bool,
        /// Skip LM refinement of the SDP estimate.
        #[arg(long)]
        no_refine: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Solves one scenario file and writes the estimate as JSON.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
        /// Seed of the random LM initialization.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        exact_dynamic: bool,
        #[arg(long)]
        no_refine: bool,
    },
    /// Discovers the redundant constraint basis of a preset and writes it to a file.
    Discover {
        #[arg(long)]
        preset: Preset,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Sdp,
    Ls,
}

fn pipeline_options(exact_dynamic: bool, no_refine: bool) -> PipelineOptions {
    PipelineOptions {
        exact_dynamic,
        refine: no_refine.then_some(false),
        ..PipelineOptions::default()
    }
}

fn bench(
    preset: &str,
    sigma: Option<Vec<f64>>,
    trials: usize,
    seed: u64,
    out: PathBuf,
    options: PipelineOptions,
    threads: Option<usize>,
) -> Result<ExitCode, String> {
    let (preset, default_sigmas) = if preset == "real-like" {
        println!("real-like preset: simulated dynamic25d trials at σ_r = {REAL_LIKE_SIGMA} (no hardware data)");
        (Preset::Dynamic25d, vec![REAL_LIKE_SIGMA])
    } else {
        (preset.parse::<Preset>()?, DEFAULT_SIGMAS.to_vec())
    };
    let spec = ExperimentSpec {
        pipeline: options,
        threads,
        ..ExperimentSpec::new(preset, sigma.unwrap_or(default_sigmas), trials, seed)
    };
    let experiment = run_experiment(&spec).map_err(|e| e.to_string())?;
    let files = emit_outputs(&experiment.records, &out).map_err(|e| e.to_string())?;
    println!(
        "{:>8} {:>6} {:>6} {:>12} {:>12} {:>8} {:>8}",
        "sigma_r", "method", "failed", "pos_median", "rot_median", "f_eig", "rank1"
    );
    for s in &experiment.summary {
        println!(
            "{:>8} {:>6} {:>6} {:>12.3e} {:>12.3e} {:>8} {:>8}",
            s.sigma_r,
            s.method.name(),
            s.failed,
            s.pos_err.median,
            s.rot_err.median,
            s.f_eig.map(|q| format!("{:.2}", q.median)).unwrap_or_default(),
            s.rank1_fraction.map(|f| format!("{f:.2}")).unwrap_or_default()
        );
    }
    let sweep = tightness_from(&experiment.records);
    if sweep.rows.len() > 1 {
        println!("median f_eig nonincreasing in σ_r: {}", sweep.nonincreasing);
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    let failures = experiment.numerical_failures();
    if failures > 0 {
        eprintln!("{failures} trial(s) ended in numerical failure");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn report_json(scenario: &Scenario, report: &EstimateReport) -> serde_json::Value {
    let est = &report.estimate;
    let rotation: Vec<Vec<f64>> = est.pose.rotation.matrix().row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut out = json!({
        "method": report.method.name(),
        "mode": scenario.mode,
        "rotation": rotation,
        "translation": est.pose.translation.as_slice(),
        "map_cost": report.map_cost,
        "lm_iterations": report.lm_iterations,
        "timing": {
            "build": report.timing.build,
            "discover": report.timing.discover,
            "sdp": report.timing.sdp,
            "extract": report.timing.extract,
        },
    });
    if let Some(t) = &est.twist {
        out["twist"] = json!({ "angular": t.angular.as_slice(), "linear": t.linear.as_slice() });
    }
    if let (Some(p), Some(r)) = (report.position_error, report.rotation_error) {
        out["position_error"] = json!(p);
        out["rotation_error"] = json!(r);
    }
    if let (Some(s), Some(c)) = (&report.sdp, &report.certificate) {
        out["sdp"] = json!({
            "status": s.status.name(),
            "primal_obj": s.primal_obj,
            "dual_obj": s.dual_obj,
            "rel_gap": s.rel_gap,
            "min_dual_slack": s.min_dual_slack,
            "iterations": s.iterations,
            "state_dim": s.state_dim,
            "f_eig": c.f_eig,
            "rank1": c.rank1,
        });
    }
    out
}

fn solve(scenario: PathBuf, method: MethodArg, out: PathBuf, seed: u64, options: PipelineOptions) -> Result<ExitCode, String> {
    let scenario = Scenario::load(&scenario).map_err(|e| e.to_string())?;
    let pipeline = Pipeline::new(options);
    let report = match method {
        MethodArg::Sdp => pipeline.solve_sdp(&scenario).map_err(|e| e.to_string())?,
        MethodArg::Ls => pipeline.solve_ls(&scenario, seed),
    };
    let body = serde_json::to_string_pretty(&report_json(&scenario, &report)).map_err(|e| e.to_string())?;
    std::fs::write(&out, body + "\n").map_err(|e| format!("{}: {e}", out.display()))?;
    match (report.method, &report.certificate) {
        (Method::Sdp, Some(c)) => println!("{}: cost {:.6e}, f_eig {:.2}", report.method.name(), report.map_cost, c.f_eig),
        _ => println!("{}: cost {:.6e}", report.method.name(), report.map_cost),
    }
    Ok(ExitCode::SUCCESS)
}

fn discover(preset: Preset, out: PathBuf, seed: Option<u64>) -> Result<ExitCode, String> {
    let (scenario, _) = sample_scenario(&preset.config(0.0), 0).map_err(|e| e.to_string())?;
    let layout = StateLayout::new(&scenario, Variant::for_mode(preset.mode(), false)).map_err(|e| e.to_string())?;
    let mut options = DiscoveryOptions::default();
    if let Some(s) = seed {
        options.seed = s;
    }
    let basis = discover_constraints(&layout, &options).map_err(|e| e.to_string())?;
    save_basis(&basis, &out).map_err(|e| e.to_string())?;
    println!(
        "{preset}: n = {}, span dimension {}, {} constraints ({} in the reduced space); wrote {}",
        basis.n(),
        basis.q(),
        basis.len(),
        basis.reduced.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench {
            preset,
            sigma,
            trials,
            seed,
            out,
            exact_dynamic,
            no_refine,
            threads,
        } => bench(&preset, sigma, trials, seed, out, pipeline_options(exact_dynamic, no_refine), threads),
        Command::Solve {
            scenario,
            method,
            out,
            seed,
            exact_dynamic,
            no_refine,
        } => solve(scenario, method, out, seed, pipeline_options(exact_dynamic, no_refine)),
        Command::Discover { preset, out, seed } => discover(preset, out, seed),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(2)
    })
}
