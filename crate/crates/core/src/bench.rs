//! Monte Carlo harness comparing the SDP pipeline with LM from random
//! initializations, plus CSV and SVG emitters.

use crate::extraction::{rank1_threshold, ExtractionError};
use crate::pipeline::{EstimateReport, Method, Pipeline, PipelineError, PipelineOptions};
use crate::scenario::{sample_scenario, simulate_measurements, Preset, Scenario};
use crate::sdp::SdpStatus;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DEFAULT_SIGMAS: [f64; 5] = [0.01, 0.03, 0.05, 0.08, 0.1];
/// Noise level of the simulated stand-in for the hardware experiments.
pub const REAL_LIKE_SIGMA: f64 = 0.08;
pub const TRIALS_HEADER: &str = "trial,sigma_r,method,pos_err,rot_err,f_eig,gap,cost,t_build,t_sdp,t_extract,status";
pub const SUMMARY_HEADER: &str = "sigma_r,method,trials,failed,pos_err_q1,pos_err_median,pos_err_q3,pos_err_mean,\
rot_err_q1,rot_err_median,rot_err_q3,rot_err_mean,f_eig_q1,f_eig_median,f_eig_q3,rank1_fraction,pos_err_over_1m";
/// Position error counted as a local-minimum failure.
pub const LARGE_ERROR: f64 = 1.0;

const NOISE_STREAM: u64 = 0x6e01_5e00_0000_0001;
const INIT_STREAM: u64 = 0x1417_0000_0000_0002;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub sigmas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub pipeline: PipelineOptions,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl ExperimentSpec {
    pub fn new(preset: Preset, sigmas: Vec<f64>, trials: usize, seed: u64) -> Self {
        ExperimentSpec {
            preset,
            sigmas,
            trials,
            seed,
            methods: vec![Method::Sdp, Method::Ls],
            pipeline: PipelineOptions::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.trials == 0 {
            return Err(BenchError::InvalidSpec("trials must be at least 1".into()));
        }
        if self.sigmas.is_empty() {
            return Err(BenchError::InvalidSpec("no noise levels".into()));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(BenchError::InvalidSpec(format!("noise level {s} is not a nonnegative number")));
        }
        if self.methods.is_empty() {
            return Err(BenchError::InvalidSpec("no methods selected".into()));
        }
        if self.threads == Some(0) {
            return Err(BenchError::InvalidSpec("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// `seed ⊕ H(trial)`, with `H` the leading 8 bytes of SHA-256 of the trial id.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    let digest = Sha256::digest((trial as u64).to_le_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    seed ^ u64::from_le_bytes(head)
}

/// Scenario with simulated measurements for one trial. Geometry, truth and
/// the standard-normal noise draws depend only on `(seed, trial)`, so the
/// noise levels of a sweep share them.
pub fn trial_scenario(preset: Preset, sigma_r: f64, seed: u64, trial: usize) -> Result<Scenario, String> {
    let s = trial_seed(seed, trial);
    let (mut scenario, truth) = sample_scenario(&preset.config(sigma_r), s).map_err(|e| e.to_string())?;
    scenario.measurements = simulate_measurements(&scenario, &truth, s ^ NOISE_STREAM);
    Ok(scenario)
}

pub fn trial_init_seed(seed: u64, trial: usize) -> u64 {
    trial_seed(seed, trial) ^ INIT_STREAM
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub sigma_r: f64,
    pub method: Method,
    pub pos_err: f64,
    pub rot_err: f64,
    pub f_eig: Option<f64>,
    pub gap: Option<f64>,
    /// Exact MAP cost of the final estimate.
    pub cost: f64,
    pub t_build: f64,
    pub t_sdp: f64,
    pub t_extract: f64,
    pub status: String,
    pub rank1: Option<bool>,
    pub primal_obj: Option<f64>,
    /// Cost of the final estimate under the relaxation's motion model.
    pub relaxed_cost: f64,
    pub min_dual_slack: Option<f64>,
    pub sdp_status: Option<SdpStatus>,
    pub state_dim: Option<usize>,
}

impl TrialRecord {
    fn failed(trial: usize, sigma_r: f64, method: Method, status: String) -> Self {
        TrialRecord {
            trial,
            sigma_r,
            method,
            pos_err: f64::NAN,
            rot_err: f64::NAN,
            f_eig: None,
            gap: None,
            cost: f64::NAN,
            t_build: 0.0,
            t_sdp: 0.0,
            t_extract: 0.0,
            status,
            rank1: None,
            primal_obj: None,
            relaxed_cost: f64::NAN,
            min_dual_slack: None,
            sdp_status: None,
            state_dim: None,
        }
    }

    fn from_report(trial: usize, sigma_r: f64, report: &EstimateReport, status: String) -> Self {
        let sdp = report.sdp.as_ref();
        let cert = report.certificate.as_ref();
        TrialRecord {
            trial,
            sigma_r,
            method: report.method,
            pos_err: report.position_error.unwrap_or(f64::NAN),
            rot_err: report.rotation_error.unwrap_or(f64::NAN),
            f_eig: cert.map(|c| c.f_eig),
            gap: sdp.map(|s| s.rel_gap),
            cost: report.map_cost,
            t_build: report.timing.build + report.timing.discover,
            t_sdp: report.timing.sdp,
            t_extract: report.timing.extract,
            status,
            rank1: cert.map(|c| c.rank1),
            primal_obj: sdp.map(|s| s.primal_obj),
            relaxed_cost: report.relaxed_cost,
            min_dual_slack: sdp.map(|s| s.min_dual_slack),
            sdp_status: sdp.map(|s| s.status),
            state_dim: sdp.map(|s| s.state_dim),
        }
    }

    pub fn is_failure(&self) -> bool {
        !(self.pos_err.is_finite() && self.rot_err.is_finite())
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(sig9).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.trial,
            sig9(self.sigma_r),
            self.method.name(),
            sig9(self.pos_err),
            sig9(self.rot_err),
            opt(self.f_eig),
            opt(self.gap),
            sig9(self.cost),
            sig9(self.t_build),
            sig9(self.t_sdp),
            sig9(self.t_extract),
            self.status
        )
    }
}

/// Nine significant digits.
pub fn sig9(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        v.to_string().to_lowercase()
    }
}

fn error_status(e: &PipelineError) -> String {
    match e {
        PipelineError::Extraction(ExtractionError::Unsolved { status, .. }) => (*status).to_string(),
        PipelineError::Extraction(ExtractionError::HomogenizationCollapse(_)) => "homogenization_collapse".into(),
        PipelineError::Extraction(_) => "extraction_failed".into(),
        PipelineError::Build(_) => "build_failed".into(),
        PipelineError::Redundancy(_) => "discovery_failed".into(),
    }
}

fn run_trial(spec: &ExperimentSpec, pipeline: &Pipeline, sigma_r: f64, trial: usize) -> Vec<TrialRecord> {
    let scenario = match trial_scenario(spec.preset, sigma_r, spec.seed, trial) {
        Ok(s) => s,
        Err(_) => {
            return spec
                .methods
                .iter()
                .map(|&m| TrialRecord::failed(trial, sigma_r, m, "scenario_failed".into()))
                .collect()
        }
    };
    spec.methods
        .iter()
        .map(|&method| match method {
            Method::Sdp => match pipeline.solve_sdp(&scenario) {
                Ok(r) => {
                    let status = r.sdp.as_ref().map_or("optimal", |s| s.status.name()).to_string();
                    TrialRecord::from_report(trial, sigma_r, &r, status)
                }
                Err(e) => TrialRecord::failed(trial, sigma_r, method, error_status(&e)),
            },
            Method::Ls => {
                let r = pipeline.solve_ls(&scenario, trial_init_seed(spec.seed, trial));
                let status = if r.lm_iterations >= spec.pipeline.lm.max_iter {
                    "max_iter"
                } else {
                    "converged"
                };
                TrialRecord::from_report(trial, sigma_r, &r, status.into())
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

/// Linearly interpolated quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_finite(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v
}

impl Quartiles {
    /// Quartiles of the finite values.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Quartiles {
        let v = sorted_finite(values);
        Quartiles {
            q1: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q3: quantile(&v, 0.75),
        }
    }
}

pub fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    Quartiles::of(values).median
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let v = sorted_finite(values);
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    pub sigma_r: f64,
    pub method: Method,
    pub trials: usize,
    pub failed: usize,
    pub pos_err: Quartiles,
    pub pos_err_mean: f64,
    pub rot_err: Quartiles,
    pub rot_err_mean: f64,
    pub f_eig: Option<Quartiles>,
    pub rank1_fraction: Option<f64>,
    /// Fraction of all trials with position error above [`LARGE_ERROR`].
    pub large_error_fraction: f64,
}

impl LevelSummary {
    pub fn csv_row(&self) -> String {
        let q = |f: fn(&Quartiles) -> f64| self.f_eig.as_ref().map(|x| sig9(f(x))).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            sig9(self.sigma_r),
            self.method.name(),
            self.trials,
            self.failed,
            sig9(self.pos_err.q1),
            sig9(self.pos_err.median),
            sig9(self.pos_err.q3),
            sig9(self.pos_err_mean),
            sig9(self.rot_err.q1),
            sig9(self.rot_err.median),
            sig9(self.rot_err.q3),
            sig9(self.rot_err_mean),
            q(|x| x.q1),
            q(|x| x.median),
            q(|x| x.q3),
            self.rank1_fraction.map(sig9).unwrap_or_default(),
            sig9(self.large_error_fraction)
        )
    }
}

/// Per-(σ, method) statistics over successful trials, in first-seen order.
pub fn summarize(records: &[TrialRecord]) -> Vec<LevelSummary> {
    let mut keys: Vec<(f64, Method)> = Vec::new();
    for r in records {
        if !keys.iter().any(|&(s, m)| s.to_bits() == r.sigma_r.to_bits() && m == r.method) {
            keys.push((r.sigma_r, r.method));
        }
    }
    keys.into_iter()
        .map(|(sigma_r, method)| {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.sigma_r.to_bits() == sigma_r.to_bits() && r.method == method)
                .collect();
            let ok: Vec<&TrialRecord> = group.iter().copied().filter(|r| !r.is_failure()).collect();
            let is_sdp = method == Method::Sdp;
            LevelSummary {
                sigma_r,
                method,
                trials: group.len(),
                failed: group.len() - ok.len(),
                pos_err: Quartiles::of(ok.iter().map(|r| r.pos_err)),
                pos_err_mean: mean(ok.iter().map(|r| r.pos_err)),
                rot_err: Quartiles::of(ok.iter().map(|r| r.rot_err)),
                rot_err_mean: mean(ok.iter().map(|r| r.rot_err)),
                f_eig: is_sdp.then(|| Quartiles::of(ok.iter().filter_map(|r| r.f_eig))),
                rank1_fraction: is_sdp
                    .then(|| group.iter().filter(|r| r.rank1 == Some(true)).count() as f64 / group.len() as f64),
                large_error_fraction: group.iter().filter(|r| r.pos_err > LARGE_ERROR).count() as f64
                    / group.len() as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub preset: Preset,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<LevelSummary>,
}

impl Experiment {
    pub fn numerical_failures(&self) -> usize {
        self.records.iter().filter(|r| r.status == SdpStatus::NumericalFailure.name()).count()
    }

    pub fn level(&self, sigma_r: f64, method: Method) -> Option<&LevelSummary> {
        self.summary
            .iter()
            .find(|s| s.sigma_r.to_bits() == sigma_r.to_bits() && s.method == method)
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, BenchError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| BenchError::ThreadPool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs every (noise level, trial) pair. Records come back ordered by level,
/// trial and method whatever the thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Experiment, BenchError> {
    spec.validate()?;
    let pipeline = Pipeline::new(spec.pipeline.clone());
    let jobs: Vec<(f64, usize)> = spec
        .sigmas
        .iter()
        .flat_map(|&s| (0..spec.trials).map(move |t| (s, t)))
        .collect();
    let records: Vec<TrialRecord> = in_pool(spec.threads, || {
        jobs.par_iter()
            .map(|&(s, t)| run_trial(spec, &pipeline, s, t))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    })?;
    let summary = summarize(&records);
    Ok(Experiment {
        preset: spec.preset,
        records,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightnessRow {
    pub sigma_r: f64,
    pub trials: usize,
    pub f_eig: Quartiles,
    pub min: f64,
    pub max: f64,
    pub rank1_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightnessSweep {
    pub rows: Vec<TightnessRow>,
    /// Median f_eig never increases along the (ascending) noise levels.
    pub nonincreasing: bool,
}

/// f_eig distribution per noise level from SDP-only trials.
pub fn noise_tightness_sweep(spec: &ExperimentSpec) -> Result<TightnessSweep, BenchError> {
    let mut sigmas = spec.sigmas.clone();
    sigmas.sort_by(f64::total_cmp);
    let sdp_only = ExperimentSpec {
        sigmas,
        methods: vec![Method::Sdp],
        ..spec.clone()
    };
    Ok(tightness_from(&run_experiment(&sdp_only)?.records))
}

pub fn tightness_from(records: &[TrialRecord]) -> TightnessSweep {
    let mut sigmas: Vec<f64> = Vec::new();
    for r in records.iter().filter(|r| r.method == Method::Sdp) {
        if !sigmas.iter().any(|s| s.to_bits() == r.sigma_r.to_bits()) {
            sigmas.push(r.sigma_r);
        }
    }
    sigmas.sort_by(f64::total_cmp);
    let rows: Vec<TightnessRow> = sigmas
        .into_iter()
        .map(|sigma_r| {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.method == Method::Sdp && r.sigma_r.to_bits() == sigma_r.to_bits())
                .collect();
            let f = sorted_finite(group.iter().filter_map(|r| r.f_eig));
            TightnessRow {
                sigma_r,
                trials: group.len(),
                f_eig: Quartiles::of(f.iter().copied()),
                min: f.first().copied().unwrap_or(f64::NAN),
                max: f.last().copied().unwrap_or(f64::NAN),
                rank1_fraction: group.iter().filter(|r| r.rank1 == Some(true)).count() as f64 / group.len() as f64,
            }
        })
        .collect();
    let nonincreasing = rows.windows(2).all(|w| w[1].f_eig.median <= w[0].f_eig.median);
    TightnessSweep { rows, nonincreasing }
}

pub fn trials_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(TRIALS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn summary_csv(summary: &[LevelSummary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summary {
        out.push_str(&s.csv_row());
        out.push('\n');
    }
    out
}

/// File stem of the box plot for one noise level.
pub fn boxplot_name(sigma_r: f64) -> String {
    format!("boxplot_sigma_{sigma_r}.svg")
}

/// Writes `trials.csv`, `summary.csv`, one box plot per noise level and an
/// f_eig plot when SDP records are present. Returns the written paths.
pub fn emit_outputs(records: &[TrialRecord], dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let summary = summarize(records);
    let mut files = vec![
        (dir.join("trials.csv"), trials_csv(records)),
        (dir.join("summary.csv"), summary_csv(&summary)),
    ];
    let mut sigmas: Vec<f64> = summary.iter().map(|s| s.sigma_r).collect();
    sigmas.dedup_by(|a, b| a.to_bits() == b.to_bits());
    for &s in &sigmas {
        let level: Vec<&TrialRecord> = records.iter().filter(|r| r.sigma_r.to_bits() == s.to_bits()).collect();
        files.push((dir.join(boxplot_name(s)), error_boxplot_svg(s, &level)));
    }
    if records.iter().any(|r| r.method == Method::Sdp) {
        files.push((dir.join("f_eig.svg"), f_eig_svg(&tightness_from(records))));
    }
    let mut written = Vec::with_capacity(files.len());
    for (path, body) in files {
        fs::write(&path, body).map_err(io_error(&path))?;
        written.push(path);
    }
    Ok(written)
}

struct BoxStats {
    lo: f64,
    q1: f64,
    median: f64,
    q3: f64,
    hi: f64,
    outliers: Vec<f64>,
}

/// Tukey box: whiskers at the furthest points within 1.5 IQR.
fn box_stats(values: &[f64]) -> Option<BoxStats> {
    let v = sorted_finite(values.iter().copied());
    if v.is_empty() {
        return None;
    }
    let (q1, median, q3) = (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75));
    let fence = 1.5 * (q3 - q1);
    let inside: Vec<f64> = v.iter().copied().filter(|x| *x >= q1 - fence && *x <= q3 + fence).collect();
    Some(BoxStats {
        lo: inside.first().copied().unwrap_or(q1),
        q1,
        median,
        q3,
        hi: inside.last().copied().unwrap_or(q3),
        outliers: v.into_iter().filter(|x| *x < q1 - fence || *x > q3 + fence).collect(),
    })
}

struct Axis {
    top: f64,
    height: f64,
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn y(&self, v: f64) -> f64 {
        let t = if self.log { v.max(10f64.powf(self.lo)).log10() } else { v };
        let f = ((t - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0);
        self.top + self.height * (1.0 - f)
    }
}

const PLOT_LEFT: f64 = 70.0;
const SLOT: f64 = 90.0;
const BOX_HALF: f64 = 22.0;

fn draw_box(svg: &mut String, axis: &Axis, x: f64, b: &BoxStats, color: &str) {
    let (y_lo, y_q1, y_med, y_q3, y_hi) = (axis.y(b.lo), axis.y(b.q1), axis.y(b.median), axis.y(b.q3), axis.y(b.hi));
    let _ = writeln!(svg, r#"<line x1="{x:.1}" y1="{y_lo:.1}" x2="{x:.1}" y2="{y_q1:.1}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x:.1}" y1="{y_q3:.1}" x2="{x:.1}" y2="{y_hi:.1}" stroke="black"/>"#);
    for y in [y_lo, y_hi] {
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black"/>"#,
            x - BOX_HALF / 2.0,
            x + BOX_HALF / 2.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{:.1}" y="{y_q3:.1}" width="{:.1}" height="{:.1}" fill="{color}" fill-opacity="0.5" stroke="black"/>"#,
        x - BOX_HALF,
        2.0 * BOX_HALF,
        (y_q1 - y_q3).max(0.5)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{:.1}" y1="{y_med:.1}" x2="{:.1}" y2="{y_med:.1}" stroke="black" stroke-width="2"/>"#,
        x - BOX_HALF,
        x + BOX_HALF
    );
    for o in &b.outliers {
        let _ = writeln!(svg, r#"<circle cx="{x:.1}" cy="{:.1}" r="2" fill="none" stroke="black"/>"#, axis.y(*o));
    }
}

fn draw_axis(svg: &mut String, axis: &Axis, right: f64, label: &str) {
    let bottom = axis.top + axis.height;
    let _ = writeln!(
        svg,
        r#"<line x1="{PLOT_LEFT}" y1="{:.1}" x2="{PLOT_LEFT}" y2="{bottom:.1}" stroke="black"/>"#,
        axis.top
    );
    let _ = writeln!(svg, r#"<line x1="{PLOT_LEFT}" y1="{bottom:.1}" x2="{right:.1}" y2="{bottom:.1}" stroke="black"/>"#);
    let (a, b) = (axis.lo.floor() as i32, axis.hi.ceil() as i32);
    let step = if axis.log { 1 } else { ((b - a) / 8).max(1) };
    let mut t = a;
    while t <= b {
        let v = if axis.log { 10f64.powi(t) } else { t as f64 };
        let y = axis.y(v);
        let text = if axis.log { format!("1e{t}") } else { t.to_string() };
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{right:.1}" y2="{y:.1}" stroke="#dddddd"/>"##,
            PLOT_LEFT
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{text}</text>"#,
            PLOT_LEFT - 4.0,
            y + 3.0
        );
        t += step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.1}" font-size="11" transform="rotate(-90 14 {:.1})" text-anchor="middle">{label}</text>"#,
        axis.top + axis.height / 2.0,
        axis.top + axis.height / 2.0
    );
}

fn log_range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let v = sorted_finite(values.into_iter().filter(|x| *x > 0.0));
    match (v.first(), v.last()) {
        (Some(a), Some(b)) => {
            let lo = a.log10().floor().max(-12.0);
            let hi = b.log10().ceil().max(lo + 1.0);
            (lo, hi)
        }
        _ => (-3.0, 1.0),
    }
}

fn method_color(m: Method) -> &'static str {
    match m {
        Method::Sdp => "#1f77b4",
        Method::Ls => "#d62728",
    }
}

/// Position and rotation error distributions per method at one noise level.
pub fn error_boxplot_svg(sigma_r: f64, records: &[&TrialRecord]) -> String {
    let mut methods: Vec<Method> = Vec::new();
    for r in records {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let panel_width = SLOT * methods.len().max(1) as f64;
    let width = 2.0 * (PLOT_LEFT + panel_width) + 20.0;
    let height = 300.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="18" font-size="13" text-anchor="middle">σ_r = {sigma_r} (simulation)</text>"#,
        width / 2.0
    );
    let panels: [(&str, fn(&TrialRecord) -> f64); 2] = [("position error [m]", |r| r.pos_err), ("rotation error", |r| r.rot_err)];
    for (p, (label, get)) in panels.iter().enumerate() {
        let offset = p as f64 * (PLOT_LEFT + panel_width + 10.0);
        let (lo, hi) = log_range(records.iter().map(|r| get(r)));
        let axis = Axis {
            top: 35.0,
            height: height - 75.0,
            lo,
            hi,
            log: true,
        };
        let _ = writeln!(svg, r#"<g transform="translate({offset:.1},0)">"#);
        draw_axis(&mut svg, &axis, PLOT_LEFT + panel_width, label);
        for (i, &m) in methods.iter().enumerate() {
            let x = PLOT_LEFT + SLOT * (i as f64 + 0.5);
            let values: Vec<f64> = records.iter().filter(|r| r.method == m).map(|r| get(r)).collect();
            if let Some(b) = box_stats(&values) {
                draw_box(&mut svg, &axis, x, &b, method_color(m));
            }
            let _ = writeln!(
                svg,
                r#"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
                height - 22.0,
                m.name()
            );
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    svg
}

/// f_eig distribution per noise level with the dynamic rank-one threshold.
pub fn f_eig_svg(sweep: &TightnessSweep) -> String {
    let width = PLOT_LEFT + SLOT * sweep.rows.len().max(1) as f64 + 20.0;
    let height = 300.0;
    let axis = Axis {
        top: 35.0,
        height: height - 75.0,
        lo: 0.0,
        hi: crate::extraction::F_EIG_CAP,
        log: false,
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="18" font-size="13" text-anchor="middle">f_eig versus σ_r (simulation)</text>"#,
        width / 2.0
    );
    draw_axis(&mut svg, &axis, width - 20.0, "f_eig");
    let y = axis.y(rank1_threshold(crate::scenario::Mode::Dynamic));
    let _ = writeln!(
        svg,
        r#"<line x1="{PLOT_LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="gray" stroke-dasharray="4 3"/>"#,
        width - 20.0
    );
    for (i, row) in sweep.rows.iter().enumerate() {
        let x = PLOT_LEFT + SLOT * (i as f64 + 0.5);
        let b = BoxStats {
            lo: row.min,
            q1: row.f_eig.q1,
            median: row.f_eig.median,
            q3: row.f_eig.q3,
            hi: row.max,
            outliers: Vec::new(),
        };
        if b.median.is_finite() {
            draw_box(&mut svg, &axis, x, &b, method_color(Method::Sdp));
        }
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            height - 22.0,
            row.sigma_r
        );
    }
    svg.push_str("</svg>\n");
    svg
}
