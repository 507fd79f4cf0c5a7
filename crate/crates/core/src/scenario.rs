//! Anchors, tags, motion windows and squared-range measurements.
//!
//! A [`Scenario`] bundles everything an estimator sees (anchor positions, tag
//! lever arms, the noise level and the measurement list) together with the
//! sampling seed and, for simulated data, the ground truth. Scenarios are
//! persisted as JSON with every float written to 17 significant digits so
//! that a save/load cycle is bit-exact.

use crate::lie::{exp_se, Pose, Rotation, Twist};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;
const MAX_ANCHOR_ATTEMPTS: usize = 100;
const COLLINEAR_TOL: f64 = 1e-9;
/// Half-width of the position sampling box, metres.
pub const POSITION_RANGE: f64 = 4.0;
/// Half-width of the linear velocity sampling box, m/s.
pub const LINEAR_VELOCITY_RANGE: f64 = 1.0;
/// Half-width of the angular velocity sampling box, rad/s.
pub const ANGULAR_VELOCITY_RANGE: f64 = 0.3;
/// Parameterization used for random 3D attitudes; stored in scenario metadata.
pub const ROTATION_SAMPLING_3D: &str = "euler_zyx_uniform";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("no noncollinear anchor set found after {0} attempts")]
    SamplerExhausted(usize),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema version {found} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Static,
    Dynamic,
    /// 3D position with yaw-only attitude.
    Dynamic25,
}

impl Mode {
    pub fn is_dynamic(self) -> bool {
        !matches!(self, Mode::Static)
    }
}

/// Constant-velocity observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_v: f64,
    pub dt_r: f64,
}

impl Window {
    /// Number of measurement epochs, endpoint included.
    pub fn steps(&self) -> usize {
        (self.t_v / self.dt_r + 1e-9).floor() as usize + 1
    }

    /// Elapsed time `c_k` at 1-based step `k`.
    pub fn elapsed(&self, k: usize) -> f64 {
        (k - 1) as f64 * self.dt_r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    /// 1-based time step.
    pub k: usize,
    /// Anchor index.
    pub j: usize,
    /// Tag index.
    pub l: usize,
    /// Noisy squared range, m².
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub initial_pose: Pose,
    pub twist: Twist,
    pub poses_at_steps: Vec<Pose>,
}

impl GroundTruth {
    pub fn new(initial_pose: Pose, twist: Twist, window: Option<Window>) -> Self {
        let poses_at_steps = trajectory(&initial_pose, &twist, window);
        GroundTruth {
            initial_pose,
            twist,
            poses_at_steps,
        }
    }

    pub fn estimate(&self, mode: Mode) -> Estimate {
        Estimate {
            pose: self.initial_pose.clone(),
            twist: mode.is_dynamic().then(|| self.twist.clone()),
        }
    }
}

/// Poses `T1 · exp(c_k ϖ)` at every step of the window (one pose when static).
pub fn trajectory(initial: &Pose, twist: &Twist, window: Option<Window>) -> Vec<Pose> {
    match window {
        None => vec![initial.clone()],
        Some(w) => (1..=w.steps())
            .map(|k| initial.compose(&exp_se(twist, w.elapsed(k))))
            .collect(),
    }
}

/// A candidate state: initial pose plus twist for the dynamic modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub pose: Pose,
    pub twist: Option<Twist>,
}

impl Estimate {
    pub fn static_pose(pose: Pose) -> Self {
        Estimate { pose, twist: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub dimension: usize,
    pub mode: Mode,
    pub anchors: Vec<DVector<f64>>,
    pub tags: Vec<DVector<f64>>,
    /// Standard deviation of the additive noise on squared ranges.
    pub sigma_r: f64,
    pub window: Option<Window>,
    pub seed: u64,
    pub measurements: Vec<Measurement>,
    pub ground_truth: Option<GroundTruth>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(m));
        let d = self.dimension;
        if !(d == 2 || d == 3) {
            return bad(format!("dimension must be 2 or 3, got {d}"));
        }
        match (self.mode, d) {
            (Mode::Dynamic25, 2) => return bad("2.5D mode needs dimension 3".into()),
            (Mode::Dynamic, 3) => return bad("full 3D dynamic mode is not supported".into()),
            _ => {}
        }
        let min_anchors = if d == 3 { 4 } else { 3 };
        if self.anchors.len() < min_anchors {
            return bad(format!("need at least {min_anchors} anchors, got {}", self.anchors.len()));
        }
        let min_tags = if d == 3 && self.mode == Mode::Static { 3 } else { 2 };
        if self.tags.len() < min_tags {
            return bad(format!("need at least {min_tags} tags, got {}", self.tags.len()));
        }
        if self.anchors.iter().chain(&self.tags).any(|v| v.len() != d) {
            return bad("anchor or tag has the wrong dimension".into());
        }
        if self
            .anchors
            .iter()
            .chain(&self.tags)
            .any(|v| v.iter().any(|x| !x.is_finite()))
        {
            return bad("non-finite anchor or tag coordinate".into());
        }
        if !anchors_noncollinear(&self.anchors) {
            return bad("anchors are collinear".into());
        }
        if !(self.sigma_r >= 0.0 && self.sigma_r.is_finite()) {
            return bad(format!("sigma_r must be finite and nonnegative, got {}", self.sigma_r));
        }
        let steps = match (self.mode.is_dynamic(), self.window) {
            (true, None) => return bad("dynamic mode needs a window".into()),
            (true, Some(w)) => {
                if !(w.dt_r > 0.0 && w.t_v >= 0.0 && w.t_v.is_finite()) {
                    return bad("window needs dt_r > 0 and t_v >= 0".into());
                }
                w.steps()
            }
            (false, _) => 1,
        };
        for (i, m) in self.measurements.iter().enumerate() {
            if m.k < 1 || m.k > steps || m.j >= self.anchors.len() || m.l >= self.tags.len() {
                return bad(format!("measurement {i} has out-of-range indices"));
            }
            if !m.value.is_finite() {
                return bad(format!("measurement {i} is not finite"));
            }
        }
        if let Some(gt) = &self.ground_truth {
            if gt.initial_pose.dim() != d || gt.twist.dim() != d {
                return bad("ground truth has the wrong dimension".into());
            }
        }
        Ok(())
    }

    pub fn n_measurements(&self) -> usize {
        self.measurements.len()
    }

    /// Effective noise level used for weighting; noiseless data falls back to unit weight.
    pub fn sigma_eff(&self) -> f64 {
        if self.sigma_r > 0.0 {
            self.sigma_r
        } else {
            1.0
        }
    }

    /// `1 / (σ² N_r)`.
    pub fn cost_weight(&self) -> f64 {
        1.0 / (self.sigma_eff().powi(2) * self.n_measurements().max(1) as f64)
    }

    pub fn steps(&self) -> usize {
        self.window.map(|w| w.steps()).unwrap_or(1)
    }

    /// Elapsed time since the first epoch at 1-based step `k`.
    pub fn elapsed(&self, k: usize) -> f64 {
        self.window.map(|w| w.elapsed(k)).unwrap_or(0.0)
    }

    /// Poses at every epoch implied by an estimate (exact exponential).
    pub fn trajectory(&self, est: &Estimate) -> Vec<Pose> {
        match &est.twist {
            Some(t) if self.mode.is_dynamic() => trajectory(&est.pose, t, self.window),
            _ => vec![est.pose.clone()],
        }
    }

    /// Range residuals `r̃² − ‖p_a − K T(t_k) p̄_u‖²` in measurement order.
    pub fn residuals(&self, est: &Estimate) -> Vec<f64> {
        let poses = self.trajectory(est);
        self.measurements
            .iter()
            .map(|m| {
                let pose = &poses[(m.k - 1).min(poses.len() - 1)];
                let w = pose.transform_point(&self.tags[m.l]);
                m.value - (&self.anchors[m.j] - w).norm_squared()
            })
            .collect()
    }

    /// MAP objective `(1/N_r) Σ e²/σ²` with the exact motion model.
    pub fn map_cost(&self, est: &Estimate) -> f64 {
        self.residuals(est).iter().map(|e| e * e).sum::<f64>() * self.cost_weight()
    }

    /// Tag position at step `k` under the first-order motion model.
    pub fn first_order_tag_position(&self, est: &Estimate, k: usize, l: usize) -> DVector<f64> {
        let r = est.pose.rotation.matrix();
        let p = &est.pose.translation;
        let tag = &self.tags[l];
        let base = r * tag + p;
        match &est.twist {
            Some(t) if self.mode.is_dynamic() => {
                let c = self.elapsed(k);
                let body = crate::lie::skew(&t.angular) * tag + &t.linear;
                base + r * body * c
            }
            _ => base,
        }
    }

    /// MAP objective with poses generated by the first-order motion model.
    pub fn map_cost_first_order(&self, est: &Estimate) -> f64 {
        self.measurements
            .iter()
            .map(|m| {
                let w = self.first_order_tag_position(est, m.k, m.l);
                let e = m.value - (&self.anchors[m.j] - w).norm_squared();
                e * e
            })
            .sum::<f64>()
            * self.cost_weight()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let file = ScenarioFile::from(self);
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits::default());
        file.serialize(&mut ser).expect("scenario serialization cannot fail");
        out.push(b'\n');
        String::from_utf8(out).expect("serde_json emits UTF-8")
    }

    pub fn from_json(text: &str) -> Result<Scenario, ScenarioError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
        if let Some(v) = value.get("version").and_then(|v| v.as_u64()) {
            if v != SCHEMA_VERSION as u64 {
                return Err(ScenarioError::SchemaVersionMismatch {
                    found: v as u32,
                    expected: SCHEMA_VERSION,
                });
            }
        }
        let file: ScenarioFile = serde_json::from_str(text).map_err(parse_error)?;
        let scenario = file.into_scenario()?;
        scenario.validate()?;
        Ok(scenario)
    }
}

fn parse_error(e: serde_json::Error) -> ScenarioError {
    ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Smallest singular value of the centered anchor matrix is above tolerance.
pub fn anchors_noncollinear(anchors: &[DVector<f64>]) -> bool {
    if anchors.is_empty() {
        return false;
    }
    let d = anchors[0].len();
    let n = anchors.len();
    let mean = anchors.iter().fold(DVector::zeros(d), |acc, a| acc + a) / n as f64;
    let m = DMatrix::from_fn(n, d, |i, k| anchors[i][k] - mean[k]);
    let sv = m.singular_values();
    sv.len() == d && sv.min() > COLLINEAR_TOL
}

/// Named simulation presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Static2d,
    Static3d,
    Dynamic2d,
    Dynamic25d,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::Static2d,
        Preset::Static3d,
        Preset::Dynamic2d,
        Preset::Dynamic25d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Static2d => "static2d",
            Preset::Static3d => "static3d",
            Preset::Dynamic2d => "dynamic2d",
            Preset::Dynamic25d => "dynamic25d",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Preset::Static2d | Preset::Static3d => Mode::Static,
            Preset::Dynamic2d => Mode::Dynamic,
            Preset::Dynamic25d => Mode::Dynamic25,
        }
    }

    pub fn config(self, sigma_r: f64) -> SamplerConfig {
        let planar_tags = vec![vec![0.0, 0.095], vec![0.0, -0.095]];
        let window = Some(Window { t_v: 1.1, dt_r: 0.1 });
        let (dimension, n_anchors, tags, window) = match self {
            Preset::Static2d => (2, 3, planar_tags, None),
            Preset::Static3d => (
                3,
                4,
                vec![vec![0.01, 0.41, 0.0], vec![0.0, -0.43, 0.01], vec![-0.57, 0.02, 0.0]],
                None,
            ),
            Preset::Dynamic2d => (2, 3, planar_tags, window),
            Preset::Dynamic25d => (
                3,
                4,
                vec![vec![0.0, 0.095, 0.0], vec![0.0, -0.095, 0.0]],
                window,
            ),
        };
        SamplerConfig {
            dimension,
            mode: self.mode(),
            n_anchors,
            tags: tags.into_iter().map(DVector::from_vec).collect(),
            sigma_r,
            window,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}` (expected static2d, static3d, dynamic2d or dynamic25d)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub dimension: usize,
    pub mode: Mode,
    pub n_anchors: usize,
    pub tags: Vec<DVector<f64>>,
    pub sigma_r: f64,
    pub window: Option<Window>,
}

/// Random pose (and twist for dynamic modes) from the simulation distributions.
pub fn sample_state(rng: &mut impl Rng, dimension: usize, mode: Mode) -> Estimate {
    let translation = DVector::from_fn(dimension, |_, _| rng.random_range(-POSITION_RANGE..=POSITION_RANGE));
    let mut angle = || rng.random_range(-PI..=PI);
    let rotation = match (dimension, mode) {
        (2, _) => Rotation::from_angle(angle()),
        (_, Mode::Dynamic25) => Rotation::from_yaw(angle()),
        _ => {
            let (y, p, r) = (angle(), angle(), angle());
            Rotation::from_euler_zyx(y, p, r)
        }
    };
    let pose = Pose::new(rotation, translation);
    let twist = mode.is_dynamic().then(|| {
        let w = rng.random_range(-ANGULAR_VELOCITY_RANGE..=ANGULAR_VELOCITY_RANGE);
        let angular = if dimension == 2 { vec![w] } else { vec![0.0, 0.0, w] };
        let linear: Vec<f64> = (0..dimension)
            .map(|_| rng.random_range(-LINEAR_VELOCITY_RANGE..=LINEAR_VELOCITY_RANGE))
            .collect();
        Twist::from_slices(&angular, &linear)
    });
    Estimate { pose, twist }
}

/// Samples anchors and a ground-truth state. The returned scenario has no measurements yet.
pub fn sample_scenario(config: &SamplerConfig, seed: u64) -> Result<(Scenario, GroundTruth), ScenarioError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = config.dimension;
    let mut anchors = None;
    for _ in 0..MAX_ANCHOR_ATTEMPTS {
        let cand: Vec<DVector<f64>> = (0..config.n_anchors)
            .map(|_| DVector::from_fn(d, |_, _| rng.random_range(-POSITION_RANGE..=POSITION_RANGE)))
            .collect();
        if anchors_noncollinear(&cand) {
            anchors = Some(cand);
            break;
        }
    }
    let anchors = anchors.ok_or(ScenarioError::SamplerExhausted(MAX_ANCHOR_ATTEMPTS))?;
    let state = sample_state(&mut rng, d, config.mode);
    let twist = state.twist.clone().unwrap_or_else(|| Twist::zero(d));
    let truth = GroundTruth::new(state.pose, twist, config.window);
    let scenario = Scenario {
        dimension: d,
        mode: config.mode,
        anchors,
        tags: config.tags.clone(),
        sigma_r: config.sigma_r,
        window: config.window,
        seed,
        measurements: Vec::new(),
        ground_truth: Some(truth.clone()),
    };
    scenario.validate()?;
    Ok((scenario, truth))
}

/// Anchor and tag measured at 0-based step `i` of a dynamic window.
///
/// Anchors cycle every step. Tags alternate every step, shifted by one after
/// each full anchor cycle when the anchor count is a multiple of the tag count
/// so that every anchor-tag pair is eventually observed.
pub fn dynamic_pair(i: usize, n_anchors: usize, n_tags: usize) -> (usize, usize) {
    let j = i % n_anchors;
    let l = if n_anchors % n_tags == 0 {
        (i + i / n_anchors) % n_tags
    } else {
        i % n_tags
    };
    (j, l)
}

/// Measurement index set `(k, j, l)` for a scenario's mode.
pub fn measurement_schedule(scenario: &Scenario) -> Vec<(usize, usize, usize)> {
    let (na, nl) = (scenario.anchors.len(), scenario.tags.len());
    if scenario.mode.is_dynamic() {
        (0..scenario.steps())
            .map(|i| {
                let (j, l) = dynamic_pair(i, na, nl);
                (i + 1, j, l)
            })
            .collect()
    } else {
        (0..na).flat_map(|j| (0..nl).map(move |l| (1, j, l))).collect()
    }
}

/// Noisy squared ranges `‖p_a − K T(t_k) p̄_u‖² + η`, `η ~ N(0, σ²)`.
pub fn simulate_measurements(scenario: &Scenario, truth: &GroundTruth, seed: u64) -> Vec<Measurement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, scenario.sigma_r).expect("sigma_r validated as finite and >= 0");
    measurement_schedule(scenario)
        .into_iter()
        .map(|(k, j, l)| {
            let pose = &truth.poses_at_steps[(k - 1).min(truth.poses_at_steps.len() - 1)];
            let w = pose.transform_point(&scenario.tags[l]);
            let eta = if scenario.sigma_r > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            Measurement {
                k,
                j,
                l,
                value: (&scenario.anchors[j] - w).norm_squared() + eta,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// file format

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    version: u32,
    dimension: usize,
    mode: Mode,
    anchors: Vec<Vec<f64>>,
    tags: Vec<Vec<f64>>,
    sigma_r: f64,
    #[serde(default)]
    window: Option<Window>,
    seed: u64,
    #[serde(default)]
    measurements: Vec<Measurement>,
    #[serde(default)]
    ground_truth: Option<GroundTruthFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<Metadata>,
}

#[derive(Serialize, Deserialize)]
struct Metadata {
    rotation_sampling: String,
}

#[derive(Serialize, Deserialize)]
struct GroundTruthFile {
    pose: PoseFile,
    twist: TwistFile,
}

#[derive(Serialize, Deserialize)]
struct PoseFile {
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    p: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TwistFile {
    w: Vec<f64>,
    v: Vec<f64>,
}

impl From<&Scenario> for ScenarioFile {
    fn from(s: &Scenario) -> Self {
        let vecs = |v: &[DVector<f64>]| v.iter().map(|x| x.iter().copied().collect()).collect();
        ScenarioFile {
            version: SCHEMA_VERSION,
            dimension: s.dimension,
            mode: s.mode,
            anchors: vecs(&s.anchors),
            tags: vecs(&s.tags),
            sigma_r: s.sigma_r,
            window: s.window,
            seed: s.seed,
            measurements: s.measurements.clone(),
            ground_truth: s.ground_truth.as_ref().map(|gt| GroundTruthFile {
                pose: PoseFile {
                    r: gt
                        .initial_pose
                        .rotation
                        .matrix()
                        .row_iter()
                        .map(|r| r.iter().copied().collect())
                        .collect(),
                    p: gt.initial_pose.translation.iter().copied().collect(),
                },
                twist: TwistFile {
                    w: gt.twist.angular.iter().copied().collect(),
                    v: gt.twist.linear.iter().copied().collect(),
                },
            }),
            metadata: (s.dimension == 3 && s.mode == Mode::Static).then(|| Metadata {
                rotation_sampling: ROTATION_SAMPLING_3D.to_string(),
            }),
        }
    }
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario, ScenarioError> {
        let d = self.dimension;
        let ground_truth = match self.ground_truth {
            None => None,
            Some(gt) => {
                if gt.pose.r.len() != d || gt.pose.r.iter().any(|r| r.len() != d) || gt.pose.p.len() != d {
                    return Err(ScenarioError::Invalid("ground_truth.pose has the wrong shape".into()));
                }
                let flat: Vec<f64> = gt.pose.r.into_iter().flatten().collect();
                let rotation = Rotation::from_matrix(DMatrix::from_row_slice(d, d, &flat), 1e-9)
                    .map_err(|e| ScenarioError::Invalid(format!("ground_truth.pose.R: {e}")))?;
                if gt.twist.v.len() != d || gt.twist.w.len() != crate::lie::angular_dim(d) {
                    return Err(ScenarioError::Invalid("ground_truth.twist has the wrong shape".into()));
                }
                let pose = Pose::new(rotation, DVector::from_vec(gt.pose.p));
                let twist = Twist::from_slices(&gt.twist.w, &gt.twist.v);
                let window = if self.mode.is_dynamic() { self.window } else { None };
                Some(GroundTruth::new(pose, twist, window))
            }
        };
        Ok(Scenario {
            dimension: d,
            mode: self.mode,
            anchors: self.anchors.into_iter().map(DVector::from_vec).collect(),
            tags: self.tags.into_iter().map(DVector::from_vec).collect(),
            sigma_r: self.sigma_r,
            window: self.window,
            seed: self.seed,
            measurements: self.measurements,
            ground_truth,
        })
    }
}

/// Pretty JSON formatter that prints every float with 17 significant digits.
#[derive(Default)]
struct SeventeenDigits<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

impl serde_json::ser::Formatter for SeventeenDigits<'_> {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.inner.end_object_value(w)
    }
}
