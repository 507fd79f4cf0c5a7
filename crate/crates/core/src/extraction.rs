//! Rank-one extraction from an SDP solution and tightness certification.

use crate::lie::{log_se, project_to_rotation, Pose, Rotation, Twist};
use crate::qcqp::{StateLayout, Variant};
use crate::scenario::{Estimate, GroundTruth, Mode, Scenario};
use crate::sdp::{sym_eig, SdpSolution, SdpStatus};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub const F_EIG_CAP: f64 = 16.0;
pub const STATIC_RANK1_THRESHOLD: f64 = 7.0;
pub const DYNAMIC_RANK1_THRESHOLD: f64 = 5.0;
const MIN_HOMOGENIZATION: f64 = 1e-6;
/// Largest relative gap a `MaxIter` solution may carry and still be extracted.
const MAX_ITER_GAP: f64 = 1e-4;
const LOWER_BOUND_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractionError {
    #[error("homogenization entry collapsed to {0:e}")]
    HomogenizationCollapse(f64),
    #[error("solution is not usable for extraction (status {status}, relative gap {gap:e})")]
    Unsolved { status: &'static str, gap: f64 },
    #[error("matrix is {got}×{got}, layout needs {expected}×{expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("extracted rotation block is degenerate")]
    DegenerateRotation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub f_eig: f64,
    pub e1: f64,
    pub e2: f64,
    pub duality_gap_rel: f64,
    /// `|MAP cost at the extraction − primal objective| / max(1, |primal|)`.
    pub relaxation_gap: Option<f64>,
    /// Set when the MAP cost at the extraction falls below the SDP optimum.
    pub lower_bound_violated: bool,
    pub rank1: bool,
    pub threshold: f64,
}

pub fn rank1_threshold(mode: Mode) -> f64 {
    if mode.is_dynamic() {
        DYNAMIC_RANK1_THRESHOLD
    } else {
        STATIC_RANK1_THRESHOLD
    }
}

/// `log10(e1/e2)` of the two largest eigenvalues, capped at [`F_EIG_CAP`].
pub fn eigenvalue_ratio(e1: f64, e2: f64) -> f64 {
    if e1 <= 0.0 {
        return 0.0;
    }
    if e2 <= 1e-16 * e1 {
        F_EIG_CAP
    } else {
        (e1 / e2).log10().min(F_EIG_CAP)
    }
}

/// f_eig of a symmetric matrix.
pub fn f_eig(x: &DMatrix<f64>) -> f64 {
    let eig = sym_eig(x);
    let e2 = if eig.values.len() > 1 { eig.values[1] } else { 0.0 };
    eigenvalue_ratio(eig.values[0], e2)
}

pub fn check_solution(solution: &SdpSolution) -> Result<(), ExtractionError> {
    let gap = solution.residuals.rel_gap;
    match solution.status {
        SdpStatus::Optimal => Ok(()),
        SdpStatus::MaxIter if gap < MAX_ITER_GAP => Ok(()),
        s => Err(ExtractionError::Unsolved { status: s.name(), gap }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub estimate: Estimate,
    /// Rescaled dominant eigenvector with `h = 1`.
    pub vector: DVector<f64>,
    pub e1: f64,
    pub e2: f64,
}

impl Extraction {
    pub fn f_eig(&self) -> f64 {
        eigenvalue_ratio(self.e1, self.e2)
    }
}

/// Recovers the state from the dominant eigenpair of `x`.
pub fn extract(x: &DMatrix<f64>, layout: &StateLayout) -> Result<Extraction, ExtractionError> {
    let n = layout.n();
    if x.nrows() != n || x.ncols() != n {
        return Err(ExtractionError::DimensionMismatch { expected: n, got: x.nrows() });
    }
    let eig = sym_eig(x);
    let e1 = eig.values[0];
    let e2 = if n > 1 { eig.values[1] } else { 0.0 };
    let mut v = eig.vectors.column(0) * e1.max(0.0).sqrt();
    let h = v[layout.h()];
    if h.abs() < MIN_HOMOGENIZATION {
        return Err(ExtractionError::HomogenizationCollapse(h));
    }
    v /= h;
    let estimate = read_state(&v, layout)?;
    Ok(Extraction {
        estimate,
        vector: v,
        e1,
        e2,
    })
}

fn rotation_at(v: &DVector<f64>, layout: &StateLayout, offset: usize) -> Result<Rotation, ExtractionError> {
    let d = layout.dimension();
    if layout.variant() == Variant::Dynamic25 {
        let (c, s) = (v[offset], v[offset + 1]);
        if !(c.hypot(s) > 0.0) {
            return Err(ExtractionError::DegenerateRotation);
        }
        return Ok(Rotation::from_yaw(s.atan2(c)));
    }
    let m = DMatrix::from_column_slice(d, d, &v.as_slice()[offset..offset + d * d]);
    project_to_rotation(&m).map_err(|_| ExtractionError::DegenerateRotation)
}

fn read_state(v: &DVector<f64>, layout: &StateLayout) -> Result<Estimate, ExtractionError> {
    let d = layout.dimension();
    let (r, p) = layout.pose_offsets();
    let pose = Pose::new(rotation_at(v, layout, r)?, v.rows(p, d).into_owned());
    let twist = match layout.variant() {
        Variant::Static => None,
        Variant::Dynamic | Variant::Dynamic25 => {
            let a = layout.angular_offset().expect("first-order layouts carry ω");
            let l = layout.linear_offset().expect("first-order layouts carry v");
            let angular = if layout.variant() == Variant::Dynamic25 {
                DVector::from_vec(vec![0.0, 0.0, v[a]])
            } else {
                v.rows(a, l - a).into_owned()
            };
            Some(Twist::new(angular, v.rows(l, d).into_owned()))
        }
        Variant::DynamicExact => {
            let (dr, dp) = layout.delta_offsets().expect("exact layouts carry the step increment");
            let step = Pose::new(rotation_at(v, layout, dr)?, v.rows(dp, d).into_owned());
            let xi = log_se(&step).map_err(|_| ExtractionError::DegenerateRotation)?;
            Some(xi.scaled(1.0 / layout.dt()))
        }
    };
    Ok(Estimate { pose, twist })
}

/// Tightness certificate for a solve whose extraction has MAP cost `map_cost`.
pub fn certify(solution: &SdpSolution, e1: f64, e2: f64, mode: Mode, map_cost: Option<f64>) -> Certificate {
    let p = solution.primal_obj;
    let scale = p.abs().max(1.0);
    let relaxation_gap = map_cost.map(|c| (c - p).abs() / scale);
    let lower_bound_violated = map_cost.is_some_and(|c| c < p - LOWER_BOUND_TOL * (1.0 + p.abs()));
    let threshold = rank1_threshold(mode);
    let f = eigenvalue_ratio(e1, e2);
    Certificate {
        f_eig: f,
        e1,
        e2,
        duality_gap_rel: (p - solution.dual_obj).abs() / scale,
        relaxation_gap,
        lower_bound_violated,
        rank1: f >= threshold,
        threshold,
    }
}

/// Position error `‖p_gt − p̂‖` and rotation error `‖R_gtᵀR̂ − I‖_F`,
/// averaged over every pose of the window.
pub fn trajectory_errors(scenario: &Scenario, truth: &GroundTruth, est: &Estimate) -> (f64, f64) {
    let poses = scenario.trajectory(est);
    let gt = &truth.poses_at_steps;
    let k = poses.len().min(gt.len()).max(1);
    let mut pos = 0.0;
    let mut rot = 0.0;
    for (a, b) in gt.iter().zip(&poses).take(k) {
        pos += (&a.translation - &b.translation).norm();
        let d = a.rotation.dim();
        rot += (a.rotation.matrix().transpose() * b.rotation.matrix() - DMatrix::<f64>::identity(d, d)).norm();
    }
    (pos / k as f64, rot / k as f64)
}
