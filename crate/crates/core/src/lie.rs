//! Rigid-body geometry for SO(2)/SO(3)/SE(2)/SE(3).
//!
//! Everything is stored in dynamically sized `nalgebra` matrices so that the
//! planar and spatial variants share one code path; the dimension `d` is
//! carried by the data and checked where it matters.
//!
//! Twists are ordered `(angular, linear)`. In 2D the angular part is a single
//! scalar, in 3D it is a 3-vector. Exponential and logarithm maps are closed
//! form (Rodrigues plus the exact left-Jacobian `V` matrix for translation).

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use thiserror::Error;

/// Below this angle the trigonometric coefficients switch to Taylor series.
const SMALL_ANGLE: f64 = 1e-5;

/// Coefficients with cancelling numerators use a longer series up to this angle.
const SERIES_ANGLE: f64 = 1e-2;

/// Rotations closer than this to a half turn have no stable logarithm.
pub const ANGLE_NEAR_PI_CUTOFF: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("rotation angle {0} is within {ANGLE_NEAR_PI_CUTOFF} rad of pi; logarithm is ill-conditioned")]
    AngleNearPi(f64),
    #[error("matrix is rank deficient (smallest singular value {0:e})")]
    DegenerateMatrix(f64),
    #[error("unsupported dimension {0}; expected 2 or 3")]
    UnsupportedDimension(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Number of angular coordinates of a twist in dimension `d`.
pub fn angular_dim(d: usize) -> usize {
    d * (d - 1) / 2
}

/// Skew-symmetric generator for an angular vector of length 1 (d=2) or 3 (d=3).
pub fn skew(omega: &DVector<f64>) -> DMatrix<f64> {
    match omega.len() {
        1 => DMatrix::from_row_slice(2, 2, &[0.0, -omega[0], omega[0], 0.0]),
        3 => DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0, -omega[2], omega[1], //
                omega[2], 0.0, -omega[0], //
                -omega[1], omega[0], 0.0,
            ],
        ),
        n => panic!("skew: angular vector of length {n} is not supported"),
    }
}

/// Inverse of [`skew`].
pub fn unskew(m: &DMatrix<f64>) -> DVector<f64> {
    match m.nrows() {
        2 => DVector::from_vec(vec![0.5 * (m[(1, 0)] - m[(0, 1)])]),
        3 => DVector::from_vec(vec![
            0.5 * (m[(2, 1)] - m[(1, 2)]),
            0.5 * (m[(0, 2)] - m[(2, 0)]),
            0.5 * (m[(1, 0)] - m[(0, 1)]),
        ]),
        n => panic!("unskew: {n}x{n} matrices are not supported"),
    }
}

/// A proper rotation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation(DMatrix<f64>);

impl Rotation {
    pub fn identity(d: usize) -> Self {
        Rotation(DMatrix::identity(d, d))
    }

    /// Planar rotation by `theta` radians.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Rotation(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    /// Spatial rotation about the z axis.
    pub fn from_yaw(yaw: f64) -> Self {
        let (s, c) = yaw.sin_cos();
        Rotation(DMatrix::from_row_slice(
            3,
            3,
            &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0],
        ))
    }

    /// `Rz(yaw) * Ry(pitch) * Rx(roll)`.
    pub fn from_euler_zyx(yaw: f64, pitch: f64, roll: f64) -> Self {
        let rz = Rotation::from_yaw(yaw).0;
        let (sp, cp) = pitch.sin_cos();
        let ry = DMatrix::from_row_slice(3, 3, &[cp, 0.0, sp, 0.0, 1.0, 0.0, -sp, 0.0, cp]);
        let (sr, cr) = roll.sin_cos();
        let rx = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, cr, -sr, 0.0, sr, cr]);
        Rotation(rz * ry * rx)
    }

    /// Rotation `exp(omega^)` for an angular vector of length 1 or 3.
    pub fn exp(omega: &DVector<f64>) -> Self {
        match omega.len() {
            1 => Rotation::from_angle(omega[0]),
            3 => {
                let theta = omega.norm();
                let k = skew(omega);
                let (a, b) = if theta < SMALL_ANGLE {
                    let t2 = theta * theta;
                    (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
                } else {
                    (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
                };
                Rotation(DMatrix::identity(3, 3) + &k * a + &k * &k * b)
            }
            n => panic!("Rotation::exp: angular vector of length {n} is not supported"),
        }
    }

    /// Wraps a matrix without validation. Callers guarantee membership in SO(d).
    pub fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Rotation(m)
    }

    /// Wraps a matrix after checking orthonormality and determinant to `tol`.
    pub fn from_matrix(m: DMatrix<f64>, tol: f64) -> Result<Self, LieError> {
        let d = m.nrows();
        if d != m.ncols() || !(d == 2 || d == 3) {
            return Err(LieError::UnsupportedDimension(d));
        }
        let r = Rotation(m);
        if r.orthonormality_error() > tol || (r.0.determinant() - 1.0).abs() > tol {
            return Err(LieError::DegenerateMatrix(r.orthonormality_error()));
        }
        Ok(r)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(&self.0 * &other.0)
    }

    /// Largest entry of `RᵀR − I`.
    pub fn orthonormality_error(&self) -> f64 {
        let d = self.dim();
        (self.0.transpose() * &self.0 - DMatrix::identity(d, d)).amax()
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        match self.dim() {
            2 => self.0[(1, 0)].atan2(self.0[(0, 0)]).abs(),
            _ => {
                let m = &self.0;
                let s = 0.5
                    * ((m[(2, 1)] - m[(1, 2)]).powi(2) + (m[(0, 2)] - m[(2, 0)]).powi(2) + (m[(1, 0)] - m[(0, 1)]).powi(2))
                        .sqrt();
                s.atan2((m.trace() - 1.0) / 2.0)
            }
        }
    }

    /// Heading of a planar rotation, or the yaw of a z-axis rotation.
    pub fn yaw(&self) -> f64 {
        self.0[(1, 0)].atan2(self.0[(0, 0)])
    }

    /// Angular vector `omega` with `exp(omega^) = R`.
    pub fn log(&self) -> Result<DVector<f64>, LieError> {
        match self.dim() {
            2 => Ok(DVector::from_vec(vec![self.yaw()])),
            3 => {
                let theta = self.angle();
                if theta > PI - ANGLE_NEAR_PI_CUTOFF {
                    return Err(LieError::AngleNearPi(theta));
                }
                let factor = if theta < SMALL_ANGLE {
                    0.5 * (1.0 + theta * theta / 6.0)
                } else {
                    theta / (2.0 * theta.sin())
                };
                let w = DVector::from_vec(vec![
                    self.0[(2, 1)] - self.0[(1, 2)],
                    self.0[(0, 2)] - self.0[(2, 0)],
                    self.0[(1, 0)] - self.0[(0, 1)],
                ]);
                Ok(w * factor)
            }
            d => Err(LieError::UnsupportedDimension(d)),
        }
    }
}

/// Left Jacobian of SO(d) that maps linear velocity to translation in `exp`.
pub fn v_matrix(omega: &DVector<f64>) -> DMatrix<f64> {
    match omega.len() {
        1 => {
            let theta = omega[0];
            let (a, b) = if theta.abs() < SMALL_ANGLE {
                let t2 = theta * theta;
                (1.0 - t2 / 6.0, theta / 2.0 - theta * t2 / 24.0)
            } else {
                (theta.sin() / theta, (1.0 - theta.cos()) / theta)
            };
            DMatrix::from_row_slice(2, 2, &[a, -b, b, a])
        }
        3 => {
            let theta = omega.norm();
            let k = skew(omega);
            let t2 = theta * theta;
            let h = (0.5 * theta).sin();
            let b = if theta < SMALL_ANGLE { 0.5 - t2 / 24.0 } else { 2.0 * h * h / t2 };
            let c = if theta < SERIES_ANGLE {
                1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
            } else {
                (theta - theta.sin()) / (t2 * theta)
            };
            DMatrix::identity(3, 3) + &k * b + &k * &k * c
        }
        n => panic!("v_matrix: angular vector of length {n} is not supported"),
    }
}

fn v_matrix_inverse(omega: &DVector<f64>) -> DMatrix<f64> {
    match omega.len() {
        1 => {
            let v = v_matrix(omega);
            let (a, b) = (v[(0, 0)], v[(1, 0)]);
            let det = a * a + b * b;
            DMatrix::from_row_slice(2, 2, &[a / det, b / det, -b / det, a / det])
        }
        3 => {
            let theta = omega.norm();
            let k = skew(omega);
            let t2 = theta * theta;
            let c = if theta < SERIES_ANGLE {
                1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
            } else {
                let h = (0.5 * theta).sin();
                (1.0 - theta * theta.sin() / (4.0 * h * h)) / t2
            };
            DMatrix::identity(3, 3) - &k * 0.5 + &k * &k * c
        }
        n => panic!("v_matrix_inverse: angular vector of length {n} is not supported"),
    }
}

/// Body-centric generalized velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Twist {
    pub angular: DVector<f64>,
    pub linear: DVector<f64>,
}

impl Twist {
    pub fn new(angular: DVector<f64>, linear: DVector<f64>) -> Self {
        debug_assert_eq!(angular.len(), angular_dim(linear.len()));
        Twist { angular, linear }
    }

    pub fn zero(d: usize) -> Self {
        Twist {
            angular: DVector::zeros(angular_dim(d)),
            linear: DVector::zeros(d),
        }
    }

    pub fn from_slices(angular: &[f64], linear: &[f64]) -> Self {
        Twist::new(
            DVector::from_column_slice(angular),
            DVector::from_column_slice(linear),
        )
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn scaled(&self, s: f64) -> Twist {
        Twist {
            angular: &self.angular * s,
            linear: &self.linear * s,
        }
    }

    /// `(d+1)x(d+1)` Lie-algebra matrix.
    pub fn wedge(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d + 1, d + 1);
        m.view_mut((0, 0), (d, d)).copy_from(&skew(&self.angular));
        m.view_mut((0, d), (d, 1)).copy_from(&self.linear);
        m
    }

    /// Stacked `[angular; linear]` coordinates.
    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.angular.len() + self.linear.len());
        v.rows_mut(0, self.angular.len()).copy_from(&self.angular);
        v.rows_mut(self.angular.len(), self.linear.len()).copy_from(&self.linear);
        v
    }

    pub fn from_vector(v: &DVector<f64>, d: usize) -> Twist {
        let na = angular_dim(d);
        Twist {
            angular: v.rows(0, na).into_owned(),
            linear: v.rows(na, d).into_owned(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.angular.iter().chain(self.linear.iter()).all(|x| x.is_finite())
    }
}

/// Rigid transform `[R p; 0 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub rotation: Rotation,
    pub translation: DVector<f64>,
}

impl Pose {
    pub fn new(rotation: Rotation, translation: DVector<f64>) -> Self {
        debug_assert_eq!(rotation.dim(), translation.len());
        Pose {
            rotation,
            translation,
        }
    }

    pub fn identity(d: usize) -> Self {
        Pose::new(Rotation::identity(d), DVector::zeros(d))
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::identity(d + 1, d + 1);
        m.view_mut((0, 0), (d, d)).copy_from(self.rotation.matrix());
        m.view_mut((0, d), (d, 1)).copy_from(&self.translation);
        m
    }

    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            rotation: self.rotation.compose(&other.rotation),
            translation: self.rotation.matrix() * &other.translation + &self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        let t = -(rt.matrix() * &self.translation);
        Pose::new(rt, t)
    }

    /// World coordinates of a body-frame point, `K T p̄`.
    pub fn transform_point(&self, p: &DVector<f64>) -> DVector<f64> {
        self.rotation.matrix() * p + &self.translation
    }

    /// Projects the rotation back onto SO(d) to remove accumulated drift.
    pub fn renormalized(&self) -> Result<Pose, LieError> {
        Ok(Pose::new(
            project_to_rotation(self.rotation.matrix())?,
            self.translation.clone(),
        ))
    }
}

/// `exp((dt * twist)^)`.
pub fn exp_se(twist: &Twist, dt: f64) -> Pose {
    let scaled = twist.scaled(dt);
    let rotation = Rotation::exp(&scaled.angular);
    let translation = v_matrix(&scaled.angular) * &scaled.linear;
    Pose::new(rotation, translation)
}

/// Inverse of [`exp_se`] at `dt = 1`.
pub fn log_se(pose: &Pose) -> Result<Twist, LieError> {
    let angular = pose.rotation.log()?;
    let linear = v_matrix_inverse(&angular) * &pose.translation;
    Ok(Twist::new(angular, linear))
}

/// `I + (dt * twist)^`, the first-order truncation of the exponential.
pub fn first_order_exp(twist: &Twist, dt: f64) -> DMatrix<f64> {
    let d = twist.dim();
    DMatrix::identity(d + 1, d + 1) + twist.scaled(dt).wedge()
}

/// Closest rotation in Frobenius norm (orthogonal Procrustes with sign fix).
pub fn project_to_rotation(m: &DMatrix<f64>) -> Result<Rotation, LieError> {
    let d = m.nrows();
    if d != m.ncols() || !(d == 2 || d == 3) {
        return Err(LieError::UnsupportedDimension(d));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(LieError::DegenerateMatrix(f64::NAN));
    }
    let svd = m.clone().svd(true, true);
    let smin = svd.singular_values.min();
    let smax = svd.singular_values.max();
    if smin <= 1e-12 * smax.max(1.0) {
        return Err(LieError::DegenerateMatrix(smin));
    }
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vt");
    let mut s = DMatrix::identity(d, d);
    if (&u * &vt).determinant() < 0.0 {
        // Flip the direction belonging to the smallest singular value.
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        s[(imin, imin)] = -1.0;
    }
    Ok(Rotation(u * s * vt))
}
