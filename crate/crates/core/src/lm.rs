//! Levenberg–Marquardt on the pose manifold, minimizing the MAP cost under
//! the exact (default) or first-order motion model.

use crate::lie::{exp_se, skew, Pose, Rotation, Twist};
use crate::qcqp::LiftModel;
use crate::scenario::{sample_state, Estimate, Mode, Scenario};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const RENORMALIZE_EVERY: usize = 50;
const LAMBDA_MIN: f64 = 1e-12;
const LAMBDA_MAX: f64 = 1e16;
const SERIES_ANGLE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    pub g_tol: f64,
    pub lambda0: f64,
    /// Relative cost decrease below which an accepted step ends the solve; 0 disables.
    pub rel_tol: f64,
    /// Motion model of the objective; the first-order model matches the
    /// approximate dynamic relaxations.
    pub model: LiftModel,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions {
            max_iter: 200,
            g_tol: 1e-10,
            lambda0: 1e-3,
            rel_tol: 0.0,
            model: LiftModel::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub state: Estimate,
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after every accepted step, starting with the initial cost.
    pub cost_trace: Vec<f64>,
}

/// Tangent parameterization of a state: pose perturbation, then twist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parameterization {
    pub dimension: usize,
    pub mode: Mode,
}

impl Parameterization {
    pub fn new(scenario: &Scenario) -> Self {
        Parameterization {
            dimension: scenario.dimension,
            mode: scenario.mode,
        }
    }

    /// Rotational degrees of freedom of the pose and of the twist.
    fn angular(&self) -> usize {
        match (self.dimension, self.mode) {
            (2, _) | (_, Mode::Dynamic25) => 1,
            _ => 3,
        }
    }

    pub fn pose_len(&self) -> usize {
        self.angular() + self.dimension
    }

    pub fn len(&self) -> usize {
        if self.mode.is_dynamic() {
            2 * self.pose_len()
        } else {
            self.pose_len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Embeds reduced angular coordinates into a full angular vector.
    fn angular_vector(&self, a: &[f64]) -> DVector<f64> {
        match (self.dimension, self.mode) {
            (3, Mode::Dynamic25) => DVector::from_vec(vec![0.0, 0.0, a[0]]),
            _ => DVector::from_column_slice(a),
        }
    }

    /// `T ← T·exp(δξ)`, twist updated additively.
    pub fn retract(&self, est: &Estimate, delta: &DVector<f64>) -> Estimate {
        let a = self.angular();
        let d = self.dimension;
        let step = Twist::new(
            self.angular_vector(&delta.as_slice()[..a]),
            delta.rows(a, d).into_owned(),
        );
        let pose = est.pose.compose(&exp_se(&step, 1.0));
        let twist = est.twist.as_ref().filter(|_| self.mode.is_dynamic()).map(|t| {
            let o = self.pose_len();
            let dw = self.angular_vector(&delta.as_slice()[o..o + a]);
            Twist::new(&t.angular + dw, &t.linear + delta.rows(o + a, d))
        });
        Estimate { pose, twist }
    }
}

/// Weighted residuals `√w·(r̃² − ‖p_a − w‖²)` and their Jacobian in the
/// tangent parameterization, exact motion model.
pub fn residuals_and_jacobian(scenario: &Scenario, est: &Estimate) -> (DVector<f64>, DMatrix<f64>) {
    residuals_and_jacobian_with(scenario, est, LiftModel::Exact)
}

pub fn residuals_and_jacobian_with(
    scenario: &Scenario,
    est: &Estimate,
    model: LiftModel,
) -> (DVector<f64>, DMatrix<f64>) {
    let par = Parameterization::new(scenario);
    let d = scenario.dimension;
    let a = par.angular();
    let sw = scenario.cost_weight().sqrt();
    let m = scenario.measurements.len();
    let r1 = est.pose.rotation.matrix();
    let p1 = &est.pose.translation;
    let twist = est.twist.as_ref().filter(|_| scenario.mode.is_dynamic());
    let mut res = DVector::zeros(m);
    let mut jac = DMatrix::zeros(m, par.len());
    for (i, meas) in scenario.measurements.iter().enumerate() {
        let tag = &scenario.tags[meas.l];
        let c = scenario.elapsed(meas.k);
        let (q, dq_dtwist) = match (twist, model) {
            (Some(t), LiftModel::Exact) => body_point(&par, tag, t, c),
            (Some(t), LiftModel::FirstOrder) => body_point_first_order(&par, tag, t, c),
            (None, _) => (tag.clone(), DMatrix::zeros(d, 0)),
        };
        let w = r1 * &q + p1;
        let diff = &scenario.anchors[meas.j] - &w;
        res[i] = sw * (meas.value - diff.norm_squared());
        // ∂e/∂w = 2 (p_a − w)ᵀ
        let de_dw = diff.transpose() * (2.0 * sw);
        let dw_drot = match (d, scenario.mode) {
            (2, _) => DMatrix::from_column_slice(2, 1, (r1 * DVector::from_vec(vec![-q[1], q[0]])).as_slice()),
            (_, Mode::Dynamic25) => DMatrix::from_column_slice(3, 1, (r1 * DVector::from_vec(vec![-q[1], q[0], 0.0])).as_slice()),
            _ => -(r1 * skew(&q)),
        };
        jac.view_mut((i, 0), (1, a)).copy_from(&(&de_dw * dw_drot));
        jac.view_mut((i, a), (1, d)).copy_from(&(&de_dw * r1));
        if dq_dtwist.ncols() > 0 {
            let o = par.pose_len();
            jac.view_mut((i, o), (1, o)).copy_from(&(&de_dw * r1 * dq_dtwist));
        }
    }
    (res, jac)
}

/// Body-frame tag position `exp(cϖ)·p̄` and its derivative with respect to
/// the reduced twist coordinates.
fn body_point(par: &Parameterization, tag: &DVector<f64>, t: &Twist, c: f64) -> (DVector<f64>, DMatrix<f64>) {
    let d = par.dimension;
    let q = exp_se(t, c).transform_point(tag);
    let planar = d == 2 || par.mode == Mode::Dynamic25;
    if !planar {
        return (q, twist_jacobian_fd(par, tag, t, c));
    }
    let w = if d == 2 { t.angular[0] } else { t.angular[2] };
    let th = c * w;
    let (s, co) = th.sin_cos();
    let (va, vb, da, db) = if th.abs() < SERIES_ANGLE {
        let t2 = th * th;
        (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            th / 2.0 - th * t2 / 24.0,
            -th / 3.0 + th * t2 / 30.0,
            0.5 - t2 / 8.0 + t2 * t2 / 144.0,
        )
    } else {
        (
            s / th,
            (1.0 - co) / th,
            (th * co - s) / (th * th),
            (th * s - (1.0 - co)) / (th * th),
        )
    };
    let (ux, uy) = (tag[0], tag[1]);
    let (vx, vy) = (c * t.linear[0], c * t.linear[1]);
    // dq/dω = c (J R(θ) p̄ + V'(θ) c v)
    let jrp = [-(s * ux + co * uy), co * ux - s * uy];
    let vdot = [da * vx - db * vy, db * vx + da * vy];
    let mut jac = DMatrix::zeros(d, 1 + d);
    jac[(0, 0)] = c * (jrp[0] + vdot[0]);
    jac[(1, 0)] = c * (jrp[1] + vdot[1]);
    jac[(0, 1)] = c * va;
    jac[(0, 2)] = -c * vb;
    jac[(1, 1)] = c * vb;
    jac[(1, 2)] = c * va;
    if d == 3 {
        jac[(2, 3)] = c;
    }
    (q, jac)
}

/// `p̄ + c(ω^p̄ + v)` and its derivative with respect to the reduced twist.
fn body_point_first_order(par: &Parameterization, tag: &DVector<f64>, t: &Twist, c: f64) -> (DVector<f64>, DMatrix<f64>) {
    let d = par.dimension;
    let q = tag + (skew(&t.angular) * tag + &t.linear) * c;
    let a = par.angular();
    let mut jac = DMatrix::zeros(d, a + d);
    if a == 1 {
        jac[(0, 0)] = -c * tag[1];
        jac[(1, 0)] = c * tag[0];
    } else {
        jac.view_mut((0, 0), (d, 3)).copy_from(&(skew(tag) * -c));
    }
    jac.view_mut((0, a), (d, d)).copy_from(&(DMatrix::<f64>::identity(d, d) * c));
    (q, jac)
}

fn twist_jacobian_fd(par: &Parameterization, tag: &DVector<f64>, t: &Twist, c: f64) -> DMatrix<f64> {
    let d = par.dimension;
    let base = t.to_vector();
    let h = 1e-6;
    let mut jac = DMatrix::zeros(d, base.len());
    for k in 0..base.len() {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[k] += h;
        minus[k] -= h;
        let qp = exp_se(&Twist::from_vector(&plus, d), c).transform_point(tag);
        let qm = exp_se(&Twist::from_vector(&minus, d), c).transform_point(tag);
        jac.set_column(k, &((qp - qm) / (2.0 * h)));
    }
    jac
}

/// Exact MAP cost; equal to `Scenario::map_cost`.
pub fn cost(scenario: &Scenario, est: &Estimate) -> f64 {
    scenario.map_cost(est)
}

pub fn lm_solve(scenario: &Scenario, init: &Estimate, options: &LmOptions) -> LmReport {
    let par = Parameterization::new(scenario);
    let mut state = normalize_init(scenario, init);
    let eval = |e: &Estimate| residuals_and_jacobian_with(scenario, e, options.model);
    let (mut r, mut j) = eval(&state);
    let mut f = r.norm_squared();
    let mut trace = vec![f];
    let mut lambda = options.lambda0;
    let mut converged = false;
    let mut accepted = 0usize;
    let mut iterations = 0;
    while iterations < options.max_iter {
        let g = j.transpose() * &r;
        if 2.0 * g.amax() < options.g_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let jtj = j.transpose() * &j;
        let mut lhs = jtj.clone();
        for k in 0..par.len() {
            lhs[(k, k)] += lambda * jtj[(k, k)].max(LAMBDA_MIN);
        }
        let step = lhs.cholesky().map(|ch| ch.solve(&(-&g)));
        let candidate = step.filter(|s| s.iter().all(|v| v.is_finite())).map(|s| par.retract(&state, &s));
        let improved = candidate.and_then(|cand| {
            let (rc, jc) = eval(&cand);
            let fc = rc.norm_squared();
            (fc.is_finite() && fc < f).then_some((cand, rc, jc, fc))
        });
        match improved {
            Some((cand, rc, jc, fc)) => {
                let rel = (f - fc) / f.max(f64::MIN_POSITIVE);
                state = cand;
                accepted += 1;
                if accepted % RENORMALIZE_EVERY == 0 {
                    if let Ok(p) = state.pose.renormalized() {
                        state.pose = p;
                    }
                }
                r = rc;
                j = jc;
                f = fc;
                trace.push(f);
                lambda = (lambda / 3.0).max(LAMBDA_MIN);
                if rel < options.rel_tol {
                    converged = true;
                    break;
                }
            }
            None => {
                lambda *= 10.0;
                if lambda > LAMBDA_MAX {
                    break;
                }
            }
        }
    }
    LmReport {
        state,
        final_cost: f,
        iterations,
        converged,
        cost_trace: trace,
    }
}

/// Drops a twist on static scenarios and supplies a zero twist on dynamic ones.
fn normalize_init(scenario: &Scenario, init: &Estimate) -> Estimate {
    let twist = if scenario.mode.is_dynamic() {
        Some(init.twist.clone().unwrap_or_else(|| Twist::zero(scenario.dimension)))
    } else {
        None
    };
    Estimate {
        pose: init.pose.clone(),
        twist,
    }
}

/// Random initial state drawn from the simulation distributions.
pub fn random_init(scenario: &Scenario, seed: u64) -> Estimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_state(&mut rng, scenario.dimension, scenario.mode)
}

/// Identity pose with zero twist, for callers that want a fixed start.
pub fn identity_init(scenario: &Scenario) -> Estimate {
    Estimate {
        pose: Pose::new(Rotation::identity(scenario.dimension), DVector::zeros(scenario.dimension)),
        twist: scenario.mode.is_dynamic().then(|| Twist::zero(scenario.dimension)),
    }
}
