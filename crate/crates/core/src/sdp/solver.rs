//! Infeasible primal-dual path-following method with Nesterov–Todd scaling
//! and Mehrotra predictor-corrector steps.
//!
//! Primal: `min ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i, X ⪰ 0`.
//! Dual:   `max bᵀy     s.t.  Z = C − Σ y_i A_i ⪰ 0`.

use super::sym::{smat, svec, svec_len, SymMat};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("cost matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("constraint {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, got: usize, expected: usize },
    #[error("{constraints} constraints but {rhs} right-hand sides")]
    RhsMismatch { constraints: usize, rhs: usize },
    #[error("matrix {0} is not symmetric")]
    NotSymmetric(String),
    #[error("instance contains non-finite values")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpInstance {
    pub c: DMatrix<f64>,
    pub a: Vec<SymMat>,
    pub b: DVector<f64>,
}

impl SdpInstance {
    pub fn new(c: DMatrix<f64>, a: Vec<SymMat>, b: DVector<f64>) -> Result<SdpInstance, SdpError> {
        let n = c.nrows();
        if c.ncols() != n || n == 0 {
            return Err(SdpError::NotSquare(c.nrows(), c.ncols()));
        }
        if a.len() != b.len() {
            return Err(SdpError::RhsMismatch {
                constraints: a.len(),
                rhs: b.len(),
            });
        }
        for (index, ai) in a.iter().enumerate() {
            if ai.dim() != n {
                return Err(SdpError::DimensionMismatch {
                    index,
                    got: ai.dim(),
                    expected: n,
                });
            }
            if ai.asymmetry() > 1e-14 * ai.frobenius_norm().max(1.0) {
                return Err(SdpError::NotSymmetric(format!("A[{index}]")));
            }
        }
        if (&c - c.transpose()).amax() > 1e-14 * c.amax().max(1.0) {
            return Err(SdpError::NotSymmetric("C".into()));
        }
        if c.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(SdpError::NonFinite);
        }
        Ok(SdpInstance { c, a, b })
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    pub max_iter: usize,
    /// Target for primal/dual infeasibility and relative gap.
    pub tol: f64,
    /// Constraint directions with singular value below `drop_tol · σ_max` are removed.
    pub drop_tol: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            max_iter: 100,
            tol: 1e-9,
            drop_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SdpStatus {
    Optimal,
    MaxIter,
    NumericalFailure,
}

impl SdpStatus {
    pub fn name(self) -> &'static str {
        match self {
            SdpStatus::Optimal => "optimal",
            SdpStatus::MaxIter => "max_iter",
            SdpStatus::NumericalFailure => "numerical_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// `‖A(X) − b‖ / (1 + ‖b‖)`.
    pub primal_feas: f64,
    /// `‖C − Aᵀy − Z‖_F / (1 + ‖C‖_F)`.
    pub dual_feas: f64,
    /// `|p − d| / max(1, |p|)`.
    pub rel_gap: f64,
}

impl Residuals {
    fn worst(&self) -> f64 {
        self.primal_feas.max(self.dual_feas).max(self.rel_gap)
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// Dual slack `C − Σ y_i A_i`.
    pub z: DMatrix<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub status: SdpStatus,
    pub iterations: usize,
    pub residuals: Residuals,
    /// Number of constraint directions removed as linearly dependent.
    pub dropped: usize,
}

impl SdpSolution {
    /// Multipliers in the `C + Σ λ_i A_i ⪰ 0`, `max −λ₀` convention (`λ = −y`).
    pub fn multipliers(&self) -> DVector<f64> {
        -&self.y
    }
}

pub fn solve(instance: &SdpInstance, options: &SdpOptions) -> SdpSolution {
    solve_logged(instance, options, None)
}

/// Orthonormalized constraint system `Â = V_rᵀ`, `b̂ = Σ_r⁻¹ U_rᵀ b`.
struct Reduced {
    rows: Vec<DMatrix<f64>>,
    svecs: DMatrix<f64>,
    b: DVector<f64>,
    /// Maps reduced duals back: `y = T ŷ`.
    back: DMatrix<f64>,
    dropped: usize,
}

fn orthonormalize(instance: &SdpInstance, drop_tol: f64) -> Reduced {
    let n = instance.n();
    let s = svec_len(n);
    let m = instance.m();
    if m == 0 {
        return Reduced {
            rows: vec![],
            svecs: DMatrix::zeros(0, s),
            b: DVector::zeros(0),
            back: DMatrix::zeros(0, 0),
            dropped: 0,
        };
    }
    let mut amat = DMatrix::zeros(m, s);
    for (i, a) in instance.a.iter().enumerate() {
        amat.row_mut(i).copy_from(&a.svec().transpose());
    }
    let svd = amat.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vt");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > drop_tol * smax)
        .collect();
    let r = keep.len();
    let mut svecs = DMatrix::zeros(r, s);
    let mut b = DVector::zeros(r);
    let mut back = DMatrix::zeros(m, r);
    for (row, &k) in keep.iter().enumerate() {
        let sigma = svd.singular_values[k];
        svecs.row_mut(row).copy_from(&vt.row(k));
        b[row] = u.column(k).dot(&instance.b) / sigma;
        back.column_mut(row).copy_from(&(u.column(k) / sigma));
    }
    let rows = (0..r).map(|i| smat(&svecs.row(i).transpose(), n)).collect();
    Reduced {
        rows,
        svecs,
        b,
        back,
        dropped: m - r,
    }
}

/// Largest `α ≤ 1` keeping `L Lᵀ + α Δ` positive semidefinite.
fn max_step(l: &DMatrix<f64>, delta: &DMatrix<f64>) -> f64 {
    let linv = match l.clone().solve_lower_triangular(&DMatrix::identity(l.nrows(), l.nrows())) {
        Some(m) => m,
        None => return 0.0,
    };
    let mut s = &linv * delta * linv.transpose();
    s = (&s + s.transpose()) * 0.5;
    let lmin = s.symmetric_eigenvalues().min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

struct Iterate {
    x: DMatrix<f64>,
    y: DVector<f64>,
    z: DMatrix<f64>,
}

/// Solves `instance`, optionally writing one line per iteration to `log`.
pub fn solve_logged(instance: &SdpInstance, options: &SdpOptions, mut log: Option<&mut dyn Write>) -> SdpSolution {
    let n = instance.n();
    let red = orthonormalize(instance, options.drop_tol);
    let r = red.rows.len();
    let c_norm = instance.c.norm();
    let scale = c_norm.max(1.0);
    let c = &instance.c / scale;
    let b_norm = instance.b.norm();

    let aty = |y: &DVector<f64>| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(n, n);
        for (i, a) in red.rows.iter().enumerate() {
            out += a * y[i];
        }
        out
    };
    let op = |x: &DMatrix<f64>| -> DVector<f64> { &red.svecs * svec(x) };

    // Residuals and objectives in the caller's units.
    let evaluate = |it: &Iterate| -> (f64, f64, Residuals) {
        let pobj = instance.c.dot(&it.x);
        let dobj = scale * red.b.dot(&it.y);
        let ax = DVector::from_iterator(instance.m(), instance.a.iter().map(|a| a.dot_dense(&it.x)));
        let primal_feas = (ax - &instance.b).norm() / (1.0 + b_norm);
        let dual_feas = (&instance.c - aty(&it.y) * scale - &it.z * scale).norm() / (1.0 + c_norm);
        let rel_gap = (pobj - dobj).abs() / pobj.abs().max(1.0);
        (
            pobj,
            dobj,
            Residuals {
                primal_feas,
                dual_feas,
                rel_gap,
            },
        )
    };

    let bmax = red.b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let xi = 10f64.max((n as f64).sqrt()).max(n as f64 * (1.0 + bmax) / 2.0);
    let eta = 10f64.max((n as f64).sqrt()).max(c.norm());
    let mut cur = Iterate {
        x: DMatrix::identity(n, n) * xi,
        y: DVector::zeros(r),
        z: DMatrix::identity(n, n) * eta,
    };

    let finish = |it: Iterate, status: SdpStatus, iterations: usize| -> SdpSolution {
        let (primal_obj, dual_obj, residuals) = evaluate(&it);
        SdpSolution {
            y: &red.back * &it.y * scale,
            z: &it.z * scale,
            x: it.x,
            primal_obj,
            dual_obj,
            status,
            iterations,
            residuals,
            dropped: red.dropped,
        }
    };

    let mut best: Option<(f64, Iterate, usize)> = None;
    let mut stalls = 0;
    for iter in 0..=options.max_iter {
        let (pobj, dobj, res) = evaluate(&cur);
        if !(pobj.is_finite() && dobj.is_finite()) {
            break;
        }
        if best.as_ref().is_none_or(|(w, _, _)| res.worst() < *w) {
            best = Some((
                res.worst(),
                Iterate {
                    x: cur.x.clone(),
                    y: cur.y.clone(),
                    z: cur.z.clone(),
                },
                iter,
            ));
        }
        if res.worst() <= options.tol {
            return finish(cur, SdpStatus::Optimal, iter);
        }
        // close to the target, ten iterations without a new best residual mean
        // the precision floor is reached
        let floored = best.as_ref().is_some_and(|(w, _, at)| *w < 1e-6 && iter - at >= 10);
        if iter == options.max_iter || stalls >= 5 || floored {
            break;
        }

        let rp = &red.b - op(&cur.x);
        let rd = sym(&c - aty(&cur.y) - &cur.z);
        let mu = cur.x.dot(&cur.z) / n as f64;

        let (Some(lx), Some(lz)) = (
            Cholesky::new(cur.x.clone()).map(|ch| ch.l()),
            Cholesky::new(cur.z.clone()).map(|ch| ch.l()),
        ) else {
            break;
        };
        let svd = (lz.transpose() * &lx).svd(true, true);
        let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
            break;
        };
        let dvals = svd.singular_values;
        if dvals.iter().any(|&v| !(v > 0.0)) {
            break;
        }
        let dinv_sqrt = DMatrix::from_diagonal(&dvals.map(|v| 1.0 / v.sqrt()));
        let g = &lx * vt.transpose() * &dinv_sqrt;
        let ginv = &dinv_sqrt * u.transpose() * lz.transpose();
        let w = sym(&g * g.transpose());

        // Schur complement M_ij = ⟨Â_i, W Â_j W⟩
        let mut wa = DMatrix::zeros(r, svec_len(n));
        for (j, a) in red.rows.iter().enumerate() {
            wa.row_mut(j).copy_from(&svec(&(&w * a * &w)).transpose());
        }
        let mut schur = sym(&red.svecs * wa.transpose());
        let chol: Option<Cholesky<f64, Dyn>> = {
            let mut reg = 0.0;
            let diag_max = schur.diagonal().amax().max(1e-300);
            let mut out = None;
            for _ in 0..4 {
                if let Some(ch) = Cholesky::new(schur.clone()) {
                    out = Some(ch);
                    break;
                }
                reg = if reg == 0.0 { 1e-14 * diag_max } else { reg * 100.0 };
                for k in 0..r {
                    schur[(k, k)] += reg;
                }
            }
            out
        };
        let Some(chol) = chol else {
            break;
        };

        let wrdw = sym(&w * &rd * &w);
        let direction = |rc: &DMatrix<f64>| -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
            let rhs = &rp - op(&(rc - &wrdw));
            let dy = chol.solve(&rhs);
            let dz = sym(&rd - aty(&dy));
            let dx = sym(rc - &w * &dz * &w);
            (dx, dy, dz)
        };

        // predictor
        let (dxa, _, dza) = direction(&-&cur.x);
        let ap = max_step(&lx, &dxa).min(1.0);
        let ad = max_step(&lz, &dza).min(1.0);
        let mu_aff = (&cur.x + &dxa * ap).dot(&(&cur.z + &dza * ad)) / n as f64;
        let expo = (3.0 * ap.min(ad).powi(2)).max(1.0);
        let sigma = (mu_aff / mu).max(0.0).powf(expo).min(1.0);

        // corrector in the scaled space, where X̃ = Z̃ = D
        let dxt = &ginv * &dxa * ginv.transpose();
        let dzt = g.transpose() * &dza * &g;
        let prod = sym(&dxt * &dzt);
        let mut ds = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut rhs = -prod[(i, j)];
                if i == j {
                    rhs += sigma * mu - dvals[i] * dvals[i];
                }
                ds[(i, j)] = 2.0 * rhs / (dvals[i] + dvals[j]);
            }
        }
        let rc = sym(&g * ds * g.transpose());
        let (dx, dy, dz) = direction(&rc);

        let tau = 0.9 + 0.09 * ap.min(ad);
        let ap = (tau * max_step(&lx, &dx)).min(1.0);
        let ad = (tau * max_step(&lz, &dz)).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalls += 1;
        } else {
            stalls = 0;
        }
        cur.x = sym(&cur.x + dx * ap);
        cur.y += dy * ad;
        cur.z = sym(&cur.z + dz * ad);

        if let Some(out) = log.as_deref_mut() {
            let _ = writeln!(
                out,
                "{iter:3} pobj {pobj:+.9e} dobj {dobj:+.9e} gap {:.2e} pfeas {:.2e} dfeas {:.2e} ap {ap:.3} ad {ad:.3} sigma {sigma:.2e}",
                res.rel_gap, res.primal_feas, res.dual_feas
            );
        }
    }

    match best {
        Some((worst, it, iterations)) => {
            let status = if worst <= options.tol {
                SdpStatus::Optimal
            } else if worst.is_finite() && worst < 1e-3 {
                SdpStatus::MaxIter
            } else {
                SdpStatus::NumericalFailure
            };
            finish(it, status, iterations)
        }
        None => finish(cur, SdpStatus::NumericalFailure, 0),
    }
}
