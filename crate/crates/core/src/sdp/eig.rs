//! Symmetric eigendecomposition by cyclic Jacobi rotations.

use nalgebra::{DMatrix, DVector};

/// Eigenvalues in descending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&self.values);
        &self.vectors * d * self.vectors.transpose()
    }
}

const MAX_SWEEPS: usize = 60;

/// Eigendecomposition of a symmetric matrix. Only the upper triangle is read.
pub fn sym_eig(m: &DMatrix<f64>) -> SymEigen {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "sym_eig needs a square matrix");
    // row-major working copy, symmetrized from the upper triangle
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = m[(i, j)];
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    // eigenvectors stored as rows of `v` (transposed at the end)
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let total: f64 = a.iter().map(|x| x * x).sum();
    if total == 0.0 || n < 2 {
        return finish(n, &a, &v);
    }
    let floor = f64::EPSILON * f64::EPSILON * total;

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i * n + j] * a[i * n + j];
            }
        }
        if off <= floor {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // skip rotations that cannot change the diagonal in floating point
                if apq.abs() < 1e-300
                    || (apq.abs() * 1e18 < app.abs() && apq.abs() * 1e18 < aqq.abs())
                {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, n, p, q, c, s);
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                // rows p, q of the transposed eigenvector matrix
                for k in 0..n {
                    let vp = v[p * n + k];
                    let vq = v[q * n + k];
                    v[p * n + k] = c * vp - s * vq;
                    v[q * n + k] = s * vp + c * vq;
                }
            }
        }
    }
    finish(n, &a, &v)
}

/// Applies `Jᵀ A J` on rows and columns `p`, `q` (diagonal block fixed by caller).
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        let np = c * akp - s * akq;
        let nq = s * akp + c * akq;
        a[k * n + p] = np;
        a[p * n + k] = np;
        a[k * n + q] = nq;
        a[q * n + k] = nq;
    }
}

fn finish(n: usize, a: &[f64], v: &[f64]) -> SymEigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[i * n + i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, col)] = v[i * n + k];
        }
    }
    SymEigen { values, vectors }
}
