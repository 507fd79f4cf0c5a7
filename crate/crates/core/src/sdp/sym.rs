//! Symmetric matrices in sparse (upper-triangular coordinate) or dense form,
//! plus the `svec` isometry between symmetric matrices and vectors.

use nalgebra::{DMatrix, DVector};
use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

/// Symmetric matrix stored as upper-triangular triplets `(i, j, v)` with `i <= j`.
/// An off-diagonal triplet stands for both `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    pub fn new(n: usize) -> Self {
        SparseSym {
            n,
            entries: Vec::new(),
        }
    }

    /// Builds from triplets; indices may be given in either order, duplicates add up.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "triplet ({i},{j}) outside {n}x{n}");
            *acc.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
        SparseSym {
            n,
            entries: acc
                .into_iter()
                .filter(|&(_, v)| v != 0.0)
                .map(|((i, j), v)| (i, j, v))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &DVector<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * x[i] * x[i] } else { 2.0 * v * x[i] * x[j] })
            .sum()
    }

    /// Trace inner product `tr(A M)` with a dense symmetric `M`.
    pub fn dot_dense(&self, m: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * m[(i, i)] } else { v * (m[(i, j)] + m[(j, i)]) })
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, s: f64) -> SparseSym {
        SparseSym {
            n: self.n,
            entries: self.entries.iter().map(|&(i, j, v)| (i, j, v * s)).collect(),
        }
    }
}

/// A symmetric matrix in whichever representation is cheaper.
#[derive(Debug, Clone, PartialEq)]
pub enum SymMat {
    Sparse(SparseSym),
    Dense(DMatrix<f64>),
}

impl SymMat {
    pub fn dim(&self) -> usize {
        match self {
            SymMat::Sparse(s) => s.dim(),
            SymMat::Dense(d) => d.nrows(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SymMat::Sparse(s) => s.to_dense(),
            SymMat::Dense(d) => d.clone(),
        }
    }

    pub fn dot_dense(&self, m: &DMatrix<f64>) -> f64 {
        match self {
            SymMat::Sparse(s) => s.dot_dense(m),
            SymMat::Dense(d) => d.dot(m),
        }
    }

    pub fn quad_form(&self, x: &DVector<f64>) -> f64 {
        match self {
            SymMat::Sparse(s) => s.quad_form(x),
            SymMat::Dense(d) => x.dot(&(d * x)),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            SymMat::Sparse(s) => s.frobenius_norm(),
            SymMat::Dense(d) => d.norm(),
        }
    }

    /// Adds `coef * self` into `out`.
    pub fn add_to(&self, out: &mut DMatrix<f64>, coef: f64) {
        match self {
            SymMat::Sparse(s) => {
                for &(i, j, v) in s.entries() {
                    out[(i, j)] += coef * v;
                    if i != j {
                        out[(j, i)] += coef * v;
                    }
                }
            }
            SymMat::Dense(d) => *out += d * coef,
        }
    }

    pub fn svec(&self) -> DVector<f64> {
        match self {
            SymMat::Sparse(s) => {
                let mut v = DVector::zeros(svec_len(s.dim()));
                for &(i, j, x) in s.entries() {
                    v[svec_index(i, j)] = if i == j { x } else { x * std::f64::consts::SQRT_2 };
                }
                v
            }
            SymMat::Dense(d) => svec(d),
        }
    }

    /// Largest asymmetry `|A - Aᵀ|` (always zero for the sparse form).
    pub fn asymmetry(&self) -> f64 {
        match self {
            SymMat::Sparse(_) => 0.0,
            SymMat::Dense(d) => (d - d.transpose()).amax(),
        }
    }
}

impl From<SparseSym> for SymMat {
    fn from(s: SparseSym) -> Self {
        SymMat::Sparse(s)
    }
}

impl From<DMatrix<f64>> for SymMat {
    fn from(d: DMatrix<f64>) -> Self {
        SymMat::Dense(d)
    }
}

pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of entry `(i, j)`, `i <= j`, in column-major upper-triangular order.
pub fn svec_index(i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    j * (j + 1) / 2 + i
}

/// Symmetric vectorization with `√2` on off-diagonals, so `svec(A)·svec(B) = tr(AB)`.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut v = DVector::zeros(svec_len(n));
    for j in 0..n {
        for i in 0..=j {
            v[svec_index(i, j)] = if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)]) * std::f64::consts::SQRT_2
            };
        }
    }
    v
}

pub fn smat(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    assert_eq!(v.len(), svec_len(n));
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let x = v[svec_index(i, j)];
            if i == j {
                m[(i, i)] = x;
            } else {
                let x = x / std::f64::consts::SQRT_2;
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
    }
    m
}

/// Writes a symmetric matrix as `row col value` lines (upper triangle, 17 significant digits).
pub fn write_coordinates<W: Write>(out: &mut W, m: &SymMat) -> io::Result<()> {
    match m {
        SymMat::Sparse(s) => {
            for &(i, j, v) in s.entries() {
                writeln!(out, "{i} {j} {v:.16e}")?;
            }
        }
        SymMat::Dense(d) => {
            for j in 0..d.ncols() {
                for i in 0..=j {
                    let v = d[(i, j)];
                    if v != 0.0 {
                        writeln!(out, "{i} {j} {v:.16e}")?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Reads coordinate lines until a blank line, a `#` header or end of input.
pub fn read_coordinates<R: BufRead>(lines: &mut std::iter::Peekable<io::Lines<R>>, n: usize) -> io::Result<SparseSym> {
    let mut triplets = Vec::new();
    while let Some(Ok(line)) = lines.peek() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            break;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let bad = || io::Error::new(io::ErrorKind::InvalidData, format!("bad coordinate line `{t}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let i: usize = parts[0].parse().map_err(|_| bad())?;
        let j: usize = parts[1].parse().map_err(|_| bad())?;
        let v: f64 = parts[2].parse().map_err(|_| bad())?;
        if i >= n || j >= n {
            return Err(bad());
        }
        triplets.push((i, j, v));
        lines.next();
    }
    Ok(SparseSym::from_triplets(n, triplets))
}
