//! Redundant constraint discovery from sampled feasible lifted states.
//!
//! Discovery runs in two stages. First the linear span `B` of the lifted
//! samples is found; every direction `u ⟂ B` gives the quadratic constraints
//! `sym(u wᵀ)` for all `w`. Then the second-moment rows `svec(ξξᵀ)` of the
//! reduced coordinates `ξ = Bᵀx` are formed and their right nullspace gives
//! the remaining constraints `B S Bᵀ`. Together these span exactly the
//! nullspace of the full moment matrix built from `svec(xxᵀ)`, but the basis
//! is kept factored so an SDP can be solved over `X = B Y Bᵀ` directly.

use crate::qcqp::{lift, Constraint, ConstraintKind, LiftModel, QcqpProblem, StateLayout, Variant};
use crate::scenario::sample_state;
use crate::sdp::sym::{read_coordinates, smat, svec, svec_len, write_coordinates, SymMat};
use crate::sdp::SdpInstance;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::{self, BufRead, Write};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0x5eed_ba5e;
/// Number of fresh samples used to validate a discovered basis.
pub const VALIDATION_SAMPLES: usize = 1000;
pub const CACHE_ENV: &str = "RO_INIT_CACHE_DIR";

#[derive(Debug, Error)]
pub enum RedundancyError {
    #[error("{got} samples are not enough, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },
    #[error("sampled states do not span the moment space: {0}")]
    RankDeficientSampling(String),
    #[error("basis was discovered for layout {expected}, problem has layout {found}")]
    LayoutMismatch { expected: String, found: String },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("malformed basis file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscoveryOptions {
    /// Defaults to `3 · n(n+1)/2`.
    pub n_samples: Option<usize>,
    pub tol: f64,
    pub seed: u64,
}

impl Default for DiscoveryOptions {
    fn default() -> Self {
        DiscoveryOptions {
            n_samples: None,
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
        }
    }
}

/// Orthonormal basis of redundant constraints in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintBasis {
    pub layout_hash: String,
    /// `n × q` orthonormal basis of the sampled linear span.
    pub span: DMatrix<f64>,
    /// `n × (n − q)` orthonormal complement of `span`.
    pub complement: DMatrix<f64>,
    /// `q × q` constraints on the reduced coordinates, orthonormal under the trace product.
    pub reduced: Vec<DMatrix<f64>>,
    /// Spectrum of the reduced moment matrix, descending.
    pub singular_values: Vec<f64>,
    /// Spectrum of the sample matrix, descending.
    pub span_singular_values: Vec<f64>,
    pub tol: f64,
}

impl ConstraintBasis {
    pub fn n(&self) -> usize {
        self.span.nrows()
    }

    /// Dimension of the sampled linear span.
    pub fn q(&self) -> usize {
        self.span.ncols()
    }

    /// Number of basis matrices, `dim null(M)` of the full moment matrix.
    pub fn len(&self) -> usize {
        let (n, q) = (self.n(), self.q());
        let k = n - q;
        self.reduced.len() + k * q + k * (k + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All basis matrices as dense `n × n` matrices, orthonormal under the trace product.
    pub fn matrices(&self) -> Vec<DMatrix<f64>> {
        let b = &self.span;
        let u = &self.complement;
        let mut out: Vec<DMatrix<f64>> = self.reduced.iter().map(|s| b * s * b.transpose()).collect();
        let sym_outer = |a: DVector<f64>, c: DVector<f64>| {
            let m = &a * c.transpose();
            (&m + m.transpose()) * std::f64::consts::FRAC_1_SQRT_2
        };
        for i in 0..u.ncols() {
            for j in 0..b.ncols() {
                out.push(sym_outer(u.column(i).into_owned(), b.column(j).into_owned()));
            }
            for j in i..u.ncols() {
                if i == j {
                    let c = u.column(i);
                    out.push(&c * c.transpose());
                } else {
                    out.push(sym_outer(u.column(i).into_owned(), u.column(j).into_owned()));
                }
            }
        }
        out
    }

    /// Frobenius distance from `a` to the span of the basis.
    pub fn projection_residual(&self, a: &DMatrix<f64>) -> f64 {
        // Every component touching the complement lies in the span, so only
        // the reduced block can leave a residual.
        let r = self.span.transpose() * a * &self.span;
        let r = (&r + r.transpose()) * 0.5;
        let mut res = r.clone();
        for s in &self.reduced {
            res -= s * s.dot(&r);
        }
        res.norm()
    }

    /// Largest `|xᵀ S x|` over all basis matrices.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let xi = self.span.transpose() * x;
        let perp = self.complement.transpose() * x;
        let mut worst = perp.amax() * x.amax() * 2.0f64.sqrt();
        for s in &self.reduced {
            worst = worst.max(xi.dot(&(s * &xi)).abs());
        }
        worst
    }

    /// Reduced SDP over `Y` with `X = B Y Bᵀ`: cost `BᵀQB`, homogenization, discovered constraints.
    pub fn reduced_instance(&self, problem: &QcqpProblem) -> SdpInstance {
        let b = &self.span;
        let sandwich = |m: &DMatrix<f64>| {
            let r = b.transpose() * m * b;
            (&r + r.transpose()) * 0.5
        };
        let c = sandwich(&problem.cost.to_dense());
        let mut a = vec![SymMat::Dense(sandwich(&problem.homogenization().matrix.to_dense()))];
        a.extend(self.reduced.iter().cloned().map(SymMat::Dense));
        let mut rhs = DVector::zeros(a.len());
        rhs[0] = problem.homogenization().rhs;
        SdpInstance::new(c, a, rhs).expect("reduced matrices are symmetric by construction")
    }

    /// `B Y Bᵀ`.
    pub fn expand(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        let x = &self.span * y * self.span.transpose();
        (&x + x.transpose()) * 0.5
    }

    pub fn write<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# layout {}", self.layout_hash)?;
        writeln!(out, "# n {} q {} reduced {} tol {:.16e}", self.n(), self.q(), self.reduced.len(), self.tol)?;
        write_values(out, "singular_values", &self.singular_values)?;
        write_values(out, "span_singular_values", &self.span_singular_values)?;
        writeln!(out, "# span")?;
        write_general(out, &self.span)?;
        writeln!(out, "# complement")?;
        write_general(out, &self.complement)?;
        for (i, s) in self.reduced.iter().enumerate() {
            writeln!(out, "# reduced {i}")?;
            write_coordinates(out, &SymMat::Dense(s.clone()))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<ConstraintBasis, RedundancyError> {
        let bad = |m: &str| RedundancyError::Parse(m.to_string());
        let io_err = |e: io::Error| RedundancyError::Parse(e.to_string());
        let mut lines = input.lines().peekable();
        let next_header = |lines: &mut std::iter::Peekable<io::Lines<R>>| -> Result<Vec<String>, RedundancyError> {
            loop {
                match lines.next() {
                    None => return Ok(vec![]),
                    Some(l) => {
                        let l = l.map_err(io_err)?;
                        let t = l.trim();
                        if t.is_empty() {
                            continue;
                        }
                        let Some(rest) = t.strip_prefix('#') else {
                            return Err(bad("expected a section header"));
                        };
                        return Ok(rest.split_whitespace().map(str::to_string).collect());
                    }
                }
            }
        };
        let h = next_header(&mut lines)?;
        if h.len() != 2 || h[0] != "layout" {
            return Err(bad("missing layout header"));
        }
        let layout_hash = h[1].clone();
        let h = next_header(&mut lines)?;
        if h.len() != 8 || h[0] != "n" {
            return Err(bad("missing size header"));
        }
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|_| bad("bad integer"));
        let (n, q, nred) = (parse_usize(&h[1])?, parse_usize(&h[3])?, parse_usize(&h[5])?);
        let tol: f64 = h[7].parse().map_err(|_| bad("bad tolerance"))?;
        if q > n {
            return Err(bad("span larger than the state"));
        }
        let values = |lines: &mut std::iter::Peekable<io::Lines<R>>, name: &str| -> Result<Vec<f64>, RedundancyError> {
            let h = next_header(lines)?;
            if h.first().map(String::as_str) != Some(name) {
                return Err(bad(&format!("missing {name}")));
            }
            h[1..].iter().map(|v| v.parse().map_err(|_| bad("bad value"))).collect()
        };
        let singular_values = values(&mut lines, "singular_values")?;
        let span_singular_values = values(&mut lines, "span_singular_values")?;
        if next_header(&mut lines)? != ["span"] {
            return Err(bad("missing span"));
        }
        let span = read_general(&mut lines, n, q).map_err(io_err)?;
        if next_header(&mut lines)? != ["complement"] {
            return Err(bad("missing complement"));
        }
        let complement = read_general(&mut lines, n, n - q).map_err(io_err)?;
        let mut reduced = Vec::with_capacity(nred);
        for i in 0..nred {
            let h = next_header(&mut lines)?;
            if h.len() != 2 || h[0] != "reduced" || h[1] != i.to_string() {
                return Err(bad("missing reduced matrix"));
            }
            reduced.push(read_coordinates(&mut lines, q).map_err(io_err)?.to_dense());
        }
        Ok(ConstraintBasis {
            layout_hash,
            span,
            complement,
            reduced,
            singular_values,
            span_singular_values,
            tol,
        })
    }
}

fn write_values<W: Write>(out: &mut W, name: &str, v: &[f64]) -> io::Result<()> {
    write!(out, "# {name}")?;
    for x in v {
        write!(out, " {x:.16e}")?;
    }
    writeln!(out)
}

fn write_general<W: Write>(out: &mut W, m: &DMatrix<f64>) -> io::Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(out, "{i} {j} {v:.16e}")?;
            }
        }
    }
    Ok(())
}

fn read_general<R: BufRead>(
    lines: &mut std::iter::Peekable<io::Lines<R>>,
    rows: usize,
    cols: usize,
) -> io::Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(rows, cols);
    while let Some(Ok(line)) = lines.peek() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            break;
        }
        let bad = || io::Error::new(io::ErrorKind::InvalidData, format!("bad coordinate line `{t}`"));
        let p: Vec<&str> = t.split_whitespace().collect();
        if p.len() != 3 {
            return Err(bad());
        }
        let i: usize = p[0].parse().map_err(|_| bad())?;
        let j: usize = p[1].parse().map_err(|_| bad())?;
        let v: f64 = p[2].parse().map_err(|_| bad())?;
        if i >= rows || j >= cols {
            return Err(bad());
        }
        m[(i, j)] = v;
        lines.next();
    }
    Ok(m)
}

fn lift_sample(rng: &mut impl Rng, layout: &StateLayout) -> DVector<f64> {
    let mut est = sample_state(rng, layout.dimension(), layout.variant().mode());
    if layout.variant() == Variant::DynamicExact {
        // Small per-step angles make powers of the increment nearly collinear
        // and blur the span, so the step rotation is drawn from the whole circle.
        if let Some(t) = est.twist.as_mut() {
            t.angular[0] = rng.random_range(-PI..PI) / layout.dt();
        }
    }
    lift(layout, &est, LiftModel::FirstOrder).expect("sampled state matches its layout")
}

/// Linear span of sampled lifted states: `(B, B⊥, singular values)`.
pub fn sample_span(
    layout: &StateLayout,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<DVector<f64>> = (0..n_samples).map(|_| lift_sample(&mut rng, layout)).collect();
    span_of(layout.n(), &samples, tol)
}

fn span_of(n: usize, samples: &[DVector<f64>], tol: f64) -> (DMatrix<f64>, DMatrix<f64>, Vec<f64>) {
    let s = DMatrix::from_columns(samples);
    // Left singular vectors of the n × N sample matrix via its n × n Gram matrix
    // would square the conditioning; use the SVD of the transpose instead.
    let svd = s.transpose().svd(false, true);
    let vt = svd.v_t.expect("requested Vt");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let q = order.iter().filter(|&&k| sv[k] > tol * smax).count();
    let mut all: Vec<DVector<f64>> = order.iter().map(|&k| vt.row(k).transpose()).collect();
    if all.len() < n {
        // fewer samples than coordinates: complete the basis
        let taken = DMatrix::from_columns(&all);
        let rest = DMatrix::<f64>::identity(n, n) - &taken * taken.transpose();
        let extra = rest.svd(true, false).u.expect("requested U");
        all.extend((0..n - all.len()).map(|k| extra.column(k).into_owned()));
    }
    let span = DMatrix::from_columns(&all[..q]);
    let complement = if q < n {
        DMatrix::from_columns(&all[q..n])
    } else {
        DMatrix::zeros(n, 0)
    };
    let sorted: Vec<f64> = order.iter().map(|&k| sv[k]).collect();
    (span, complement, sorted)
}

/// Orthonormal basis of the quadratic forms vanishing on every sample,
/// without the fresh-sample validation of [`discover_constraints`]. Needs at
/// least as many samples as there are quadratic monomials of the span.
pub fn discover_from_samples(samples: &[DVector<f64>], tol: f64, layout_hash: String) -> ConstraintBasis {
    let n = samples.first().map_or(0, |x| x.len());
    let n_samples = samples.len();
    let (span, complement, span_singular_values) = span_of(n, samples, tol);
    let q = span.ncols();
    let sq = svec_len(q);

    let mut moments = DMatrix::zeros(n_samples, sq);
    for (i, x) in samples.iter().enumerate() {
        let xi = span.transpose() * x;
        moments.row_mut(i).copy_from(&svec(&(&xi * xi.transpose())).transpose());
    }
    // Column equilibration: lifted coordinates differ by orders of magnitude
    // (squared norms next to unit rotations), which blurs the nullspace cut.
    let scale: Vec<f64> = (0..sq).map(|j| moments.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    for (j, sc) in scale.iter().enumerate() {
        moments.column_mut(j).scale_mut(1.0 / sc);
    }
    let svd = moments.svd(false, true);
    let vt = svd.v_t.expect("requested Vt");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let null: Vec<DVector<f64>> = order
        .iter()
        .filter(|&&k| sv[k] <= tol * smax)
        .map(|&k| DVector::from_fn(sq, |j, _| vt[(k, j)] / scale[j]))
        .collect();
    let reduced: Vec<DMatrix<f64>> = if null.is_empty() {
        Vec::new()
    } else {
        let ortho = DMatrix::from_columns(&null).svd(true, false).u.expect("requested U");
        ortho.column_iter().map(|c| smat(&c.into_owned(), q)).collect()
    };
    ConstraintBasis {
        layout_hash,
        span,
        complement,
        reduced,
        singular_values: order.iter().map(|&k| sv[k]).collect(),
        span_singular_values,
        tol,
    }
}

/// Discovers an orthonormal basis of all quadratic constraints satisfied by
/// the layout's feasible set.
pub fn discover_constraints(layout: &StateLayout, options: &DiscoveryOptions) -> Result<ConstraintBasis, RedundancyError> {
    let n = layout.n();
    if !(options.tol > 0.0) {
        return Err(RedundancyError::BadTolerance(options.tol));
    }
    let need = 2 * svec_len(n);
    let n_samples = options.n_samples.unwrap_or(3 * svec_len(n));
    if n_samples < need {
        return Err(RedundancyError::InsufficientSamples { got: n_samples, need });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let samples: Vec<DVector<f64>> = (0..n_samples).map(|_| lift_sample(&mut rng, layout)).collect();
    let basis = discover_from_samples(&samples, options.tol, layout.hash_hex());
    validate(&basis, layout, options)?;
    Ok(basis)
}

fn validate(basis: &ConstraintBasis, layout: &StateLayout, options: &DiscoveryOptions) -> Result<(), RedundancyError> {
    let mut fresh = ChaCha8Rng::seed_from_u64(options.seed ^ 0xf2e5_4a11);
    for _ in 0..VALIDATION_SAMPLES {
        let x = lift_sample(&mut fresh, layout);
        let v = basis.max_violation(&x);
        if v > 1e-8 * x.norm_squared().max(1.0) {
            return Err(RedundancyError::RankDeficientSampling(format!(
                "a discovered constraint is violated by {v:e} on a fresh sample"
            )));
        }
    }
    Ok(())
}

/// Replaces the solver constraints with the homogenization constraint plus
/// the discovered basis; hand-coded constraints move to `verification`.
pub fn attach(problem: &QcqpProblem, basis: &ConstraintBasis) -> Result<QcqpProblem, RedundancyError> {
    let found = problem.layout.hash_hex();
    if basis.layout_hash != found || basis.n() != problem.n() {
        return Err(RedundancyError::LayoutMismatch {
            expected: basis.layout_hash.clone(),
            found,
        });
    }
    if basis.is_empty() {
        return Ok(problem.clone());
    }
    let mut out = problem.clone();
    if out.verification.is_empty() {
        out.verification = problem.constraints.clone();
    }
    out.constraints = std::iter::once(problem.homogenization().clone())
        .chain(basis.matrices().into_iter().map(|m| Constraint {
            matrix: SymMat::Dense(m),
            rhs: 0.0,
            kind: ConstraintKind::Redundant,
        }))
        .collect();
    Ok(out)
}

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ro-init-cache"))
}

pub fn save_basis(basis: &ConstraintBasis, path: &Path) -> Result<(), RedundancyError> {
    let io_err = |source| RedundancyError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err)?;
    }
    // write-then-rename keeps concurrent readers from seeing partial files
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = io::BufWriter::new(std::fs::File::create(&tmp).map_err(io_err)?);
        basis.write(&mut f).map_err(io_err)?;
        f.flush().map_err(io_err)?;
    }
    std::fs::rename(&tmp, path).map_err(io_err)
}

pub fn load_basis(path: &Path) -> Result<ConstraintBasis, RedundancyError> {
    let f = std::fs::File::open(path).map_err(|source| RedundancyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ConstraintBasis::read(io::BufReader::new(f))
}

/// Loads a cached basis for `layout` or discovers and caches one.
/// Returns the basis and whether it came from the cache.
pub fn load_or_discover(
    layout: &StateLayout,
    options: &DiscoveryOptions,
    dir: &Path,
) -> Result<(ConstraintBasis, bool), RedundancyError> {
    load_or_compute(layout, options, dir, "basis", discover_constraints)
}

/// Basis for the exact dynamic layout, whose full moment matrix is too large
/// to factor. The moment matrix is formed on the sampled linear span instead.
pub fn exact_basis(layout: &StateLayout, options: &DiscoveryOptions) -> Result<ConstraintBasis, RedundancyError> {
    let n = layout.n();
    if !(options.tol > 0.0) {
        return Err(RedundancyError::BadTolerance(options.tol));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut samples: Vec<DVector<f64>> = (0..3 * n).map(|_| lift_sample(&mut rng, layout)).collect();
    let q = span_of(n, &samples, options.tol).0.ncols();
    let n_samples = options.n_samples.unwrap_or(3 * svec_len(q));
    let need = 2 * svec_len(q);
    if n_samples < need {
        return Err(RedundancyError::InsufficientSamples { got: n_samples, need });
    }
    samples.extend((samples.len()..n_samples).map(|_| lift_sample(&mut rng, layout)));
    let basis = discover_from_samples(&samples, options.tol, layout.hash_hex());
    validate(&basis, layout, options)?;
    Ok(basis)
}

pub fn load_or_exact(
    layout: &StateLayout,
    options: &DiscoveryOptions,
    dir: &Path,
) -> Result<(ConstraintBasis, bool), RedundancyError> {
    load_or_compute(layout, options, dir, "exact", exact_basis)
}

fn load_or_compute(
    layout: &StateLayout,
    options: &DiscoveryOptions,
    dir: &Path,
    kind: &str,
    compute: fn(&StateLayout, &DiscoveryOptions) -> Result<ConstraintBasis, RedundancyError>,
) -> Result<(ConstraintBasis, bool), RedundancyError> {
    let path = dir.join(format!("{}-{}.{kind}", layout.variant().name(), layout.hash_hex()));
    if let Ok(basis) = load_basis(&path) {
        if basis.layout_hash == layout.hash_hex() && basis.n() == layout.n() && basis.tol == options.tol {
            return Ok((basis, true));
        }
    }
    let basis = compute(layout, options)?;
    // a read-only cache only costs a recomputation next time
    let _ = save_basis(&basis, &path);
    Ok((basis, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcqp::build_static;
    use crate::scenario::{sample_scenario, simulate_measurements, Preset};

    fn static2d() -> QcqpProblem {
        let (mut s, t) = sample_scenario(&Preset::Static2d.config(0.01), 1).unwrap();
        s.measurements = simulate_measurements(&s, &t, 2);
        build_static(&s).unwrap()
    }

    #[test]
    fn factored_projection_matches_expanded_basis() {
        let p = static2d();
        let basis = discover_constraints(&p.layout, &DiscoveryOptions::default()).unwrap();
        let mats = basis.matrices();
        assert_eq!(mats.len(), basis.len());
        let a = p.cost.to_dense();
        let mut res = a.clone();
        for m in &mats {
            res -= m * m.dot(&a);
        }
        assert!((res.norm() - basis.projection_residual(&a)).abs() < 1e-8 * a.norm());
        for (i, m) in mats.iter().enumerate().step_by(7) {
            for (j, k) in mats.iter().enumerate().step_by(5) {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((m.dot(k) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn file_roundtrip() {
        let p = static2d();
        let basis = discover_constraints(&p.layout, &DiscoveryOptions::default()).unwrap();
        let mut buf = Vec::new();
        basis.write(&mut buf).unwrap();
        let back = ConstraintBasis::read(&buf[..]).unwrap();
        assert_eq!(back, basis);
    }

    #[test]
    fn too_few_samples() {
        let p = static2d();
        let opts = DiscoveryOptions {
            n_samples: Some(10),
            ..Default::default()
        };
        assert!(matches!(
            discover_constraints(&p.layout, &opts),
            Err(RedundancyError::InsufficientSamples { .. })
        ));
    }
}
