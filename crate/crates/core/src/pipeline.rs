//! End-to-end solvers: the tightened SDP pipeline and the local LS baseline.

use crate::extraction::{certify, check_solution, extract, trajectory_errors, Certificate, ExtractionError};
use crate::lm::{lm_solve, random_init, LmOptions};
use crate::qcqp::{build, lift, LiftModel, QcqpError, QcqpProblem, Variant};
use crate::redundancy::{cache_dir, load_or_discover, load_or_exact, ConstraintBasis, DiscoveryOptions, RedundancyError};
use crate::scenario::{Estimate, Mode, Scenario};
use crate::sdp::{solve, sym_eig, Residuals, SdpInstance, SdpOptions, SdpSolution, SdpStatus};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Build(#[from] QcqpError),
    #[error(transparent)]
    Redundancy(#[from] RedundancyError),
    #[error(transparent)]
    Extraction(#[from] ExtractionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Sdp,
    Ls,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sdp => "SDP",
            Method::Ls => "LS",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Use the approximation-free dynamic builder.
    pub exact_dynamic: bool,
    /// LM refinement of the extraction on the exact objective; `None` refines dynamic modes only.
    pub refine: Option<bool>,
    pub sdp: SdpOptions,
    pub lm: LmOptions,
    pub discovery: DiscoveryOptions,
    /// Basis cache location; `None` uses [`cache_dir`].
    pub cache_dir: Option<PathBuf>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            exact_dynamic: false,
            refine: None,
            sdp: SdpOptions::default(),
            lm: LmOptions::default(),
            discovery: DiscoveryOptions::default(),
            cache_dir: None,
        }
    }
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timing {
    pub build: f64,
    pub discover: f64,
    pub discover_cached: bool,
    pub sdp: f64,
    pub extract: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSummary {
    pub status: SdpStatus,
    /// The primal was replaced by the rank-one polish.
    pub polished: bool,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub iterations: usize,
    pub primal_feas: f64,
    pub dual_feas: f64,
    pub rel_gap: f64,
    /// Smallest eigenvalue of the dual slack matrix.
    pub min_dual_slack: f64,
    /// Lifted state dimension of the QCQP.
    pub state_dim: usize,
    /// Dimension of the PSD block actually solved.
    pub reduced_dim: usize,
    pub constraints: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub method: Method,
    pub mode: Mode,
    pub variant: Option<Variant>,
    pub estimate: Estimate,
    /// Estimate read off the SDP before any refinement.
    pub extracted: Option<Estimate>,
    pub certificate: Option<Certificate>,
    pub position_error: Option<f64>,
    pub rotation_error: Option<f64>,
    /// Exact MAP cost of `estimate`.
    pub map_cost: f64,
    /// Cost of `estimate` under the objective the relaxation was built from.
    pub relaxed_cost: f64,
    pub sdp: Option<SdpSummary>,
    pub lm_iterations: usize,
    pub timing: Timing,
}

/// Cost under the objective a variant's relaxation was built from.
/// Accepted negative curvature of a certifying dual slack.
const PSD_TOL: f64 = 1e-8;

fn dual_slack(inst: &SdpInstance, y: &DVector<f64>) -> DMatrix<f64> {
    let mut z = inst.c.clone();
    for (a, &yi) in inst.a.iter().zip(y.iter()) {
        a.add_to(&mut z, -yi);
    }
    z
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    sym_eig(m).values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Moves `y0` by the least-norm correction that makes `ξ` a null vector of
/// `Z = C − Σ y_i A_i`. At such a `y`, `bᵀy = ξᵀCξ` whenever `ξ` is feasible.
fn stationary_dual(inst: &SdpInstance, xi: &DVector<f64>, y0: &DVector<f64>) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let q = xi.len();
    let m = inst.m();
    if y0.len() != m {
        return None;
    }
    let mut cols = DMatrix::zeros(q, m);
    for (i, a) in inst.a.iter().enumerate() {
        let mut ai = DMatrix::zeros(q, q);
        a.add_to(&mut ai, 1.0);
        cols.set_column(i, &(ai * xi));
    }
    let svd = cols.svd(true, true);
    let cutoff = 1e-12 * svd.singular_values.max();
    let mut y = y0.clone();
    for _ in 0..2 {
        let r = dual_slack(inst, &y) * xi;
        y += svd.solve(&r, cutoff).ok()?;
    }
    let z = dual_slack(inst, &y);
    Some((y, z))
}

fn relaxed_cost(scenario: &Scenario, variant: Variant, est: &Estimate) -> f64 {
    if variant.is_first_order() {
        scenario.map_cost_first_order(est)
    } else {
        scenario.map_cost(est)
    }
}

fn with_errors(mut report: EstimateReport, scenario: &Scenario) -> EstimateReport {
    if let Some(truth) = &scenario.ground_truth {
        let (p, r) = trajectory_errors(scenario, truth, &report.estimate);
        report.position_error = Some(p);
        report.rotation_error = Some(r);
    }
    report
}

/// A solved relaxation and everything needed to interpret it.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub problem: QcqpProblem,
    pub basis: Arc<ConstraintBasis>,
    pub instance: SdpInstance,
    pub solution: SdpSolution,
    /// Primal solution in full lifted coordinates.
    pub x: DMatrix<f64>,
    pub timing: Timing,
}

/// Pipeline with an in-memory basis cache shared across solves.
#[derive(Debug, Default)]
pub struct Pipeline {
    pub options: PipelineOptions,
    bases: Mutex<HashMap<String, Arc<ConstraintBasis>>>,
}

impl Pipeline {
    pub fn new(options: PipelineOptions) -> Self {
        Pipeline {
            options,
            bases: Mutex::new(HashMap::new()),
        }
    }

    fn basis(&self, problem: &QcqpProblem) -> Result<(Arc<ConstraintBasis>, bool), RedundancyError> {
        let key = format!("{}-{}", problem.layout.variant().name(), problem.layout.hash_hex());
        if let Some(b) = self.bases.lock().expect("basis cache poisoned").get(&key) {
            return Ok((b.clone(), true));
        }
        let dir = self.options.cache_dir.clone().unwrap_or_else(cache_dir);
        let (basis, cached) = if problem.layout.variant() == Variant::DynamicExact {
            load_or_exact(&problem.layout, &self.options.discovery, &dir)?
        } else {
            load_or_discover(&problem.layout, &self.options.discovery, &dir)?
        };
        let basis = Arc::new(basis);
        self.bases
            .lock()
            .expect("basis cache poisoned")
            .entry(key)
            .or_insert_with(|| basis.clone());
        Ok((basis, cached))
    }

    pub fn variant_for(&self, scenario: &Scenario) -> Variant {
        Variant::for_mode(scenario.mode, self.options.exact_dynamic)
    }

    /// Builds, reduces and solves the relaxation.
    pub fn relax(&self, scenario: &Scenario) -> Result<Relaxation, PipelineError> {
        let mut timing = Timing::default();
        let t = Instant::now();
        let variant = self.variant_for(scenario);
        let problem = build(scenario, variant)?;
        timing.build = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let (basis, cached) = self.basis(&problem)?;
        timing.discover = t.elapsed().as_secs_f64();
        timing.discover_cached = cached;

        let t = Instant::now();
        let instance = basis.reduced_instance(&problem);
        let solution = solve(&instance, &self.options.sdp);
        let x = basis.expand(&solution.x);
        timing.sdp = t.elapsed().as_secs_f64();
        Ok(Relaxation {
            problem,
            basis,
            instance,
            solution,
            x,
            timing,
        })
    }

    /// Rank-one primal `ξξᵀ` from the locally refined extraction, paired with
    /// the better of the solver's dual and its stationary correction. The
    /// result is `Optimal` only when that pair closes the gap to tolerance.
    ///
    /// With squared-range residuals the cost matrix is many orders of
    /// magnitude larger than its optimum, so the interior-point primal
    /// iterate can stall short of the target gap while the rank-one point
    /// still evaluates the objective accurately.
    pub fn polish(&self, scenario: &Scenario, relaxation: &Relaxation, start: &Estimate) -> Option<SdpSolution> {
        let sol = &relaxation.solution;
        let layout = &relaxation.problem.layout;
        let model = if layout.variant().is_first_order() {
            LiftModel::FirstOrder
        } else {
            LiftModel::Exact
        };
        let opts = LmOptions { model, ..self.options.lm };
        let refined = lm_solve(scenario, start, &opts).state;
        let x = lift(layout, &refined, model).ok()?;
        let xi = relaxation.basis.span.transpose() * x;
        let inst = &relaxation.instance;
        let ax = DVector::from_iterator(inst.m(), inst.a.iter().map(|a| a.quad_form(&xi)));
        let primal_feas = (ax - &inst.b).norm() / (1.0 + inst.b.norm());
        let primal_obj = xi.dot(&(&inst.c * &xi));
        let mut duals = vec![(sol.y.clone(), dual_slack(inst, &sol.y))];
        duals.extend(stationary_dual(inst, &xi, &sol.y));
        let (y, z) = duals
            .into_iter()
            .filter(|(_, z)| min_eigenvalue(z) >= -PSD_TOL)
            .max_by(|(a, _), (b, _)| inst.b.dot(a).total_cmp(&inst.b.dot(b)))?;
        let dual_obj = inst.b.dot(&y);
        let residuals = Residuals {
            primal_feas,
            dual_feas: sol.residuals.dual_feas,
            rel_gap: (primal_obj - dual_obj).abs() / primal_obj.abs().max(1.0),
        };
        let tol = self.options.sdp.tol;
        let status = if primal_feas <= tol && residuals.rel_gap <= tol {
            SdpStatus::Optimal
        } else if sol.status == SdpStatus::NumericalFailure {
            sol.status
        } else {
            SdpStatus::MaxIter
        };
        Some(SdpSolution {
            x: &xi * xi.transpose(),
            y,
            z,
            primal_obj,
            dual_obj,
            status,
            residuals,
            ..sol.clone()
        })
    }

    pub fn solve_sdp(&self, scenario: &Scenario) -> Result<EstimateReport, PipelineError> {
        let relaxation = self.relax(scenario)?;
        let mut timing = relaxation.timing;
        let problem = &relaxation.problem;
        let variant = problem.layout.variant();
        let t = Instant::now();
        check_solution(&relaxation.solution)?;
        let ex = extract(&relaxation.x, &problem.layout)?;
        let mut polished = false;
        let ipm = &relaxation.solution;
        let solution = match self.polish(scenario, &relaxation, &ex.estimate) {
            Some(p) if p.residuals.primal_feas <= self.options.sdp.tol && (ipm.status != SdpStatus::Optimal || p.status == SdpStatus::Optimal) && p.primal_obj <= ipm.primal_obj => {
                polished = true;
                p
            }
            _ => ipm.clone(),
        };
        let cost_at_extraction = relaxed_cost(scenario, variant, &ex.estimate);
        let certificate = certify(&solution, ex.e1, ex.e2, scenario.mode, Some(cost_at_extraction));
        let refine = self.options.refine.unwrap_or(scenario.mode.is_dynamic());
        let (estimate, lm_iterations) = if refine {
            let rep = lm_solve(scenario, &ex.estimate, &self.options.lm);
            (rep.state, rep.iterations)
        } else {
            (ex.estimate.clone(), 0)
        };
        timing.extract = t.elapsed().as_secs_f64();
        let min_dual_slack = min_eigenvalue(&solution.z);
        let report = EstimateReport {
            method: Method::Sdp,
            mode: scenario.mode,
            variant: Some(variant),
            map_cost: scenario.map_cost(&estimate),
            relaxed_cost: relaxed_cost(scenario, variant, &estimate),
            estimate,
            extracted: Some(ex.estimate),
            certificate: Some(certificate),
            position_error: None,
            rotation_error: None,
            sdp: Some(SdpSummary {
                status: solution.status,
                polished,
                primal_obj: solution.primal_obj,
                dual_obj: solution.dual_obj,
                iterations: solution.iterations,
                primal_feas: solution.residuals.primal_feas,
                dual_feas: solution.residuals.dual_feas,
                rel_gap: solution.residuals.rel_gap,
                min_dual_slack,
                state_dim: problem.n(),
                reduced_dim: relaxation.basis.q(),
                constraints: solution.y.len(),
                dropped: solution.dropped,
            }),
            lm_iterations,
            timing,
        };
        Ok(with_errors(report, scenario))
    }

    /// LM from a random initial state drawn with `seed`.
    pub fn solve_ls(&self, scenario: &Scenario, seed: u64) -> EstimateReport {
        self.solve_ls_from(scenario, &random_init(scenario, seed))
    }

    pub fn solve_ls_from(&self, scenario: &Scenario, init: &Estimate) -> EstimateReport {
        let t = Instant::now();
        let rep = lm_solve(scenario, init, &self.options.lm);
        let timing = Timing {
            extract: t.elapsed().as_secs_f64(),
            ..Timing::default()
        };
        let variant = Variant::for_mode(scenario.mode, self.options.exact_dynamic);
        let report = EstimateReport {
            method: Method::Ls,
            mode: scenario.mode,
            variant: None,
            map_cost: rep.final_cost,
            relaxed_cost: relaxed_cost(scenario, variant, &rep.state),
            estimate: rep.state,
            extracted: None,
            certificate: None,
            position_error: None,
            rotation_error: None,
            sdp: None,
            lm_iterations: rep.iterations,
            timing,
        };
        with_errors(report, scenario)
    }
}
