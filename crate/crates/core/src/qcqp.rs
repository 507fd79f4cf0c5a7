//! Lifted state layouts and QCQP construction for every problem variant.
//!
//! The lifted state is `x = [p̃, z per epoch | rotation | position | twist | h]`
//! where `p̃` is a world-frame tag position, `z = ‖p̃‖²` and `h` the
//! homogenization scalar. Every constraint is written as a homogeneous
//! quadratic `xᵀAx = 0`; linear relations are coupled with `h`.

use crate::lie::{exp_se, skew, Twist};
use crate::scenario::{Estimate, Mode, Scenario};
use crate::sdp::sym::{write_coordinates, SparseSym, SymMat};
use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};
use std::fmt;
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QcqpError {
    #[error("variant {variant} cannot be built from a {mode:?} scenario")]
    ModeMismatch { variant: Variant, mode: Mode },
    #[error("estimate does not fit the layout: {0}")]
    EstimateMismatch(String),
    #[error("scenario has no measurements")]
    NoMeasurements,
}

/// Problem family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Static,
    /// Planar constant velocity with the first-order motion model.
    Dynamic,
    /// Yaw-only constant velocity with the first-order motion model.
    Dynamic25,
    /// Planar constant velocity with chained exact poses.
    DynamicExact,
}

impl Variant {
    pub fn for_mode(mode: Mode, exact: bool) -> Variant {
        match (mode, exact) {
            (Mode::Static, _) => Variant::Static,
            (Mode::Dynamic, false) => Variant::Dynamic,
            (Mode::Dynamic, true) => Variant::DynamicExact,
            (Mode::Dynamic25, _) => Variant::Dynamic25,
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Variant::Static => Mode::Static,
            Variant::Dynamic | Variant::DynamicExact => Mode::Dynamic,
            Variant::Dynamic25 => Mode::Dynamic25,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Static => "static",
            Variant::Dynamic => "dynamic",
            Variant::Dynamic25 => "dynamic25",
            Variant::DynamicExact => "dynamic_exact",
        }
    }

    pub fn is_first_order(self) -> bool {
        matches!(self, Variant::Dynamic | Variant::Dynamic25)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A lifted tag position: step `k` (1-based), tag `l`, elapsed time `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epoch {
    pub k: usize,
    pub l: usize,
    pub c: f64,
}

/// Named contiguous range of the lifted state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// Linear form `Σ coef · x[idx]`.
type Lin = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct StateLayout {
    variant: Variant,
    dimension: usize,
    tags: Vec<DVector<f64>>,
    epochs: Vec<Epoch>,
    /// `(rotation, position)` offsets of every pose block; one for the
    /// first-order variants, one per step for the exact variant.
    poses: Vec<(usize, usize)>,
    angular: Option<usize>,
    linear: Option<usize>,
    delta: Option<(usize, usize)>,
    dt: f64,
    n: usize,
}

impl StateLayout {
    pub fn new(scenario: &Scenario, variant: Variant) -> Result<StateLayout, QcqpError> {
        let mode_ok = match variant {
            Variant::Static => scenario.mode == Mode::Static,
            Variant::Dynamic | Variant::DynamicExact => scenario.mode == Mode::Dynamic && scenario.dimension == 2,
            Variant::Dynamic25 => scenario.mode == Mode::Dynamic25 && scenario.dimension == 3,
        };
        if !mode_ok {
            return Err(QcqpError::ModeMismatch {
                variant,
                mode: scenario.mode,
            });
        }
        let mut epochs: Vec<Epoch> = match variant {
            Variant::Static => (0..scenario.tags.len()).map(|l| Epoch { k: 1, l, c: 0.0 }).collect(),
            _ => {
                if scenario.measurements.is_empty() {
                    return Err(QcqpError::NoMeasurements);
                }
                scenario
                    .measurements
                    .iter()
                    .map(|m| Epoch {
                        k: m.k,
                        l: m.l,
                        c: scenario.elapsed(m.k),
                    })
                    .collect()
            }
        };
        epochs.sort_by_key(|e| (e.k, e.l));
        epochs.dedup_by_key(|e| (e.k, e.l));

        let d = scenario.dimension;
        let rot_len = if variant == Variant::Dynamic25 { 2 } else { d * d };
        let mut n = epochs.len() * (d + 1);
        let mut poses = Vec::new();
        let n_pose_blocks = if variant == Variant::DynamicExact { scenario.steps() } else { 1 };
        for _ in 0..n_pose_blocks {
            poses.push((n, n + rot_len));
            n += rot_len + d;
        }
        let (mut angular, mut linear, mut delta) = (None, None, None);
        match variant {
            Variant::Dynamic | Variant::Dynamic25 => {
                angular = Some(n);
                n += if variant == Variant::Dynamic25 { 1 } else { crate::lie::angular_dim(d) };
                linear = Some(n);
                n += d;
            }
            Variant::DynamicExact => {
                delta = Some((n, n + rot_len));
                n += rot_len + d;
            }
            Variant::Static => {}
        }
        n += 1;
        Ok(StateLayout {
            variant,
            dimension: d,
            tags: scenario.tags.clone(),
            epochs,
            poses,
            angular,
            linear,
            delta,
            dt: scenario.window.map(|w| w.dt_r).unwrap_or(0.0),
            n,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Index of the homogenization variable.
    pub fn h(&self) -> usize {
        self.n - 1
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    pub fn tags(&self) -> &[DVector<f64>] {
        &self.tags
    }

    pub fn epoch_index(&self, k: usize, l: usize) -> Option<usize> {
        self.epochs.iter().position(|e| e.k == k && e.l == l)
    }

    /// Offset of `p̃` for epoch `e`; `z` follows at `+ d`.
    pub fn tag_offset(&self, e: usize) -> usize {
        e * (self.dimension + 1)
    }

    pub fn norm_offset(&self, e: usize) -> usize {
        self.tag_offset(e) + self.dimension
    }

    /// `(rotation, position)` offsets of the first pose.
    pub fn pose_offsets(&self) -> (usize, usize) {
        self.poses[0]
    }

    pub fn pose_blocks(&self) -> &[(usize, usize)] {
        &self.poses
    }

    pub fn angular_offset(&self) -> Option<usize> {
        self.angular
    }

    pub fn linear_offset(&self) -> Option<usize> {
        self.linear
    }

    pub fn delta_offsets(&self) -> Option<(usize, usize)> {
        self.delta
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn rotation_len(&self) -> usize {
        if self.variant == Variant::Dynamic25 {
            2
        } else {
            self.dimension * self.dimension
        }
    }

    pub fn slots(&self) -> Vec<Slot> {
        let d = self.dimension;
        let mut out = Vec::new();
        let mut push = |name: String, offset: usize, len: usize| out.push(Slot { name, offset, len });
        for (e, ep) in self.epochs.iter().enumerate() {
            push(format!("p_tilde[k={},l={}]", ep.k, ep.l), self.tag_offset(e), d);
            push(format!("z[k={},l={}]", ep.k, ep.l), self.norm_offset(e), 1);
        }
        for (i, &(r, p)) in self.poses.iter().enumerate() {
            push(format!("R[{}]", i + 1), r, self.rotation_len());
            push(format!("p[{}]", i + 1), p, d);
        }
        if let Some(a) = self.angular {
            push("omega".into(), a, self.linear.unwrap_or(self.n - 1) - a);
        }
        if let Some(v) = self.linear {
            push("v".into(), v, d);
        }
        if let Some((r, p)) = self.delta {
            push("delta_R".into(), r, self.rotation_len());
            push("delta_p".into(), p, d);
        }
        push("h".into(), self.h(), 1);
        out
    }

    /// Rotation entry `R[i][j]` of the block at `offset` as a linear form.
    fn rot(&self, offset: usize, i: usize, j: usize) -> Lin {
        if self.variant == Variant::Dynamic25 {
            // [[c, -s, 0], [s, c, 0], [0, 0, 1]]
            match (i, j) {
                (0, 0) | (1, 1) => vec![(offset, 1.0)],
                (0, 1) => vec![(offset + 1, -1.0)],
                (1, 0) => vec![(offset + 1, 1.0)],
                (2, 2) => vec![(self.h(), 1.0)],
                _ => vec![],
            }
        } else {
            vec![(offset + j * self.dimension + i, 1.0)]
        }
    }

    /// Component `j` of `ω^ p` for a body-frame point `p`, linear in the angular slot.
    fn omega_hat_times(&self, p: &DVector<f64>, j: usize) -> Lin {
        let a = self.angular.expect("first-order layouts carry an angular slot");
        match j {
            0 => vec![(a, -p[1])],
            1 => vec![(a, p[0])],
            _ => vec![],
        }
    }

    /// Stable digest of everything the constraint set depends on.
    pub fn hash_hex(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.variant.name().as_bytes());
        h.update((self.dimension as u64).to_le_bytes());
        h.update((self.n as u64).to_le_bytes());
        for t in &self.tags {
            for x in t.iter() {
                h.update(x.to_bits().to_le_bytes());
            }
        }
        for e in &self.epochs {
            h.update((e.k as u64).to_le_bytes());
            h.update((e.l as u64).to_le_bytes());
            h.update(e.c.to_bits().to_le_bytes());
        }
        h.update(self.dt.to_bits().to_le_bytes());
        hex::encode(&h.finalize()[..16])
    }
}

/// Accumulates `Σ coef · x_a x_b` into a symmetric matrix.
struct Quad {
    n: usize,
    terms: Vec<(usize, usize, f64)>,
}

impl Quad {
    fn new(n: usize) -> Self {
        Quad { n, terms: Vec::new() }
    }

    fn add(&mut self, a: usize, b: usize, coef: f64) {
        if coef != 0.0 {
            let v = if a == b { coef } else { 0.5 * coef };
            self.terms.push((a, b, v));
        }
    }

    fn add_lin(&mut self, u: &[(usize, f64)], v: &[(usize, f64)], coef: f64) {
        for &(a, ca) in u {
            for &(b, cb) in v {
                self.add(a, b, coef * ca * cb);
            }
        }
    }

    fn build(self) -> SparseSym {
        SparseSym::from_triplets(self.n, self.terms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Homogenization,
    LeverArm,
    NormLink,
    Orthonormality,
    Handedness,
    Motion,
    Chaining,
    Redundant,
}

impl ConstraintKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Homogenization => "homogenization",
            ConstraintKind::LeverArm => "lever-arm",
            ConstraintKind::NormLink => "norm-link",
            ConstraintKind::Orthonormality => "orthonormality",
            ConstraintKind::Handedness => "handedness",
            ConstraintKind::Motion => "motion",
            ConstraintKind::Chaining => "chaining",
            ConstraintKind::Redundant => "redundant",
        }
    }
}

/// `xᵀ A x = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub matrix: SymMat,
    pub rhs: f64,
    pub kind: ConstraintKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BuildWarning {
    /// Fewer measurements than unknown degrees of freedom.
    InsufficientMeasurements { measurements: usize, dof: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcqpProblem {
    pub layout: StateLayout,
    pub cost: SparseSym,
    /// Solver input; the homogenization constraint comes first.
    pub constraints: Vec<Constraint>,
    /// Hand-coded constraints kept for verification once a discovered basis
    /// replaces them in `constraints`.
    pub verification: Vec<Constraint>,
    pub warnings: Vec<BuildWarning>,
}

impl QcqpProblem {
    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn homogenization(&self) -> &Constraint {
        &self.constraints[0]
    }

    /// Hand-coded constraints, whether or not they are the solver input.
    pub fn hand_coded(&self) -> &[Constraint] {
        if self.verification.is_empty() {
            &self.constraints
        } else {
            &self.verification
        }
    }

    pub fn count(&self, kind: ConstraintKind) -> usize {
        self.constraints.iter().filter(|c| c.kind == kind).count()
    }

    /// `xᵀ Q x`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        self.cost.quad_form(x)
    }

    /// Largest `|xᵀAx − b|` over the solver constraints.
    pub fn max_residual(&self, x: &DVector<f64>) -> f64 {
        self.constraints
            .iter()
            .map(|c| (c.matrix.quad_form(x) - c.rhs).abs())
            .fold(0.0, f64::max)
    }

    /// Writes cost and constraints in coordinate text form.
    pub fn dump<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "# layout {} variant {} n {}", self.layout.hash_hex(), self.layout.variant, self.n())?;
        for s in self.layout.slots() {
            writeln!(out, "# slot {} {} {}", s.name, s.offset, s.len)?;
        }
        writeln!(out, "# cost")?;
        write_coordinates(out, &SymMat::Sparse(self.cost.clone()))?;
        for (i, c) in self.constraints.iter().enumerate() {
            writeln!(out, "# constraint {i} {} rhs {:.16e}", c.kind.name(), c.rhs)?;
            write_coordinates(out, &c.matrix)?;
        }
        Ok(())
    }
}

/// Builds the QCQP for `variant` from a scenario and its measurements.
pub fn build(scenario: &Scenario, variant: Variant) -> Result<QcqpProblem, QcqpError> {
    if scenario.measurements.is_empty() {
        return Err(QcqpError::NoMeasurements);
    }
    let layout = StateLayout::new(scenario, variant)?;
    let cost = cost_matrix(&layout, scenario);
    let mut constraints = vec![homogenization(&layout)];
    match variant {
        Variant::Static => {
            let (r, p) = layout.pose_offsets();
            for e in 0..layout.epochs.len() {
                lever_arm(&layout, e, r, p, &mut constraints);
            }
            norm_links(&layout, &mut constraints);
            rotation_constraints(&layout, r, &mut constraints);
        }
        Variant::Dynamic | Variant::Dynamic25 => {
            for e in 0..layout.epochs.len() {
                motion(&layout, e, &mut constraints);
            }
            norm_links(&layout, &mut constraints);
            rotation_constraints(&layout, layout.pose_offsets().0, &mut constraints);
        }
        Variant::DynamicExact => {
            for e in 0..layout.epochs.len() {
                let (r, p) = layout.poses[layout.epochs[e].k - 1];
                lever_arm(&layout, e, r, p, &mut constraints);
            }
            norm_links(&layout, &mut constraints);
            for &(r, _) in &layout.poses {
                rotation_constraints(&layout, r, &mut constraints);
            }
            let (dr, _) = layout.delta.expect("exact layout has a delta block");
            rotation_constraints(&layout, dr, &mut constraints);
            chaining(&layout, &mut constraints);
        }
    }
    let dof = match variant {
        Variant::Static => layout.dimension * (layout.dimension + 1) / 2,
        Variant::Dynamic | Variant::DynamicExact => 6,
        Variant::Dynamic25 => 8,
    };
    let mut warnings = Vec::new();
    if scenario.measurements.len() < dof {
        warnings.push(BuildWarning::InsufficientMeasurements {
            measurements: scenario.measurements.len(),
            dof,
        });
    }
    Ok(QcqpProblem {
        layout,
        cost,
        constraints,
        verification: Vec::new(),
        warnings,
    })
}

pub fn build_static(scenario: &Scenario) -> Result<QcqpProblem, QcqpError> {
    build(scenario, Variant::Static)
}

/// First-order motion model; planar or yaw-only depending on the scenario mode.
pub fn build_dynamic(scenario: &Scenario) -> Result<QcqpProblem, QcqpError> {
    let variant = if scenario.mode == Mode::Dynamic25 {
        Variant::Dynamic25
    } else {
        Variant::Dynamic
    };
    build(scenario, variant)
}

pub fn build_dynamic_exact(scenario: &Scenario) -> Result<QcqpProblem, QcqpError> {
    build(scenario, Variant::DynamicExact)
}

fn push(layout: &StateLayout, q: Quad, kind: ConstraintKind, out: &mut Vec<Constraint>) {
    debug_assert_eq!(q.n, layout.n());
    out.push(Constraint {
        matrix: SymMat::Sparse(q.build()),
        rhs: 0.0,
        kind,
    });
}

fn homogenization(layout: &StateLayout) -> Constraint {
    let mut q = Quad::new(layout.n());
    q.add(layout.h(), layout.h(), 1.0);
    Constraint {
        matrix: SymMat::Sparse(q.build()),
        rhs: 1.0,
        kind: ConstraintKind::Homogenization,
    }
}

/// `h (p̃ − R p_u − p) = 0` componentwise.
fn lever_arm(layout: &StateLayout, e: usize, r: usize, p: usize, out: &mut Vec<Constraint>) {
    let d = layout.dimension;
    let h = layout.h();
    let tag = &layout.tags[layout.epochs[e].l];
    let t = layout.tag_offset(e);
    for i in 0..d {
        let mut q = Quad::new(layout.n());
        q.add(t + i, h, 1.0);
        q.add(p + i, h, -1.0);
        for j in 0..d {
            q.add_lin(&layout.rot(r, i, j), &[(h, 1.0)], -tag[j]);
        }
        push(layout, q, ConstraintKind::LeverArm, out);
    }
}

/// `h p̃ − h R p_u − h p − c R (ω^ p_u + v) = 0` componentwise.
fn motion(layout: &StateLayout, e: usize, out: &mut Vec<Constraint>) {
    let d = layout.dimension;
    let h = layout.h();
    let ep = layout.epochs[e];
    let tag = &layout.tags[ep.l];
    let t = layout.tag_offset(e);
    let (r, p) = layout.pose_offsets();
    let v = layout.linear.expect("first-order layouts carry a linear slot");
    for i in 0..d {
        let mut q = Quad::new(layout.n());
        q.add(t + i, h, 1.0);
        q.add(p + i, h, -1.0);
        for j in 0..d {
            let rij = layout.rot(r, i, j);
            q.add_lin(&rij, &[(h, 1.0)], -tag[j]);
            q.add_lin(&rij, &layout.omega_hat_times(tag, j), -ep.c);
            q.add_lin(&rij, &[(v + j, 1.0)], -ep.c);
        }
        push(layout, q, ConstraintKind::Motion, out);
    }
}

/// `‖p̃‖² − z h = 0`.
fn norm_links(layout: &StateLayout, out: &mut Vec<Constraint>) {
    let h = layout.h();
    for e in 0..layout.epochs.len() {
        let t = layout.tag_offset(e);
        let mut q = Quad::new(layout.n());
        for i in 0..layout.dimension {
            q.add(t + i, t + i, 1.0);
        }
        q.add(layout.norm_offset(e), h, -1.0);
        push(layout, q, ConstraintKind::NormLink, out);
    }
}

/// Orthonormality (columns and rows) plus handedness of the rotation block at `r`.
fn rotation_constraints(layout: &StateLayout, r: usize, out: &mut Vec<Constraint>) {
    let h = layout.h();
    if layout.variant == Variant::Dynamic25 {
        let mut q = Quad::new(layout.n());
        q.add(r, r, 1.0);
        q.add(r + 1, r + 1, 1.0);
        q.add(h, h, -1.0);
        push(layout, q, ConstraintKind::Orthonormality, out);
        return;
    }
    let d = layout.dimension;
    let at = |i: usize, j: usize| layout.rot(r, i, j);
    for transpose in [false, true] {
        for a in 0..d {
            for b in a..d {
                let mut q = Quad::new(layout.n());
                for k in 0..d {
                    let (u, v) = if transpose { (at(a, k), at(b, k)) } else { (at(k, a), at(k, b)) };
                    q.add_lin(&u, &v, 1.0);
                }
                if a == b {
                    q.add(h, h, -1.0);
                }
                push(layout, q, ConstraintKind::Orthonormality, out);
            }
        }
    }
    if d == 2 {
        // r1 − r4 = 0 and r2 + r3 = 0 (row-major naming)
        for (s, (i, j), (k, l)) in [(-1.0, (0, 0), (1, 1)), (1.0, (0, 1), (1, 0))] {
            let mut q = Quad::new(layout.n());
            q.add_lin(&at(i, j), &[(h, 1.0)], 1.0);
            q.add_lin(&at(k, l), &[(h, 1.0)], s);
            push(layout, q, ConstraintKind::Handedness, out);
        }
    } else {
        // c_i × c_j = c_k for cyclic (i, j, k)
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            for m in 0..3 {
                let (m1, m2) = ((m + 1) % 3, (m + 2) % 3);
                let mut q = Quad::new(layout.n());
                q.add_lin(&at(m1, i), &at(m2, j), 1.0);
                q.add_lin(&at(m2, i), &at(m1, j), -1.0);
                q.add_lin(&at(m, k), &[(h, 1.0)], -1.0);
                push(layout, q, ConstraintKind::Handedness, out);
            }
        }
    }
}

/// `T_k = T_{k−1} δT` for consecutive pose blocks.
fn chaining(layout: &StateLayout, out: &mut Vec<Constraint>) {
    let d = layout.dimension;
    let h = layout.h();
    let (dr, dp) = layout.delta.expect("exact layout has a delta block");
    for w in layout.poses.windows(2) {
        let ((r0, p0), (r1, p1)) = (w[0], w[1]);
        for i in 0..d {
            for j in 0..d {
                let mut q = Quad::new(layout.n());
                q.add_lin(&layout.rot(r1, i, j), &[(h, 1.0)], 1.0);
                for m in 0..d {
                    q.add_lin(&layout.rot(r0, i, m), &layout.rot(dr, m, j), -1.0);
                }
                push(layout, q, ConstraintKind::Chaining, out);
            }
        }
        for i in 0..d {
            let mut q = Quad::new(layout.n());
            q.add(p1 + i, h, 1.0);
            q.add(p0 + i, h, -1.0);
            for m in 0..d {
                q.add_lin(&layout.rot(r0, i, m), &[(dp + m, 1.0)], -1.0);
            }
            push(layout, q, ConstraintKind::Chaining, out);
        }
    }
}

/// `Q = w Σ a aᵀ`, `aᵀx = r̃² − ‖p_a − p̃‖²`.
fn cost_matrix(layout: &StateLayout, scenario: &Scenario) -> SparseSym {
    let w = scenario.cost_weight();
    let h = layout.h();
    let mut q = Quad::new(layout.n());
    for m in &scenario.measurements {
        let e = layout
            .epoch_index(if layout.variant == Variant::Static { 1 } else { m.k }, m.l)
            .expect("every measurement has a lifted epoch");
        let anchor = &scenario.anchors[m.j];
        let t = layout.tag_offset(e);
        let mut a: Lin = (0..layout.dimension).map(|i| (t + i, 2.0 * anchor[i])).collect();
        a.push((layout.norm_offset(e), -1.0));
        a.push((h, m.value - anchor.norm_squared()));
        q.add_lin(&a, &a, w);
    }
    q.build()
}

/// How lifted tag positions are generated from a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftModel {
    /// `p̃ = K T(t_k) p̄` with the exact exponential.
    Exact,
    /// `p̃` from the first-order motion model.
    FirstOrder,
}

/// Lifted state with exact tag positions.
pub fn lift_state(layout: &StateLayout, est: &Estimate) -> Result<DVector<f64>, QcqpError> {
    lift(layout, est, LiftModel::Exact)
}

pub fn lift(layout: &StateLayout, est: &Estimate, model: LiftModel) -> Result<DVector<f64>, QcqpError> {
    let d = layout.dimension;
    if est.pose.dim() != d {
        return Err(QcqpError::EstimateMismatch(format!("pose has dimension {}", est.pose.dim())));
    }
    let dynamic = layout.variant != Variant::Static;
    let twist = match (&est.twist, dynamic) {
        (Some(t), true) if t.dim() == d => t.clone(),
        (_, true) => return Err(QcqpError::EstimateMismatch("dynamic layout needs a twist".into())),
        (_, false) => Twist::zero(d),
    };
    let mut x = DVector::zeros(layout.n());
    let r1 = est.pose.rotation.matrix();
    let p1 = &est.pose.translation;
    for (e, ep) in layout.epochs.iter().enumerate() {
        let tag = &layout.tags[ep.l];
        let w = match model {
            LiftModel::FirstOrder if layout.variant.is_first_order() => {
                r1 * (tag + (skew(&twist.angular) * tag + &twist.linear) * ep.c) + p1
            }
            _ => est.pose.compose(&exp_se(&twist, ep.c)).transform_point(tag),
        };
        let t = layout.tag_offset(e);
        x.rows_mut(t, d).copy_from(&w);
        x[layout.norm_offset(e)] = w.norm_squared();
    }
    let write_rotation = |x: &mut DVector<f64>, offset: usize, r: &DMatrix<f64>| {
        if layout.variant == Variant::Dynamic25 {
            let yaw = r[(1, 0)].atan2(r[(0, 0)]);
            x[offset] = yaw.cos();
            x[offset + 1] = yaw.sin();
        } else {
            for j in 0..d {
                for i in 0..d {
                    x[offset + j * d + i] = r[(i, j)];
                }
            }
        }
    };
    if layout.variant == Variant::DynamicExact {
        for (k, &(ro, po)) in layout.poses.iter().enumerate() {
            let pose = est.pose.compose(&exp_se(&twist, k as f64 * layout.dt));
            write_rotation(&mut x, ro, pose.rotation.matrix());
            x.rows_mut(po, d).copy_from(&pose.translation);
        }
        let (dr, dp) = layout.delta.expect("exact layout has a delta block");
        let delta = exp_se(&twist, layout.dt);
        write_rotation(&mut x, dr, delta.rotation.matrix());
        x.rows_mut(dp, d).copy_from(&delta.translation);
    } else {
        let (ro, po) = layout.pose_offsets();
        write_rotation(&mut x, ro, r1);
        x.rows_mut(po, d).copy_from(p1);
    }
    if let (Some(a), Some(v)) = (layout.angular, layout.linear) {
        if layout.variant == Variant::Dynamic25 {
            x[a] = twist.angular[2];
        } else {
            x.rows_mut(a, twist.angular.len()).copy_from(&twist.angular);
        }
        x.rows_mut(v, d).copy_from(&twist.linear);
    }
    x[layout.h()] = 1.0;
    Ok(x)
}
