//! Nonconvex QCQPs with LMI constraints, their enhanced semidefinite
//! relaxation, and the inverse Wulff instance built on top of them.
//!
//! The generic problem is
//!
//! ```text
//!   minimize    xᵀP₀x + 2q₀ᵀx + r₀
//!   subject to  xᵀP_l x + 2q_lᵀx + r_l ≤ 0     (P_l ⪰ 0)
//!               Ax = b
//!               LMIs in x
//! ```
//!
//! and the relaxation lifts `xxᵀ` to `X` inside `T = [[X, x], [xᵀ, 1]] ⪰ 0`,
//! adding the redundant constraint `AX = bxᵀ` (or its trace
//! `tr(AᵀAX) = bᵀAx`). Without it the Wulff relaxation is unbounded below.

use std::ops::Range;
use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anisotropy::{subdiagonal_sum_forms, AnisotropyError, AnisotropyFn, ConeCertificate, ConeMethod};
use crate::curve::{CurveError, LengthSpectrum, PlanarCurve};
use crate::linalg::{
    hermitian_from_real_block, is_hermitian, real_embedding, symmetric_min_eigenvalue,
};
use crate::sdp::{self, IpmOptions, LinearForm, SdpError, SdpSolution, SdpStandardForm, SolveStatus};

#[derive(Debug, Error)]
pub enum RelaxationError {
    #[error("need at least 2 Fourier modes, got {0}")]
    TooFewModes(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian: {0}")]
    NotHermitian(String),
    #[error("quadratic constraint {index} has indefinite matrix (min eigenvalue {min_eig:e})")]
    IndefiniteConstraint { index: usize, min_eig: f64 },
    #[error("rho must be positive, got {0}")]
    InvalidRho(f64),
    #[error("solver stopped with status {status:?} after {iterations} iterations")]
    SolverFailed {
        status: SolveStatus,
        iterations: usize,
        diagnostics: Box<Option<Diagnostics>>,
    },
    #[error("extracted anisotropy leaves the cone: min sigma {min_sigma:e}, min stiffness {min_stiffness:e}")]
    OutOfCone { min_sigma: f64, min_stiffness: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Anisotropy(#[from] AnisotropyError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

/// `xᵀPx + 2qᵀx + r ≤ 0` with `P ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadConstraint {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub r: f64,
}

/// Linear matrix inequality in `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Lmi {
    /// `H₀ + Σ_j x_j H_j ⪰ 0` with Hermitian `H_j`.
    Affine {
        h0: DMatrix<Complex64>,
        h: Vec<DMatrix<Complex64>>,
    },
    /// There is a Hermitian `F ⪰ 0` of order `dim` with
    /// `Σ_p F_{p+k,p} = m_k (x[re[k]] + i x[im[k]])` for `k < dim`
    /// (a missing imaginary index means a real right-hand side).
    SubdiagonalSums {
        dim: usize,
        multipliers: Vec<f64>,
        re: Vec<usize>,
        im: Vec<Option<usize>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QcqpProblem {
    pub p0: DMatrix<f64>,
    pub q0: DVector<f64>,
    pub r0: f64,
    pub quad: Vec<QuadConstraint>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub lmis: Vec<Lmi>,
}

impl QcqpProblem {
    /// Problem with objective `xᵀP₀x` and equalities `Ax = b` only.
    pub fn new(p0: DMatrix<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Self {
        let n = p0.nrows();
        Self {
            p0,
            q0: DVector::zeros(n),
            r0: 0.0,
            quad: Vec::new(),
            a,
            b,
            lmis: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.p0.nrows()
    }

    pub fn validate(&self) -> Result<(), RelaxationError> {
        let n = self.dim();
        let dim_err = |s: String| Err(RelaxationError::Dimension(s));
        if self.p0.ncols() != n {
            return dim_err(format!("P0 is {}x{}", n, self.p0.ncols()));
        }
        if (&self.p0 - self.p0.transpose()).amax() > 1e-12 * (1.0 + self.p0.amax()) {
            return dim_err("P0 is not symmetric".into());
        }
        if self.q0.len() != n {
            return dim_err(format!("q0 has {} entries, expected {n}", self.q0.len()));
        }
        if self.a.ncols() != n || self.a.nrows() != self.b.len() {
            return dim_err(format!(
                "A is {}x{}, b has {} entries, n = {n}",
                self.a.nrows(),
                self.a.ncols(),
                self.b.len()
            ));
        }
        for (index, qc) in self.quad.iter().enumerate() {
            if qc.p.nrows() != n || qc.p.ncols() != n || qc.q.len() != n {
                return dim_err(format!("quadratic constraint {index} has wrong shape"));
            }
            let min_eig = symmetric_min_eigenvalue(&qc.p);
            if min_eig < -1e-10 {
                return Err(RelaxationError::IndefiniteConstraint { index, min_eig });
            }
        }
        for (l, lmi) in self.lmis.iter().enumerate() {
            match lmi {
                Lmi::Affine { h0, h } => {
                    if h.len() != n {
                        return dim_err(format!("LMI {l} has {} coefficient matrices, n = {n}", h.len()));
                    }
                    for m in std::iter::once(h0).chain(h) {
                        if m.nrows() != h0.nrows() || m.ncols() != h0.nrows() {
                            return dim_err(format!("LMI {l} matrices differ in size"));
                        }
                        if !is_hermitian(m, 1e-12) {
                            return Err(RelaxationError::NotHermitian(format!("LMI {l}")));
                        }
                    }
                }
                Lmi::SubdiagonalSums {
                    dim,
                    multipliers,
                    re,
                    im,
                } => {
                    if multipliers.len() != *dim || re.len() != *dim || im.len() != *dim {
                        return dim_err(format!("LMI {l} coupling arrays must have length {dim}"));
                    }
                    if re.iter().chain(im.iter().flatten()).any(|&j| j >= n) {
                        return dim_err(format!("LMI {l} references a variable beyond n = {n}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.p0 * x)[(0, 0)] + 2.0 * self.q0.dot(x) + self.r0
    }

    /// Largest violation of the quadratic constraints at `x` (≤ 0 when feasible).
    pub fn quad_violation(&self, x: &DVector<f64>) -> f64 {
        self.quad
            .iter()
            .map(|c| (x.transpose() * &c.p * x)[(0, 0)] + 2.0 * c.q.dot(x) + c.r)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest eigenvalue of each affine LMI at `x`.
    pub fn affine_lmi_min_eig(&self, x: &DVector<f64>) -> Vec<f64> {
        self.lmis
            .iter()
            .filter_map(|l| match l {
                Lmi::Affine { h0, h } => {
                    let mut m = h0.clone();
                    for (hj, xj) in h.iter().zip(x.iter()) {
                        m += hj * Complex64::new(*xj, 0.0);
                    }
                    Some(crate::linalg::hermitian_min_eigenvalue(&m))
                }
                Lmi::SubdiagonalSums { .. } => None,
            })
            .collect()
    }
}

/// Real symmetric embedding `[[Re H, −Im H], [Im H, Re H]]` of a Hermitian matrix.
pub fn complex_to_real(h: &DMatrix<Complex64>) -> Result<DMatrix<f64>, RelaxationError> {
    if !is_hermitian(h, 1e-12) {
        return Err(RelaxationError::NotHermitian("complex_to_real input".into()));
    }
    Ok(real_embedding(h))
}

/// `λ_min(P₀ + ρAᵀA)`; nonnegative values certify assumption (A) with `V = ρA`.
pub fn check_assumption_a(problem: &QcqpProblem, rho: f64) -> Result<f64, RelaxationError> {
    if !(rho > 0.0) {
        return Err(RelaxationError::InvalidRho(rho));
    }
    let m = &problem.p0 + problem.a.transpose() * &problem.a * rho;
    Ok(symmetric_min_eigenvalue(&m))
}

/// `λ_min(P₀ + ½(VᵀA + AᵀV))` for an explicit multiplier matrix `V`.
pub fn check_assumption_a_with(problem: &QcqpProblem, v: &DMatrix<f64>) -> Result<f64, RelaxationError> {
    if v.shape() != problem.a.shape() {
        return Err(RelaxationError::Dimension(format!(
            "V is {:?}, A is {:?}",
            v.shape(),
            problem.a.shape()
        )));
    }
    let m = &problem.p0 + (v.transpose() * &problem.a + problem.a.transpose() * v) * 0.5;
    Ok(symmetric_min_eigenvalue(&m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationMode {
    /// `AX = bxᵀ`, m·n equalities.
    Full,
    /// `tr(AᵀAX) = bᵀAx`, one equality.
    #[default]
    Trace,
    /// No augmentation; the Wulff relaxation is then unbounded.
    None,
}

impl std::str::FromStr for AugmentationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Self::Full),
            "trace" => Ok(Self::Trace),
            "none" => Ok(Self::None),
            _ => Err(format!("unknown augmentation mode '{s}' (expected full or trace)")),
        }
    }
}

/// The lifted SDP in standard form plus the block layout.
#[derive(Debug, Clone, Serialize)]
pub struct RelaxedSdp {
    pub sdp: SdpStandardForm,
    pub mode: AugmentationMode,
    /// Number of original variables; `x` is row `n` of block 0, `X` its leading `n × n` part.
    pub n: usize,
    /// Block of each LMI (real embedding, size 2k).
    pub lmi_blocks: Vec<usize>,
    /// 1×1 slack block of each quadratic inequality.
    pub slack_blocks: Vec<usize>,
    /// Rows of `Ax = b` and of the augmentation inside `sdp.constraints`.
    pub linear_rows: Range<usize>,
    pub augmentation_rows: Range<usize>,
    /// `[A, −b]`; every feasible lifted block satisfies `[A, −b] T = 0`.
    #[serde(skip)]
    pub face: DMatrix<f64>,
}

/// `x`, `X` and the other primal blocks, in the layout of [`RelaxedSdp`].
#[derive(Debug, Clone)]
pub struct LiftedSolution {
    pub x: DVector<f64>,
    pub big_x: DMatrix<f64>,
    pub blocks: Vec<DMatrix<f64>>,
    pub objective: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Complementarity `⟨Z, S⟩` of the program actually solved.
    pub gap: f64,
    /// `‖⟨A_i, Z⟩ − b_i‖` over all constraints of the unreduced program.
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Order of the reduced lifted block, when facial reduction was used.
    pub reduced_order: Option<usize>,
    pub history: Vec<sdp::IterationRecord>,
}

impl LiftedSolution {
    /// `tr(P X) − xᵀPx`, nonnegative for PSD `P` when `X ⪰ xxᵀ`.
    pub fn lifting_gap(&self, p: &DMatrix<f64>) -> f64 {
        self.big_x.dot(p) - (self.x.transpose() * p * &self.x)[(0, 0)]
    }

    pub fn min_eig_x_minus_xxt(&self) -> f64 {
        symmetric_min_eigenvalue(&(&self.big_x - &self.x * self.x.transpose()))
    }
}

/// Lift `problem` into standard-form SDP with the chosen augmentation.
pub fn enhance(problem: &QcqpProblem, mode: AugmentationMode) -> Result<RelaxedSdp, RelaxationError> {
    problem.validate()?;
    let n = problem.dim();
    let m = problem.a.nrows();
    let mut dims = vec![n + 1];
    let mut lmi_blocks = Vec::new();
    for lmi in &problem.lmis {
        lmi_blocks.push(dims.len());
        dims.push(match lmi {
            Lmi::Affine { h0, .. } => 2 * h0.nrows(),
            Lmi::SubdiagonalSums { dim, .. } => 2 * dim,
        });
    }
    let mut slack_blocks = Vec::new();
    for _ in &problem.quad {
        slack_blocks.push(dims.len());
        dims.push(1);
    }
    let mut sdp = SdpStandardForm::new(dims);

    // tr(P₀X) + 2q₀ᵀx + r₀·t
    let mut obj = LinearForm::new();
    add_quadratic(&mut obj, &problem.p0, &problem.q0, problem.r0, n);
    sdp.add_objective(obj);

    for i in 0..m {
        let mut f = LinearForm::new();
        for j in 0..n {
            f.add(0, n, j, problem.a[(i, j)]);
        }
        sdp.add_constraint(f, problem.b[i]);
    }
    let linear_rows = 0..m;
    let mut corner = LinearForm::new();
    corner.add(0, n, n, 1.0);
    sdp.add_constraint(corner, 1.0);

    let aug_start = sdp.num_constraints();
    match mode {
        AugmentationMode::Full => {
            for i in 0..m {
                for j in 0..n {
                    let mut f = LinearForm::new();
                    for k in 0..n {
                        f.add(0, k, j, problem.a[(i, k)]);
                    }
                    f.add(0, n, j, -problem.b[i]);
                    sdp.add_constraint(f, 0.0);
                }
            }
        }
        AugmentationMode::Trace => {
            let ata = problem.a.transpose() * &problem.a;
            let atb = problem.a.transpose() * &problem.b;
            let mut f = LinearForm::new();
            for k in 0..n {
                for l in 0..n {
                    f.add(0, k, l, ata[(k, l)]);
                }
                f.add(0, n, k, -atb[k]);
            }
            sdp.add_constraint(f, 0.0);
        }
        AugmentationMode::None => {}
    }
    let augmentation_rows = aug_start..sdp.num_constraints();

    for (lmi, &blk) in problem.lmis.iter().zip(&lmi_blocks) {
        match lmi {
            Lmi::Affine { h0, h } => {
                // Y = E(H₀) + Σ x_j E(H_j), entrywise on the lower triangle
                let e0 = real_embedding(h0);
                let ej: Vec<_> = h.iter().map(real_embedding).collect();
                let d = e0.nrows();
                for p in 0..d {
                    for q in 0..=p {
                        let mut f = LinearForm::new();
                        f.add(blk, p, q, if p == q { 1.0 } else { 2.0 });
                        for (j, e) in ej.iter().enumerate() {
                            if e[(p, q)] != 0.0 {
                                f.add(0, n, j, -e[(p, q)] * if p == q { 1.0 } else { 2.0 });
                            }
                        }
                        let rhs = e0[(p, q)] * if p == q { 1.0 } else { 2.0 };
                        sdp.add_constraint(f, rhs);
                    }
                }
            }
            Lmi::SubdiagonalSums {
                dim,
                multipliers,
                re,
                im,
            } => {
                for k in 0..*dim {
                    let (mut fr, mut fi) = subdiagonal_sum_forms(blk, *dim, k);
                    fr.add(0, n, re[k], -multipliers[k]);
                    sdp.add_constraint(fr, 0.0);
                    if let Some(j) = im[k] {
                        fi.add(0, n, j, -multipliers[k]);
                    }
                    if !fi.is_empty() {
                        sdp.add_constraint(fi, 0.0);
                    }
                }
            }
        }
    }

    for (qc, &blk) in problem.quad.iter().zip(&slack_blocks) {
        let mut f = LinearForm::new();
        add_quadratic(&mut f, &qc.p, &qc.q, qc.r, n);
        f.add(blk, 0, 0, 1.0);
        sdp.add_constraint(f, 0.0);
    }

    let mut face = DMatrix::zeros(m, n + 1);
    face.view_mut((0, 0), (m, n)).copy_from(&problem.a);
    face.column_mut(n).copy_from(&(-&problem.b));
    Ok(RelaxedSdp {
        sdp,
        mode,
        n,
        lmi_blocks,
        slack_blocks,
        linear_rows,
        augmentation_rows,
        face,
    })
}

/// `tr(PX) + 2qᵀx + r·t` on the lifted block.
fn add_quadratic(f: &mut LinearForm, p: &DMatrix<f64>, q: &DVector<f64>, r: f64, n: usize) {
    for i in 0..n {
        for j in 0..n {
            if p[(i, j)] != 0.0 {
                f.add(0, i, j, p[(i, j)]);
            }
        }
        if q[i] != 0.0 {
            f.add(0, n, i, 2.0 * q[i]);
        }
    }
    if r != 0.0 {
        f.add(0, n, n, r);
    }
}

impl RelaxedSdp {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("standard form serializes")
    }

    pub fn num_constraints(&self) -> usize {
        self.sdp.num_constraints()
    }

    pub fn num_variables(&self) -> usize {
        self.sdp.num_variables()
    }

    /// Read `x` and `X` from the lifted block of a solver result.
    pub fn lifted(&self, sol: SdpSolution) -> LiftedSolution {
        self.lifted_from_blocks(
            sol.primal.blocks,
            sol.objective,
            sol.status,
            sol.iterations,
            sol.gap,
            sol.dual_residual,
            None,
            sol.history,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn lifted_from_blocks(
        &self,
        blocks: Vec<DMatrix<f64>>,
        objective: f64,
        status: SolveStatus,
        iterations: usize,
        gap: f64,
        dual_residual: f64,
        reduced_order: Option<usize>,
        history: Vec<sdp::IterationRecord>,
    ) -> LiftedSolution {
        let n = self.n;
        let t = &blocks[0];
        let z = sdp::BlockMatrix { blocks: blocks.clone() };
        let primal_residual = (self.sdp.apply(&z) - self.sdp.rhs()).norm();
        LiftedSolution {
            x: DVector::from_iterator(n, (0..n).map(|j| t[(n, j)])),
            big_x: t.view((0, 0), (n, n)).into_owned(),
            blocks,
            objective,
            status,
            iterations,
            gap,
            primal_residual,
            dual_residual,
            reduced_order,
            history,
        }
    }

    /// Orthonormal basis `U` of the null space of `[A, −b]`: every feasible
    /// lifted block is `T = U W Uᵀ` with `W ⪰ 0`.
    pub fn face_basis(&self) -> DMatrix<f64> {
        let d = self.n + 1;
        if self.face.nrows() == 0 {
            return DMatrix::identity(d, d);
        }
        let g = self.face.transpose() * &self.face;
        let eig = g.symmetric_eigen();
        let top = eig.eigenvalues.amax().max(1e-300);
        let keep: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] <= 1e-12 * top).collect();
        DMatrix::from_fn(d, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
    }

    /// The program restricted to the face `T = U W Uᵀ`. The linear and
    /// augmentation rows hold identically there and are dropped; the result
    /// has a strictly feasible point whenever the original relaxation does
    /// on the relative interior of the face.
    pub fn reduce(&self) -> (SdpStandardForm, DMatrix<f64>) {
        let u = self.face_basis();
        let r = u.ncols();
        let mut dims = self.sdp.block_dims.clone();
        dims[0] = r;
        let mut out = SdpStandardForm::new(dims);
        let project = |entries: &[sdp::Entry]| -> Vec<sdp::Entry> {
            let mut dense = DMatrix::<f64>::zeros(r, r);
            let mut touched = false;
            let mut magnitude: f64 = 0.0;
            let mut rest = Vec::new();
            for e in entries {
                if e.block != 0 {
                    rest.push(*e);
                    continue;
                }
                touched = true;
                magnitude = magnitude.max(e.value.abs());
                let ui = u.row(e.row);
                let uj = u.row(e.col);
                if e.row == e.col {
                    dense.ger(e.value, &ui.transpose(), &ui.transpose(), 1.0);
                } else {
                    dense.ger(e.value, &ui.transpose(), &uj.transpose(), 1.0);
                    dense.ger(e.value, &uj.transpose(), &ui.transpose(), 1.0);
                }
            }
            let mut v = Vec::new();
            if touched {
                // U is orthonormal, so anything far below the input scale is rounding
                let tiny = 1e-13 * magnitude;
                for p in 0..r {
                    for q in 0..=p {
                        let val = if p == q { dense[(p, q)] } else { 0.5 * (dense[(p, q)] + dense[(q, p)]) };
                        if val.abs() > tiny {
                            v.push(sdp::Entry { block: 0, row: p, col: q, value: val });
                        }
                    }
                }
            }
            v.extend(rest);
            v
        };
        out.objective = project(&self.sdp.objective);
        for (i, c) in self.sdp.constraints.iter().enumerate() {
            if self.linear_rows.contains(&i) || self.augmentation_rows.contains(&i) {
                continue;
            }
            let entries = project(&c.entries);
            if entries.is_empty() && c.rhs == 0.0 {
                continue;
            }
            out.constraints.push(sdp::Constraint { entries, rhs: c.rhs });
        }
        (out, u)
    }

    /// Solve on the reduced face and lift the result back.
    pub fn solve_reduced(
        &self,
        opts: &IpmOptions,
        log: Option<&mut dyn std::io::Write>,
    ) -> Result<LiftedSolution, RelaxationError> {
        let (reduced, u) = self.reduce();
        let sol = match log {
            Some(w) => sdp::solve_with_log(&reduced, opts, w)?,
            None => sdp::solve(&reduced, opts)?,
        };
        let mut blocks = sol.primal.blocks;
        let mut t = &u * &blocks[0] * u.transpose();
        crate::linalg::symmetrize(&mut t);
        blocks[0] = t;
        Ok(self.lifted_from_blocks(
            blocks,
            sol.objective,
            sol.status,
            sol.iterations,
            sol.gap,
            sol.dual_residual,
            Some(u.ncols()),
            sol.history,
        ))
    }

    /// Solve the program as stated, without facial reduction.
    pub fn solve_direct(
        &self,
        opts: &IpmOptions,
        log: Option<&mut dyn std::io::Write>,
    ) -> Result<LiftedSolution, RelaxationError> {
        let opts = self.effective_options(opts);
        let sol = match log {
            Some(w) => sdp::solve_with_log(&self.sdp, &opts, w)?,
            None => sdp::solve(&self.sdp, &opts)?,
        };
        Ok(self.lifted(sol))
    }

    /// Solve as stated, retrying on the reduced face (when there is one) if
    /// that fails; errors on unusable status.
    pub fn solve(&self, opts: &IpmOptions) -> Result<LiftedSolution, RelaxationError> {
        let direct = self.solve_direct(opts, None);
        let sol = match direct {
            Ok(s) if s.status.is_usable() || self.mode == AugmentationMode::None => s,
            first => match self.solve_reduced(opts, None) {
                Ok(s) if s.status.is_usable() => s,
                _ => first?,
            },
        };
        if !sol.status.is_usable() {
            return Err(RelaxationError::SolverFailed {
                status: sol.status,
                iterations: sol.iterations,
                diagnostics: Box::new(None),
            });
        }
        Ok(sol)
    }

    /// Full mode has no interior point; a tiny Schur shift keeps the
    /// Newton systems factorizable.
    pub fn effective_options(&self, opts: &IpmOptions) -> IpmOptions {
        let mut o = opts.clone();
        if self.mode == AugmentationMode::Full {
            o.regularization = o.regularization.max(1e-9);
        }
        o
    }
}

// ---------------------------------------------------------------------------
// Wulff instance

/// Wulff QCQP in `x = [Re σ_0..σ_{N-1}; Im σ_0..σ_{N-1}]`: minimize `−|W_σ|`
/// subject to `L_σ(Γ) = L(Γ)`, `Im σ₀ = 0` and `σ ∈ 𝒦^N` (two sub-diagonal-sum LMIs).
pub fn assemble_wulff_qcqp(spec: &LengthSpectrum, modes: usize) -> Result<QcqpProblem, RelaxationError> {
    if modes < 2 {
        return Err(RelaxationError::TooFewModes(modes));
    }
    let c = spec.coeffs();
    if c.len() < modes {
        return Err(CurveError::SpectrumTooShort {
            available: c.len(),
            requested: modes,
        }
        .into());
    }
    let n = 2 * modes;
    let pi = std::f64::consts::PI;
    let mut p0 = DMatrix::zeros(n, n);
    for k in 0..modes {
        let v = if k == 0 {
            -pi
        } else {
            2.0 * pi * ((k * k) as f64 - 1.0)
        };
        p0[(k, k)] = v;
        p0[(modes + k, modes + k)] = v;
    }
    let mut a = DMatrix::zeros(2, n);
    a[(0, 0)] = c[0].re;
    for k in 1..modes {
        a[(0, k)] = 2.0 * c[k].re;
        a[(0, modes + k)] = 2.0 * c[k].im;
    }
    a[(1, modes)] = 1.0;
    let b = DVector::from_vec(vec![spec.length(), 0.0]);

    let re: Vec<usize> = (0..modes).collect();
    let im: Vec<Option<usize>> = (0..modes).map(|k| Some(modes + k)).collect();
    let lmis = vec![
        Lmi::SubdiagonalSums {
            dim: modes,
            multipliers: vec![1.0; modes],
            re: re.clone(),
            im: im.clone(),
        },
        Lmi::SubdiagonalSums {
            dim: modes,
            multipliers: (0..modes).map(|k| 1.0 - (k * k) as f64).collect(),
            re,
            im,
        },
    ];
    Ok(QcqpProblem {
        lmis,
        ..QcqpProblem::new(p0, a, b)
    })
}

/// `ρ = 1.1 π max(N / c₀², 1)`, a safe multiplier for assumption (A) on the Wulff instance.
pub fn wulff_rho(spec: &LengthSpectrum, modes: usize) -> f64 {
    let c0 = spec.length();
    1.1 * std::f64::consts::PI * (modes as f64 / (c0 * c0)).max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WulffSolveOptions {
    pub ipm: IpmOptions,
    pub augmentation: AugmentationMode,
    /// Rescale σ so that `L_σ(Γ) = L(Γ)` exactly (the ratio is invariant).
    pub renormalize: bool,
    /// Solve on the face `[A, −b] T = 0` that both augmentations force.
    /// Either way the other formulation is tried if the first one fails.
    pub reduce_face: bool,
}

impl Default for WulffSolveOptions {
    fn default() -> Self {
        Self {
            ipm: IpmOptions::default(),
            augmentation: AugmentationMode::Trace,
            renormalize: true,
            reduce_face: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub status: SolveStatus,
    pub iterations: usize,
    pub augmentation: AugmentationMode,
    /// `tr(P₀X) − xᵀP₀x`.
    pub relaxation_gap: f64,
    pub trace_p0_x: f64,
    pub min_eig_x_minus_xxt: f64,
    /// `‖Ax − b‖`.
    pub linear_residual: f64,
    /// `‖AX − bxᵀ‖_F`.
    pub augmented_residual: f64,
    pub sdp_gap: f64,
    pub sdp_primal_residual: f64,
    pub sdp_dual_residual: f64,
    /// `|Im σ₀|` before it is zeroed.
    pub imaginary_mean: f64,
    /// Factor applied to make `L_σ(Γ) = L(Γ)`.
    pub renormalization: f64,
    pub min_sigma: f64,
    pub min_stiffness: f64,
    pub num_constraints: usize,
    pub num_variables: usize,
    /// Order of the lifted block after facial reduction, if used.
    pub reduced_order: Option<usize>,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct WulffSolveResult {
    pub sigma: AnisotropyFn,
    pub certificate: ConeCertificate,
    pub ratio: f64,
    pub wulff_area: f64,
    /// Optimal value of the relaxation, `≈ −|W_σ|`.
    pub objective: f64,
    pub modes: usize,
    pub diagnostics: Diagnostics,
    pub history: Vec<sdp::IterationRecord>,
}

fn diagnostics_for(
    relaxed: &RelaxedSdp,
    problem: &QcqpProblem,
    lifted: &LiftedSolution,
) -> Diagnostics {
    let x = &lifted.x;
    let big_x = &lifted.big_x;
    let aug = &problem.a * big_x - &problem.b * x.transpose();
    Diagnostics {
        status: lifted.status,
        iterations: lifted.iterations,
        augmentation: relaxed.mode,
        relaxation_gap: lifted.lifting_gap(&problem.p0),
        trace_p0_x: big_x.dot(&problem.p0),
        min_eig_x_minus_xxt: lifted.min_eig_x_minus_xxt(),
        linear_residual: (&problem.a * x - &problem.b).norm(),
        augmented_residual: aug.norm(),
        sdp_gap: lifted.gap,
        sdp_primal_residual: lifted.primal_residual,
        sdp_dual_residual: lifted.dual_residual,
        imaginary_mean: 0.0,
        renormalization: 1.0,
        min_sigma: f64::NAN,
        min_stiffness: f64::NAN,
        num_constraints: relaxed.num_constraints(),
        num_variables: relaxed.num_variables(),
        reduced_order: lifted.reduced_order,
        solve_seconds: 0.0,
    }
}

/// Turn a solved Wulff relaxation (solver output for `relaxed.sdp`) into
/// σ, Π, |W_σ| and diagnostics.
pub fn extract_solution(
    relaxed: &RelaxedSdp,
    sol: SdpSolution,
    spec: &LengthSpectrum,
    modes: usize,
) -> Result<WulffSolveResult, RelaxationError> {
    extract_lifted(relaxed, relaxed.lifted(sol), spec, modes, true)
}

/// As [`extract_solution`], for an already lifted (possibly face-reduced) solution.
pub fn extract_lifted(
    relaxed: &RelaxedSdp,
    lifted: LiftedSolution,
    spec: &LengthSpectrum,
    modes: usize,
    renormalize: bool,
) -> Result<WulffSolveResult, RelaxationError> {
    if relaxed.n != 2 * modes {
        return Err(RelaxationError::Dimension(format!(
            "relaxation has {} variables, expected {}",
            relaxed.n,
            2 * modes
        )));
    }
    let problem = assemble_wulff_qcqp(spec, modes)?;
    let mut diag = diagnostics_for(relaxed, &problem, &lifted);
    if !lifted.status.is_usable() {
        return Err(RelaxationError::SolverFailed {
            status: lifted.status,
            iterations: lifted.iterations,
            diagnostics: Box::new(Some(diag)),
        });
    }

    let x = &lifted.x;
    diag.imaginary_mean = x[modes].abs();
    let mut coeffs: Vec<Complex64> = (0..modes).map(|k| Complex64::new(x[k], x[modes + k])).collect();
    coeffs[0].im = 0.0;
    let raw = AnisotropyFn::new(coeffs)?;

    // the solver meets L_σ = L only to tolerance; Π is scale invariant
    let mut factor = 1.0;
    if renormalize {
        let l_sigma = raw.interface_energy(spec)?;
        if l_sigma > 0.0 {
            factor = spec.length() / l_sigma;
        }
    }
    let sigma = raw.scale(factor)?;
    diag.renormalization = factor;

    let grid = sigma.cone_membership(ConeMethod::Grid)?;
    diag.min_sigma = grid.min_sigma;
    diag.min_stiffness = grid.min_stiffness;
    if grid.margin < -1e-6 * sigma.mean().abs().max(1.0) {
        return Err(RelaxationError::OutOfCone {
            min_sigma: grid.min_sigma,
            min_stiffness: grid.min_stiffness,
        });
    }

    let cert_block = |i: usize| {
        hermitian_from_real_block(&lifted.blocks[relaxed.lmi_blocks[i]]) * Complex64::new(factor, 0.0)
    };
    let certificate = ConeCertificate {
        f: cert_block(0),
        g: cert_block(1),
    };
    let ratio = sigma.anisoperimetric_ratio(spec)?;
    Ok(WulffSolveResult {
        wulff_area: sigma.wulff_area(),
        ratio,
        objective: lifted.objective,
        sigma,
        certificate,
        modes,
        diagnostics: diag,
        history: lifted.history,
    })
}

/// Solve the inverse Wulff problem for a given spectrum.
pub fn solve_for_spectrum(
    spec: &LengthSpectrum,
    modes: usize,
    opts: &WulffSolveOptions,
) -> Result<WulffSolveResult, RelaxationError> {
    solve_for_spectrum_logged(spec, modes, opts, None)
}

pub fn solve_for_spectrum_logged(
    spec: &LengthSpectrum,
    modes: usize,
    opts: &WulffSolveOptions,
    log: Option<&mut dyn std::io::Write>,
) -> Result<WulffSolveResult, RelaxationError> {
    let problem = assemble_wulff_qcqp(spec, modes)?;
    let relaxed = enhance(&problem, opts.augmentation)?;
    let start = Instant::now();
    let mut log = log;
    let reducible = relaxed.mode != AugmentationMode::None;
    let run = |reduced: bool, log: Option<&mut dyn Write>| {
        if reduced {
            relaxed.solve_reduced(&opts.ipm, log)
        } else {
            relaxed.solve_direct(&opts.ipm, log)
        }
    };
    let first_reduced = opts.reduce_face && reducible;
    let first = run(first_reduced, log.as_mut().map(|w| &mut **w as &mut dyn Write));
    let usable = matches!(&first, Ok(s) if s.status.is_usable());
    let lifted = if usable || !reducible {
        first?
    } else {
        if let Some(w) = log.as_mut() {
            let _ = writeln!(w, "retrying with reduce_face = {}", !first_reduced);
        }
        match run(!first_reduced, log.as_mut().map(|w| &mut **w as &mut dyn Write)) {
            Ok(s) if s.status.is_usable() => s,
            _ => first?,
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    let mut res = extract_lifted(&relaxed, lifted, spec, modes, opts.renormalize).map_err(|e| match e {
        RelaxationError::SolverFailed {
            status,
            iterations,
            diagnostics,
        } => RelaxationError::SolverFailed {
            status,
            iterations,
            diagnostics: Box::new(diagnostics.map(|mut d| {
                d.solve_seconds = seconds;
                d
            })),
        },
        other => other,
    })?;
    res.diagnostics.solve_seconds = seconds;
    Ok(res)
}

/// Spectrum → QCQP → relaxation → solve → σ.
pub fn solve_inverse_wulff(
    curve: &PlanarCurve,
    modes: usize,
    opts: &WulffSolveOptions,
) -> Result<WulffSolveResult, RelaxationError> {
    if modes < 2 {
        return Err(RelaxationError::TooFewModes(modes));
    }
    let spec = curve.length_spectrum(modes)?;
    solve_for_spectrum(&spec, modes, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn n1_instance() -> QcqpProblem {
        QcqpProblem::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
        )
    }

    #[test]
    fn embedding_examples() {
        let i = Complex64::i();
        let one = Complex64::new(1.0, 0.0);
        let id = DMatrix::<Complex64>::identity(2, 2);
        assert_eq!(complex_to_real(&id).unwrap(), DMatrix::<f64>::identity(4, 4));
        let h = DMatrix::from_row_slice(2, 2, &[one, -i, i, one]);
        let e = complex_to_real(&h).unwrap();
        let mut eig: Vec<f64> = e.clone().symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in eig.iter().zip([0.0, 0.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((e.trace() - 4.0).abs() < 1e-15);
        let bad = DMatrix::from_row_slice(2, 2, &[one, i, i, one]);
        assert!(matches!(complex_to_real(&bad), Err(RelaxationError::NotHermitian(_))));
    }

    #[test]
    fn single_point_instance_in_both_modes() {
        for mode in [AugmentationMode::Full, AugmentationMode::Trace] {
            let relaxed = enhance(&n1_instance(), mode).unwrap();
            let sol = relaxed.solve(&IpmOptions::default()).unwrap();
            assert!((sol.objective + 1.0).abs() < 1e-7, "{mode:?}: {}", sol.objective);
            assert!((sol.x[0] - 1.0).abs() < 1e-7);
            assert!((sol.big_x[(0, 0)] - 1.0).abs() < 1e-6);
            assert!(sol.iterations <= 40);
        }
    }

    #[test]
    fn constraint_counts_follow_the_mode() {
        let p = QcqpProblem::new(
            DMatrix::identity(3, 3),
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]),
            DVector::from_vec(vec![1.0, 2.0]),
        );
        let none = enhance(&p, AugmentationMode::None).unwrap().num_constraints();
        assert_eq!(none, 3);
        assert_eq!(enhance(&p, AugmentationMode::Trace).unwrap().num_constraints(), none + 1);
        assert_eq!(enhance(&p, AugmentationMode::Full).unwrap().num_constraints(), none + 6);
    }

    #[test]
    fn convex_problem_matches_closed_form() {
        // min |x|² + 2(1,0,0)·x  s.t. x₁ + x₂ + x₃ = 1
        let mut p = QcqpProblem::new(
            DMatrix::identity(3, 3),
            DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]),
            DVector::from_element(1, 1.0),
        );
        p.q0 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        // KKT: 2x + 2q = λ·1 → x = (λ/2 − 1, λ/2, λ/2), Σ = 3λ/2 − 1 = 1 → λ = 4/3
        let x = DVector::from_vec(vec![-1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
        let want = p.objective_at(&x);
        // x is only accurate to about √gap, so ask for a tight gap
        let opts = IpmOptions {
            gap_tolerance: 1e-12,
            residual_tolerance: 1e-12,
            ..IpmOptions::default()
        };
        let sol = enhance(&p, AugmentationMode::Trace).unwrap().solve(&opts).unwrap();
        assert!((sol.objective - want).abs() < 1e-7);
        assert!((&sol.x - &x).norm() < 1e-6, "{}", sol.x);
    }

    #[test]
    fn quadratic_inequality_through_slack_block() {
        // min −x₁ − x₂ ... as xᵀ0x + 2qᵀx, ball |x|² ≤ 1, x₁ − x₂ = 0
        let mut p = QcqpProblem::new(
            DMatrix::zeros(2, 2),
            DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            DVector::from_element(1, 0.0),
        );
        p.q0 = DVector::from_vec(vec![-0.5, -0.5]);
        p.quad.push(QuadConstraint {
            p: DMatrix::identity(2, 2),
            q: DVector::zeros(2),
            r: -1.0,
        });
        let sol = enhance(&p, AugmentationMode::Trace).unwrap().solve(&IpmOptions::default()).unwrap();
        assert!((sol.objective + 2f64.sqrt()).abs() < 1e-6, "{}", sol.objective);
        assert!(sol.lifting_gap(&p.quad[0].p) >= -1e-8);
    }

    #[test]
    fn affine_lmi_bounds_the_variable() {
        // min x s.t. [[1, x], [x, 1]] ⪰ 0 with no equalities → x = −1
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut p = QcqpProblem::new(
            DMatrix::zeros(1, 1),
            DMatrix::zeros(0, 1),
            DVector::zeros(0),
        );
        p.q0 = DVector::from_element(1, 0.5);
        p.lmis.push(Lmi::Affine {
            h0: DMatrix::from_row_slice(2, 2, &[one, zero, zero, one]),
            h: vec![DMatrix::from_row_slice(2, 2, &[zero, one, one, zero])],
        });
        let sol = enhance(&p, AugmentationMode::Trace).unwrap().solve(&IpmOptions::default()).unwrap();
        assert!((sol.x[0] + 1.0).abs() < 1e-6, "{}", sol.x[0]);
    }

    #[test]
    fn validation_errors() {
        let mut p = n1_instance();
        p.quad.push(QuadConstraint {
            p: DMatrix::from_element(1, 1, -1.0),
            q: DVector::zeros(1),
            r: 0.0,
        });
        assert!(matches!(p.validate(), Err(RelaxationError::IndefiniteConstraint { .. })));
        let mut q = n1_instance();
        q.b = DVector::zeros(2);
        assert!(matches!(enhance(&q, AugmentationMode::Trace), Err(RelaxationError::Dimension(_))));
        assert!(matches!(check_assumption_a(&n1_instance(), 0.0), Err(RelaxationError::InvalidRho(_))));
    }

    #[test]
    fn wulff_data_examples() {
        let circ = LengthSpectrum::circle_exact(1.0, 4).unwrap();
        let p = assemble_wulff_qcqp(&circ, 3).unwrap();
        let d: Vec<f64> = p.p0.diagonal().iter().copied().collect();
        let want = [-PI, 0.0, 6.0 * PI, -PI, 0.0, 6.0 * PI];
        assert!(d.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-14));
        let p2 = assemble_wulff_qcqp(&circ, 2).unwrap();
        assert_eq!(p2.a.row(0).iter().copied().collect::<Vec<_>>(), vec![2.0 * PI, 0.0, 0.0, 0.0]);
        assert_eq!(p2.a.row(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(p2.b.as_slice(), &[2.0 * PI, 0.0]);
        let cap = LengthSpectrum::capsule_exact(4.0, 1.0, 4).unwrap();
        let p3 = assemble_wulff_qcqp(&cap, 3).unwrap();
        assert!((p3.a[(0, 0)] - 14.28319).abs() < 1e-5);
        assert_eq!(p3.a[(0, 1)], 0.0);
        assert!((p3.a[(0, 2)] - 16.0).abs() < 1e-12);
        assert!(p3.a.view((0, 3), (1, 3)).iter().all(|v| *v == 0.0));
        assert!(matches!(assemble_wulff_qcqp(&cap, 1), Err(RelaxationError::TooFewModes(1))));
        assert!(assemble_wulff_qcqp(&cap, 5).is_err());
    }

    #[test]
    fn assumption_a_examples() {
        let circ = LengthSpectrum::circle_exact(1.0, 4).unwrap();
        let p = assemble_wulff_qcqp(&circ, 3).unwrap();
        let rho = wulff_rho(&circ, 3);
        assert!((rho - 1.1 * PI).abs() < 1e-14);
        assert!(check_assumption_a(&p, rho).unwrap() >= -1e-9);
        assert!(check_assumption_a(&p, 0.1).unwrap() < 0.0);

        let remark = QcqpProblem::new(
            DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[0.0, 1.0]),
            DVector::from_element(1, 0.0),
        );
        for rho in [1.0, 10.0, 1e6] {
            assert!(check_assumption_a(&remark, rho).unwrap() < 0.0);
        }
        let v = DMatrix::from_row_slice(1, 2, &[2.0, 0.0]);
        assert!(check_assumption_a_with(&remark, &v).unwrap() >= -1e-15);
    }

    #[test]
    fn wulff_circle_two_modes() {
        let circ = LengthSpectrum::circle_exact(1.0, 2).unwrap();
        let res = solve_for_spectrum(&circ, 2, &WulffSolveOptions::default()).unwrap();
        assert!((res.objective + PI).abs() < 1e-6, "{}", res.objective);
        assert!((res.sigma.coeffs()[0].re - 1.0).abs() < 1e-6);
        assert!(res.sigma.coeffs()[1].norm() < 1e-4);
    }

    #[test]
    fn wulff_capsule_small_both_modes_agree() {
        let cap = LengthSpectrum::capsule_exact(4.0, 1.0, 6).unwrap();
        let t = solve_for_spectrum(&cap, 6, &WulffSolveOptions::default()).unwrap();
        let f = solve_for_spectrum(
            &cap,
            6,
            &WulffSolveOptions {
                augmentation: AugmentationMode::Full,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((t.objective / f.objective - 1.0).abs() < 1e-5, "{} vs {}", t.objective, f.objective);
        assert!(t.ratio >= 1.0 - 1e-6);
        let d = &t.diagnostics;
        assert!(d.relaxation_gap <= 1e-5 * d.trace_p0_x.abs(), "{d:?}");
        assert!(d.min_eig_x_minus_xxt >= -1e-7);
        assert!((t.sigma.interface_energy(&cap).unwrap() / cap.length() - 1.0).abs() < 1e-6);
        assert!(t.certificate.coupling_residual(&t.sigma) < 1e-6);
    }

    #[test]
    fn export_is_json() {
        let circ = LengthSpectrum::circle_exact(1.0, 3).unwrap();
        let r = enhance(&assemble_wulff_qcqp(&circ, 3).unwrap(), AugmentationMode::Trace).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["sdp"]["block_dims"][0], 7);
        assert_eq!(v["mode"], "trace");
    }
}
