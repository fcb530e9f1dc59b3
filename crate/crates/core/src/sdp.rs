//! Primal-dual interior-point solver for block-diagonal semidefinite programs.
//!
//! Standard form:
//!
//! ```text
//!   minimize    ⟨C, Z⟩
//!   subject to  ⟨A_i, Z⟩ = b_i,   i = 1..m
//!               Z = diag(Z_1, …, Z_q) ⪰ 0
//! ```
//!
//! with dual `maximize bᵀy  s.t.  Σ y_i A_i + S = C, S ⪰ 0`.
//!
//! The method is an infeasible-start path-following scheme with
//! Nesterov–Todd scaling and a Mehrotra predictor-corrector. Data matrices are
//! stored as symmetric sparse triplets; the Schur complement is dense.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{symmetric_min_eigenvalue, symmetrize};

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("entry ({row}, {col}) lies outside block {block} of dimension {dim}")]
    EntryOutOfRange {
        block: usize,
        row: usize,
        col: usize,
        dim: usize,
    },
    #[error("block index {0} out of range")]
    BlockOutOfRange(usize),
    #[error("constraint {0} has no entries but a nonzero right-hand side")]
    InconsistentZeroRow(usize),
    #[error("constraints {0} and {1} are parallel with inconsistent right-hand sides")]
    InconsistentDuplicate(usize, usize),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// One stored entry of a symmetric block-diagonal matrix. An off-diagonal
/// entry `(row, col, v)` stands for both `M[row][col]` and `M[col][row]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// Accumulates a linear functional `Σ coeff · Z_b[row, col]`, converting to
/// symmetric triplets (off-diagonal coefficients are halved).
#[derive(Debug, Clone, Default)]
pub struct LinearForm {
    terms: BTreeMap<(usize, usize, usize), f64>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `coeff · Z_block[row, col]` to the functional.
    pub fn add(&mut self, block: usize, row: usize, col: usize, coeff: f64) -> &mut Self {
        let (r, c) = if row >= col { (row, col) } else { (col, row) };
        let v = if r == c { coeff } else { 0.5 * coeff };
        *self.terms.entry((block, r, c)).or_insert(0.0) += v;
        self
    }

    pub fn is_empty(&self) -> bool {
        self.terms.values().all(|v| *v == 0.0)
    }

    pub fn into_entries(self) -> Vec<Entry> {
        self.terms
            .into_iter()
            .filter(|(_, v)| *v != 0.0)
            .map(|((block, row, col), value)| Entry {
                block,
                row,
                col,
                value,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub entries: Vec<Entry>,
    pub rhs: f64,
}

/// Standard-form block SDP data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpStandardForm {
    pub block_dims: Vec<usize>,
    pub objective: Vec<Entry>,
    pub constraints: Vec<Constraint>,
}

impl SdpStandardForm {
    pub fn new(block_dims: Vec<usize>) -> Self {
        Self {
            block_dims,
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Add `coeff · Z_block[row, col]` to the objective functional.
    pub fn add_objective(&mut self, form: LinearForm) {
        self.objective.extend(form.into_entries());
        self.objective = merge_entries(std::mem::take(&mut self.objective));
    }

    /// Append the equality `form(Z) = rhs`; returns its index.
    pub fn add_constraint(&mut self, form: LinearForm, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            entries: form.into_entries(),
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Number of scalar unknowns, Σ d(d+1)/2 over blocks.
    pub fn num_variables(&self) -> usize {
        self.block_dims.iter().map(|d| d * (d + 1) / 2).sum()
    }

    pub fn rhs(&self) -> DVector<f64> {
        DVector::from_iterator(self.constraints.len(), self.constraints.iter().map(|c| c.rhs))
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        let check = |e: &Entry| -> Result<(), SdpError> {
            let dim = *self
                .block_dims
                .get(e.block)
                .ok_or(SdpError::BlockOutOfRange(e.block))?;
            if e.row >= dim || e.col >= dim {
                return Err(SdpError::EntryOutOfRange {
                    block: e.block,
                    row: e.row,
                    col: e.col,
                    dim,
                });
            }
            Ok(())
        };
        self.objective.iter().try_for_each(check)?;
        self.constraints
            .iter()
            .flat_map(|c| c.entries.iter())
            .try_for_each(check)
    }

    pub fn objective_matrix(&self) -> BlockMatrix {
        BlockMatrix::from_entries(&self.block_dims, &self.objective)
    }

    /// `⟨A_i, Z⟩` for every constraint.
    pub fn apply(&self, z: &BlockMatrix) -> DVector<f64> {
        DVector::from_iterator(
            self.constraints.len(),
            self.constraints.iter().map(|c| inner_sparse(&c.entries, z)),
        )
    }

    /// `Σ y_i A_i`.
    pub fn adjoint(&self, y: &DVector<f64>) -> BlockMatrix {
        let mut out = BlockMatrix::zeros(&self.block_dims);
        for (c, &yi) in self.constraints.iter().zip(y.iter()) {
            out.add_entries(&c.entries, yi);
        }
        out
    }
}

fn merge_entries(entries: Vec<Entry>) -> Vec<Entry> {
    let mut map: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for e in entries {
        let (r, c) = if e.row >= e.col { (e.row, e.col) } else { (e.col, e.row) };
        *map.entry((e.block, r, c)).or_insert(0.0) += e.value;
    }
    map.into_iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|((block, row, col), value)| Entry {
            block,
            row,
            col,
            value,
        })
        .collect()
}

fn inner_sparse(entries: &[Entry], z: &BlockMatrix) -> f64 {
    entries
        .iter()
        .map(|e| {
            let v = e.value * z.blocks[e.block][(e.row, e.col)];
            if e.row == e.col {
                v
            } else {
                2.0 * v
            }
        })
        .sum()
}

/// Block-diagonal symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    pub blocks: Vec<DMatrix<f64>>,
}

impl BlockMatrix {
    pub fn zeros(dims: &[usize]) -> Self {
        Self {
            blocks: dims.iter().map(|&d| DMatrix::zeros(d, d)).collect(),
        }
    }

    pub fn scaled_identity(dims: &[usize], lambda: f64) -> Self {
        Self {
            blocks: dims
                .iter()
                .map(|&d| DMatrix::identity(d, d) * lambda)
                .collect(),
        }
    }

    pub fn from_entries(dims: &[usize], entries: &[Entry]) -> Self {
        let mut m = Self::zeros(dims);
        m.add_entries(entries, 1.0);
        m
    }

    fn add_entries(&mut self, entries: &[Entry], scale: f64) {
        for e in entries {
            let b = &mut self.blocks[e.block];
            b[(e.row, e.col)] += scale * e.value;
            if e.row != e.col {
                b[(e.col, e.row)] += scale * e.value;
            }
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.nrows()).collect()
    }

    pub fn inner(&self, other: &BlockMatrix) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.dot(b))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for b in &mut self.blocks {
            *b *= s;
        }
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: f64, other: &BlockMatrix) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a += b * alpha;
        }
    }

    pub fn symmetrize(&mut self) {
        for b in &mut self.blocks {
            symmetrize(b);
        }
    }

    /// Smallest eigenvalue over all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(symmetric_min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest Frobenius asymmetry `‖B − Bᵀ‖_F` over blocks.
    pub fn asymmetry(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| (b - b.transpose()).norm())
            .fold(0.0, f64::max)
    }

    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }
}

/// Steps below this length count as no progress ...
const STALL_STEP: f64 = 1e-4;
/// ... and this many in a row end the run.
const STALL_ITERATIONS: usize = 5;

/// Interior-point options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpmOptions {
    pub max_iterations: usize,
    pub gap_tolerance: f64,
    pub residual_tolerance: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Diagonal shift added to the Schur complement (relative to its largest diagonal).
    pub regularization: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            gap_tolerance: 1e-8,
            residual_tolerance: 1e-8,
            step_fraction: 0.98,
            regularization: 0.0,
        }
    }
}

impl IpmOptions {
    pub fn validate(&self) -> Result<(), SdpError> {
        if !(self.gap_tolerance > 0.0 && self.residual_tolerance > 0.0) {
            return Err(SdpError::InvalidOptions("tolerances must be positive".into()));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(SdpError::InvalidOptions(format!(
                "step fraction must lie in (0, 1), got {}",
                self.step_fraction
            )));
        }
        if !(self.regularization >= 0.0) {
            return Err(SdpError::InvalidOptions("regularization must be >= 0".into()));
        }
        if self.max_iterations == 0 {
            return Err(SdpError::InvalidOptions("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Termination status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Progress stopped with all measures within `NEAR_OPTIMAL_FACTOR` of tolerance.
    NearOptimal,
    MaxIterations,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_usable(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::NearOptimal)
    }
}

/// Loosening factor applied to the tolerances for [`SolveStatus::NearOptimal`].
pub const NEAR_OPTIMAL_FACTOR: f64 = 1e3;

/// Per-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `⟨Z, S⟩ / Σ dims`.
    pub mu: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub primal_step: f64,
    pub dual_step: f64,
    pub centering: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub primal: BlockMatrix,
    pub y: DVector<f64>,
    pub slack: BlockMatrix,
    /// `⟨C, Z⟩`.
    pub objective: f64,
    /// `bᵀy`.
    pub dual_objective: f64,
    /// `⟨Z, S⟩`.
    pub gap: f64,
    /// `‖⟨A_i, Z⟩ − b_i‖₂`.
    pub primal_residual: f64,
    /// `‖C − S − Σ y_i A_i‖_F`.
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub history: Vec<IterationRecord>,
}

/// Residual triple recomputed from a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// Recompute `(‖A(Z) − b‖, ‖C − S − Aᵀy‖_F, ⟨Z, S⟩)` directly from the data.
pub fn residuals(problem: &SdpStandardForm, sol: &SdpSolution) -> Result<Residuals, SdpError> {
    if sol.primal.dims() != problem.block_dims || sol.slack.dims() != problem.block_dims {
        return Err(SdpError::DimensionMismatch("block dimensions differ".into()));
    }
    if sol.y.len() != problem.num_constraints() {
        return Err(SdpError::DimensionMismatch(format!(
            "y has {} entries, problem has {} constraints",
            sol.y.len(),
            problem.num_constraints()
        )));
    }
    let primal = (problem.apply(&sol.primal) - problem.rhs()).norm();
    let mut rd = problem.objective_matrix();
    rd.axpy(-1.0, &sol.slack);
    rd.axpy(-1.0, &problem.adjoint(&sol.y));
    Ok(Residuals {
        primal,
        dual: rd.norm(),
        gap: sol.primal.inner(&sol.slack),
    })
}

/// Whether a solution meets the optimality contract for the given options:
/// gap ≤ tol·(1+|obj|), primal residual ≤ tol·(1+‖b‖), dual residual ≤ tol·(1+‖C‖).
pub fn meets_tolerances(
    problem: &SdpStandardForm,
    res: &Residuals,
    objective: f64,
    opts: &IpmOptions,
    factor: f64,
) -> bool {
    let bnorm = problem.rhs().norm();
    let cnorm = problem.objective_matrix().norm();
    res.gap <= factor * opts.gap_tolerance * (1.0 + objective.abs())
        && res.primal <= factor * opts.residual_tolerance * (1.0 + bnorm)
        && res.dual <= factor * opts.residual_tolerance * (1.0 + cnorm)
}

/// Solve with default logging disabled.
pub fn solve(problem: &SdpStandardForm, opts: &IpmOptions) -> Result<SdpSolution, SdpError> {
    solve_inner(problem, opts, None)
}

/// Cold start from a multiple of the identity; if that run ends unusable,
/// restart once from the data-scaled point. Iterations and history cover
/// both runs.
fn solve_inner(
    problem: &SdpStandardForm,
    opts: &IpmOptions,
    mut log: Option<&mut dyn Write>,
) -> Result<SdpSolution, SdpError> {
    let solver = Solver::new(problem, opts)?;
    let first = solver.run(Start::Unit, log.as_mut().map(|w| &mut **w as &mut dyn Write))?;
    if first.status.is_usable() {
        return Ok(first);
    }
    if let Some(w) = log.as_mut() {
        let _ = writeln!(w, "restarting from the data-scaled initial point");
    }
    let second = solver.run(Start::DataScaled, log)?;
    let mut history = first.history.clone();
    let offset = history.len();
    history.extend(second.history.iter().map(|h| IterationRecord {
        iteration: h.iteration + offset,
        ..*h
    }));
    let mut chosen = if second.status.is_usable() { second } else { first };
    chosen.iterations = history.len();
    chosen.history = history;
    Ok(chosen)
}

/// Solve, writing one line per iteration to `log`.
pub fn solve_with_log(
    problem: &SdpStandardForm,
    opts: &IpmOptions,
    log: &mut dyn Write,
) -> Result<SdpSolution, SdpError> {
    solve_inner(problem, opts, Some(log))
}

#[derive(Clone, Copy)]
enum Start {
    /// `λI` with `λ = max(1, ‖b‖∞, ‖C‖)` in scaled units.
    Unit,
    /// Per-block multiples of the identity sized from the data.
    DataScaled,
}

/// Per-block view of the constraints that touch the block.
struct BlockConstraints {
    dim: usize,
    /// (constraint index, local entries as (row, col, value))
    sparse: Vec<(usize, Vec<(usize, usize, f64)>)>,
    /// dense copies for constraints with many entries in this block
    dense: HashMap<usize, DMatrix<f64>>,
}

/// Factored Schur complement; solves are refined against the unshifted matrix.
struct SchurSystem {
    matrix: DMatrix<f64>,
    /// Jacobi equilibration `D^{-1/2}` applied before factoring.
    scale: DVector<f64>,
    factor: SchurFactor,
}

enum SchurFactor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    /// Fallback for the nearly singular systems of degenerate late iterations.
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurSystem {
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let apply = |r: &DVector<f64>| {
            let r = r.component_mul(&self.scale);
            let t = match &self.factor {
                SchurFactor::Cholesky(c) => c.solve(&r),
                SchurFactor::Lu(lu) => lu.solve(&r).unwrap_or_else(|| DVector::zeros(r.len())),
            };
            t.component_mul(&self.scale)
        };
        let mut x = apply(rhs);
        let norm = rhs.norm();
        for _ in 0..3 {
            let r = rhs - &self.matrix * &x;
            if r.norm() <= 1e-15 * norm {
                break;
            }
            x += apply(&r);
        }
        x
    }
}

/// Nesterov–Todd scaling for one block: `W = G Gᵀ`, `W S W = Z`,
/// `G⁻¹ Z G⁻ᵀ = Gᵀ S G = diag(lambda)`.
struct NtScaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    lambda: DVector<f64>,
    chol_z: DMatrix<f64>,
    chol_s: DMatrix<f64>,
}

struct Solver<'a> {
    problem: &'a SdpStandardForm,
    opts: &'a IpmOptions,
    /// indices of kept constraints (presolve)
    kept: Vec<usize>,
    /// row scale factors for kept constraints: scaled row = row / row_scale
    row_scale: Vec<f64>,
    b_scale: f64,
    c_scale: f64,
    dims: Vec<usize>,
    c: BlockMatrix,
    b: DVector<f64>,
    rows: Vec<Vec<Entry>>,
    blocks: Vec<BlockConstraints>,
}

impl<'a> Solver<'a> {
    fn new(problem: &'a SdpStandardForm, opts: &'a IpmOptions) -> Result<Self, SdpError> {
        problem.validate()?;
        opts.validate()?;
        let dims = problem.block_dims.clone();

        let kept = presolve(problem)?;
        let mut rows = Vec::with_capacity(kept.len());
        let mut b = DVector::zeros(kept.len());
        let mut row_scale = Vec::with_capacity(kept.len());
        for (k, &i) in kept.iter().enumerate() {
            let con = &problem.constraints[i];
            let norm = con
                .entries
                .iter()
                .map(|e| if e.row == e.col { e.value * e.value } else { 2.0 * e.value * e.value })
                .sum::<f64>()
                .sqrt();
            let s = if norm > 0.0 { norm } else { 1.0 };
            row_scale.push(s);
            rows.push(
                con.entries
                    .iter()
                    .map(|e| Entry {
                        value: e.value / s,
                        ..*e
                    })
                    .collect::<Vec<_>>(),
            );
            b[k] = con.rhs / s;
        }
        let b_scale = b.norm().max(1.0);
        b /= b_scale;
        let mut c = problem.objective_matrix();
        let c_scale = c.norm().max(1.0);
        c.scale(1.0 / c_scale);

        let mut blocks: Vec<BlockConstraints> = dims
            .iter()
            .map(|&dim| BlockConstraints {
                dim,
                sparse: Vec::new(),
                dense: HashMap::new(),
            })
            .collect();
        for (k, row) in rows.iter().enumerate() {
            let mut per_block: BTreeMap<usize, Vec<(usize, usize, f64)>> = BTreeMap::new();
            for e in row {
                per_block
                    .entry(e.block)
                    .or_default()
                    .push((e.row, e.col, e.value));
            }
            for (blk, local) in per_block {
                let bc = &mut blocks[blk];
                if local.len() > bc.dim {
                    let mut m = DMatrix::zeros(bc.dim, bc.dim);
                    for &(r, cc, v) in &local {
                        m[(r, cc)] += v;
                        if r != cc {
                            m[(cc, r)] += v;
                        }
                    }
                    bc.dense.insert(k, m);
                }
                bc.sparse.push((k, local));
            }
        }
        Ok(Self {
            problem,
            opts,
            kept,
            row_scale,
            b_scale,
            c_scale,
            dims,
            c,
            b,
            rows,
            blocks,
        })
    }

    fn apply(&self, z: &BlockMatrix) -> DVector<f64> {
        DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| inner_sparse(r, z)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> BlockMatrix {
        let mut out = BlockMatrix::zeros(&self.dims);
        for (r, &yi) in self.rows.iter().zip(y.iter()) {
            out.add_entries(r, yi);
        }
        out
    }

    fn nt_scaling(z: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<NtScaling> {
        let lz = z.clone().cholesky()?.l();
        let ls = s.clone().cholesky()?.l();
        let prod = ls.transpose() * &lz;
        let svd = prod.svd(true, true);
        let v = svd.v_t.as_ref()?.transpose();
        let d = svd.singular_values;
        if d.iter().any(|x| !(*x > 0.0)) {
            return None;
        }
        let n = z.nrows();
        let mut g = &lz * &v;
        for j in 0..n {
            let f = 1.0 / d[j].sqrt();
            g.column_mut(j).scale_mut(f);
        }
        // G⁻¹ = D^{1/2} Vᵀ L⁻¹
        let lz_inv = lz.clone().solve_lower_triangular(&DMatrix::identity(n, n))?;
        let mut g_inv = v.transpose() * lz_inv;
        for i in 0..n {
            let f = d[i].sqrt();
            g_inv.row_mut(i).scale_mut(f);
        }
        let mut w = &g * g.transpose();
        symmetrize(&mut w);
        Some(NtScaling {
            g,
            g_inv,
            w,
            lambda: d,
            chol_z: lz,
            chol_s: ls,
        })
    }

    /// Dense Schur complement `M_ij = ⟨A_i, W A_j W⟩`.
    fn schur(&self, scalings: &[NtScaling]) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut schur = DMatrix::zeros(m, m);
        for (bc, nt) in self.blocks.iter().zip(scalings) {
            let w = &nt.w;
            let n = bc.dim;
            let mut v = DMatrix::zeros(n, n);
            for (jpos, (j, local_j)) in bc.sparse.iter().enumerate() {
                // V = W A_j W
                if let Some(aj) = bc.dense.get(j) {
                    v = w * aj * w;
                } else {
                    v.fill(0.0);
                    for &(r, c, val) in local_j {
                        let wr = w.column(r);
                        let wc = w.column(c);
                        v.ger(val, &wr, &wc, 1.0);
                        if r != c {
                            v.ger(val, &wc, &wr, 1.0);
                        }
                    }
                }
                for (i, local_i) in bc.sparse[..=jpos].iter() {
                    let mut acc = 0.0;
                    for &(r, c, val) in local_i {
                        let t = val * v[(r, c)];
                        acc += if r == c { t } else { 2.0 * t };
                    }
                    schur[(*i, *j)] += acc;
                    if i != j {
                        schur[(*j, *i)] += acc;
                    }
                }
            }
        }
        schur
    }

    fn factor_schur(&self, schur: DMatrix<f64>) -> Option<SchurSystem> {
        let m = schur.nrows();
        let scale = DVector::from_iterator(
            m,
            (0..m).map(|i| {
                let d = schur[(i, i)];
                if d > 0.0 {
                    1.0 / d.sqrt()
                } else {
                    1.0
                }
            }),
        );
        let mut eq = schur.clone();
        for j in 0..m {
            for i in 0..m {
                eq[(i, j)] *= scale[i] * scale[j];
            }
        }
        if self.opts.regularization > 0.0 {
            for i in 0..m {
                eq[(i, i)] += self.opts.regularization;
            }
        }
        let factor = if let Some(c) = eq.clone().cholesky() {
            SchurFactor::Cholesky(c)
        } else {
            let lu = eq.clone().lu();
            if lu.is_invertible() && lu.u().diagonal().iter().all(|d| d.is_finite() && d.abs() > 1e-300) {
                SchurFactor::Lu(lu)
            } else {
                // diagonal perturbation escalation on the equilibrated matrix
                let mut found = None;
                let mut delta = 1e-14;
                while delta <= 1e-8 * 1.0001 {
                    let mut shifted = eq.clone();
                    for i in 0..m {
                        shifted[(i, i)] += delta;
                    }
                    if let Some(ch) = shifted.cholesky() {
                        found = Some(ch);
                        break;
                    }
                    delta *= 10.0;
                }
                SchurFactor::Cholesky(found?)
            }
        };
        Some(SchurSystem {
            matrix: schur,
            scale,
            factor,
        })
    }

    /// Solve the Newton system for right-hand side `rc` of the complementarity
    /// equation `ΔZ + W ΔS W = rc`.
    fn direction(
        &self,
        schur: &SchurSystem,
        scalings: &[NtScaling],
        rp: &DVector<f64>,
        rd: &BlockMatrix,
        rc: &BlockMatrix,
    ) -> (BlockMatrix, DVector<f64>, BlockMatrix) {
        // M Δy = rp − A(rc) + A(W rd W)
        let mut wrdw = rd.clone();
        for (blk, nt) in wrdw.blocks.iter_mut().zip(scalings) {
            *blk = &nt.w * &*blk * &nt.w;
        }
        let rhs = rp - self.apply(rc) + self.apply(&wrdw);
        let dy = schur.solve(&rhs);
        let mut ds = rd.clone();
        ds.axpy(-1.0, &self.adjoint(&dy));
        ds.symmetrize();
        let mut dz = rc.clone();
        for ((dzb, dsb), nt) in dz.blocks.iter_mut().zip(&ds.blocks).zip(scalings) {
            *dzb -= &nt.w * dsb * &nt.w;
        }
        dz.symmetrize();
        (dz, dy, ds)
    }

    /// Largest α ≤ `cap` with `L Lᵀ + α D ⪰ 0` given the Cholesky factor `L`.
    fn max_step(chol: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
        let Some(t) = chol.clone().solve_lower_triangular(d) else {
            return 0.0;
        };
        let Some(mut m) = chol.clone().solve_lower_triangular(&t.transpose()) else {
            return 0.0;
        };
        symmetrize(&mut m);
        let lmin = symmetric_min_eigenvalue(&m);
        if lmin >= 0.0 {
            f64::INFINITY
        } else {
            -1.0 / lmin
        }
    }

    fn step_lengths(
        scalings: &[NtScaling],
        dz: &BlockMatrix,
        ds: &BlockMatrix,
    ) -> (f64, f64) {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for ((nt, dzb), dsb) in scalings.iter().zip(&dz.blocks).zip(&ds.blocks) {
            ap = ap.min(Self::max_step(&nt.chol_z, dzb));
            ad = ad.min(Self::max_step(&nt.chol_s, dsb));
        }
        (ap, ad)
    }

    /// Complementarity right-hand side `G R̃ Gᵀ` with
    /// `R̃_ij = 2(σμ δ_ij − λ_i² δ_ij − Ξ_ij)/(λ_i + λ_j)`.
    fn complementarity_rhs(
        scalings: &[NtScaling],
        sigma_mu: f64,
        second_order: Option<(&BlockMatrix, &BlockMatrix)>,
    ) -> BlockMatrix {
        let blocks = scalings
            .iter()
            .enumerate()
            .map(|(b, nt)| {
                let n = nt.lambda.len();
                let xi = second_order.map(|(dz, ds)| {
                    let dzt = &nt.g_inv * &dz.blocks[b] * nt.g_inv.transpose();
                    let dst = nt.g.transpose() * &ds.blocks[b] * &nt.g;
                    let p = &dzt * &dst;
                    (&p + p.transpose()) * 0.5
                });
                let mut r = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let li = nt.lambda[i];
                        let lj = nt.lambda[j];
                        let mut num = if i == j { sigma_mu - li * li } else { 0.0 };
                        if let Some(xi) = &xi {
                            num -= xi[(i, j)];
                        }
                        r[(i, j)] = 2.0 * num / (li + lj);
                    }
                }
                let mut out = &nt.g * r * nt.g.transpose();
                symmetrize(&mut out);
                out
            })
            .collect();
        BlockMatrix { blocks }
    }

    /// Per-block multiples of the identity sized from the scaled data:
    /// `ζ_j = max(10, √n_j, n_j max_k (1 + |b_k|)/(1 + ‖A_kj‖))` for the primal
    /// and `η_j = max(10, √n_j, max_k ‖A_kj‖, ‖C_j‖)` for the slack.
    fn initial_point(&self) -> (BlockMatrix, BlockMatrix) {
        let nb = self.dims.len();
        let mut a_norm = vec![vec![0.0_f64; self.rows.len()]; nb];
        for (k, row) in self.rows.iter().enumerate() {
            for e in row {
                let w = if e.row == e.col { 1.0 } else { 2.0 };
                a_norm[e.block][k] += w * e.value * e.value;
            }
        }
        let mut z = Vec::with_capacity(nb);
        let mut s = Vec::with_capacity(nb);
        for (j, &dim) in self.dims.iter().enumerate() {
            let n = dim as f64;
            let mut zeta = n.sqrt().max(10.0);
            let mut eta = n.sqrt().max(10.0).max(self.c.blocks[j].norm());
            for (k, &sq) in a_norm[j].iter().enumerate() {
                if sq > 0.0 {
                    let norm = sq.sqrt();
                    zeta = zeta.max(n * (1.0 + self.b[k].abs()) / (1.0 + norm));
                    eta = eta.max(norm);
                }
            }
            z.push(DMatrix::identity(dim, dim) * zeta);
            s.push(DMatrix::identity(dim, dim) * eta);
        }
        (BlockMatrix { blocks: z }, BlockMatrix { blocks: s })
    }

    fn run(&self, start: Start, mut log: Option<&mut dyn Write>) -> Result<SdpSolution, SdpError> {
        let n_total: usize = self.dims.iter().sum();
        let nf = n_total.max(1) as f64;
        let gamma = self.opts.step_fraction;

        let (mut z, mut s) = match start {
            Start::Unit => {
                let lambda0 = 1.0_f64.max(self.b.amax()).max(self.c.norm());
                (
                    BlockMatrix::scaled_identity(&self.dims, lambda0),
                    BlockMatrix::scaled_identity(&self.dims, lambda0),
                )
            }
            Start::DataScaled => self.initial_point(),
        };
        let mut y = DVector::zeros(self.rows.len());

        let mut history = Vec::new();
        let mut status = SolveStatus::MaxIterations;
        let mut iterations = 0;
        let mut failure: Option<&str> = None;
        let mut best: Option<(f64, BlockMatrix, DVector<f64>, BlockMatrix)> = None;
        let mut stalled = 0;

        for iter in 0..=self.opts.max_iterations {
            let rp = &self.b - self.apply(&z);
            let mut rd = self.c.clone();
            rd.axpy(-1.0, &s);
            rd.axpy(-1.0, &self.adjoint(&y));
            let mu = z.inner(&s) / nf;

            let merit = self.merit(&z, &s, &rp, &rd);
            if merit <= 1.0 {
                status = SolveStatus::Optimal;
                break;
            }
            if best.as_ref().is_none_or(|b| merit < b.0) {
                best = Some((merit, z.clone(), y.clone(), s.clone()));
            }
            if iter == self.opts.max_iterations {
                break;
            }
            iterations = iter + 1;

            let scalings: Option<Vec<NtScaling>> = z
                .blocks
                .iter()
                .zip(&s.blocks)
                .map(|(zb, sb)| Self::nt_scaling(zb, sb))
                .collect();
            let Some(scalings) = scalings else {
                status = SolveStatus::NumericalFailure;
                failure = Some("scaling: iterate left the cone");
                break;
            };
            let Some(chol) = self.factor_schur(self.schur(&scalings)) else {
                status = SolveStatus::NumericalFailure;
                failure = Some("Schur complement not factorizable");
                break;
            };

            // predictor
            let rc_aff = Self::complementarity_rhs(&scalings, 0.0, None);
            let (dz_a, _dy_a, ds_a) = self.direction(&chol, &scalings, &rp, &rd, &rc_aff);
            let (ap_a, ad_a) = Self::step_lengths(&scalings, &dz_a, &ds_a);
            let ap_a = ap_a.min(1.0);
            let ad_a = ad_a.min(1.0);
            let mut z_a = z.clone();
            z_a.axpy(ap_a, &dz_a);
            let mut s_a = s.clone();
            s_a.axpy(ad_a, &ds_a);
            let mu_aff = z_a.inner(&s_a) / nf;
            let mut sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector; when the full step does not shrink the complementarity
            // measure, backtrack along a common step length, then drop the
            // second-order term and raise the centering
            let mut accepted = None;
            let schedule = [(sigma, true), (sigma, false), (sigma.max(0.5), false), (0.9, false)];
            for &(sig, second_order) in &schedule {
                let so = second_order.then_some((&dz_a, &ds_a));
                let rc = Self::complementarity_rhs(&scalings, sig * mu, so);
                let (dz, dy, ds) = self.direction(&chol, &scalings, &rp, &rd, &rc);
                let (ap_max, ad_max) = Self::step_lengths(&scalings, &dz, &ds);
                let ap = (gamma * ap_max).min(1.0);
                let ad = (gamma * ad_max).min(1.0);
                let decreases = |ap: f64, ad: f64| {
                    let mut z_new = z.clone();
                    z_new.axpy(ap, &dz);
                    let mut s_new = s.clone();
                    s_new.axpy(ad, &ds);
                    z_new.inner(&s_new) / nf <= (1.0 - 0.1 * ap.min(ad) * (1.0 - sig)) * mu
                };
                let mut step = decreases(ap, ad).then_some((ap, ad));
                if step.is_none() {
                    let mut alpha = ap.min(ad);
                    while alpha > 1e-12 {
                        alpha *= 0.5;
                        if decreases(alpha, alpha) {
                            step = Some((alpha, alpha));
                            break;
                        }
                    }
                }
                if let Some((ap, ad)) = step {
                    sigma = sig;
                    accepted = Some((dz, dy, ds, ap, ad));
                    break;
                }
            }
            let Some((dz, dy, ds, ap, ad)) = accepted else {
                status = SolveStatus::NumericalFailure;
                failure = Some("no step reduces complementarity");
                break;
            };
            if ap < 1e-12 && ad < 1e-12 {
                status = SolveStatus::NumericalFailure;
                failure = Some("step length collapsed");
                break;
            }
            stalled = if ap.max(ad) < STALL_STEP { stalled + 1 } else { 0 };
            if stalled >= STALL_ITERATIONS {
                status = SolveStatus::NumericalFailure;
                failure = Some("stalled: repeated negligible steps");
                break;
            }

            z.axpy(ap, &dz);
            y.axpy(ad, &dy, 1.0);
            s.axpy(ad, &ds);
            z.symmetrize();
            s.symmetrize();

            let rec = IterationRecord {
                iteration: iter + 1,
                primal_objective: self.c.inner(&z) * self.c_scale * self.b_scale,
                dual_objective: self.b.dot(&y) * self.c_scale * self.b_scale,
                mu: z.inner(&s) / nf * self.c_scale * self.b_scale,
                primal_residual: rp.norm() * self.b_scale,
                dual_residual: rd.norm() * self.c_scale,
                primal_step: ap,
                dual_step: ad,
                centering: sigma,
            };
            if let Some(w) = log.as_deref_mut() {
                let _ = writeln!(
                    w,
                    "iter {:3}  pobj {:+.10e}  dobj {:+.10e}  mu {:.3e}  rp {:.3e}  rd {:.3e}  ap {:.3}  ad {:.3}  sigma {:.3}",
                    rec.iteration,
                    rec.primal_objective,
                    rec.dual_objective,
                    rec.mu,
                    rec.primal_residual,
                    rec.dual_residual,
                    rec.primal_step,
                    rec.dual_step,
                    rec.centering
                );
            }
            history.push(rec);
        }

        if let (Some(reason), Some(w)) = (failure, log) {
            let _ = writeln!(w, "stopped: {reason}");
        }
        if status != SolveStatus::Optimal {
            // fall back to the best iterate seen when progress broke down
            let rp = &self.b - self.apply(&z);
            let mut rd = self.c.clone();
            rd.axpy(-1.0, &s);
            rd.axpy(-1.0, &self.adjoint(&y));
            let last = self.merit(&z, &s, &rp, &rd);
            if let Some((m, bz, by, bs)) = best {
                if m < last {
                    z = bz;
                    y = by;
                    s = bs;
                }
            }
            let rp = &self.b - self.apply(&z);
            let mut rd = self.c.clone();
            rd.axpy(-1.0, &s);
            rd.axpy(-1.0, &self.adjoint(&y));
            if self.merit(&z, &s, &rp, &rd) <= NEAR_OPTIMAL_FACTOR {
                status = SolveStatus::NearOptimal;
            }
        }
        Ok(self.unscale(z, y, s, status, iterations, history))
    }

    /// Largest ratio of (gap, primal residual, dual residual) to its
    /// tolerance, all in original units; ≤ 1 means converged.
    fn merit(&self, z: &BlockMatrix, s: &BlockMatrix, rp: &DVector<f64>, rd: &BlockMatrix) -> f64 {
        let scale = self.c_scale * self.b_scale;
        let pobj = self.c.inner(z) * scale;
        let gap = z.inner(s) * scale;
        let rp_orig = self.unscaled_primal_residual(rp);
        let rd_orig = rd.norm() * self.c_scale;
        let bnorm = self.problem.rhs().norm();
        let cnorm = self.c.norm() * self.c_scale;
        let g = gap / (self.opts.gap_tolerance * (1.0 + pobj.abs()));
        let p = rp_orig / (self.opts.residual_tolerance * (1.0 + bnorm));
        let d = rd_orig / (self.opts.residual_tolerance * (1.0 + cnorm));
        g.max(p).max(d)
    }

    fn unscaled_primal_residual(&self, rp: &DVector<f64>) -> f64 {
        rp.iter()
            .zip(&self.row_scale)
            .map(|(r, s)| (r * s * self.b_scale).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn unscale(
        &self,
        mut z: BlockMatrix,
        y: DVector<f64>,
        mut s: BlockMatrix,
        status: SolveStatus,
        iterations: usize,
        history: Vec<IterationRecord>,
    ) -> SdpSolution {
        let rp = &self.b - self.apply(&z);
        let mut rd = self.c.clone();
        rd.axpy(-1.0, &s);
        rd.axpy(-1.0, &self.adjoint(&y));
        let primal_residual = self.unscaled_primal_residual(&rp);
        let dual_residual = rd.norm() * self.c_scale;
        let gap = z.inner(&s) * self.c_scale * self.b_scale;

        z.scale(self.b_scale);
        s.scale(self.c_scale);
        let mut y_full = DVector::zeros(self.problem.num_constraints());
        for (k, &i) in self.kept.iter().enumerate() {
            y_full[i] = y[k] * self.c_scale / self.row_scale[k];
        }
        let objective = self.problem.objective_matrix().inner(&z);
        let dual_objective = self.problem.rhs().dot(&y_full);
        SdpSolution {
            primal: z,
            y: y_full,
            slack: s,
            objective,
            dual_objective,
            gap,
            primal_residual,
            dual_residual,
            iterations,
            status,
            history,
        }
    }
}

/// Drop empty rows and rows parallel to an earlier row. Returns kept indices.
fn presolve(problem: &SdpStandardForm) -> Result<Vec<usize>, SdpError> {
    let mut seen: HashMap<Vec<(usize, usize, usize, u64)>, (usize, f64)> = HashMap::new();
    let mut kept = Vec::new();
    for (i, con) in problem.constraints.iter().enumerate() {
        let entries = merge_entries(con.entries.clone());
        let Some(lead) = entries.first().map(|e| e.value) else {
            if con.rhs != 0.0 {
                return Err(SdpError::InconsistentZeroRow(i));
            }
            continue;
        };
        let key: Vec<_> = entries
            .iter()
            .map(|e| (e.block, e.row, e.col, (e.value / lead).to_bits()))
            .collect();
        let normalized_rhs = con.rhs / lead;
        match seen.get(&key) {
            Some(&(j, rhs)) => {
                if (rhs - normalized_rhs).abs() > 1e-12 * (1.0 + rhs.abs()) {
                    return Err(SdpError::InconsistentDuplicate(j, i));
                }
            }
            None => {
                seen.insert(key, (i, normalized_rhs));
                kept.push(i);
            }
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn min_eig_program() -> SdpStandardForm {
        // min tr(diag(1,2) Z)  s.t. tr(Z) = 1
        let mut p = SdpStandardForm::new(vec![2]);
        let mut c = LinearForm::new();
        c.add(0, 0, 0, 1.0).add(0, 1, 1, 2.0);
        p.add_objective(c);
        let mut tr = LinearForm::new();
        tr.add(0, 0, 0, 1.0).add(0, 1, 1, 1.0);
        p.add_constraint(tr, 1.0);
        p
    }

    #[test]
    fn linear_form_halves_off_diagonal_coefficients() {
        let mut f = LinearForm::new();
        f.add(0, 0, 1, 1.0).add(0, 1, 0, 1.0).add(0, 2, 2, 3.0);
        let e = f.into_entries();
        assert_eq!(e.len(), 2);
        let z = BlockMatrix {
            blocks: vec![DMatrix::from_row_slice(3, 3, &[1.0, 5.0, 0.0, 5.0, 1.0, 0.0, 0.0, 0.0, 2.0])],
        };
        // Z01 + Z10 + 3 Z22 = 10 + 6
        assert_eq!(inner_sparse(&e, &z), 16.0);
    }

    #[test]
    fn smallest_eigenvalue_program() {
        let p = min_eig_program();
        let sol = solve(&p, &IpmOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-7);
        let z = &sol.primal.blocks[0];
        assert!((z[(0, 0)] - 1.0).abs() < 1e-7 && z[(1, 1)].abs() < 1e-7);
    }

    #[test]
    fn residuals_of_exact_and_wrong_points() {
        let p = min_eig_program();
        let exact = SdpSolution {
            primal: BlockMatrix {
                blocks: vec![DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]))],
            },
            y: DVector::from_vec(vec![1.0]),
            slack: BlockMatrix {
                blocks: vec![DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]))],
            },
            objective: 1.0,
            dual_objective: 1.0,
            gap: 0.0,
            primal_residual: 0.0,
            dual_residual: 0.0,
            iterations: 0,
            status: SolveStatus::Optimal,
            history: vec![],
        };
        let r = residuals(&p, &exact).unwrap();
        assert!(r.primal <= 1e-12 && r.dual <= 1e-12 && r.gap <= 1e-12);

        let mut wrong = exact.clone();
        wrong.primal = BlockMatrix::scaled_identity(&[2], 1.0);
        assert!((residuals(&p, &wrong).unwrap().primal - 1.0).abs() < 1e-15);
    }

    #[test]
    fn presolve_drops_parallel_rows_and_rejects_inconsistent_ones() {
        let mut p = min_eig_program();
        let mut tr2 = LinearForm::new();
        tr2.add(0, 0, 0, 2.0).add(0, 1, 1, 2.0);
        p.add_constraint(tr2, 2.0);
        p.add_constraint(LinearForm::new(), 0.0);
        assert_eq!(presolve(&p).unwrap(), vec![0]);
        let sol = solve(&p, &IpmOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.y.len(), 3);

        let mut bad = min_eig_program();
        let mut tr3 = LinearForm::new();
        tr3.add(0, 0, 0, 1.0).add(0, 1, 1, 1.0);
        bad.add_constraint(tr3, 3.0);
        assert!(matches!(presolve(&bad), Err(SdpError::InconsistentDuplicate(0, 1))));
        let mut zero = min_eig_program();
        zero.add_constraint(LinearForm::new(), 1.0);
        assert!(matches!(presolve(&zero), Err(SdpError::InconsistentZeroRow(1))));
    }

    fn correlation_corner() -> SdpStandardForm {
        let mut p = SdpStandardForm::new(vec![2]);
        let mut c = LinearForm::new();
        c.add(0, 0, 1, 1.0).add(0, 1, 0, 1.0);
        p.add_objective(c);
        for i in 0..2 {
            let mut f = LinearForm::new();
            f.add(0, i, i, 1.0);
            p.add_constraint(f, 1.0);
        }
        p
    }

    #[test]
    fn correlation_corner_program() {
        let sol = solve(&correlation_corner(), &IpmOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective + 2.0).abs() < 1e-7, "{}", sol.objective);
        assert!((sol.primal.blocks[0][(0, 1)] + 1.0).abs() < 1e-6);
        assert!(sol.iterations <= 40);
    }

    #[test]
    fn iterates_are_symmetric_and_psd() {
        for p in [min_eig_program(), correlation_corner()] {
            let sol = solve(&p, &IpmOptions::default()).unwrap();
            assert!(sol.primal.asymmetry() <= 1e-12 && sol.slack.asymmetry() <= 1e-12);
            assert!(sol.primal.min_eigenvalue() >= -1e-10);
            assert!(sol.slack.min_eigenvalue() >= -1e-10);
        }
    }

    #[test]
    fn objective_scales_with_cost_matrix() {
        for p in [min_eig_program(), correlation_corner()] {
            let base = solve(&p, &IpmOptions::default()).unwrap();
            let mut q = p.clone();
            for e in &mut q.objective {
                e.value *= 1e3;
            }
            let scaled = solve(&q, &IpmOptions::default()).unwrap();
            assert_eq!(scaled.status, SolveStatus::Optimal);
            assert!((scaled.objective - 1e3 * base.objective).abs() <= 1e-5 * (1.0 + scaled.objective.abs()));
            assert!(scaled.iterations.abs_diff(base.iterations) <= 3);
        }
    }

    #[test]
    fn complementarity_decreases_monotonically() {
        for p in [min_eig_program(), correlation_corner()] {
            let sol = solve(&p, &IpmOptions::default()).unwrap();
            for w in sol.history.windows(2) {
                assert!(w[1].mu <= w[0].mu * (1.0 + 1e-12), "{} -> {}", w[0].mu, w[1].mu);
            }
        }
    }

    #[test]
    fn reported_residuals_match_recomputation() {
        for p in [min_eig_program(), correlation_corner()] {
            let sol = solve(&p, &IpmOptions::default()).unwrap();
            let r = residuals(&p, &sol).unwrap();
            assert!((r.primal - sol.primal_residual).abs() <= 1e-10);
            assert!((r.dual - sol.dual_residual).abs() <= 1e-10);
            assert!((r.gap - sol.gap).abs() <= 1e-10);
            assert!(meets_tolerances(&p, &r, sol.objective, &IpmOptions::default(), 1.0));
        }
    }

    #[test]
    fn iteration_log_has_one_line_per_iteration() {
        let mut buf = Vec::new();
        let sol = solve_with_log(&min_eig_program(), &IpmOptions::default(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), sol.iterations);
        assert!(text.starts_with("iter   1"));
    }

    #[test]
    fn invalid_options_and_entries() {
        let p = min_eig_program();
        let opts = IpmOptions {
            step_fraction: 1.0,
            ..Default::default()
        };
        assert!(matches!(solve(&p, &opts), Err(SdpError::InvalidOptions(_))));
        let mut q = SdpStandardForm::new(vec![2]);
        let mut f = LinearForm::new();
        f.add(0, 2, 0, 1.0);
        q.add_constraint(f, 1.0);
        assert!(matches!(q.validate(), Err(SdpError::EntryOutOfRange { .. })));
    }
}
