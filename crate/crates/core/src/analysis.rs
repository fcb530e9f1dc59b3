//! Convergence sweeps over the number of modes, experimental orders and the
//! damped (Fejér) projection onto the truncated cone.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anisotropy::{AnisotropyError, AnisotropyFn};
use crate::curve::PlanarCurve;
use crate::relaxation::{solve_for_spectrum, RelaxationError, WulffSolveOptions};

pub const SWEEP_CSV_HEADER: &str = "N,ratio,wulff_area,norm0,norm1,norm2,seconds,n_c,n_v";

/// Slack allowed when checking that Π is nonincreasing in N.
pub const MONOTONE_TOL: f64 = 1e-6;

/// Below this Π − 1 is treated as zero and no decay order is reported.
pub const RATIO_EXCESS_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("values and N lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("value {value} at position {index} is not positive")]
    NonPositive { index: usize, value: f64 },
    #[error("N list must be strictly increasing with every N >= {min}")]
    InvalidModes { min: usize },
    #[error("damping order must be at least 1")]
    ZeroOrder,
    #[error(transparent)]
    Anisotropy(#[from] AnisotropyError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// Π of the computed σ^N; NaN when the solve failed.
    pub ratio: f64,
    pub wulff_area: f64,
    /// Sobolev norms of orders 0, 1, 2.
    pub norms: [f64; 3],
    /// Wall clock of the solve stage only.
    pub seconds: f64,
    pub n_c: usize,
    pub n_v: usize,
    /// Failure annotation; `None` for a usable solve.
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    fn failed(n: usize, err: &RelaxationError) -> Self {
        let (seconds, n_c, n_v) = match err {
            RelaxationError::SolverFailed {
                diagnostics, ..
            } => match diagnostics.as_ref() {
                Some(d) => (d.solve_seconds, d.num_constraints, d.num_variables),
                None => (f64::NAN, 0, 0),
            },
            _ => (f64::NAN, 0, 0),
        };
        Self {
            n,
            ratio: f64::NAN,
            wulff_area: f64::NAN,
            norms: [f64::NAN; 3],
            seconds,
            n_c,
            n_v,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub solve: WulffSolveOptions,
    /// Worker threads; 1 (the default) runs the solves one after another so
    /// the timing column is meaningful.
    pub threads: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            solve: WulffSolveOptions::default(),
            threads: 1,
        }
    }
}

fn sweep_one(curve: &PlanarCurve, n: usize, opts: &WulffSolveOptions) -> SweepRow {
    let run = || -> Result<SweepRow, RelaxationError> {
        let spec = curve.length_spectrum(n)?;
        let res = solve_for_spectrum(&spec, n, opts)?;
        let s = &res.sigma;
        Ok(SweepRow {
            n,
            ratio: res.ratio,
            wulff_area: res.wulff_area,
            norms: [s.sobolev_norm(0)?, s.sobolev_norm(1)?, s.sobolev_norm(2)?],
            seconds: res.diagnostics.solve_seconds,
            n_c: res.diagnostics.num_constraints,
            n_v: res.diagnostics.num_variables,
            error: None,
        })
    };
    run().unwrap_or_else(|e| SweepRow::failed(n, &e))
}

/// One inverse-Wulff solve per N. Failed solves are annotated in their row
/// and the sweep carries on; rows come back ordered by N.
pub fn convergence_sweep(
    curve: &PlanarCurve,
    ns: &[usize],
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>, AnalysisError> {
    if ns.iter().any(|&n| n < 2) || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::InvalidModes { min: 2 });
    }
    let threads = opts.threads.max(1).min(ns.len().max(1));
    if threads == 1 {
        return Ok(ns.iter().map(|&n| sweep_one(curve, n, &opts.solve)).collect());
    }
    let mut rows: Vec<Option<SweepRow>> = vec![None; ns.len()];
    let next = std::sync::atomic::AtomicUsize::new(0);
    let done = std::sync::Mutex::new(&mut rows);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= ns.len() {
                    break;
                }
                let row = sweep_one(curve, ns[i], &opts.solve);
                done.lock().expect("sweep worker panicked")[i] = Some(row);
            });
        }
    });
    Ok(rows.into_iter().map(|r| r.expect("every N is solved")).collect())
}

/// Indices `i` where `Π(rows[i+1]) > Π(rows[i]) + tol`, among usable pairs.
pub fn monotonicity_violations(rows: &[SweepRow], tol: f64) -> Vec<usize> {
    rows.windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].is_ok() && w[1].is_ok() && w[1].ratio > w[0].ratio + tol)
        .map(|(i, _)| i)
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    // shortest round-trip decimals keep the file byte-for-byte reproducible
    let f = |v: f64| if v.is_finite() { v.to_string() } else { "nan".to_string() };
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            f(r.ratio),
            f(r.wulff_area),
            f(r.norms[0]),
            f(r.norms[1]),
            f(r.norms[2]),
            f(r.seconds),
            r.n_c,
            r.n_v
        );
    }
    out
}

/// Log-ratio slopes `ln(v_{k+1}/v_k) / ln(N_{k+1}/N_k)`.
pub fn experimental_order(values: &[f64], ns: &[usize]) -> Result<Vec<f64>, AnalysisError> {
    if values.len() != ns.len() {
        return Err(AnalysisError::LengthMismatch(values.len(), ns.len()));
    }
    if values.len() < 2 {
        return Err(AnalysisError::TooFew {
            needed: 2,
            got: values.len(),
        });
    }
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(AnalysisError::NonPositive { index, value });
    }
    if ns.contains(&0) || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::InvalidModes { min: 1 });
    }
    Ok(values
        .windows(2)
        .zip(ns.windows(2))
        .map(|(v, n)| (v[1] / v[0]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect())
}

/// `σ̃_k = (N − k)/N · σ_k` for `k < N`; higher modes are dropped and the
/// input is zero-padded if it has fewer than `N` modes.
pub fn damped_projection(coeffs: &[Complex64], n: usize) -> Result<AnisotropyFn, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::ZeroOrder);
    }
    let nf = n as f64;
    let damped = (0..n)
        .map(|k| coeffs.get(k).copied().unwrap_or_default() * ((nf - k as f64) / nf))
        .collect();
    Ok(AnisotropyFn::new(damped)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEntry {
    pub from_n: usize,
    pub to_n: usize,
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// Growth order of `‖σ^N‖_{2,2}`.
    pub norm2: Vec<OrderEntry>,
    /// Decay order of `Π − 1`; `None` when Π − 1 vanishes to tolerance.
    pub ratio_excess: Option<Vec<OrderEntry>>,
    /// Experimental order of time complexity.
    pub time: Vec<OrderEntry>,
    pub notes: Vec<String>,
}

fn pairwise_orders(rows: &[SweepRow], value: impl Fn(&SweepRow) -> f64) -> Result<Vec<OrderEntry>, AnalysisError> {
    let mut out = Vec::new();
    for w in rows.windows(2) {
        if !(w[0].is_ok() && w[1].is_ok()) {
            continue;
        }
        let o = experimental_order(&[value(&w[0]), value(&w[1])], &[w[0].n, w[1].n])?;
        out.push(OrderEntry {
            from_n: w[0].n,
            to_n: w[1].n,
            order: o[0],
        });
    }
    Ok(out)
}

/// Orders between consecutive usable rows; pairs touching a failed row are skipped.
pub fn sobolev_growth_report(rows: &[SweepRow]) -> Result<GrowthReport, AnalysisError> {
    if rows.len() < 3 {
        return Err(AnalysisError::TooFew {
            needed: 3,
            got: rows.len(),
        });
    }
    order_report(rows)
}

/// [`sobolev_growth_report`] without the three-row minimum; a single row
/// simply yields no orders.
pub fn order_report(rows: &[SweepRow]) -> Result<GrowthReport, AnalysisError> {
    let mut notes = Vec::new();
    let failed: Vec<usize> = rows.iter().filter(|r| !r.is_ok()).map(|r| r.n).collect();
    if !failed.is_empty() {
        notes.push(format!("failed solves excluded: N = {failed:?}"));
    }
    let norm2 = pairwise_orders(rows, |r| r.norms[2])?;
    let ok = rows.iter().filter(|r| r.is_ok());
    let ratio_excess = if ok.clone().any(|r| r.ratio - 1.0 <= RATIO_EXCESS_FLOOR) {
        notes.push(format!(
            "ratio - 1 below {RATIO_EXCESS_FLOOR:e}; decay order not applicable"
        ));
        None
    } else {
        Some(pairwise_orders(rows, |r| r.ratio - 1.0)?)
    };
    let time = if ok.clone().all(|r| r.seconds > 0.0) {
        pairwise_orders(rows, |r| r.seconds)?
    } else {
        Vec::new()
    };
    Ok(GrowthReport {
        norm2,
        ratio_excess,
        time,
        notes,
    })
}
