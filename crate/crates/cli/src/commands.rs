use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use wulff_core::analysis::{convergence_sweep, order_report, sweep_csv, AnalysisError, SweepOptions};
use wulff_core::relaxation::{
    assemble_wulff_qcqp, check_assumption_a, enhance, solve_for_spectrum, solve_for_spectrum_logged,
    wulff_rho, Diagnostics,
};
use wulff_core::{
    AnisotropyFn, AugmentationMode, BuiltinCurve, IpmOptions, PlanarCurve, RelaxationError, WulffSolveOptions,
    WulffSolveResult,
};

use crate::output::{ensure_dir, points_csv, sigma_csv, write_json, write_text, BOUNDARY_POINTS};
use crate::{CliError, InputArgs, SolverArgs};

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Source {
    Builtin { name: String, params: Vec<f64>, samples: usize },
    File { path: String },
}

fn load_curve(input: &InputArgs) -> Result<(PlanarCurve, Source), CliError> {
    if let Some(path) = &input.input {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read `{shown}`: {e}")))?;
        if text.trim().is_empty() {
            return Err(CliError::Input(format!("curve file `{shown}` is empty")));
        }
        let curve = PlanarCurve::parse(&text).map_err(|e| {
            let msg = format!("{shown}: {e}");
            if e.is_input_error() {
                CliError::Input(msg)
            } else {
                CliError::Geometry(msg)
            }
        })?;
        return Ok((curve, Source::File { path: shown }));
    }
    let name = input.builtin.as_deref().expect("clap requires --input or --builtin");
    let builtin = BuiltinCurve::from_name(name, &input.params)?;
    let curve = builtin.sample(input.samples)?;
    let source = Source::Builtin {
        name: builtin.name().to_string(),
        params: builtin.params(),
        samples: input.samples,
    };
    Ok((curve, source))
}

fn check_modes(modes: usize) -> Result<(), CliError> {
    if modes < 2 {
        return Err(CliError::Input(format!("--modes must be at least 2, got {modes}")));
    }
    Ok(())
}

fn solve_options(solver: &SolverArgs) -> Result<WulffSolveOptions, CliError> {
    let mut ipm = IpmOptions::default();
    if let Some(tol) = solver.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Input(format!("--tol must be positive, got {tol}")));
        }
        ipm.gap_tolerance = tol;
        ipm.residual_tolerance = tol;
    }
    if let Some(m) = solver.max_iter {
        if m == 0 {
            return Err(CliError::Input("--max-iter must be positive".into()));
        }
        ipm.max_iterations = m;
    }
    Ok(WulffSolveOptions {
        ipm,
        augmentation: solver.augmentation,
        ..WulffSolveOptions::default()
    })
}

fn diagnostics_value(d: &Diagnostics, timings: bool) -> Value {
    let mut v = serde_json::to_value(d).expect("diagnostics serialize");
    if !timings {
        if let Some(obj) = v.as_object_mut() {
            obj.remove("solve_seconds");
        }
    }
    v
}

pub fn spectrum(input: &InputArgs, modes: usize, out: &Path) -> Result<(), CliError> {
    check_modes(modes)?;
    let (curve, source) = load_curve(input)?;
    let spec = curve.length_spectrum(modes)?;
    ensure_dir(out)?;
    write_json(
        out,
        "spectrum.json",
        &json!({
            "source": source,
            "c_re": spec.coeffs().iter().map(|c| c.re).collect::<Vec<_>>(),
            "c_im": spec.coeffs().iter().map(|c| c.im).collect::<Vec<_>>(),
            "length": spec.length(),
            "area": spec.enclosed_area(),
            "K": spec.sample_count(),
        }),
    )?;
    let mut toeplitz = Vec::new();
    let mut gaps = Vec::new();
    for n in 1..=modes {
        toeplitz.push(json!({ "N": n, "value": spec.toeplitz_min_eigenvalue(n)? }));
        if n >= 3 {
            gaps.push(json!({ "N": n, "value": spec.series_estimate_gap(n)? }));
        }
    }
    write_json(
        out,
        "diagnostics.json",
        &json!({
            "toeplitz_min_eig": toeplitz,
            "series_gap": gaps,
            "c1_residual": spec.closure_residual(),
        }),
    )
}

fn write_geometry(sigma: &AnisotropyFn, points: usize, out: &Path) -> Result<(), CliError> {
    write_text(out, "wulff.csv", &points_csv(&sigma.wulff_boundary(points)?))?;
    write_text(out, "frank.csv", &points_csv(&sigma.frank_boundary(points)?))?;
    write_text(out, "sigma.csv", &sigma_csv(&sigma.sample(points)))
}

fn result_value(res: &WulffSolveResult, source: &Source, timings: bool) -> Result<Value, CliError> {
    let last = res.history.last();
    Ok(json!({
        "status": "ok",
        "source": source,
        "modes": res.modes,
        "ratio": res.ratio,
        "wulff_area": res.wulff_area,
        "strength": res.sigma.anisotropy_strength()?,
        "objective": res.objective,
        "certificate_residual": res.certificate.coupling_residual(&res.sigma),
        "diagnostics": diagnostics_value(&res.diagnostics, timings),
        "log": {
            "records": res.history.len(),
            "final": last,
        },
    }))
}

fn failure_value(err: &RelaxationError, source: &Source, modes: usize, timings: bool) -> Value {
    let diagnostics = match err {
        RelaxationError::SolverFailed { diagnostics, .. } => {
            diagnostics.as_ref().as_ref().map(|d| diagnostics_value(d, timings))
        }
        _ => None,
    };
    json!({
        "status": "failed",
        "source": source,
        "modes": modes,
        "error": err.to_string(),
        "diagnostics": diagnostics,
    })
}

pub fn solve(input: &InputArgs, modes: usize, solver: &SolverArgs, out: &Path) -> Result<(), CliError> {
    check_modes(modes)?;
    let opts = solve_options(solver)?;
    let (curve, source) = load_curve(input)?;
    let spec = curve.length_spectrum(modes)?;
    ensure_dir(out)?;
    let mut stderr = std::io::stderr().lock();
    let log = solver.log_iterations.then_some(&mut stderr as &mut dyn Write);
    let res = match solve_for_spectrum_logged(&spec, modes, &opts, log) {
        Ok(r) => r,
        Err(e) => {
            if matches!(e, RelaxationError::SolverFailed { .. } | RelaxationError::OutOfCone { .. }) {
                write_json(out, "result.json", &failure_value(&e, &source, modes, solver.timings))?;
            }
            return Err(e.into());
        }
    };
    write_json(out, "sigma.json", &res.sigma)?;
    write_json(out, "result.json", &result_value(&res, &source, solver.timings)?)?;
    write_geometry(&res.sigma, BOUNDARY_POINTS, out)
}

pub fn geometry(sigma: Option<&Path>, points: usize, out: &Path) -> Result<(), CliError> {
    let path: PathBuf = sigma.map_or_else(|| out.join("sigma.json"), Path::to_path_buf);
    let shown = path.display();
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Input(format!("cannot read `{shown}`: {e}")))?;
    if text.trim().is_empty() {
        return Err(CliError::Input(format!("sigma file `{shown}` is empty")));
    }
    let sigma: AnisotropyFn =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed sigma file `{shown}`: {e}")))?;
    if points < 3 {
        return Err(CliError::Input(format!("--points must be at least 3, got {points}")));
    }
    ensure_dir(out)?;
    write_geometry(&sigma, points, out)
}

pub fn sweep(
    input: &InputArgs,
    ns: &[usize],
    solver: &SolverArgs,
    threads: Option<usize>,
    out: &Path,
) -> Result<(), CliError> {
    let opts = solve_options(solver)?;
    let (curve, _) = load_curve(input)?;
    // timed sweeps run one solve at a time so the clock measures a single solve
    let threads = if solver.timings {
        1
    } else {
        threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    };
    let mut rows = convergence_sweep(&curve, ns, &SweepOptions { solve: opts, threads }).map_err(|e| match e {
        AnalysisError::InvalidModes { .. } => CliError::Input(format!("--modes-list: {e}")),
        other => CliError::Solver(other.to_string()),
    })?;
    if !solver.timings {
        for r in &mut rows {
            r.seconds = f64::NAN;
        }
    }
    ensure_dir(out)?;
    write_text(out, "sweep.csv", &sweep_csv(&rows))?;
    for r in rows.iter().filter(|r| !r.is_ok()) {
        eprintln!("N = {}: {}", r.n, r.error.as_deref().unwrap_or_default());
    }
    if solver.log_iterations {
        for r in rows.iter().filter(|r| r.is_ok()) {
            eprintln!("N = {}: ratio {}, |W| {}", r.n, r.ratio, r.wulff_area);
        }
    }

    let ok = rows.iter().filter(|r| r.is_ok()).count();
    let report = if ok >= 2 {
        serde_json::to_value(order_report(&rows).map_err(|e| CliError::Solver(e.to_string()))?)
            .expect("report serializes")
    } else {
        json!({
            "norm2": [],
            "ratio_excess": null,
            "time": [],
            "notes": [format!("experimental orders need at least two successful solves, got {ok}")],
        })
    };
    write_json(out, "orders.json", &report)?;
    if ok < 2.min(rows.len()) {
        return Err(CliError::Solver(format!("only {ok} of {} solves succeeded", rows.len())));
    }
    Ok(())
}

fn mode_summary(spec: &wulff_core::LengthSpectrum, modes: usize, opts: &WulffSolveOptions) -> Value {
    match solve_for_spectrum(spec, modes, opts) {
        Ok(r) => json!({
            "status": r.diagnostics.status,
            "iterations": r.diagnostics.iterations,
            "num_constraints": r.diagnostics.num_constraints,
            "num_variables": r.diagnostics.num_variables,
            "objective": r.objective,
            "ratio": r.ratio,
            "relaxation_gap": r.diagnostics.relaxation_gap,
            "min_eig_x_minus_xxt": r.diagnostics.min_eig_x_minus_xxt,
        }),
        Err(e) => json!({ "status": "failed", "error": e.to_string() }),
    }
}

pub fn relax_demo(input: &InputArgs, modes: usize, solver: &SolverArgs, out: &Path) -> Result<(), CliError> {
    check_modes(modes)?;
    let opts = solve_options(solver)?;
    let (curve, source) = load_curve(input)?;
    let spec = curve.length_spectrum(modes)?;
    let problem = assemble_wulff_qcqp(&spec, modes)?;
    let rho = wulff_rho(&spec, modes);
    let relaxed = enhance(&problem, opts.augmentation)?;
    ensure_dir(out)?;
    write_text(out, "relaxation.json", &(relaxed.to_json() + "\n"))?;

    let with_mode = |m| WulffSolveOptions {
        augmentation: m,
        ..opts.clone()
    };
    let trace = mode_summary(&spec, modes, &with_mode(AugmentationMode::Trace));
    let full = mode_summary(&spec, modes, &with_mode(AugmentationMode::Full));
    let agreement = match (trace["objective"].as_f64(), full["objective"].as_f64()) {
        (Some(t), Some(f)) => Some((t - f).abs() / t.abs().max(f.abs()).max(1.0)),
        _ => None,
    };
    write_json(
        out,
        "relax_summary.json",
        &json!({
            "source": source,
            "modes": modes,
            "qcqp_variables": problem.dim(),
            "rho": rho,
            "assumption_a_min_eig": check_assumption_a(&problem, rho)?,
            "trace": trace,
            "full": full,
            "objective_relative_difference": agreement,
        }),
    )?;
    if trace["status"] == "failed" && full["status"] == "failed" {
        return Err(CliError::Solver("both augmentations failed; see relax_summary.json".into()));
    }
    Ok(())
}
