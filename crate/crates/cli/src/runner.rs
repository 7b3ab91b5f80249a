//! Executes one configured scenario and writes its artifacts.

use std::path::{Path, PathBuf};

use serde::Serialize;

use memkern::bvp::{
    check_u_bound, convergence_diagnostic, solve_bvp1, solve_bvp2, BvpModeReport, ProblemOrder,
};
use memkern::direct::{
    initial_accel_defect, measure, residual_ivp1, residual_ivp2, solve_ivp1, solve_ivp2,
    DerivativeSource, MeasurementTrace, ModalSolution,
};
use memkern::identify::{
    check_compatibility, identify_h, identify_h_firstkind, identify_h_ip0, identify_l,
    l0_from_data, CompatibilityMode, IdentificationInput, RecoveredKernel,
};
use memkern::spectral::{project, spatial_nodes, ModalProblemData, SpectralOperator};
use memkern::timegrid::{differentiate, DerivOrder};
use memkern::volterra::Kernel;
use memkern::{GridFunction64, TimeGrid64};

use crate::config::{Kind, MeasurementConfig, Route, ScenarioConfig};
use crate::error::CliError;
use crate::output::{fmt_float, ArtifactSink};

pub fn resolve_kernel(
    config: &ScenarioConfig,
    base_dir: &Path,
    grid: TimeGrid64,
) -> Result<Kernel<f64>, CliError> {
    let spec = config
        .kernel
        .as_ref()
        .ok_or_else(|| CliError::config("missing [kernel] section"))?;
    Ok(Kernel::new(spec.resolve(grid, base_dir, "kernel")?))
}

fn coefficients(
    explicit: &Option<Vec<f64>>,
    spatial_csv: &Option<PathBuf>,
    what: &str,
    op: &SpectralOperator<f64>,
    base_dir: &Path,
) -> Result<Vec<f64>, CliError> {
    if let Some(values) = explicit {
        if values.len() != op.modes() {
            return Err(CliError::config(format!(
                "data.{what} must list exactly {} coefficients",
                op.modes()
            )));
        }
        return Ok(values.clone());
    }
    if let Some(path) = spatial_csv {
        let samples = crate::config::load_spatial_csv(&base_dir.join(path), what)?;
        return project(&samples, op).map_err(CliError::Solver);
    }
    Ok(vec![0.0; op.modes()])
}

pub fn resolve_data(
    config: &ScenarioConfig,
    base_dir: &Path,
    grid: TimeGrid64,
    op: &SpectralOperator<f64>,
) -> Result<ModalProblemData<f64>, CliError> {
    let data = config.data.clone().unwrap_or_default();
    let u0 = coefficients(&data.u0, &data.u0_spatial_csv, "u0", op, base_dir)?;
    let u1 = coefficients(&data.u1, &None, "u1", op, base_dir)?;
    let u2 = coefficients(&data.u2, &data.u2_spatial_csv, "u2", op, base_dir)?;
    let forcing = if data.forcing.is_empty() {
        vec![GridFunction64::zeros(grid); op.modes()]
    } else if data.forcing.len() == op.modes() {
        data.forcing
            .iter()
            .enumerate()
            .map(|(j, spec)| spec.resolve(grid, base_dir, &format!("data.forcing[{j}]")))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        return Err(CliError::config(format!(
            "data.forcing must list one trace per mode ({} entries)",
            op.modes()
        )));
    };
    ModalProblemData::new(op.clone(), u0, u1, u2, forcing).map_err(CliError::Solver)
}

pub fn resolve_measurement(
    m: &MeasurementConfig,
    base_dir: &Path,
    grid: TimeGrid64,
    op: &SpectralOperator<f64>,
) -> Result<IdentificationInput<f64>, CliError> {
    let g = m.g.resolve(grid, base_dir, "measurement.g")?;
    let trace = match (&m.g1, &m.g2, &m.g3) {
        (None, None, None) => MeasurementTrace::sampled(g),
        (g1, g2, g3) => {
            let resolve = |spec: &Option<crate::config::SourceSpec>, what: &str| {
                spec.as_ref()
                    .map(|s| s.resolve(grid, base_dir, what))
                    .transpose()
            };
            MeasurementTrace::analytic(
                g,
                resolve(g1, "measurement.g1")?,
                resolve(g2, "measurement.g2")?,
                resolve(g3, "measurement.g3")?,
            )
            .map_err(CliError::Solver)?
        }
    };
    let psi = m.psi.resolve(grid, base_dir, "measurement.psi")?;
    let lambda0 = m.lambda0.unwrap_or_else(|| op.measured_eigenvalue());
    let mut inp = IdentificationInput::new(trace, psi, lambda0).map_err(CliError::Solver)?;
    if let Some(spec) = &m.psi_deriv {
        inp = inp
            .with_psi_deriv(spec.resolve(grid, base_dir, "measurement.psi_deriv")?)
            .map_err(CliError::Solver)?;
    }
    if let Some(spec) = &m.g0 {
        inp = inp
            .with_g0(spec.resolve(grid, base_dir, "measurement.g0")?)
            .map_err(CliError::Solver)?;
    }
    if let Some(lambda00) = m.lambda00 {
        inp = inp.with_lambda00(lambda00);
    }
    if let Some(fp) = m.fprime0phi {
        inp = inp.with_fprime0phi(fp);
    }
    Ok(inp)
}

fn source_label(source: DerivativeSource) -> &'static str {
    match source {
        DerivativeSource::Analytic => "analytic",
        DerivativeSource::FiniteDifference => "finite-difference",
    }
}

#[derive(Serialize)]
struct IdentifyReport {
    route: &'static str,
    derivatives: &'static str,
    convolution_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    l0_from_data: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_error_vs_true: Option<f64>,
}

fn write_solution(
    sink: &mut ArtifactSink,
    name: &str,
    sol: &ModalSolution<f64>,
) -> Result<(), CliError> {
    let headers: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=sol.op().modes()).map(|j| format!("mode_{j}")))
        .collect();
    let header_refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let columns: Vec<&GridFunction64> = sol.modes().iter().collect();
    sink.write_traces_csv(name, &header_refs, &columns)
}

fn spatial_snapshot(
    sink: &mut ArtifactSink,
    name: &str,
    op: &SpectralOperator<f64>,
    coeffs: &[f64],
) -> Result<(), CliError> {
    if op.spatial_basis().is_none() {
        return Ok(());
    }
    let xs = spatial_nodes::<f64>(257);
    let field = memkern::spectral::synthesize(coeffs, op, &xs).map_err(CliError::Solver)?;
    sink.write_spatial_csv(name, &xs, &field)
}

/// Runs a scenario, writing artifacts into `out_dir`. Returns the directory.
pub fn run(config: &ScenarioConfig, base_dir: &Path, out_dir: &Path) -> Result<PathBuf, CliError> {
    let mut sink = ArtifactSink::new(out_dir)?;
    let grid = config.time_grid();
    let op = config.spectral_operator()?;
    sink.note(format!(
        "kind = {}; T = {}, N = {}, J = {}, measure mode = {}",
        config.kind.as_str(),
        config.grid.horizon,
        config.grid.steps,
        op.modes(),
        config.operator.measure_mode,
    ));

    match config.kind {
        Kind::Ivp2 => {
            let h = resolve_kernel(config, base_dir, grid)?;
            let data = resolve_data(config, base_dir, grid, &op)?;
            let sol = solve_ivp2(&data, &h)?;
            let trace = measure(&sol);
            write_solution(&mut sink, "solution.csv", &sol)?;
            sink.write_traces_csv("measurement.csv", &["t", "g"], &[trace.g()])?;
            spatial_snapshot(&mut sink, "initial_state.csv", &op, data.u0())?;
            let residual = residual_ivp2(&sol, &h, &data)?;
            let accel = initial_accel_defect(&sol, &data)?;
            #[derive(Serialize)]
            struct Diag {
                equation_residual: f64,
                initial_acceleration_defect: f64,
            }
            sink.write_json(
                "diagnostics.json",
                &Diag {
                    equation_residual: residual,
                    initial_acceleration_defect: accel,
                },
            )?;
            sink.note(format!("equation residual = {}", fmt_float(residual)));
            sink.note(format!("u''(0) - f(0) defect = {}", fmt_float(accel)));
        }
        Kind::Ivp1 => {
            let l = resolve_kernel(config, base_dir, grid)?;
            let data = resolve_data(config, base_dir, grid, &op)?;
            let sol = solve_ivp1(&data, &l)?;
            let trace = measure(&sol);
            write_solution(&mut sink, "solution.csv", &sol)?;
            sink.write_traces_csv("measurement.csv", &["t", "g"], &[trace.g()])?;
            spatial_snapshot(&mut sink, "initial_state.csv", &op, data.u0())?;
            let residual = residual_ivp1(&sol, &l, &data)?;
            #[derive(Serialize)]
            struct Diag {
                equation_residual: f64,
            }
            sink.write_json(
                "diagnostics.json",
                &Diag {
                    equation_residual: residual,
                },
            )?;
            sink.note(format!("equation residual = {}", fmt_float(residual)));
        }
        Kind::Bvp2 | Kind::Bvp1 => {
            let kernel = resolve_kernel(config, base_dir, grid)?;
            let data = resolve_data(config, base_dir, grid, &op)?;
            let tol = config.tolerances.denominator;
            let (sol, reports, order) = if config.kind == Kind::Bvp2 {
                let (sol, reports) = solve_bvp2(&data, &kernel, tol)?;
                (sol, reports, ProblemOrder::SecondOrder)
            } else {
                let (sol, reports) = solve_bvp1(&data, &kernel, tol)?;
                (sol, reports, ProblemOrder::FirstOrder)
            };
            write_solution(&mut sink, "solution.csv", &sol)?;
            sink.write_traces_csv("measurement.csv", &["t", "g"], &[sol.measured_mode()])?;
            spatial_snapshot(&mut sink, "terminal_state.csv", &op, data.u2())?;
            summarize_reports(&mut sink, &reports, &sol, &data);

            // Convergence diagnostic with the recovered constants in the
            // slot the weight formula reads them from.
            let mut with_c = data.clone();
            let c: Vec<f64> = reports.iter().map(|r| r.c).collect();
            match order {
                ProblemOrder::SecondOrder => with_c.set_u1(c).map_err(CliError::Solver)?,
                ProblemOrder::FirstOrder => with_c.set_u0(c).map_err(CliError::Solver)?,
            }
            let diag = convergence_diagnostic(&with_c, &kernel, order)?;

            #[derive(Serialize)]
            struct ModeRow<'a> {
                #[serde(flatten)]
                report: &'a BvpModeReport<f64>,
                l: f64,
                term: f64,
            }
            let rows: Vec<ModeRow> = reports
                .iter()
                .enumerate()
                .map(|(j, report)| ModeRow {
                    report,
                    l: diag.l[j],
                    term: diag.terms[j],
                })
                .collect();
            sink.write_json("mode_reports.json", &rows)?;
            sink.write_json("convergence.json", &diag)?;
            sink.note(format!(
                "series diagnostic: M = {}, tail sum = {}, growing = {}",
                fmt_float(diag.m),
                fmt_float(diag.tail_sum),
                diag.growing
            ));
            if order == ProblemOrder::SecondOrder {
                let bound_ok = check_u_bound(&sol, &diag);
                sink.note(format!("a-priori sup bound holds = {bound_ok}"));
            }
        }
        Kind::IdentifyH | Kind::IdentifyL | Kind::Ip0 => {
            let m = config.measurement.as_ref().unwrap();
            let inp = resolve_measurement(m, base_dir, grid, &op)?;
            let (rec, route, l0, header): (RecoveredKernel<f64>, &str, Option<f64>, &str) =
                match (config.kind, config.identify.route) {
                    (Kind::IdentifyH, Route::SecondKind) => {
                        (identify_h(&inp)?, "second-kind", None, "h")
                    }
                    (Kind::IdentifyH, Route::FirstKind) => {
                        (identify_h_firstkind(&inp)?, "first-kind", None, "h")
                    }
                    (Kind::Ip0, _) => (identify_h_ip0(&inp)?, "second-kind", None, "h"),
                    (Kind::IdentifyL, _) => {
                        let rec = identify_l(&inp)?;
                        let l0 = l0_from_data(&inp)?;
                        (rec, "second-kind", Some(l0), "l")
                    }
                    _ => unreachable!(),
                };
            sink.write_traces_csv("kernel.csv", &["t", header], &[rec.kernel.samples()])?;
            let max_error = oracle_kernel_error(config, base_dir, grid, &rec)?;
            sink.write_json(
                "identify.json",
                &IdentifyReport {
                    route,
                    derivatives: source_label(rec.derivatives_from),
                    convolution_residual: rec.residual,
                    l0_from_data: l0,
                    max_error_vs_true: max_error,
                },
            )?;
            sink.note(format!(
                "recovered {header} via {route} route (derivatives: {}); residual = {}",
                source_label(rec.derivatives_from),
                fmt_float(rec.residual)
            ));
            if let Some(l0) = l0 {
                sink.note(format!("l(0) from data = {}", fmt_float(l0)));
            }
            if let Some(err) = max_error {
                sink.note(format!("max kernel error = {}", fmt_float(err)));
            }
        }
        Kind::Roundtrip => {
            let kernel_true = resolve_kernel(config, base_dir, grid)?;
            let data = resolve_data(config, base_dir, grid, &op)?;
            let (sol, rec, l0) = roundtrip_recover(config, &kernel_true, &data)?;
            write_solution(&mut sink, "solution.csv", &sol)?;
            sink.write_traces_csv("measurement.csv", &["t", "g"], &[sol.measured_mode()])?;
            spatial_snapshot(&mut sink, "initial_state.csv", &op, data.u0())?;
            if let Some(l0) = l0 {
                sink.note(format!("l(0) from data = {}", fmt_float(l0)));
            }
            let err = rec
                .kernel
                .samples()
                .max_difference(kernel_true.samples())
                .map_err(CliError::Solver)?;
            let header = if config.identify.order == 2 { "h" } else { "l" };
            sink.write_traces_csv("kernel_true.csv", &["t", header], &[kernel_true.samples()])?;
            sink.write_traces_csv(
                "kernel_recovered.csv",
                &["t", header],
                &[rec.kernel.samples()],
            )?;
            #[derive(Serialize)]
            struct Roundtrip {
                order: u32,
                route: &'static str,
                derivatives: &'static str,
                max_kernel_error: f64,
                convolution_residual: f64,
            }
            sink.write_json(
                "roundtrip.json",
                &Roundtrip {
                    order: config.identify.order,
                    route: match config.identify.route {
                        Route::SecondKind => "second-kind",
                        Route::FirstKind => "first-kind",
                    },
                    derivatives: source_label(rec.derivatives_from),
                    max_kernel_error: err,
                    convolution_residual: rec.residual,
                },
            )?;
            sink.note(format!("max kernel error = {}", fmt_float(err)));
        }
        Kind::Check => {
            let m = config.measurement.as_ref().unwrap();
            let inp = resolve_measurement(m, base_dir, grid, &op)?;
            let data = resolve_data(config, base_dir, grid, &op)?;
            let mode = match config.check.as_ref().unwrap().mode.as_str() {
                "second-order" => CompatibilityMode::SecondOrder,
                "first-order" => CompatibilityMode::FirstOrder,
                "bvp-first-order" => CompatibilityMode::BvpFirstOrder,
                _ => unreachable!("validated"),
            };
            let report = check_compatibility(&inp, &data, mode)?;
            sink.write_json("compatibility.json", &report)?;
            for check in &report.checks {
                sink.note(format!(
                    "{}: {} (expected {}, actual {}, tolerance {})",
                    check.name,
                    if check.pass { "pass" } else { "FAIL" },
                    fmt_float(check.expected),
                    fmt_float(check.actual),
                    fmt_float(check.tolerance),
                ));
            }
            sink.note(format!("all checks pass = {}", report.all_pass()));
        }
    }

    sink.finish(config)
}

/// Solution, recovered kernel and (first order only) the data value of
/// `l(0)` produced by a round trip.
pub type RoundtripOutcome = (ModalSolution<f64>, RecoveredKernel<f64>, Option<f64>);

/// The round-trip pipeline: synthesize data with the true kernel, measure,
/// identify. Shared by `run` and `refine`.
pub fn roundtrip_recover(
    config: &ScenarioConfig,
    kernel_true: &Kernel<f64>,
    data: &ModalProblemData<f64>,
) -> Result<RoundtripOutcome, CliError> {
    let psi = data.measured_forcing().clone();
    match config.identify.order {
        2 => {
            let sol = solve_ivp2(data, kernel_true)?;
            let trace = measure(&sol);
            let inp = IdentificationInput::new(trace, psi, data.op().measured_eigenvalue())
                .map_err(CliError::Solver)?;
            let rec = match config.identify.route {
                Route::SecondKind => identify_h(&inp)?,
                Route::FirstKind => identify_h_firstkind(&inp)?,
            };
            Ok((sol, rec, None))
        }
        1 => {
            let sol = solve_ivp1(data, kernel_true)?;
            let trace = measure(&sol);
            let fprime0 = differentiate(&psi, DerivOrder::First)
                .map_err(CliError::Solver)?
                .first();
            let inp = IdentificationInput::new(trace, psi, data.op().measured_eigenvalue())
                .map_err(CliError::Solver)?
                .with_fprime0phi(fprime0);
            let rec = identify_l(&inp)?;
            let l0 = l0_from_data(&inp)?;
            Ok((sol, rec, Some(l0)))
        }
        other => Err(CliError::config(format!(
            "identify.order must be 1 or 2, got {other}"
        ))),
    }
}

fn oracle_kernel_error(
    config: &ScenarioConfig,
    base_dir: &Path,
    grid: TimeGrid64,
    rec: &RecoveredKernel<f64>,
) -> Result<Option<f64>, CliError> {
    let Some(oracle) = &config.oracle else {
        return Ok(None);
    };
    let Some(spec) = &oracle.kernel else {
        return Ok(None);
    };
    let truth = spec.resolve(grid, base_dir, "oracle.kernel")?;
    Ok(Some(
        rec.kernel
            .samples()
            .max_difference(&truth)
            .map_err(CliError::Solver)?,
    ))
}

fn summarize_reports(
    sink: &mut ArtifactSink,
    reports: &[BvpModeReport<f64>],
    sol: &ModalSolution<f64>,
    data: &ModalProblemData<f64>,
) {
    for (j, report) in reports.iter().enumerate() {
        let endpoint_err = (sol.mode(j).last() - data.u2()[j]).abs();
        sink.note(format!(
            "mode {}: status = {:?}, denominator = {}, c = {}, endpoint defect = {}",
            j + 1,
            report.status,
            fmt_float(report.denominator),
            fmt_float(report.c),
            fmt_float(endpoint_err),
        ));
    }
}
