//! Grid-refinement harness: reruns a scenario on doubled grids and reports
//! errors against the configured oracle together with observed orders.

use std::path::Path;

use memkern::bvp::{solve_bvp1, solve_bvp2};
use memkern::direct::{solve_ivp1, solve_ivp2, ModalSolution};
use memkern::identify::{identify_h, identify_h_firstkind, identify_h_ip0, identify_l};
use memkern::GridFunction64;

use crate::config::{Kind, Route, ScenarioConfig, SourceSpec};
use crate::error::CliError;
use crate::output::{fmt_float, ArtifactSink};
use crate::runner;

/// Noise floor below which an error is reported as exact rather than given
/// an observed order. Twice-differentiated samples divide float roundoff by
/// Δt², so the floor grows with the step count; genuine discretization
/// errors sit orders of magnitude above it at desk scale.
fn machine_floor(steps: usize) -> f64 {
    1e-12 * (steps as f64).powi(2)
}

pub struct RefineRow {
    pub steps: usize,
    pub error: f64,
    /// `None` for the first row, `Some(order)` otherwise.
    pub order: Option<f64>,
    pub exact: bool,
}

pub fn refine(
    config: &ScenarioConfig,
    base_dir: &Path,
    out_dir: &Path,
    levels: u32,
) -> Result<std::path::PathBuf, CliError> {
    if levels < 2 {
        return Err(CliError::config("refine needs at least 2 levels"));
    }
    ensure_closed_form(config)?;

    let mut rows: Vec<RefineRow> = Vec::new();
    for level in 0..levels {
        let steps = config.grid.steps << level;
        let error = scenario_error(config, base_dir, steps)?;
        let exact = error <= machine_floor(steps);
        let order = rows.last().and_then(|prev| {
            if exact || prev.exact {
                None
            } else {
                Some((prev.error / error).log2())
            }
        });
        rows.push(RefineRow {
            steps,
            error,
            order,
            exact,
        });
    }

    let mut sink = ArtifactSink::new(out_dir)?;
    let mut csv = String::from("steps,error,observed_order\n");
    println!("{:>10} {:>24} {:>16}", "steps", "error", "observed_order");
    for row in &rows {
        let order_label = if row.exact {
            "exact".to_string()
        } else {
            match row.order {
                Some(p) => format!("{p:.4}"),
                None => String::new(),
            }
        };
        println!(
            "{:>10} {:>24} {:>16}",
            row.steps,
            fmt_float(row.error),
            order_label
        );
        csv.push_str(&format!(
            "{},{},{}\n",
            row.steps,
            fmt_float(row.error),
            order_label
        ));
        sink.note(format!(
            "N = {}: error = {} {}",
            row.steps,
            fmt_float(row.error),
            if order_label.is_empty() {
                String::new()
            } else {
                format!("(order {order_label})")
            }
        ));
    }
    sink.write_bytes("refine.csv", csv.as_bytes())?;
    sink.finish(config)
}

/// Max-norm error of the scenario at the given resolution, measured against
/// its oracle.
pub fn scenario_error(
    config: &ScenarioConfig,
    base_dir: &Path,
    steps: usize,
) -> Result<f64, CliError> {
    let mut scaled = config.clone();
    scaled.grid.steps = steps;
    let grid = scaled.time_grid();
    let op = scaled.spectral_operator()?;

    match scaled.kind {
        Kind::Roundtrip => {
            let kernel_true = runner::resolve_kernel(&scaled, base_dir, grid)?;
            let data = runner::resolve_data(&scaled, base_dir, grid, &op)?;
            let (_, rec, _) = runner::roundtrip_recover(&scaled, &kernel_true, &data)?;
            rec.kernel
                .samples()
                .max_difference(kernel_true.samples())
                .map_err(CliError::Solver)
        }
        Kind::IdentifyH | Kind::IdentifyL | Kind::Ip0 => {
            let truth = oracle_kernel(&scaled, base_dir, grid)?;
            let m = scaled
                .measurement
                .as_ref()
                .ok_or_else(|| CliError::config("identification refine needs [measurement]"))?;
            let inp = runner::resolve_measurement(m, base_dir, grid, &op)?;
            let rec = match (scaled.kind, scaled.identify.route) {
                (Kind::IdentifyH, Route::SecondKind) => identify_h(&inp)?,
                (Kind::IdentifyH, Route::FirstKind) => identify_h_firstkind(&inp)?,
                (Kind::Ip0, _) => identify_h_ip0(&inp)?,
                (Kind::IdentifyL, _) => identify_l(&inp)?,
                _ => unreachable!(),
            };
            rec.kernel
                .samples()
                .max_difference(&truth)
                .map_err(CliError::Solver)
        }
        Kind::Ivp2 | Kind::Ivp1 | Kind::Bvp2 | Kind::Bvp1 => {
            let kernel = runner::resolve_kernel(&scaled, base_dir, grid)?;
            let data = runner::resolve_data(&scaled, base_dir, grid, &op)?;
            let sol: ModalSolution<f64> = match scaled.kind {
                Kind::Ivp2 => solve_ivp2(&data, &kernel)?,
                Kind::Ivp1 => solve_ivp1(&data, &kernel)?,
                Kind::Bvp2 => solve_bvp2(&data, &kernel, scaled.tolerances.denominator)?.0,
                Kind::Bvp1 => solve_bvp1(&data, &kernel, scaled.tolerances.denominator)?.0,
                _ => unreachable!(),
            };
            let oracle = scaled
                .oracle
                .as_ref()
                .filter(|o| !o.solution.is_empty())
                .ok_or_else(|| {
                    CliError::config("direct-solve refine needs [oracle] with solution forms")
                })?;
            if oracle.solution.len() != op.modes() {
                return Err(CliError::config(format!(
                    "oracle.solution must list one form per mode ({})",
                    op.modes()
                )));
            }
            let mut worst: f64 = 0.0;
            for (j, spec) in oracle.solution.iter().enumerate() {
                let truth: GridFunction64 =
                    spec.resolve(grid, base_dir, &format!("oracle.solution[{j}]"))?;
                worst = worst.max(
                    sol.mode(j)
                        .max_difference(&truth)
                        .map_err(CliError::Solver)?,
                );
            }
            Ok(worst)
        }
        Kind::Check => Err(CliError::config("kind 'check' has no refinement oracle")),
    }
}

fn oracle_kernel(
    config: &ScenarioConfig,
    base_dir: &Path,
    grid: memkern::TimeGrid64,
) -> Result<GridFunction64, CliError> {
    config
        .oracle
        .as_ref()
        .and_then(|o| o.kernel.as_ref())
        .ok_or_else(|| CliError::config("identification refine needs [oracle] kernel"))?
        .resolve(grid, base_dir, "oracle.kernel")
}

fn ensure_closed_form(config: &ScenarioConfig) -> Result<(), CliError> {
    let mut specs: Vec<(&str, &SourceSpec)> = Vec::new();
    if let Some(k) = &config.kernel {
        specs.push(("kernel", k));
    }
    if let Some(d) = &config.data {
        for f in &d.forcing {
            specs.push(("data.forcing", f));
        }
    }
    if let Some(m) = &config.measurement {
        specs.push(("measurement.g", &m.g));
        specs.push(("measurement.psi", &m.psi));
        for s in [&m.g1, &m.g2, &m.g3, &m.psi_deriv, &m.g0]
            .into_iter()
            .flatten()
        {
            specs.push(("measurement", s));
        }
    }
    if let Some(o) = &config.oracle {
        if let Some(k) = &o.kernel {
            specs.push(("oracle.kernel", k));
        }
        for s in &o.solution {
            specs.push(("oracle.solution", s));
        }
    }
    for (what, spec) in specs {
        if spec.is_csv() {
            return Err(CliError::config(format!(
                "{what}: csv traces cannot be resampled; refine needs closed forms"
            )));
        }
    }
    Ok(())
}
