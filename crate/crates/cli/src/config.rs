//! Scenario configuration: a single TOML file describes the problem kind,
//! grid, operator, kernel, data and tolerances.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use memkern::spectral::SpectralOperator;
use memkern::{GridFunction64, TimeGrid64};

use crate::error::CliError;
use crate::forms;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Ivp2,
    Ivp1,
    Bvp2,
    Bvp1,
    IdentifyH,
    IdentifyL,
    Ip0,
    Roundtrip,
    Check,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Ivp2 => "ivp2",
            Kind::Ivp1 => "ivp1",
            Kind::Bvp2 => "bvp2",
            Kind::Bvp1 => "bvp1",
            Kind::IdentifyH => "identify-h",
            Kind::IdentifyL => "identify-l",
            Kind::Ip0 => "ip0",
            Kind::Roundtrip => "roundtrip",
            Kind::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Horizon `T`.
    pub horizon: f64,
    /// Step count `N`.
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    /// Mode count `J`.
    pub modes: usize,
    /// `"dirichlet-laplacian-1d"` (default) or `"eigenvalues"` with an
    /// explicit list.
    #[serde(default = "default_basis")]
    pub basis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    /// Measurement mode `j₀`, 1-based.
    #[serde(default = "default_measure_mode")]
    pub measure_mode: usize,
}

fn default_basis() -> String {
    "dirichlet-laplacian-1d".into()
}

fn default_measure_mode() -> usize {
    1
}

/// A scalar function given either as a named closed form or as a CSV file
/// with columns `t,value`.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coefficients: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl SourceSpec {
    pub fn is_csv(&self) -> bool {
        self.csv.is_some()
    }

    /// Samples or loads the function on the given grid.
    pub fn resolve(
        &self,
        grid: TimeGrid64,
        base_dir: &Path,
        what: &str,
    ) -> Result<GridFunction64, CliError> {
        match (&self.form, &self.csv) {
            (Some(_), Some(_)) => Err(CliError::config(format!(
                "{what}: give either a form or a csv path, not both"
            ))),
            (Some(form), None) => forms::sample(form, &self.coefficients, grid)
                .map_err(|e| CliError::config(format!("{what}: {e}"))),
            (None, Some(path)) => load_trace_csv(&base_dir.join(path), grid, what),
            (None, None) => Err(CliError::config(format!("{what}: missing 'form' or 'csv'"))),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2: Option<Vec<f64>>,
    /// Spatial samples (`x,value` CSV) projected onto the eigenbasis as an
    /// alternative to explicit `u0` coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0_spatial_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u2_spatial_csv: Option<PathBuf>,
    /// One forcing trace per mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forcing: Vec<SourceSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    pub g: SourceSpec,
    pub psi: SourceSpec,
    /// Defaults to the eigenvalue of the measurement mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    /// Analytic derivative traces of g, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g3: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_deriv: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda00: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fprime0phi: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance for the boundary-value denominators.
    #[serde(default = "default_denominator_tol")]
    pub denominator: f64,
}

fn default_denominator_tol() -> f64 {
    memkern::bvp::DEFAULT_DENOMINATOR_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            denominator: default_denominator_tol(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    #[default]
    SecondKind,
    FirstKind,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifyOptions {
    #[serde(default)]
    pub route: Route,
    /// Equation order for `roundtrip` scenarios: 2 recovers `h`, 1
    /// recovers `l`.
    #[serde(default = "default_order")]
    pub order: u32,
}

fn default_order() -> u32 {
    2
}

impl Default for IdentifyOptions {
    fn default() -> Self {
        Self {
            route: Route::SecondKind,
            order: 2,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    /// True kernel, for refinement studies of identification scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<SourceSpec>,
    /// True per-mode solutions, for refinement studies of direct solves.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub solution: Vec<SourceSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOptions {
    /// `second-order`, `first-order` or `bvp-first-order`.
    pub mode: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub grid: GridConfig,
    pub operator: OperatorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub identify: IdentifyOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckOptions>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let config: ScenarioConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("cannot parse {}: {e}", path.display())))?;
        config.validate()?;
        let base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((config, base_dir))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.grid.horizon.is_finite() && self.grid.horizon > 0.0) {
            return Err(CliError::config("grid.horizon must be positive"));
        }
        if self.grid.steps < 8 {
            return Err(CliError::config("grid.steps must be at least 8"));
        }
        if self.operator.modes == 0 {
            return Err(CliError::config("operator.modes must be at least 1"));
        }
        if self.operator.measure_mode == 0 || self.operator.measure_mode > self.operator.modes {
            return Err(CliError::config(format!(
                "operator.measure_mode must lie in 1..={}",
                self.operator.modes
            )));
        }
        match self.operator.basis.as_str() {
            "dirichlet-laplacian-1d" => {}
            "eigenvalues" => {
                let eig = self.operator.eigenvalues.as_deref().unwrap_or_default();
                if eig.len() != self.operator.modes {
                    return Err(CliError::config(
                        "operator.eigenvalues must list exactly operator.modes values",
                    ));
                }
            }
            other => {
                return Err(CliError::config(format!(
                    "unknown operator.basis '{other}'"
                )))
            }
        }
        let needs_kernel = matches!(
            self.kind,
            Kind::Ivp2 | Kind::Ivp1 | Kind::Bvp2 | Kind::Bvp1 | Kind::Roundtrip
        );
        if needs_kernel && self.kernel.is_none() {
            return Err(CliError::config(format!(
                "kind '{}' requires a [kernel] section",
                self.kind.as_str()
            )));
        }
        let needs_data = matches!(
            self.kind,
            Kind::Ivp2 | Kind::Ivp1 | Kind::Bvp2 | Kind::Bvp1 | Kind::Roundtrip | Kind::Check
        );
        if needs_data && self.data.is_none() {
            return Err(CliError::config(format!(
                "kind '{}' requires a [data] section",
                self.kind.as_str()
            )));
        }
        let needs_measurement = matches!(
            self.kind,
            Kind::IdentifyH | Kind::IdentifyL | Kind::Ip0 | Kind::Check
        );
        if needs_measurement && self.measurement.is_none() {
            return Err(CliError::config(format!(
                "kind '{}' requires a [measurement] section",
                self.kind.as_str()
            )));
        }
        if matches!(self.kind, Kind::Bvp2 | Kind::Bvp1) {
            let data = self.data.as_ref().unwrap();
            if data.u2.is_none() && data.u2_spatial_csv.is_none() {
                return Err(CliError::config(
                    "boundary-value kinds require data.u2 (or data.u2_spatial_csv)",
                ));
            }
        }
        if self.kind == Kind::Check && self.check.is_none() {
            return Err(CliError::config("kind 'check' requires a [check] section"));
        }
        if let Some(check) = &self.check {
            if !matches!(
                check.mode.as_str(),
                "second-order" | "first-order" | "bvp-first-order"
            ) {
                return Err(CliError::config(
                    "check.mode must be one of second-order, first-order, bvp-first-order",
                ));
            }
        }
        if self.kind == Kind::Roundtrip && !matches!(self.identify.order, 1 | 2) {
            return Err(CliError::config("identify.order must be 1 or 2"));
        }
        Ok(())
    }

    pub fn time_grid(&self) -> TimeGrid64 {
        TimeGrid64::new(self.grid.horizon, self.grid.steps)
    }

    pub fn spectral_operator(&self) -> Result<SpectralOperator<f64>, CliError> {
        let op = match self.operator.basis.as_str() {
            "dirichlet-laplacian-1d" => {
                SpectralOperator::dirichlet_laplacian_1d(self.operator.modes)
            }
            "eigenvalues" => {
                let eig = self.operator.eigenvalues.clone().unwrap();
                SpectralOperator::new(eig, 0).map_err(CliError::Solver)?
            }
            _ => unreachable!("validated"),
        };
        op.with_measure_index(self.operator.measure_mode - 1)
            .map_err(CliError::Solver)
    }
}

/// Reads a `t,value` CSV whose rows must sit on the scenario grid.
pub fn load_trace_csv(
    path: &Path,
    grid: TimeGrid64,
    what: &str,
) -> Result<GridFunction64, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{what}: cannot read {}: {e}", path.display())))?;
    let mut values = Vec::with_capacity(grid.len());
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let _header = lines
        .next()
        .ok_or_else(|| CliError::config(format!("{what}: {} is empty", path.display())))?;
    for (row, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let t: f64 = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| {
                CliError::config(format!(
                    "{what}: bad t in row {} of {}",
                    row + 1,
                    path.display()
                ))
            })?;
        let v: f64 = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| {
                CliError::config(format!(
                    "{what}: bad value in row {} of {}",
                    row + 1,
                    path.display()
                ))
            })?;
        if values.len() >= grid.len() {
            return Err(CliError::config(format!(
                "{what}: {} has more rows than grid nodes",
                path.display()
            )));
        }
        let expected = grid.node(values.len());
        if (t - expected).abs() > 1e-9 * grid.horizon().max(1.0) {
            return Err(CliError::config(format!(
                "{what}: row {} of {} has t = {t}, expected grid node {expected}",
                row + 1,
                path.display()
            )));
        }
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(CliError::config(format!(
            "{what}: {} has {} rows, expected {}",
            path.display(),
            values.len(),
            grid.len()
        )));
    }
    GridFunction64::from_values(grid, values).map_err(CliError::Solver)
}

/// Reads an `x,value` spatial CSV (uniform grid on [0,1] including the
/// endpoints).
pub fn load_spatial_csv(path: &Path, what: &str) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{what}: cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (row, line) in text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .skip(1)
        .enumerate()
    {
        let mut fields = line.split(',');
        let _x: f64 = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| {
                CliError::config(format!(
                    "{what}: bad x in row {} of {}",
                    row + 1,
                    path.display()
                ))
            })?;
        let v: f64 = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| {
                CliError::config(format!(
                    "{what}: bad value in row {} of {}",
                    row + 1,
                    path.display()
                ))
            })?;
        values.push(v);
    }
    if values.len() < 2 {
        return Err(CliError::config(format!(
            "{what}: {} needs at least 2 rows",
            path.display()
        )));
    }
    Ok(values)
}
