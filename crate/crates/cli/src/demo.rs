//! Built-in demo scenarios on the 1-D Dirichlet-Laplacian eigenbasis:
//! second- and first-order identification with data prescribed at the
//! initial time (`m = 0`) or at the terminal time (`m = 1`).

use crate::config::{
    DataConfig, GridConfig, IdentifyOptions, Kind, OperatorConfig, Route, ScenarioConfig,
    SourceSpec, Tolerances,
};
use crate::error::CliError;

pub const DEMO_NAMES: [&str; 4] = ["example1-m0", "example1-m1", "example2-m0", "example2-m1"];

fn form(name: &str, coefficients: &[f64]) -> SourceSpec {
    SourceSpec {
        form: Some(name.to_string()),
        coefficients: coefficients.to_vec(),
        csv: None,
    }
}

fn base(kind: Kind, kernel: SourceSpec, data: DataConfig) -> ScenarioConfig {
    ScenarioConfig {
        kind,
        output_dir: None,
        grid: GridConfig {
            horizon: 1.0,
            steps: 400,
        },
        operator: OperatorConfig {
            modes: 3,
            basis: "dirichlet-laplacian-1d".into(),
            eigenvalues: None,
            measure_mode: 1,
        },
        kernel: Some(kernel),
        data: Some(data),
        measurement: None,
        tolerances: Tolerances::default(),
        identify: IdentifyOptions::default(),
        oracle: None,
        check: None,
    }
}

fn forcing_triple() -> Vec<SourceSpec> {
    vec![
        form("linear", &[1.0, 1.0]),
        form("linear", &[1.0, 2.0]),
        form("linear", &[1.0, 3.0]),
    ]
}

/// Returns the scenario for a demo name.
pub fn scenario(name: &str) -> Result<ScenarioConfig, CliError> {
    match name {
        // Second-order equation, data at the initial time: generate the
        // measurement with h = 1 + t/2 and recover the kernel from it.
        "example1-m0" => {
            let data = DataConfig {
                u0: Some(vec![1.0, 0.3, -0.2]),
                u1: Some(vec![0.5, -0.1, 0.2]),
                forcing: forcing_triple(),
                ..DataConfig::default()
            };
            Ok(base(Kind::Roundtrip, form("linear", &[1.0, 0.5]), data))
        }
        // Second-order equation, data at the terminal time: the mixed
        // problem with a nonnegative kernel, solvable in every mode.
        "example1-m1" => {
            let data = DataConfig {
                u0: Some(vec![1.0, 0.3, -0.2]),
                u2: Some(vec![0.5, 0.2, -0.1]),
                forcing: forcing_triple(),
                ..DataConfig::default()
            };
            Ok(base(Kind::Bvp2, form("const", &[1.0]), data))
        }
        // First-order equation, initial data: recover l(t) = t from the
        // synthetic measurement.
        "example2-m0" => {
            let data = DataConfig {
                u0: Some(vec![1.0, 0.3, -0.2]),
                forcing: forcing_triple(),
                ..DataConfig::default()
            };
            let mut config = base(Kind::Roundtrip, form("linear", &[0.0, 1.0]), data);
            config.identify = IdentifyOptions {
                route: Route::SecondKind,
                order: 1,
            };
            Ok(config)
        }
        // First-order equation, terminal data: the mixed problem with
        // l ≥ 0, l(0) = 0.
        "example2-m1" => {
            let data = DataConfig {
                u2: Some(vec![0.5, 0.2, -0.1]),
                forcing: forcing_triple(),
                ..DataConfig::default()
            };
            Ok(base(Kind::Bvp1, form("linear", &[0.0, 1.0]), data))
        }
        other => Err(CliError::config(format!(
            "unknown demo '{other}'; available: {}",
            DEMO_NAMES.join(", ")
        ))),
    }
}
