//! End-to-end tests of the `memkern` binary: scenario runs, exit codes,
//! determinism, refinement orders and demos.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_memkern"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .env_remove("MEMKERN_OUTPUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn roundtrip_config(kernel_form: &str, kernel_coeffs: &str, extra: &str) -> String {
    format!(
        r#"
kind = "roundtrip"
output_dir = "out"

[grid]
horizon = 1.0
steps = 400

[operator]
modes = 1
basis = "dirichlet-laplacian-1d"
measure_mode = 1

[kernel]
form = "{kernel_form}"
coefficients = [{kernel_coeffs}]

[data]
u0 = [1.0]
u1 = [0.0]

[[data.forcing]]
form = "linear"
coefficients = [1.0, 1.0]
{extra}
"#
    )
}

#[test]
fn roundtrip_run_writes_artifacts_and_meets_tolerance() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(
        tmp.path(),
        "scenario.toml",
        &roundtrip_config("const", "1.0", ""),
    );
    let out = run_in(tmp.path(), &["run", config.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let outdir = tmp.path().join("out");
    for name in [
        "solution.csv",
        "measurement.csv",
        "kernel_true.csv",
        "kernel_recovered.csv",
        "roundtrip.json",
        "initial_state.csv",
        "summary.txt",
        "manifest.json",
    ] {
        assert!(outdir.join(name).exists(), "missing artifact {name}");
    }

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(outdir.join("roundtrip.json")).unwrap()).unwrap();
    let err = report["max_kernel_error"].as_f64().unwrap();
    assert!(err <= 5e-3, "max kernel error {err}");

    let summary = fs::read_to_string(outdir.join("summary.txt")).unwrap();
    assert!(summary.contains("max kernel error"));

    // The manifest lists a hash for every artifact except itself.
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(outdir.join("manifest.json")).unwrap()).unwrap();
    let artifacts = manifest["artifacts"].as_object().unwrap();
    assert!(artifacts.contains_key("solution.csv"));
    assert!(artifacts.contains_key("summary.txt"));
    assert_eq!(manifest["config"]["kind"], "roundtrip");
}

#[test]
fn degenerate_measurement_exits_with_solver_code() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(
        tmp.path(),
        "scenario.toml",
        r#"
kind = "identify-h"
output_dir = "out"

[grid]
horizon = 1.0
steps = 100

[operator]
modes = 1

[measurement.g]
form = "linear"
coefficients = [0.0, 1.0]

[measurement.psi]
form = "zero"
"#,
    );
    let out = run_in(tmp.path(), &["run", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "expected solver exit code");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("(u0, phi)"),
        "message should name the degenerate condition: {stderr}"
    );
}

#[test]
fn malformed_and_incomplete_configs_exit_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write(tmp.path(), "bad.toml", "kind = ");
    let out = run_in(tmp.path(), &["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    let incomplete = write(
        tmp.path(),
        "incomplete.toml",
        r#"
kind = "bvp2"

[grid]
horizon = 1.0
steps = 100

[operator]
modes = 1

[kernel]
form = "const"
coefficients = [1.0]

[data]
u0 = [1.0]
"#,
    );
    let out = run_in(tmp.path(), &["run", incomplete.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "bvp2 without u2 is a config error"
    );

    let missing = tmp.path().join("nonexistent.toml");
    let out = run_in(tmp.path(), &["run", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn identical_configs_produce_byte_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(
        tmp.path(),
        "scenario.toml",
        &roundtrip_config("linear", "1.0, 0.5", ""),
    );

    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        let run = bin()
            .current_dir(tmp.path())
            .env("MEMKERN_OUTPUT_DIR", out)
            .args(["run", config.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(run.status.success());
    }
    let mut names: Vec<String> = fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        let a = fs::read(out_a.join(&name)).unwrap();
        let b = fs::read(out_b.join(&name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical runs");
    }
}

fn refine_orders(dir: &Path, config: &Path, levels: u32) -> Vec<String> {
    let out = run_in(
        dir,
        &[
            "refine",
            config.to_str().unwrap(),
            "--levels",
            &levels.to_string(),
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.join("out").join("refine.csv")).unwrap();
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().to_string())
        .collect()
}

#[test]
fn refine_roundtrip_observes_second_order() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(
        tmp.path(),
        "scenario.toml",
        &roundtrip_config("const", "1.0", "").replace("steps = 400", "steps = 100"),
    );
    let orders = refine_orders(tmp.path(), &config, 3);
    let last: f64 = orders.last().unwrap().parse().expect("numeric order");
    assert!((1.8..=2.2).contains(&last), "observed order {last}");
}

#[test]
fn refine_trivial_scenario_is_marked_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write(
        tmp.path(),
        "scenario.toml",
        &roundtrip_config("zero", "", "").replace("steps = 400", "steps = 100"),
    );
    let orders = refine_orders(tmp.path(), &config, 2);
    assert!(orders.iter().all(|o| o == "exact"), "orders: {orders:?}");
}

#[test]
fn refine_firstkind_route_loses_one_order() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = "\n[identify]\nroute = \"first-kind\"\norder = 2\n";
    let config = write(
        tmp.path(),
        "scenario.toml",
        &roundtrip_config("const", "1.0", extra).replace("steps = 400", "steps = 100"),
    );
    let orders = refine_orders(tmp.path(), &config, 3);
    let last: f64 = orders.last().unwrap().parse().expect("numeric order");
    assert!((0.8..=1.4).contains(&last), "observed order {last}");
}

#[test]
fn check_scenario_passes_on_exact_synthetic_data() {
    // Generate a measurement with one run, then feed it to a check run.
    let tmp = tempfile::tempdir().unwrap();
    let gen = write(
        tmp.path(),
        "generate.toml",
        r#"
kind = "ivp2"
output_dir = "gen"

[grid]
horizon = 1.0
steps = 200

[operator]
modes = 1

[kernel]
form = "const"
coefficients = [1.0]

[data]
u0 = [1.0]
u1 = [0.5]

[[data.forcing]]
form = "linear"
coefficients = [1.0, 1.0]
"#,
    );
    let out = run_in(tmp.path(), &["run", gen.to_str().unwrap()]);
    assert!(out.status.success());

    let check = write(
        tmp.path(),
        "check.toml",
        r#"
kind = "check"
output_dir = "checked"

[grid]
horizon = 1.0
steps = 200

[operator]
modes = 1

[check]
mode = "second-order"

[data]
u0 = [1.0]
u1 = [0.5]

[[data.forcing]]
form = "linear"
coefficients = [1.0, 1.0]

[measurement.g]
csv = "gen/measurement.csv"

[measurement.psi]
form = "linear"
coefficients = [1.0, 1.0]
"#,
    );
    let out = run_in(tmp.path(), &["run", check.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("checked/compatibility.json")).unwrap(),
    )
    .unwrap();
    for check in report["checks"].as_array().unwrap() {
        assert_eq!(check["pass"], true, "{check}");
    }
}

#[test]
fn demos_run_and_emit_spatial_artifacts() {
    for name in ["example1-m0", "example1-m1", "example2-m0", "example2-m1"] {
        let tmp = tempfile::tempdir().unwrap();
        let out = bin()
            .current_dir(tmp.path())
            .env("MEMKERN_OUTPUT_DIR", tmp.path().join("demo"))
            .args(["demo", name])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{name} stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let dir = tmp.path().join("demo");
        assert!(dir.join("scenario.toml").exists());
        assert!(dir.join("manifest.json").exists());
        assert!(dir.join("summary.txt").exists());
        let spatial = if name.ends_with("m1") {
            "terminal_state.csv"
        } else {
            "initial_state.csv"
        };
        assert!(dir.join(spatial).exists(), "{name}: missing {spatial}");
        let first_line = fs::read_to_string(dir.join(spatial))
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string();
        assert_eq!(first_line, "x,value");
    }
}

#[test]
fn unknown_demo_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["demo", "nope"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn spatial_csv_input_is_projected_onto_modes() {
    let tmp = tempfile::tempdir().unwrap();
    // Sample √2·sin(πx) on 64 uniform points: u0 should project to e₁.
    let mut csv = String::from("x,value\n");
    let m = 64;
    for i in 0..=m {
        let x = i as f64 / m as f64;
        csv.push_str(&format!(
            "{x},{}\n",
            2f64.sqrt() * (std::f64::consts::PI * x).sin()
        ));
    }
    write(tmp.path(), "u0.csv", &csv);
    let config = write(
        tmp.path(),
        "scenario.toml",
        r#"
kind = "ivp2"
output_dir = "out"

[grid]
horizon = 1.0
steps = 100

[operator]
modes = 2

[kernel]
form = "const"
coefficients = [1.0]

[data]
u0_spatial_csv = "u0.csv"

[[data.forcing]]
form = "zero"

[[data.forcing]]
form = "zero"
"#,
    );
    let out = run_in(tmp.path(), &["run", config.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    // Mode 2 receives (numerically) nothing; mode 1 starts at 1.
    let solution = fs::read_to_string(tmp.path().join("out/solution.csv")).unwrap();
    let first_row = solution.lines().nth(1).unwrap();
    let cols: Vec<f64> = first_row.split(',').map(|v| v.parse().unwrap()).collect();
    assert!(
        (cols[1] - 1.0).abs() <= 1e-6,
        "mode 1 initial value {}",
        cols[1]
    );
    assert!(cols[2].abs() <= 1e-6, "mode 2 initial value {}", cols[2]);
}

#[test]
fn analytic_derivative_traces_drive_the_identification() {
    let tmp = tempfile::tempdir().unwrap();
    let pi2 = std::f64::consts::PI.powi(2);
    // g = 1 + t², ψ = 2 − π²(t + t³/3): the true kernel is h ≡ 1, and with
    // analytic g′, g″, g‴, ψ′ supplied the recovery is exact to roundoff.
    let config = write(
        tmp.path(),
        "scenario.toml",
        &format!(
            r#"
kind = "identify-h"
output_dir = "out"

[grid]
horizon = 1.0
steps = 200

[operator]
modes = 1

[measurement.g]
form = "poly"
coefficients = [1.0, 0.0, 1.0]

[measurement.g1]
form = "linear"
coefficients = [0.0, 2.0]

[measurement.g2]
form = "const"
coefficients = [2.0]

[measurement.g3]
form = "zero"

[measurement.psi]
form = "poly"
coefficients = [2.0, {mp}, 0.0, {mp3}]

[measurement.psi_deriv]
form = "poly"
coefficients = [{mp}, 0.0, {mp}]

[oracle.kernel]
form = "const"
coefficients = [1.0]
"#,
            mp = -pi2,
            mp3 = -pi2 / 3.0,
        ),
    );
    let out = run_in(tmp.path(), &["run", config.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/identify.json")).unwrap())
            .unwrap();
    assert_eq!(report["derivatives"], "analytic");
    let err = report["max_error_vs_true"].as_f64().unwrap();
    assert!(err <= 1e-10, "analytic-path kernel error {err}");
}
