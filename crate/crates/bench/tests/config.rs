//! Parsing and validation of benchmark and sweep files.

use fcmg_bench::config::ProblemConfig;
use fcmg_bench::{BenchmarkConfig, ConfigError, ModeName, SmootherName, SweepSpec};

const MINIMAL: &str = r#"
[problem]
kind = "rotated-square"
angle_deg = 30.0

[discretization]
h = 0.125
p = 2

[solver]
mode = "cg+mg"
smoother = "patchwise"
"#;

fn error_path(text: &str) -> String {
    match BenchmarkConfig::from_toml(text) {
        Err(ConfigError::Invalid { path, .. }) => path,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn minimal_config_gets_defaults() {
    let c = BenchmarkConfig::from_toml(MINIMAL).unwrap();
    assert_eq!(c.problem, ProblemConfig::RotatedSquare { angle_deg: 30.0 });
    assert_eq!(c.solver.tol, 1e-9);
    assert_eq!(c.solver.max_it, 500);
    assert_eq!(c.discretization.k, 0);
    assert_eq!(c.output.name, "run");
    let s = c.solver_config();
    assert_eq!(s.cycle.pre_steps, s.cycle.post_steps);
}

#[test]
fn negative_angle_names_the_field() {
    let text = MINIMAL.replace("angle_deg = 30.0", "angle_deg = -5.0");
    assert_eq!(error_path(&text), "problem.angle_deg");
    let e = BenchmarkConfig::from_toml(&text).unwrap_err().to_string();
    assert!(e.starts_with("problem.angle_deg:"), "{e}");
}

#[test]
fn every_constant_is_checked() {
    let cases = [
        ("h = 0.125", "h = 0.0", "discretization.h"),
        ("h = 0.125", "n = 0", "discretization.n"),
        ("h = 0.125", "", "discretization.h"),
        ("p = 2", "p = 0", "discretization.p"),
        ("smoother = \"patchwise\"", "smoother = \"patchwise\"\nomega = -1.0", "solver.omega"),
        ("smoother = \"patchwise\"", "smoother = \"patchwise\"\ntol = 0.0", "solver.tol"),
        ("smoother = \"patchwise\"", "smoother = \"patchwise\"\nmax_it = 0", "solver.max_it"),
        ("smoother = \"patchwise\"", "smoother = \"patchwise\"\nsmoothing_steps = 0", "solver.smoothing_steps"),
    ];
    for (from, to, path) in cases {
        assert_eq!(error_path(&MINIMAL.replace(from, to)), path, "{to}");
    }
    let fcm = format!("{MINIMAL}\n[fcm]\nalpha = 2.0\n");
    assert_eq!(error_path(&fcm), "fcm.alpha");
    let fcm = format!("{MINIMAL}\n[fcm]\nbeta = -1.0\n");
    assert_eq!(error_path(&fcm), "fcm.beta");
    let out = format!("{MINIMAL}\n[output]\nsolution_grid = 1\n");
    assert_eq!(error_path(&out), "output.solution_grid");
}

#[test]
fn type_errors_carry_the_path() {
    assert_eq!(error_path(&MINIMAL.replace("p = 2", "p = \"two\"")), "discretization.p");
    assert_eq!(error_path(&MINIMAL.replace("\"patchwise\"", "\"sor\"")), "solver.smoother");
    assert_eq!(error_path(&MINIMAL.replace("\"cg+mg\"", "\"gmres\"")), "solver.mode");
    assert_eq!(error_path(&MINIMAL.replace("p = 2", "p = 2\nq = 1")), "discretization.q");
}

#[test]
fn element_count_maps_to_size() {
    let c = BenchmarkConfig::from_toml(&MINIMAL.replace("h = 0.125", "n = 16")).unwrap();
    assert_eq!(c.h(), 1.0 / 16.0);
    let plate = MINIMAL.replace("kind = \"rotated-square\"\nangle_deg = 30.0", "kind = \"perforated-plate\"").replace("h = 0.125", "n = 32");
    let c = BenchmarkConfig::from_toml(&plate).unwrap();
    assert_eq!(c.h(), 0.125);
}

#[test]
fn config_round_trips_through_toml() {
    let c = BenchmarkConfig::from_toml(MINIMAL).unwrap();
    let text = toml_text(&c);
    assert_eq!(BenchmarkConfig::from_toml(&text).unwrap(), c);
}

fn toml_text(c: &BenchmarkConfig) -> String {
    // serialize through JSON values, dropping nulls that TOML cannot hold
    fn strip(v: serde_json::Value) -> Option<serde_json::Value> {
        match v {
            serde_json::Value::Null => None,
            serde_json::Value::Object(m) => Some(m.into_iter().filter_map(|(k, v)| strip(v).map(|v| (k, v))).collect()),
            other => Some(other),
        }
    }
    let v = strip(serde_json::to_value(c).unwrap()).unwrap();
    let mut out = String::new();
    for (section, body) in v.as_object().unwrap() {
        out.push_str(&format!("[{section}]\n"));
        for (k, val) in body.as_object().unwrap() {
            out.push_str(&format!("{k} = {val}\n"));
        }
    }
    out
}

const SWEEP: &str = r#"
p = [2, 3]
h = [0.25, 0.125, 0.0625]
smoother = ["elementwise", "patchwise"]

[base]
problem = { kind = "rotated-square", angle_deg = 0.0 }
discretization = { h = 0.25, p = 2 }
solver = { mode = "cg+mg", smoother = "patchwise" }
"#;

#[test]
fn sweep_cells_form_the_product() {
    let s = SweepSpec::from_toml(SWEEP).unwrap();
    let cells = s.cells().unwrap();
    assert_eq!(cells.len(), 2 * 3 * 2);
    // row-major in p, h, k, smoother, mode
    assert_eq!(cells[0].discretization.p, 2);
    assert_eq!(cells[1].solver.smoother, SmootherName::Patchwise);
    assert_eq!(cells[2].h(), 0.125);
    assert_eq!(cells[11].discretization.p, 3);
    assert!(cells.iter().all(|c| c.solver.mode == ModeName::CgMg));
}

#[test]
fn empty_or_invalid_axes_are_rejected() {
    let e = SweepSpec::from_toml(&SWEEP.replace("p = [2, 3]", "p = []")).unwrap_err();
    assert_eq!(e.path(), Some("p"));
    let e = SweepSpec::from_toml(&SWEEP.replace("h = [0.25, 0.125, 0.0625]", "h = [0.25, -1.0]")).unwrap_err();
    assert_eq!(e.path(), Some("base.discretization.h"));
}
