//! End-to-end runs of the `gauge` binary: report schema, exit codes,
//! config-file replay, and the documented example invocations.

use std::path::PathBuf;
use std::process::Output;

use serde_json::Value;

fn gauge(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_gauge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf8 stderr")
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "exit: {:?}, stderr: {}", out.status.code(), stderr_str(out));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn tmp_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

const SCHEMA_KEYS: [&str; 9] =
    ["command", "diagnostics", "err_est", "ladder", "limit", "order", "params", "scenario", "verdict"];

fn assert_schema(v: &Value) {
    let keys: Vec<&str> = v.as_object().expect("object").keys().map(|k| k.as_str()).collect();
    assert_eq!(keys, SCHEMA_KEYS);
}

#[test]
fn flux_example_reports_the_wire_charge() {
    let out = gauge(&["flux", "--scenario", "flat_wire", "--alpha", "1", "--patch", "disk:R=1"]);
    let v = report(&out);
    assert_schema(&v);
    assert_eq!(v["command"], "flux");
    assert_eq!(v["scenario"], "flat_wire");
    assert_eq!(v["ladder"].as_array().unwrap().len(), 14);
    let re = v["limit"][0].as_f64().unwrap();
    let im = v["limit"][1].as_f64().unwrap();
    assert!(re.abs() <= 1e-6, "re {re}");
    assert!((im - 2.0 * std::f64::consts::PI).abs() <= 1e-3, "im {im}");
    assert!(v["verdict"].is_null());
}

#[test]
fn holonomy_example_lands_at_minus_i() {
    let out =
        gauge(&["holonomy", "--scenario", "flat_wire", "--alpha", "0.25", "--loop", "circle:R=1"]);
    let v = report(&out);
    assert_schema(&v);
    let re = v["limit"][0].as_f64().unwrap();
    let im = v["limit"][1].as_f64().unwrap();
    assert!(re.abs() <= 1e-6, "re {re}");
    assert!((im + 1.0).abs() <= 1e-6, "im {im}");
    assert!(v["diagnostics"]["g_end"].is_array());
    assert!(v["diagnostics"]["trace"].is_null());
}

#[test]
fn classify_example_grades_the_monopole() {
    let out = gauge(&["classify", "--scenario", "dirac_monopole", "--alpha", "1", "--region", "box"]);
    let v = report(&out);
    assert_schema(&v);
    assert_eq!(v["verdict"], Value::Bool(true));
    let order = v["order"].as_f64().unwrap();
    assert!((order - 1.0).abs() <= 0.15, "order {order}");
}

#[test]
fn identical_runs_are_byte_identical() {
    let args =
        ["flux", "--scenario", "flat_wire", "--count", "8", "--tol", "1e-4", "--patch", "disk:R=1"];
    let a = gauge(&args);
    let b = gauge(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn usage_errors_exit_2() {
    let cases: [&[&str]; 4] = [
        &["flux", "--scenario", "bogus"],
        &["flux", "--patch", "disk"],
        &["flux", "--ratio", "1.5"],
        &["warp"],
    ];
    for args in cases {
        let out = gauge(args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
        assert!(out.stdout.is_empty(), "args {args:?} wrote to stdout");
        assert!(!out.stderr.is_empty(), "args {args:?} silent on stderr");
    }
}

#[test]
fn numerical_failure_exits_3_with_diagnostic_json() {
    let out = gauge(&["classify", "--scenario", "flat_wire", "--alpha", "1e308", "--count", "8"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).expect("diagnostic JSON");
    assert_schema(&v);
    assert!(v["verdict"].is_null());
    let msg = v["diagnostics"]["error"].as_str().unwrap();
    assert!(!msg.is_empty());
}

#[test]
fn config_round_trip_replays_identically() {
    let direct = gauge(&[
        "flux",
        "--scenario",
        "flat_wire",
        "--alpha",
        "0.5",
        "--count",
        "8",
        "--tol",
        "1e-4",
        "--patch",
        "disk:R=1.5",
    ]);
    let v = report(&direct);
    let config = v["diagnostics"]["config"].as_str().expect("config echo");
    let path = tmp_path("replay.cfg");
    std::fs::write(&path, config).unwrap();
    let replay = gauge(&["flux", "--config", path.to_str().unwrap()]);
    assert!(replay.status.success());
    assert_eq!(direct.stdout, replay.stdout);
}

#[test]
fn out_csv_writes_the_ladder() {
    let path = tmp_path("ladder.csv");
    let out = gauge(&[
        "flux",
        "--scenario",
        "flat_wire",
        "--count",
        "8",
        "--tol",
        "1e-4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "epsilon,value_re,value_im");
    assert_eq!(lines.len(), 9, "header plus one line per rung");
}

#[test]
fn list_scenarios_names_all_three() {
    let out = gauge(&["list-scenarios"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    for name in ["flat_wire", "dirac_monopole", "su2_singular"] {
        assert!(text.contains(name), "missing {name} in {text}");
    }
}

#[test]
fn su2_integer_coupling_warns_on_stderr() {
    let warned = gauge(&[
        "holonomy", "--scenario", "su2_singular", "--alpha", "0.5", "--step", "0.1", "--count", "8",
    ]);
    assert!(warned.status.success());
    assert!(stderr_str(&warned).contains("warning"), "stderr: {}", stderr_str(&warned));
    let quiet = gauge(&[
        "holonomy", "--scenario", "su2_singular", "--alpha", "0.3", "--step", "0.1", "--count", "8",
    ]);
    assert!(quiet.status.success());
    assert!(!stderr_str(&quiet).contains("warning"));
}

#[test]
fn trace_diagnostics_are_capped() {
    let out = gauge(&[
        "holonomy",
        "--scenario",
        "flat_wire",
        "--step",
        "0.012271846303085129",
        "--count",
        "8",
        "--trace",
    ]);
    let v = report(&out);
    let trace = v["diagnostics"]["trace"].as_array().expect("trace samples");
    assert!(trace.len() <= 128, "trace len {}", trace.len());
    assert!(trace.len() >= 2);
}

#[test]
fn every_command_keeps_the_schema() {
    let runs: [&[&str]; 5] = [
        &["shadow", "--scenario", "flat_wire", "--count", "8", "--tol", "1e-4"],
        &["chern", "--scenario", "dirac_monopole", "--count", "8", "--tol", "1e-4"],
        &["decompose", "--scenario", "dirac_monopole", "--count", "8"],
        &["axioms", "--scenario", "flat_wire", "--count", "8"],
        &["canonicalize", "--scenario", "flat_wire", "--count", "8"],
    ];
    for args in runs {
        let out = gauge(args);
        let v = report(&out);
        assert_schema(&v);
        assert_eq!(v["command"], args[0], "args {args:?}");
    }
    let decomposed = report(&gauge(&["decompose", "--scenario", "dirac_monopole", "--count", "8"]));
    let pieces = decomposed["diagnostics"]["pieces"].as_object().unwrap();
    assert_eq!(pieces.keys().collect::<Vec<_>>(), ["F1", "F2", "F3"]);
    assert_eq!(decomposed["verdict"], Value::Bool(true));
}

#[test]
fn help_and_version_exit_zero() {
    let help = gauge(&["--help"]);
    assert!(help.status.success());
    let text = stdout_str(&help);
    for sub in ["flux", "holonomy", "classify", "shadow", "chern", "list-scenarios"] {
        assert!(text.contains(sub), "help missing {sub}");
    }
    assert!(gauge(&["--version"]).status.success());
}
