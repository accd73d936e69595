use std::process::{Command, Output};

use serde_json::Value;

fn qcbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcbound")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("qcbound-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Every object with a `value` also names its status and formula.
fn check_quantities(v: &Value, path: &str) {
    match v {
        Value::Object(m) => {
            if m.contains_key("value") && m.contains_key("formula") {
                assert!(m.contains_key("status"), "{path} lacks a status");
            }
            for (k, x) in m {
                check_quantities(x, &format!("{path}.{k}"));
            }
        }
        Value::Array(a) => a.iter().for_each(|x| check_quantities(x, path)),
        _ => {}
    }
}

#[test]
fn bound_reports_every_factor() {
    let out = qcbound(&["bound", "--map", "ellipse:2,1", "--p", "1.9", "--alpha", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "bound");
    let b = &v["bound"];
    for key in ["p", "alpha", "K", "beta0", "r", "q_star", "disc_constant", "comp_norm", "jac_integral", "jac_factor", "bound_value", "mu_lower"] {
        assert!(b[key]["value"].is_number(), "{key}");
        assert!(b[key]["status"].is_string(), "{key}");
        assert!(b[key]["formula"].is_string(), "{key}");
    }
    assert!((b["q_star"]["value"].as_f64().unwrap() - 1.52).abs() < 1e-3);
    assert!((b["mu_lower"]["value"].as_f64().unwrap() - 0.004445).abs() < 1e-6);
    check_quantities(&v, "");
}

#[test]
fn p_outside_range_is_a_usage_error() {
    let out = qcbound(&["bound", "--map", "identity", "--p", "2.5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("admissible interval (") && err.contains(", 2)"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flags_and_maps_are_usage_errors() {
    assert_eq!(qcbound(&["bound", "--p", "x"]).status.code(), Some(1));
    assert_eq!(qcbound(&["bound", "--map", "hexagon:1"]).status.code(), Some(1));
    assert_eq!(qcbound(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qcbound(&["bound", "--set", "quad.colour=1"]).status.code(), Some(1));
    assert_eq!(qcbound(&["--help"]).status.code(), Some(0));
}

#[test]
fn star_source_is_flagged() {
    let v = json(&qcbound(&["bound", "--map", "star:1", "--p", "1.8", "--alpha", "4"]));
    assert_eq!(v["bound"]["source_domain"], "centered_square");
    assert_eq!(v["bound"]["square_source"], true);
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch("config");
    let conf = dir.join("run.conf");
    std::fs::write(&conf, "# test\nmap = ellipse:2,1\np = 1.95\nalpha = 4\nquad.angular = 64\n").unwrap();
    let v = json(&qcbound(&["bound", "--config", conf.to_str().unwrap(), "--p", "1.9"]));
    assert_eq!(v["config"]["map"], "ellipse:2,1");
    assert_eq!(v["config"]["p"], 1.9);
    assert_eq!(v["config"]["quad"]["angular"], 64);
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn csv_output_and_out_file() {
    let dir = scratch("csv");
    let path = dir.join("b.csv");
    let out = qcbound(&["bound", "--map", "identity", "--alpha", "8", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("map,p,alpha,K,q_star"));
    assert!(lines[1].starts_with("identity,1.9,8,1,"));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn regularity_tables() {
    let v = json(&qcbound(&["regularity", "--map", "identity"]));
    let grid = v["regularity"]["grid"].as_array().unwrap();
    assert!(!grid.is_empty());
    assert!(grid.iter().all(|r| r["status"] == "converged"));
    assert_eq!(v["regularity"]["astala"]["cap"]["kind"], "infinite");

    let v = json(&qcbound(&["regularity", "--map", "ellipse:2,1"]));
    let r = &v["regularity"];
    assert!(r["grid"].as_array().unwrap().iter().all(|r| r["status"] == "converged"));
    assert_eq!(r["astala"]["cap"]["value"], 3.0);
    assert_eq!(r["astala"]["binding"], false);
    assert_eq!(r["constant_jacobian"], true);

    let v = json(&qcbound(&["regularity", "--map", "cardioid:2", "--set", "quad.angular=192", "--set", "quad.annuli=32"]));
    let statuses: Vec<&str> = v["regularity"]["grid"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["status"].as_str().unwrap())
        .collect();
    assert!(statuses.iter().any(|s| *s == "converged") && statuses.iter().any(|s| *s != "converged"), "{statuses:?}");

    let out = qcbound(&["regularity", "--map", "identity", "--alpha-values", "3,5", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn oracle_command_and_mesh_dump() {
    let dir = scratch("oracle");
    let mesh = dir.join("mesh.txt");
    let out = qcbound(&["oracle", "--map", "identity", "--p", "1.9", "--resolution", "8", "--mesh-out", mesh.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let o = &v["oracle"];
    assert!(o["mu2"]["value"].as_f64().unwrap() > 3.0);
    assert!(o["mu_p"]["value"].as_f64().unwrap() > 0.0);
    assert!(o["descent"]["residual"]["value"].as_f64().unwrap() < 1e-6);
    assert_eq!(o["descent"]["starts"].as_array().unwrap().len(), 9);
    assert_eq!(o["classical"].as_array().unwrap().len(), 2);
    assert!(std::fs::read_to_string(&mesh).unwrap().starts_with("vertices "));
    assert_eq!(qcbound(&["oracle", "--p", "2.5"]).status.code(), Some(1));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn compare_verdicts_and_exit_codes() {
    let out = qcbound(&["compare", "--map", "ellipse:2,1", "--p", "1.9", "--alpha", "4", "--resolution", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["soundness"]["verdict"], "PASS");
    assert!(v["bound"]["mu_lower"]["value"].is_number());
    assert!(v["oracle"]["mu_p"]["value"].is_number());

    // an impossible slack forces the failure path; the report is still written
    let out = qcbound(&["compare", "--map", "identity", "--p", "1.9", "--alpha", "8", "--resolution", "8", "--set", "oracle.soundness_slack=-0.999"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["soundness"]["verdict"], "FAIL");
}

#[test]
fn compare_is_deterministic() {
    let args = ["compare", "--map", "star:0", "--p", "1.8", "--alpha", "4", "--resolution", "12", "--seed", "7"];
    let a = qcbound(&args);
    let b = qcbound(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["oracle"]["descent"]["seed"], 7);
}

#[test]
fn sweep_covers_the_product_and_keeps_failures() {
    let out = qcbound(&["sweep", "--maps", "identity;ellipse:2,1", "--p-values", "1.5,1.9", "--alpha-values", "4,8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let rows = v["sweep"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let failed = rows.iter().filter(|r| r["error"].is_string()).count();
    assert_eq!(failed, 3);
    assert!(rows.iter().filter(|r| r["bound"].is_object()).all(|r| r["bound"]["mu_lower"]["value"].as_f64().unwrap() > 0.0));

    let out = qcbound(&["sweep", "--maps", "identity", "--p-values", "1.8,1.9", "--alpha-values", "8", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().next().unwrap().ends_with(",error"));
}

#[test]
fn inverted_mesh_exits_infeasible() {
    let out = qcbound(&["oracle", "--map", "cardioid:8", "--resolution", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-positive area"));
}
