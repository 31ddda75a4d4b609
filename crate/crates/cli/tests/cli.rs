//! End-to-end tests of the binary: exit codes, output formats,
//! determinism, and the crossing inventory of the documented sweep.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn dnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn parse_report(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).expect("report exists");
    serde_json::from_str(&text).expect("valid json")
}

#[test]
fn verify_p3_exits_zero_with_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let cfg = scenarios().join("p3_verify.toml");
    let r = dnlab(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let report = parse_report(&out);
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for c in checks {
        assert_ne!(c["status"], "fail", "{c}");
    }
    assert_eq!(report["fixture"]["nodes"], 3);
    assert_eq!(report["command"], "verify");
}

#[test]
fn malformed_mask_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.mask"), "##\n#x\n").unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[domain]\nkind = \"grid\"\nmask = \"bad.mask\"\n",
    )
    .unwrap();
    let r = dnlab(&["verify", "--config", dir.path().join("bad.toml").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn unknown_config_key_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[domain]\nkind = \"graph\"\ngraph = \"x.graph\"\nbogus_key = 1\n",
    )
    .unwrap();
    let r = dnlab(&["verify", "--config", dir.path().join("bad.toml").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("config error"));
}

#[test]
fn payne_assert_on_p3_exits_one() {
    // the documented discrete counterexample: honest red check
    let cfg = scenarios().join("p3_payne_assert.toml");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let r = dnlab(&["verify", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let report = parse_report(&out);
    let failing: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failing, vec!["payne_chain"]);
}

#[test]
fn unwritable_output_exits_three() {
    let cfg = scenarios().join("p3_verify.toml");
    let r = dnlab(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        "/nonexistent-dir/report.json",
    ]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn sweep_p3_plotdata_and_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("p3.json");
    let cfg = scenarios().join("p3_sweep.toml");
    // json report first: crossing inventory
    let r = dnlab(&["sweep", "--config", cfg.to_str().unwrap(), "--out", base.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let report = parse_report(&base);
    assert_eq!(report["sweep"]["consistent_with_spectra"], true);
    let crossings = report["sweep"]["crossings"].as_array().unwrap();
    // P3 over [0.5, 4.5]: Neumann 1, 2, 4 (+ -> -) and Dirichlet 1.382, 3.618 (- -> +)
    assert_eq!(crossings.len(), 5);
    let expected = [
        (1.0, true),
        (1.381966011250105, false),
        (2.0, true),
        (3.618033988749895, false),
        (4.0, true),
    ];
    for (c, (lam, from_pos)) in crossings.iter().zip(expected) {
        assert_eq!(c["from_positive"], from_pos);
        let lo = c["mu_lo"].as_f64().unwrap();
        let hi = c["mu_hi"].as_f64().unwrap();
        assert!(lo <= lam + 1e-9 && lam - 1e-9 <= hi, "bracket [{lo}, {hi}] vs {lam}");
    }

    // plotdata: the two documented files with headers
    let r = dnlab(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
        "--format",
        "plotdata",
    ]);
    assert_eq!(r.status.code(), Some(0));
    let trace = std::fs::read_to_string(dir.path().join("p3_trace.csv")).unwrap();
    assert!(trace.starts_with("mu,branch,nu,flag\n"));
    assert!(trace.lines().count() > 200);
    let counting = std::fs::read_to_string(dir.path().join("p3_counting.csv")).unwrap();
    assert!(counting.starts_with("lambda,N_N,N_D\n"));
}

#[test]
fn csv_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("checks.csv");
    let cfg = scenarios().join("p3_verify.toml");
    let r = dnlab(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(r.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("check,lambda,status,lhs,rhs,residual"));
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6, "{line}");
        assert!(matches!(fields[2], "pass" | "skipped"), "{line}");
        // integer checks report lhs = rhs
        if !fields[3].is_empty() && !fields[4].is_empty() && fields[2] == "pass" {
            assert_eq!(fields[3], fields[4], "{line}");
        }
    }
}

#[test]
fn json_report_round_trips_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenarios().join("p3_verify.toml");
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    for out in [&out1, &out2] {
        let r = dnlab(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(r.status.code(), Some(0));
    }
    // byte-identical apart from the timing block
    let strip = |p: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timings_ms");
        serde_json::to_string_pretty(&v).unwrap()
    };
    assert_eq!(strip(&out1), strip(&out2));

    // parse back into the typed report: round trip
    let report: dnlab_cli::Report =
        serde_json::from_str(&std::fs::read_to_string(&out1).unwrap()).unwrap();
    let re = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(re, std::fs::read_to_string(&out1).unwrap());
}

#[test]
fn converge_ladder_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("converge.json");
    let cfg = scenarios().join("square_converge.toml");
    let r = dnlab(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--jobs",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let report = parse_report(&out);
    for c in report["checks"].as_array().unwrap() {
        assert_eq!(c["status"], "pass", "{c}");
    }
    let orders = report["converge"]["fitted_orders"].as_array().unwrap();
    for o in orders {
        let o = o.as_f64().unwrap();
        assert!((o - 2.0).abs() <= 0.3, "order {o}");
    }
}

#[test]
fn spectrum_command_reports_excerpts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spec.json");
    let cfg = scenarios().join("lshape_verify.toml");
    let r = dnlab(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let report = parse_report(&out);
    let neu = report["spectra"]["neumann"].as_array().unwrap();
    let dir_vals = report["spectra"]["dirichlet"].as_array().unwrap();
    assert!(!neu.is_empty() && !dir_vals.is_empty());
    // Rayleigh-Ritz ordering visible in the excerpts
    for (a, b) in neu.iter().zip(dir_vals.iter()) {
        assert!(a.as_f64().unwrap() <= b.as_f64().unwrap() + 1e-9);
    }
}

#[test]
fn verify_lshape_masked_grid() {
    let cfg = scenarios().join("lshape_verify.toml");
    let r = dnlab(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value = serde_json::from_slice(&r.stdout).unwrap();
    assert!(report["checks"].as_array().unwrap().len() > 10);
}
