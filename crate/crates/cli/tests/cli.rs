//! End-to-end tests of the `oscimin` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oscimin"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("oscimin_cli_{}_{name}", std::process::id()));
    p
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).expect("valid JSON on stdout")
}

#[test]
fn find_infimum_reports_the_constant_and_passes_every_oracle() {
    let out = bin()
        .args(["find-infimum", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    let i = v["I"].as_f64().unwrap();
    assert!((i + 0.1580).abs() <= 5e-4, "I={i}");
    assert!((v["T"].as_f64().unwrap() - 3.43963).abs() <= 1e-3);
    assert!(v["a"].as_f64().unwrap() > 0.0);
    let (a, b, c, q) = (
        v["A"].as_f64().unwrap(),
        v["B"].as_f64().unwrap(),
        v["C"].as_f64().unwrap(),
        v["Q"].as_f64().unwrap(),
    );
    assert!((q - (a - b) / c).abs() <= 1e-12);
    let oracles = v["oracles"].as_array().unwrap();
    assert!(oracles.len() >= 10);
    for o in oracles {
        assert_eq!(o["passed"], true, "oracle {} failed", o["name"]);
    }
}

#[test]
fn sign_preserving_bracket_exits_with_a_usage_error() {
    let out = bin()
        .args(["find-infimum", "--bracket", "0.20", "0.24"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bracket invalid"), "{}", stderr(&out));
}

#[test]
fn small_sweep_brackets_the_root_and_keeps_scheme_order() {
    let out = bin()
        .args([
            "sweep", "--from", "0.150", "--to", "0.166", "--step", "0.008", "--format", "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = json(&out);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r["status"], "ok");
        let j = r["j"].as_f64().unwrap();
        let jt = r["j_tilde"].as_f64().unwrap();
        assert!(j <= jt + 1e-6, "J={j} J~={jt}");
        assert!(j >= -0.25);
    }
    let mid = &rows[1];
    assert!((mid["lambda"].as_f64().unwrap() - 0.158).abs() < 1e-12);
    assert!(mid["g"].as_f64().unwrap().abs() <= 1e-3);
}

#[test]
fn sweep_range_outside_the_domain_is_rejected() {
    let out = bin()
        .args(["sweep", "--from", "0.3", "--to", "0.4", "--step", "0.01"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("(0, 0.25)"), "{}", stderr(&out));
}

#[test]
fn sweep_output_is_byte_identical_across_runs_and_thread_caps() {
    let args = ["sweep", "--from", "0.146", "--to", "0.170", "--step", "0.004"];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    let c = bin().args(args).env("OSCIMIN_THREADS", "2").output().unwrap();
    assert!(a.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn profile_round_trips_through_the_quotient_reader() {
    let path = tmp("profile.csv");
    let out = bin()
        .args(["profile", "--samples", "2001", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));

    let text = std::fs::read_to_string(&path).unwrap();
    let mut i_value = None;
    let mut t_value = None;
    let mut a_value = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# I = ") {
            i_value = rest.trim().parse::<f64>().ok();
        } else if let Some(rest) = line.strip_prefix("# T = ") {
            t_value = rest.trim().parse::<f64>().ok();
        } else if let Some(rest) = line.strip_prefix("# a = ") {
            a_value = rest.trim().parse::<f64>().ok();
        } else if line.starts_with('#') || line.starts_with('x') || line.is_empty() {
            continue;
        } else {
            rows.push(line.split(',').map(|f| f.parse().unwrap()).collect());
        }
    }
    let i_value = i_value.expect("I recorded in the header");
    let t = t_value.expect("T recorded in the header");
    assert!(a_value.is_some(), "a recorded in the header");
    assert_eq!(rows.len(), 2001);
    assert!((rows[0][0] + t).abs() < 1e-12);
    assert!((rows[2000][0] - t).abs() < 1e-12);

    let mid = rows
        .iter()
        .min_by(|p, q| p[0].abs().total_cmp(&q[0].abs()))
        .unwrap();
    assert!((mid[1] - 1.0).abs() < 1e-9, "u(0)={}", mid[1]);
    assert!(mid[2].abs() < 1e-9, "du(0)={}", mid[2]);
    assert!(mid[4].abs() < 1e-6, "d3u(0)={}", mid[4]);

    let min_u = rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    assert!(min_u < 0.0);
    let max_h = rows.iter().map(|r| r[5].abs()).fold(0.0f64, f64::max);
    assert!(max_h <= 1e-8, "max |H| = {max_h}");

    let q_out = bin()
        .arg("q")
        .arg(&path)
        .args(["--periodic", "--format", "json"])
        .output()
        .unwrap();
    assert!(q_out.status.success(), "{}", stderr(&q_out));
    let v = json(&q_out);
    let q = v["Q"].as_f64().unwrap();
    assert!((q - i_value).abs() <= 1e-3, "Q={q} I={i_value}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn cosine_file_reproduces_the_closed_form_quotient() {
    let path = tmp("cos.csv");
    let n = 2048;
    let h = std::f64::consts::TAU / (n - 1) as f64;
    let mut text = String::from("x,u\n");
    for i in 0..n {
        let x = i as f64 * h;
        text.push_str(&format!("{x:.16e},{:.16e}\n", x.cos()));
    }
    std::fs::write(&path, text).unwrap();
    let out = bin()
        .arg("q")
        .arg(&path)
        .args(["--periodic", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    let q = v["Q"].as_f64().unwrap();
    assert!((q - 4.0 / 3.0).abs() <= 1e-6, "Q={q}");
    assert!(v["parts_identity_residual"].as_f64().unwrap().abs() <= 1e-6);
    std::fs::remove_file(&path).ok();
}

#[test]
fn malformed_rows_are_reported_with_their_line_number() {
    let path = tmp("bad.csv");
    std::fs::write(&path, "x,u\n0.0,1.0\n0.1,0.9\nnot numbers\n0.3,0.7\n0.4,0.6\n").unwrap();
    let out = bin().arg("q").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));

    std::fs::write(&path, "0.0,1.0\n0.2,0.9\n0.1,0.8\n0.3,0.7\n0.4,0.6\n").unwrap();
    let out = bin().arg("q").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
    std::fs::remove_file(&path).ok();
}

#[test]
fn the_zero_function_has_an_undefined_quotient() {
    let path = tmp("zero.csv");
    let mut text = String::new();
    for i in 0..64 {
        text.push_str(&format!("{},0.0\n", i as f64 * 0.1));
    }
    std::fs::write(&path, text).unwrap();
    let out = bin().arg("q").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("undefined quotient"), "{}", stderr(&out));
    std::fs::remove_file(&path).ok();
}

#[test]
fn verify_passes_on_defaults() {
    let out = bin().arg("verify").output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("cosine_quotient"));
    assert!(text.contains("bar_u_quotient_y0_-2"));
    assert!(!text.contains(",false"));
}

#[test]
fn coarse_and_fine_root_tolerances_agree_on_the_constant() {
    let coarse = bin()
        .args(["find-infimum", "--root-tol", "1e-3", "--format", "json"])
        .output()
        .unwrap();
    // A coarse root can fail the tightest identity checks (exit 1), but the
    // report still comes out.
    assert!(matches!(coarse.status.code(), Some(0) | Some(1)));
    let fine = bin()
        .args(["find-infimum", "--root-tol", "1e-6", "--format", "json"])
        .output()
        .unwrap();
    assert!(fine.status.success());
    let i_coarse = json(&coarse)["I"].as_f64().unwrap();
    let i_fine = json(&fine)["I"].as_f64().unwrap();
    assert!(
        (i_coarse - i_fine).abs() <= 2e-3,
        "coarse {i_coarse} fine {i_fine}"
    );
}
