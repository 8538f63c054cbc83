use std::fs;
use std::process::{Command, Output};

fn macrospin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macrospin")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn assert_flat(v: &serde_json::Value) {
    let obj = v.as_object().expect("top level is an object");
    for (k, x) in obj {
        assert!(!x.is_object() && !x.is_array(), "{k} is nested");
        assert!(k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'), "{k}");
    }
}

#[test]
fn lg_scan_with_two_steps() {
    let o = macrospin(&["lg-scan", "--two-j", "21", "--x-min", "0.5", "--x-max", "1.5", "--steps", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# macrospin "));
    assert_eq!(lines[1], "x,k_analytic,k_exact,abs_diff");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("0.5,"));
    assert!(lines[3].starts_with("1.5,"));
}

#[test]
fn lg_scan_rejects_single_step() {
    let o = macrospin(&["lg-scan", "--two-j", "21", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn strict_non_divisor_suggests_widths() {
    let o = macrospin(&["coherent-evolve", "--two-j", "20", "--delta-m", "4", "--times", "0,1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains('3') && err.contains('7'), "{err}");
}

#[test]
fn coherent_evolve_columns() {
    let o = macrospin(&["coherent-evolve", "--two-j", "4", "--delta-m", "5", "--times", "0,0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let header = text.lines().nth(1).unwrap();
    assert!(header.starts_with("t,theta,phi,mu,sigma,p_2,p_1,p_0,p_-1,p_-2,"));
    assert!(header.ends_with("pbar_sum"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn lg_max_json_is_flat() {
    let o = macrospin(&["lg-max", "--two-j", "21"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_flat(&v);
    for k in ["x_star", "k_star_analytic", "k_star_exact", "violation_boundary_x", "version", "config_two_j"] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    assert!((v["k_star_analytic"].as_f64().unwrap() - 2.481).abs() < 1e-3);
}

#[test]
fn classical_compare_is_reproducible() {
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let run = |dir: &std::path::Path, threads: &str| {
        let out = dir.join("cmp.csv");
        let o = Command::new(env!("CARGO_BIN_EXE_macrospin"))
            .env("MACROSPIN_THREADS", threads)
            .args(["classical-compare", "--two-j", "100", "--delta-m", "20", "--n-samples", "2000", "--times", "3"])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (fs::read(&out).unwrap(), fs::read(out.with_extension("json")).unwrap())
    };
    let (csv_a, json_a) = run(da.path(), "1");
    let (csv_b, json_b) = run(db.path(), "3");
    let strip = |b: &[u8], d: &std::path::Path| String::from_utf8_lossy(b).replace(d.to_str().unwrap(), "DIR");
    assert!(strip(&csv_a, da.path()) == strip(&csv_b, db.path()), "CSV differs between runs");
    assert!(strip(&json_a, da.path()) == strip(&json_b, db.path()), "JSON differs between runs");
    let text = String::from_utf8(csv_a).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().nth(1).unwrap().contains("tvd_ensemble,tvd_quadrature,tvd_single_spin"));
    let v: serde_json::Value = serde_json::from_slice(&json_a).unwrap();
    assert_flat(&v);
    assert_eq!(v["rows"], 3);
    assert_eq!(v["config_seed"], 1);
}

#[test]
fn disturbance_from_mixture_file() {
    let dir = tempfile::tempdir().unwrap();
    let mix = dir.path().join("mix.csv");
    fs::write(&mix, "# two coherent states\nweight,theta,phi\n0.5,1.0,0.0\n0.5,2.0,3.0\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_macrospin"))
        .args(["disturbance", "--two-j", "100", "--delta-m", "10,20,50", "--mixture"])
        .arg(&mix)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().nth(1).unwrap(), "delta_m,slot_count,d_average,sqrt_j_over_delta_m");
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn unwritable_output_exits_with_io_code() {
    let o = macrospin(&["lg-scan", "--two-j", "3", "--steps", "2", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let o = macrospin(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(2));
}
