use std::process::{Command, Output};

use serde_json::Value;

fn primegap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_primegap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = primegap(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stdout(args: &[&str]) -> String {
    let out = primegap(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn scan_totals_reconcile() {
    let v = json(&["scan", "--min", "16", "--max", "100000", "--c", "0.5,1,2"]);
    let eligible = v["eligible"].as_u64().unwrap();
    let excluded = v["excluded"].as_u64().unwrap();
    assert_eq!(eligible + excluded, 99984);
    assert_eq!(v["total"], 99984);
    let h = &v["histogram"];
    let binned: u64 = h["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(binned + h["underflow"].as_u64().unwrap() + h["overflow"].as_u64().unwrap(), eligible);
    assert_eq!(h["edges"].as_array().unwrap().len(), 401);
}

#[test]
fn scan_of_33_and_34() {
    // 34 = 2 * 17 is the hand case; 33 = 3 * 11 also exceeds
    let v = json(&["scan", "--min", "33", "--max", "35", "--c", "1"]);
    assert_eq!(v["eligible"], 2);
    assert_eq!(v["exceed"][0]["per_n"], 2);
    let v = json(&["scan", "--min", "34", "--max", "35", "--c", "1"]);
    assert_eq!(v["exceed"][0]["per_n"], 1);
}

#[test]
fn scan_is_independent_of_workers() {
    let base = ["scan", "--min", "16", "--max", "300000", "--c", "0.5,1,2"];
    let one = primegap(&[&base[..], &["--workers", "1"]].concat());
    let many = primegap(&[&base[..], &["--workers", "8", "--segment-size", "4096"]].concat());
    assert!(one.status.success() && many.status.success());
    assert_eq!(one.stdout, many.stdout);
    let csv1 = primegap(&[&base[..], &["--format", "csv"]].concat());
    let csv8 = primegap(&[&base[..], &["--format", "csv", "--workers", "8"]].concat());
    assert_eq!(csv1.stdout, csv8.stdout);
}

#[test]
fn reals_round_trip() {
    let out = stdout(&["density", "--min", "16", "--max", "10000", "--c", "1"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["rows"][0]["theoretical"].as_f64().unwrap(), -(-1f64).exp_m1());
    assert!(out.contains("\"theoretical\": 0.63212055882855767"));
}

#[test]
fn density_rows_sorted_and_monotone() {
    let v = json(&["density", "--min", "16", "--max", "200000", "--c", "2,0.25,1,4,0.5"]);
    let rows = v["rows"].as_array().unwrap();
    let cs: Vec<f64> = rows.iter().map(|r| r["c"].as_f64().unwrap()).collect();
    assert_eq!(cs, vec![0.25, 0.5, 1.0, 2.0, 4.0]);
    for key in ["empirical_per_n", "empirical_per_range"] {
        let e: Vec<f64> = rows.iter().map(|r| r[key].as_f64().unwrap()).collect();
        assert!(e.windows(2).all(|w| w[0] >= w[1]), "{key}: {e:?}");
    }
    assert_eq!(rows[0]["partial_sums"].as_array().unwrap().len(), 9);
    let range = json(&["density", "--min", "16", "--max", "200000", "--c", "1", "--mode", "range"]);
    assert_eq!(range["mode"], "range");
    assert_eq!(range["rows"][0]["empirical"], range["rows"][0]["empirical_per_range"]);
}

// frozen from the first verified full scan of [16, 10^6], cross-checked by
// an independent smallest-prime-factor sieve
const DENSITY_1E6: [(f64, f64, f64); 3] = [
    (0.5, 0.9754401580444174, 0.9711308425417363),
    (1.0, 0.7548021188372447, 0.7379816772680894),
    (2.0, 0.3595108872630962, 0.34493953932657445),
];

#[test]
fn density_regression_at_one_million() {
    let v = json(&["density", "--min", "16", "--max", "1000001", "--c", "0.5,1,2"]);
    assert_eq!(v["x"], 1_000_000);
    for (row, &(c, per_n, per_range)) in v["rows"].as_array().unwrap().iter().zip(&DENSITY_1E6) {
        assert_eq!(row["c"].as_f64().unwrap(), c);
        assert_eq!(row["empirical_per_n"].as_f64().unwrap(), per_n, "c = {c}");
        assert_eq!(row["empirical_per_range"].as_f64().unwrap(), per_range, "c = {c}");
    }
}

#[test]
fn count_worked_example() {
    let v = json(&["count", "--x", "30", "--c", "1"]);
    assert_eq!(v["N_direct"], 5);
    assert_eq!(v["N_inclusion_exclusion"], 5);
    assert_eq!(v["identity"], "PASS");
    let n_k: Vec<u64> = v["per_k"].as_array().unwrap().iter().map(|l| l["N_k"].as_u64().unwrap()).collect();
    assert_eq!(n_k, vec![30, 39, 15, 1]);
    let sizes: Vec<u64> = v["per_k"].as_array().unwrap().iter().map(|l| l["m_count"].as_u64().unwrap()).collect();
    assert_eq!(sizes, vec![1, 6, 7, 1]);
    let partials: Vec<i64> = v["bonferroni"].as_array().unwrap().iter().map(|b| b["partial"].as_i64().unwrap()).collect();
    assert_eq!(partials, vec![30, -9, 6, 5]);
    assert!(v["bonferroni"].as_array().unwrap().iter().all(|b| b["holds"] == true));
}

#[test]
fn count_vacuous_cutoff() {
    let v = json(&["count", "--x", "16", "--c", "100"]);
    assert_eq!(v["N_direct"], 16);
    assert_eq!(v["per_k"].as_array().unwrap().len(), 1);
    assert_eq!(v["per_k"][0]["m_count"], 1);
}

#[test]
fn count_csv_header() {
    let out = stdout(&["count", "--x", "100", "--c", "1", "--format", "csv"]);
    assert!(out.contains("# N_direct,18\n"));
    assert!(out.contains("# identity,PASS\n"));
    assert!(out.lines().any(|l| l.starts_with("k,m_count,N_k,")));
}

#[test]
fn enumerate_m_at_30() {
    let out = stdout(&["enumerate-m", "--x", "30", "--c", "1"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k,m,primes");
    assert_eq!(lines.len(), 16);
    assert_eq!(lines[1], "0,1,-");
    assert_eq!(*lines.last().unwrap(), "3,30,2 3 5");
    let out = stdout(&["enumerate-m", "--x", "30", "--c", "3"]);
    assert_eq!(out, "k,m,primes\n0,1,-\n1,2,2\n");
    let v = json(&["enumerate-m", "--x", "30", "--c", "3", "--format", "json"]);
    assert_eq!(v[1]["primes"], serde_json::json!([2]));
}

#[test]
fn verify_passes_and_reports_the_hand_example() {
    let out = primegap(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS (x=30, c=1) N_direct = 5 = N_IE"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_detects_an_injected_fault() {
    let out = primegap(&["verify", "--max-x", "100", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL (x=30, c=1) N_direct = naive_N: 4 vs 5"));
}

#[test]
fn out_flag_writes_a_file() {
    let path = std::env::temp_dir().join(format!("primegap-out-{}.csv", std::process::id()));
    let out = primegap(&["enumerate-m", "--x", "30", "--c", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "k,m,primes\n0,1,-\n1,2,2\n");
    let _ = std::fs::remove_file(path);
}

#[test]
fn exit_statuses() {
    let code = |args: &[&str]| primegap(args).status.code();
    assert_eq!(code(&["scan", "--min", "10", "--max", "20", "--c", "1"]), Some(2));
    assert_eq!(code(&["scan", "--min", "20", "--max", "20", "--c", "1"]), Some(2));
    assert_eq!(code(&["scan", "--min", "16", "--max", "20", "--c", "0"]), Some(2));
    assert_eq!(code(&["scan", "--min", "16", "--max", "20", "--c", "1", "--workers", "0"]), Some(2));
    assert_eq!(code(&["scan", "--min", "16", "--max", "20"]), Some(2));
    assert_eq!(code(&["count", "--x", "15", "--c", "1"]), Some(2));
    assert_eq!(code(&["count", "--x", "30", "--c", "-1"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["count", "--x", "20000000", "--c", "1"]), Some(3));
    assert_eq!(code(&["scan", "--min", "16", "--max", "18446744073709551615", "--c", "1"]), Some(3));
    assert_eq!(code(&["verify", "--max-x", "1000000"]), Some(3));
    assert_eq!(code(&["--help"]), Some(0));
    let out = primegap(&["scan", "--min", "10", "--max", "20", "--c", "1"]);
    assert_eq!(String::from_utf8(out.stderr).unwrap().lines().count(), 1);
}
