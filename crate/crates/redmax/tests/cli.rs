use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn redmax(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_redmax"))
        .args(args)
        .env_remove("REDMAX_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // the child may exit before reading
    let _ = child.stdin.take().unwrap().write_all(stdin.as_bytes());
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const RANDOM_COLUMN: &str = "-0.95,-0.83,-0.69,0.58,-0.55,0.16,0.23,0.91,0.07,0.18\n";

#[test]
fn predict_golden_random_column() {
    for variant in ["reduced", "stable", "exact", "inverse", "base2"] {
        let out = redmax(&["predict", "-i", "-", "--variant", variant], RANDOM_COLUMN);
        assert_eq!(stdout(&out), "7\n", "{variant}");
    }
}

#[test]
fn predict_tie_picks_lowest_index() {
    for variant in ["reduced", "stable", "exact", "inverse", "base2"] {
        let out = redmax(&["predict", "-i", "-", "--variant", variant], "0,0\n");
        assert_eq!(stdout(&out), "0\n", "{variant}");
    }
}

#[test]
fn predict_variants_agree_on_generated_file() {
    let dir = tempfile::tempdir().unwrap();
    let logits = dir.path().join("logits.csv");
    let logits = logits.to_str().unwrap();
    stdout(&redmax(&["gen", "--lo", "-1", "--hi", "1", "--k", "10", "--trials", "500", "-o", logits], ""));

    let reduced = stdout(&redmax(&["predict", "-i", logits, "--variant", "reduced"], ""));
    let stable = stdout(&redmax(&["predict", "-i", logits, "--variant", "stable"], ""));
    assert_eq!(reduced.lines().count(), 500);
    // only vectors whose top two logits quantize apart are guaranteed to agree
    let vectors: Vec<Vec<f64>> = std::fs::read_to_string(logits)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let mut compared = 0;
    for ((r, s), v) in reduced.lines().zip(stable.lines()).zip(&vectors) {
        let mut sorted = v.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        if sorted[0] - sorted[1] > 1.0 / 256.0 {
            assert_eq!(r, s, "{v:?}");
            compared += 1;
        }
    }
    assert!(compared > 400);
}

#[test]
fn predict_reports_malformed_line() {
    let out = redmax(&["predict", "-i", "-"], "1,2,3\n4,5,6\n7,8\n");
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let out = redmax(&["predict", "-i", "-"], "1,2\n1,nope\n");
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn predict_exact_overflow() {
    let out = redmax(&["predict", "-i", "-", "--variant", "exact"], "1,2\n1000,0\n");
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    let out = redmax(&["predict", "-i", "-", "--variant", "stable"], "1000,0\n");
    assert_eq!(stdout(&out), "0\n");
}

#[test]
fn usage_errors() {
    let cases: &[&[&str]] = &[
        &["predict", "-i", "-", "--variant", "cordic-exp"],
        &["predict", "-i", "-", "--variant", "softmax"],
        &["compare", "--lo", "-1"],
        &["compare", "--lo", "1", "--hi", "-1"],
        &["compare", "--variants", "cordic-exp", "--lo", "-1", "--hi", "1"],
        &["compare", "--format", "sQ7"],
        &["cost", "--variant", "reduced", "--k", "0"],
        &["gen", "--lo", "0", "--hi", "1", "--trials", "0"],
        &["lut", "--addr-bits", "30"],
    ];
    for args in cases {
        let out = redmax(args, "");
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn compare_single_range_reports_full_agreement() {
    let out = redmax(&["compare", "--variants", "reduced,stable", "--lo", "-1", "--hi", "1", "--trials", "300"], "");
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["per_range"].as_array().unwrap().len(), 1);
    for stats in report["overall"].as_array().unwrap() {
        assert_eq!(stats["agreement_rate"], 1.0, "{stats}");
    }
}

#[test]
fn compare_defaults_to_three_ranges() {
    let out = redmax(&["compare", "--trials", "50", "--k", "4"], "");
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let ranges: Vec<(f64, f64)> = report["per_range"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["lo"].as_f64().unwrap(), r["hi"].as_f64().unwrap()))
        .collect();
    assert_eq!(ranges, [(-100.0, 0.0), (0.0, 100.0), (-1.0, 1.0)]);
}

#[test]
fn seed_env_matches_flag() {
    let from_flag = stdout(&redmax(&["gen", "--lo", "-5", "--hi", "5", "--k", "3", "--trials", "4", "--seed", "99"], ""));
    let out = Command::new(env!("CARGO_BIN_EXE_redmax"))
        .args(["gen", "--lo", "-5", "--hi", "5", "--k", "3", "--trials", "4"])
        .env("REDMAX_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(stdout(&out), from_flag);
    let other = stdout(&redmax(&["gen", "--lo", "-5", "--hi", "5", "--k", "3", "--trials", "4", "--seed", "100"], ""));
    assert_ne!(other, from_flag);
}

#[test]
fn cost_of_reduced_unit() {
    let out = redmax(&["cost", "--variant", "reduced", "--k", "1000"], "");
    let cost: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cost["cost"]["comparators"], 999);
    assert_eq!(cost["cost"]["exp_evaluations"], 0);

    let out = redmax(&["cost", "--variant", "base2", "--k", "10"], "");
    let cost: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cost["cost"]["lut_bits"], 256 * 16);
}

#[test]
fn emit_curves_sorted_and_monotone() {
    let out = redmax(&["emit-curves", "--lo", "-10", "--hi", "10", "--k", "200"], "");
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,exp_x,softmax_x"));
    let rows: Vec<[f64; 3]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|f| f.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(rows.len(), 200);
    for w in rows.windows(2) {
        assert!(w[0][0] <= w[1][0] && w[0][1] <= w[1][1] && w[0][2] <= w[1][2], "{w:?}");
    }
    let total: f64 = rows.iter().map(|r| r[2]).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn table1_reports_rows_and_classes() {
    let out = redmax(&["table1"], "");
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.contains("predicted classes: PASS"), "{text}");
    for name in ["all-negative", "all-positive", "random"] {
        assert!(text.contains(name));
    }
    // exit status follows the row check
    let rows_ok = text.contains("30/30");
    assert_eq!(out.status.code(), Some(if rows_ok { 0 } else { 5 }));

    let out = redmax(&["table1", "--json"], "");
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let classes: Vec<u64> = json["columns"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["reduced_class"].as_u64().unwrap())
        .collect();
    assert_eq!(classes, [5, 9, 7]);
}

#[test]
fn lut_dump_reloads_into_predict() {
    let dir = tempfile::tempdir().unwrap();
    let lut = dir.path().join("lut.csv");
    let lut_path = lut.to_str().unwrap();
    stdout(&redmax(&["lut", "--addr-bits", "6", "--lut-format", "uQ1.15", "-o", lut_path], ""));
    let text = std::fs::read_to_string(Path::new(lut_path)).unwrap();
    assert!(text.starts_with("address,raw,real\n"));
    assert_eq!(text.lines().count(), 65);

    let args = ["predict", "-i", "-", "--variant", "base2", "--addr-bits", "6", "--lut", lut_path];
    assert_eq!(stdout(&redmax(&args, RANDOM_COLUMN)), "7\n");

    let wrong = ["predict", "-i", "-", "--variant", "base2", "--lut", lut_path];
    assert_eq!(redmax(&wrong, RANDOM_COLUMN).status.code(), Some(2));

    std::fs::write(&lut, text.replace("\n3,", "\n4,")).unwrap();
    assert_eq!(redmax(&args, RANDOM_COLUMN).status.code(), Some(3));
}
