use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn pwnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwnorm")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const TRIVIAL_FAMILY: &str = r#"{"pairs": [{"partition": {"blocks": [[1, 2]]}, "weights": {"w": [1, 1]}}]}"#;

#[test]
fn norm_prints_a_single_number() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"a": [3, 4]}"#);
    let fam = write(&dir, "fam.json", TRIVIAL_FAMILY);
    let out = pwnorm(&["norm", "--p", "4", "--coeffs", s(&a), "--family", s(&fam)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    assert_eq!(text.trim().parse::<f64>().unwrap(), 5.0);
}

#[test]
fn norm_verbose_lists_pairs() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"a": [3, 4]}"#);
    let fam = write(
        &dir,
        "fam.json",
        r#"{"pairs": [
            {"partition": {"blocks": [[1, 2]]}, "weights": {"w": [1, 1]}},
            {"partition": {"blocks": [[1], [2]]}, "weights": {"w": [1, 1]}}
        ]}"#,
    );
    let out = pwnorm(&["norm", "--p", "4", "--coeffs", s(&a), "--family", s(&fam), "--verbose"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("pair 1: 4.284572295e0"), "{text}");
}

#[test]
fn malformed_json_is_a_usage_error_with_position() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", "{\"a\": [1, 2,\n ]}");
    let fam = write(&dir, "fam.json", TRIVIAL_FAMILY);
    let out = pwnorm(&["norm", "--p", "4", "--coeffs", s(&a), "--family", s(&fam)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn schema_violations_exit_two() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"a": [1, 2]}"#);
    let bad_weight =
        write(&dir, "fam.json", r#"{"pairs": [{"partition": {"blocks": [[1, 2]]}, "weights": {"w": [1, 1.5]}}]}"#);
    let out = pwnorm(&["norm", "--p", "4", "--coeffs", s(&a), "--family", s(&bad_weight)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mismatched_dimension_is_reported() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"a": [1, 2, 3]}"#);
    let fam = write(&dir, "fam.json", TRIVIAL_FAMILY);
    let out = pwnorm(&["norm", "--p", "4", "--coeffs", s(&a), "--family", s(&fam)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("dimension mismatch"), "{}", stderr(&out));
}

#[test]
fn p_at_most_two_is_rejected() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"a": [1, 2]}"#);
    let fam = write(&dir, "fam.json", TRIVIAL_FAMILY);
    for p in ["2", "1.5", "nan"] {
        let out = pwnorm(&["norm", "--p", p, "--coeffs", s(&a), "--family", s(&fam)]);
        assert_eq!(out.status.code(), Some(2), "p = {p}");
    }
}

#[test]
fn square_on_rademacher_basis() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", r#"{"a": [1, 1]}"#);
    let basis = write(&dir, "basis.json", r#"{"kind": "rademacher", "n": 2}"#);
    let out = pwnorm(&["square", "--p", "4", "--coeffs", s(&a), "--basis", s(&basis), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["square_function_norm"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert!((v["expansion_norm"].as_f64().unwrap() - 8f64.powf(0.25)).abs() < 1e-15);
}

#[test]
fn verify_all_writes_passing_report() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("report.json");
    let out = pwnorm(&["verify", "--all", "--p", "4", "--seed", "7", "--trials", "20", "--out", s(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["all_pass"], true);
    let reports = v["reports"].as_array().unwrap();
    assert!(reports.iter().all(|r| r["p"] == 4.0));
    for prefix in ["theorem1/", "example-lp/", "example3/", "example4/", "discrete-partition/", "haar/", "khintchine/"]
    {
        assert!(reports.iter().any(|r| r["name"].as_str().unwrap().starts_with(prefix)), "{prefix}");
    }
    // only the report itself is left in the directory
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn verify_haar_uses_max_level() {
    let out = pwnorm(&["verify", "--experiment", "haar", "--max-level", "6", "--p", "4", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let r = &v["reports"][0];
    assert_eq!(r["name"], "haar/M6");
    assert_eq!(r["N"], 64);
    assert!(r["metadata"]["C"].as_f64().unwrap() >= 1.0);
}

#[test]
fn verify_with_user_basis() {
    let dir = TempDir::new().unwrap();
    let basis = write(&dir, "basis.json", r#"{"kind": "haar", "max_level": 2, "p": 3}"#);
    let out = pwnorm(&["verify", "--experiment", "theorem1", "--basis", s(&basis), "--trials", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 1);
    assert_eq!(v["reports"][0]["name"], "theorem1/user");
    assert_eq!(v["reports"][0]["p"], 3.0);
}

#[test]
fn verify_rejects_mismatched_tags() {
    let dir = TempDir::new().unwrap();
    let basis = write(&dir, "basis.json", r#"{"kind": "rademacher", "n": 2, "p": 4}"#);
    let out = pwnorm(&["verify", "--experiment", "example-lp", "--basis", s(&basis), "--trials", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("disjoint_supports"), "{}", stderr(&out));
}

#[test]
fn unknown_experiment_exits_two() {
    let out = pwnorm(&["verify", "--experiment", "theorem9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown experiment"));
}

#[test]
fn certification_failure_exits_one() {
    // no trials: nothing is certified, so the report cannot pass
    let out = pwnorm(&["verify", "--experiment", "khintchine", "--p", "4", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("FAIL"));
}

#[test]
fn verify_is_deterministic_and_seed_sensitive() {
    let args = |seed: &'static str| {
        ["verify", "--experiment", "theorem1", "--p", "3", "--seed", seed, "--trials", "15", "--format", "csv"]
    };
    let a = pwnorm(&args("5"));
    let b = pwnorm(&args("5"));
    let c = pwnorm(&args("6"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().next().unwrap(), "experiment,p,N,lhs,rhs,ratio,pass");
}

fn haar_rows(text: &str) -> Vec<(u32, u64, f64, f64, f64)> {
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
                f[4].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn haar_table_hand_values() {
    let out = pwnorm(&["haar-table", "--n", "1", "--b", "1", "--p", "4", "--max-level", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "m,l,closed_form,direct_integral,abs_diff");
    let rows = haar_rows(&text);
    assert_eq!(rows.len(), 4);
    let expected = [1.0, 1.0, 0.5f64.sqrt(), 0.5f64.sqrt()];
    for (row, want) in rows.iter().zip(expected) {
        assert!((row.2 - want).abs() <= 1e-12, "{row:?}");
        assert!(row.4 <= 1e-12);
    }
}

#[test]
fn haar_table_level_two() {
    let out = pwnorm(&["haar-table", "--n", "2", "--b", "1,0", "--p", "4", "--max-level", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = haar_rows(&stdout(&out));
    let row = rows.iter().find(|r| r.0 == 3 && r.1 == 0).unwrap();
    assert!((row.2 - 0.5f64.sqrt()).abs() <= 1e-12);
    assert!(row.4 <= 1e-12);
}

#[test]
fn haar_table_empty_range_is_header_only() {
    let out = pwnorm(&["haar-table", "--n", "1", "--b", "1", "--p", "4", "--min-level", "3", "--max-level", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "m,l,closed_form,direct_integral,abs_diff\n");
}

#[test]
fn haar_table_rejects_unnormalized_b() {
    let out = pwnorm(&["haar-table", "--n", "2", "--b", "0.5,0.5", "--p", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_g_is_reproducible_and_normalized() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("g.json");
    let args = ["sample-g", "--p", "4", "--seed", "3", "--count", "2", "--max-level", "3", "--out", s(&path)];
    assert_eq!(pwnorm(&args).status.code(), Some(0));
    let first = fs::read(&path).unwrap();
    assert_eq!(pwnorm(&args).status.code(), Some(0));
    assert_eq!(fs::read(&path).unwrap(), first);
    let v: Vec<serde_json::Value> = serde_json::from_slice(&first).unwrap();
    assert_eq!(v.len(), 2);
    for g in &v {
        assert_eq!(g["q"], 2.0);
        let vals: Vec<f64> = g["g"]["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(vals.len(), 8);
        let norm = (vals.iter().map(|x| x * x).sum::<f64>() / 8.0).sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
