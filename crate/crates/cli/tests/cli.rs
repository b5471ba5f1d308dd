use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const I0: &str = r#"{
  "kind": "coverage",
  "k": 2,
  "n": 2,
  "declared_monotone": true,
  "elements": [{"name": "a", "weight": 1.0}, {"name": "b", "weight": 2.0}],
  "universe_weights": [1.0, 1.0, 1.0],
  "covers": [[[0, 1], [0]], [[2], [1, 2]]]
}
"#;

fn ksc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ksc"))
        .args(args)
        .output()
        .expect("ksc runs")
}

fn write_i0(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("i0.json");
    fs::write(&path, I0).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: stdout {:?} stderr {:?}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn solve_two_pass_on_i0() {
    let dir = TempDir::new().unwrap();
    let i0 = write_i0(&dir);
    let out = ksc(&[
        "solve",
        s(&i0),
        "--tau",
        "3",
        "--epsilon",
        "0.5",
        "--algorithm",
        "2",
        "--exact",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["status"], "success");
    assert!(report["utility"].as_f64().unwrap() >= 0.75);
    assert_eq!(report["verdict"]["pass"], true);
}

#[test]
fn algorithm1_without_guess_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let i0 = write_i0(&dir);
    let out = ksc(&[
        "solve",
        s(&i0),
        "--tau",
        "3",
        "--epsilon",
        "0.5",
        "--algorithm",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("guess"));

    let out = ksc(&[
        "solve",
        s(&i0),
        "--tau",
        "3",
        "--epsilon",
        "0.5",
        "--algorithm",
        "1",
        "--guess",
        "exact",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn exit_codes_for_infeasible_and_contract_violation() {
    let dir = TempDir::new().unwrap();
    let i0 = write_i0(&dir);
    let out = ksc(&[
        "solve",
        s(&i0),
        "--tau",
        "4",
        "--epsilon",
        "0.5",
        "--algorithm",
        "3",
        "--upper-bound-B",
        "n-wmax",
        "--exact",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["infeasible"], true);

    let out = ksc(&[
        "solve",
        s(&i0),
        "--tau",
        "3",
        "--epsilon",
        "0.5",
        "--algorithm",
        "3",
        "--upper-bound-B",
        "1",
        "--exact",
    ]);
    assert_eq!(out.status.code(), Some(3));

    let out = ksc(&["exact", s(&i0), "--tau", "3.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_is_exit_4() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, I0.replace("\"weight\": 2.0", "\"weight\": 0")).unwrap();
    let out = ksc(&["verify", s(&bad)]);
    assert_eq!(out.status.code(), Some(4));

    fs::write(&bad, "{ \"k\": 2,\n oops }").unwrap();
    let out = ksc(&["verify", s(&bad)]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = ksc(&[
        "solve",
        "missing.json",
        "--tau",
        "1",
        "--epsilon",
        "0.5",
        "--algorithm",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(4));

    let out = ksc(&["solve", "--epsilon", "0.5"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn gen_then_verify() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = ksc(&[
            "gen",
            "coverage",
            "--seed",
            "3",
            "-n",
            "4",
            "-k",
            "2",
            "-o",
            s(p),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let out = ksc(&["verify", s(&a), "--lemma1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["ksubmodular"], true);
    assert_eq!(v["monotone"], true);
    assert_eq!(v["lemma1"]["failures"], 0);

    let nm = dir.path().join("nm.json");
    let out = ksc(&[
        "gen",
        "nonmonotone",
        "--seed",
        "1",
        "-n",
        "3",
        "-k",
        "2",
        "-o",
        s(&nm),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&ksc(&["verify", s(&nm)]));
    assert_eq!(v["ksubmodular"], true);
    assert_eq!(v["monotone"], false);
}

#[test]
fn paper_literal_and_default_both_qualify() {
    let dir = TempDir::new().unwrap();
    let i0 = write_i0(&dir);
    for mode in ["default", "paper-literal"] {
        let out = ksc(&[
            "solve",
            s(&i0),
            "--tau",
            "3",
            "--epsilon",
            "0.5",
            "--algorithm",
            "3",
            "--upper-bound-B",
            "n-wmax",
            "--selection",
            mode,
            "--exact",
        ]);
        assert_eq!(out.status.code(), Some(0));
        let report = json(&out);
        assert_eq!(report["selection"], mode);
        assert!(report["utility"].as_f64().unwrap() >= 0.75);
    }
}

#[test]
fn bench_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("c.json");
    ksc(&[
        "gen",
        "coverage",
        "--seed",
        "5",
        "-n",
        "4",
        "-k",
        "2",
        "-o",
        s(&inst),
    ]);
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for r in [&r1, &r2] {
        let out = ksc(&[
            "bench",
            s(&inst),
            "--permute-seeds",
            "1,2",
            "--report",
            s(r),
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stdout).contains("max w/opt"));
    }
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
    let cells: serde_json::Value = serde_json::from_slice(&fs::read(&r1).unwrap()).unwrap();
    // 3 ε × (1 + 1 + 2 selections) × 3 orders
    assert_eq!(cells.as_array().unwrap().len(), 36);
}

#[test]
fn report_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let i0 = write_i0(&dir);
    let path = dir.path().join("report.json");
    let out = ksc(&[
        "solve",
        s(&i0),
        "--tau-fraction",
        "1",
        "--epsilon",
        "0.3",
        "--algorithm",
        "2",
        "--permute-seed",
        "4",
        "--report",
        s(&path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
    assert_eq!(report["config"]["permute_seed"], 4);
    assert_eq!(report["config"]["tau"], 3.0);
}
