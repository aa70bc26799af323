use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adlab::cli::SWEEP_COLUMNS;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn adlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adlab"))
        .args(args)
        .env_remove("ADLAB_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Rows of the first CSV block on stdout.
fn first_table(out: &Output) -> Vec<Vec<String>> {
    let text = stdout(out);
    let block = text.split("\n\n").next().unwrap().to_string();
    let mut reader = csv::Reader::from_reader(block.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let mut rows = vec![header];
    rows.extend(
        reader
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect::<Vec<_>>()),
    );
    rows
}

fn kv(out: &Output, key: &str) -> String {
    first_table(out)
        .into_iter()
        .find(|r| r[0] == key)
        .unwrap_or_else(|| panic!("no {key} row"))[1]
        .clone()
}

fn write_variant(dir: &Path, name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let mut v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixture("table1.json")).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    path
}

#[test]
fn verify_sne_reference_profile() {
    let out = adlab(&["verify-sne", fixture("table1.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = first_table(&out);
    assert_eq!(rows[0], ["position", "bidder", "payoff", "payoff_up", "payoff_down", "envy_free"]);
    assert_eq!(rows.len(), 10);
    assert!(rows[1..].iter().all(|r| r[5] == "YES"));
}

#[test]
fn verify_sne_overbid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "bumped.json", |v| {
        v["bids"][6]["bid"] = serde_json::json!(13.5);
    });
    let out = adlab(&["verify-sne", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let violations = text.split("\n\n").nth(1).unwrap();
    assert!(violations.lines().count() > 1, "{text}");
}

#[test]
fn missing_bids_and_bad_json_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "nobids.json", |v| {
        v.as_object_mut().unwrap().remove("bids");
    });
    let out = adlab(&["verify-sne", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bids"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"gammas\": [1.0,\n  oops\n}").unwrap();
    let out = adlab(&["revenue", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.json:3:"), "{}", stderr(&out));

    let out = adlab(&["revenue", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn revenue_and_efficiency() {
    let t1 = fixture("table1.json");
    let out = adlab(&["revenue", t1.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(kv(&out, "direct_sum"), "47.5");
    assert_eq!(kv(&out, "price_sum"), "47.5");
    assert_eq!(kv(&out, "agree"), "true");
    let out = adlab(&["efficiency", t1.to_str().unwrap()]);
    assert_eq!(kv(&out, "efficiency"), "67.5");
}

#[test]
fn single_slot_revenue_is_second_score() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k1.json");
    fs::write(
        &path,
        r#"{"gammas": [0.8], "bidders": [
            {"id": 1, "value": 10}, {"id": 2, "value": 6, "relevance": 0.5}, {"id": 3, "value": 2}]}"#,
    )
    .unwrap();
    let out = adlab(&["revenue", path.to_str().unwrap(), "--exact"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(kv(&out, "direct_sum").parse::<f64>().unwrap(), 0.8 * 3.0);
}

#[test]
fn min_sne_table() {
    let out = adlab(&["min-sne", fixture("table1.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = first_table(&out);
    let scores: Vec<&str> = rows[2..].iter().map(|r| r[3].as_str()).collect();
    assert_eq!(scores, ["17.9", "15.1667", "14.2", "13.25", "12", "10.5", "10", "9"]);
}

#[test]
fn sweep_columns_and_shapes() {
    let l2 = fixture("lemma_l2.json");
    let out = adlab(&["capacity-sweep", l2.to_str().unwrap(), "--steps", "20", "--exact"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let rows = first_table(&out);
    assert_eq!(rows[0], SWEEP_COLUMNS);
    assert_eq!(rows.len(), 21);
    let col = |name: &str| -> Vec<f64> {
        let idx = rows[0].iter().position(|c| c == name).unwrap();
        rows[1..].iter().map(|r| r[idx].parse().unwrap()).collect()
    };
    assert!(col("value_of_capacity").windows(2).all(|w| w[1] < w[0]));
    assert!(col("efficiency").windows(2).all(|w| w[1] >= w[0]));

    let out = adlab(&["capacity-sweep", l2.to_str().unwrap(), "--steps", "1"]);
    assert_eq!(first_table(&out).len(), 2);
}

#[test]
fn sweep_reports_skipped_ties() {
    // f = 0.5 makes γ_1 f γ_1 equal γ_2 on the lemma_l1 curve.
    let l1 = fixture("lemma_l1.json");
    let out = adlab(&[
        "capacity-sweep",
        l1.to_str().unwrap(),
        "--f-min",
        "0.45",
        "--f-max",
        "0.55",
        "--steps",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(first_table(&out).len(), 3);
    assert!(stderr(&out).contains("skipped f = 0.5"));

    let out = adlab(&["capacity-sweep", l1.to_str().unwrap(), "--f-max", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic_and_input_untouched() {
    let path = fixture("example2.json");
    let before = fs::read(&path).unwrap();
    let a = adlab(&["capacity-sweep", path.to_str().unwrap(), "--steps", "40"]);
    let b = adlab(&["capacity-sweep", path.to_str().unwrap(), "--steps", "40"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(fs::read(&path).unwrap(), before);
}

#[test]
fn mediator_strategies() {
    let t1 = fixture("table1.json");
    let t1 = t1.to_str().unwrap();
    let out = adlab(&["mediator", t1, "--strategy", "top", "--L", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(kv(&out, "r_star"), "14.2");
    assert_eq!(kv(&out, "pivot"), "4");
    assert_eq!(kv(&out, "payoff_per_share"), "7.28");

    let out = adlab(&["mediator", t1, "--strategy", "slide", "--L", "5", "--r", "12"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(kv(&out, "payoff_per_share"), "22.8");

    let out = adlab(&["mediator", t1, "--strategy", "interior", "--anchor", "1", "--L", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(kv(&out, "status"), "no_improvement");

    // Falls back to the scenario's mediator block.
    let out = adlab(&["mediator", t1]);
    assert_eq!(kv(&out, "payoff_per_share"), "7.28");

    let out = adlab(&["mediator", t1, "--strategy", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mediator_rejects_non_equilibrium_base() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "bumped.json", |v| {
        v["bids"][6]["bid"] = serde_json::json!(13.5);
    });
    let out = adlab(&["mediator", path.to_str().unwrap(), "--L", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not a Symmetric equilibrium"), "{}", stderr(&out));
}

#[test]
fn reproduce_all_targets() {
    for target in ["table1", "table2", "table3", "table4", "example1", "example2"] {
        let out = adlab(&["reproduce", "--target", target]);
        assert_eq!(out.status.code(), Some(0), "{target}: {}", stderr(&out));
        assert!(first_table(&out)[1..].iter().all(|r| r[3] == "true"));
    }
}

#[test]
fn tolerance_env_and_formats() {
    let t1 = fixture("table1.json");
    let out = Command::new(env!("CARGO_BIN_EXE_adlab"))
        .args(["verify-sne", t1.to_str().unwrap()])
        .env("ADLAB_TOL", "nope")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = adlab(&["revenue", t1.to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"][0], "quantity");
    assert_eq!(v["rows"][0][1], 47.5);
}

#[test]
fn out_dir_receives_tables() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = fixture("table1.json");
    let out = adlab(&[
        "mediator",
        t1.to_str().unwrap(),
        "--L",
        "5",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for name in ["summary.csv", "profile.csv", "incentives.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}
