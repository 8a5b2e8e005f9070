// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::{Command, Output};

fn onosf(args: &[&str]) -> Output {
    onosf_env(args, None)
}

fn onosf_env(args: &[&str], budget: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_onosf"));
    cmd.args(args).env_remove("LAB_BUDGET");
    if let Some(b) = budget {
        cmd.env("LAB_BUDGET", b);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Fresh scratch directory per test.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("onosf-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn parity_online_influence_sits_on_last_bit() {
    let o = onosf(&["boolfn", "analyze", "--fn", "parity", "--ell", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<Vec<String>> =
        stdout(&o).lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 3);
    let oi: Vec<&str> = rows.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(oi, ["0", "0", "1"]);
    assert!(rows.iter().all(|r| r[1] == "1"));
    assert!(stderr(&o).starts_with("config: "));
}

#[test]
fn csv_uses_crlf() {
    let o = onosf(&["boolfn", "analyze", "--fn", "maj", "--ell", "3"]);
    assert!(stdout(&o).contains("\r\n"));
}

#[test]
fn json_output_carries_metadata() {
    let o = onosf(&["boolfn", "poincare", "--fn", "maj", "--ell", "5", "--out", "json", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["metadata"]["seed"], 4);
    assert_eq!(v["metadata"]["tool"], "onosf");
    assert!(v["metadata"]["config"]["wall_time_ms"].is_null());
}

#[test]
fn malformed_input_exits_64() {
    assert_eq!(onosf(&["bogus"]).status.code(), Some(64));
    assert_eq!(onosf(&["boolfn", "analyze", "--fn", "nonsense", "--ell", "3"]).status.code(), Some(64));
    assert_eq!(onosf(&["boolfn", "analyze", "--fn", "parity", "--ell", "3", "--threads", "0"]).status.code(), Some(64));
    assert_eq!(onosf_env(&["boolfn", "analyze", "--fn", "parity", "--ell", "3"], Some(r#"{"cpu":1}"#)).status.code(), Some(64));
    assert_eq!(onosf(&["--help"]).status.code(), Some(0));
}

#[test]
fn lowered_budget_exits_2_and_names_it() {
    let args = ["sources", "brute", "--fn", "maj", "--blocks", "3", "--bad", "2,3"];
    assert_eq!(onosf(&args).status.code(), Some(0));
    let o = onosf_env(&args, Some(r#"{"strategies":1}"#));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("strategies"), "{}", stderr(&o));
}

#[test]
fn infeasible_parameters_exit_2() {
    let o = onosf(&["condense", "params", "--theorem", "rate-reduction", "--inputs", "g=0,ell=10"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = onosf(&["condense", "params", "--theorem", "rate-reduction", "--inputs", "g=3,ell=10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("rate,0.333333333333,1/3"));
}

#[test]
fn verify_all_small_passes() {
    let o = onosf(&["verify-all", "--budget", "small"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().skip(1).all(|l| l.split(',').nth(1) == Some("true")));
}

#[test]
fn reproduce_is_byte_identical() {
    let dir = scratch("reproduce");
    let first = dir.join("run.csv");
    let again = dir.join("again.csv");
    let args = ["protocol", "elect", "--ell", "64", "--trials", "200", "--seed", "9"];
    let o = onosf(&[&args[..], &["--out", first.to_str().unwrap()]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let config = dir.join("run.csv.config.json");
    assert!(config.exists());
    let o = onosf(&["reproduce", config.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&again).unwrap());

    let other = dir.join("other.csv");
    let o = onosf(&["protocol", "elect", "--ell", "64", "--trials", "200", "--seed", "10", "--out", other.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(std::fs::read(&first).unwrap(), std::fs::read(&other).unwrap());
}

#[test]
fn reproduce_rejects_unknown_config_keys() {
    let dir = scratch("badconfig");
    let path = dir.join("c.json");
    std::fs::write(&path, r#"{"tool_version":"0","command":{"verify-all":null},"seed":0,"format":"csv","budget":{},"mystery":1}"#).unwrap();
    assert_eq!(onosf(&["reproduce", path.to_str().unwrap()]).status.code(), Some(64));
}

#[test]
fn searched_object_round_trips_through_verify() {
    let dir = scratch("search");
    let obj = dir.join("ext.json");
    let o = onosf(&[
        "prims", "search", "--kind", "two_source", "--n", "2", "--d", "2", "--m", "1", "--k", "2", "--k2", "2", "--eps",
        "0.5", "--tries", "50", "--save", obj.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let searched = stdout(&o);
    let o = onosf(&["prims", "verify", "--object", obj.to_str().unwrap(), "--k", "2", "--k2", "2", "--eps", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), searched);
}

#[test]
fn transcript_jsonl_has_one_object_per_line() {
    let o = onosf(&["protocol", "transcript", "--ell", "16", "--out", "jsonl", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().count() > 0);
    for line in out.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.is_object());
    }
}
