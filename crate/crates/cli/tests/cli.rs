use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use snake_story::log::{parse_log, replay};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_snake-story"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn analyze_fixtures_as_json() {
    let game = fixture("game_p11.log");
    let nongame = fixture("nongame_p11.log");
    let out = ok(&["analyze", game.to_str().unwrap(), nongame.to_str().unwrap(), "--group-by", "version", "--format", "json"]);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["schema"], "report_v1");
    assert_eq!(report["sessions"].as_array().unwrap().len(), 2);
    assert_eq!(report["cohorts"].as_array().unwrap().len(), 2);
    assert_eq!(report["sessions"][0]["usage"]["total_choices"], 14);
    assert_eq!(report["sessions"][1]["usage"]["self_writes"], 3);
    assert_eq!(report["comparisons"].as_array().unwrap().len(), 8);
}

#[test]
fn analyze_as_csv_and_table() {
    let game = fixture("game_p11.log");
    let nongame = fixture("nongame_p11.log");
    let csv = ok(&["analyze", game.to_str().unwrap(), nongame.to_str().unwrap(), "--group-by", "version", "--format", "csv"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("source,participant,version,total_choices"));
    assert!(lines[2].contains(",nongame,16,3,10,3,"));
    let table = ok(&["analyze", game.to_str().unwrap(), "--format", "table"]);
    assert!(table.contains("game_p11.log"));
    assert!(table.contains("cohort game: 1 sessions"));
}

#[test]
fn analyze_refuses_mixed_versions_without_grouping() {
    let out = run(&["analyze", fixture("game_p11.log").to_str().unwrap(), fixture("nongame_p11.log").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));
}

#[test]
fn play_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("p1.nongame.log");
    let out = run(&["play", "--version", "nongame", "--seed", "3", "--turns", "5", "--out", log.to_str().unwrap()]);
    assert!(out.status.success());
    let result: Value = serde_json::from_slice(&out.stderr).unwrap();
    let text = std::fs::read_to_string(&log).unwrap();
    let trace = parse_log(&text, None).unwrap();
    assert_eq!(replay(&trace).unwrap().story(), result["full_story"].as_str().unwrap());

    let replayed: Value = serde_json::from_str(&ok(&["replay", log.to_str().unwrap(), "--format", "json"])).unwrap();
    assert_eq!(replayed["story"], result["full_story"]);
    assert_eq!(replayed["turns"], 5);
}

#[test]
fn play_is_deterministic() {
    let a = ok(&["play", "--version", "game", "--seed", "9"]);
    let b = ok(&["play", "--version", "game", "--seed", "9"]);
    assert_eq!(a, b);
    assert!(a.starts_with("[3/6/2023 7:29:47 PM]Game Start\n"));
    assert!(parse_log(&a, None).unwrap().is_complete());
}

#[test]
fn play_from_script() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("demo.txt");
    std::fs::write(&script, "wait 4000\nchoose 1\nwait 2000\nwrite The snake slept.\nend\n").unwrap();
    let log = ok(&["play", "--version", "nongame", "--script", script.to_str().unwrap()]);
    assert!(log.contains("[Chose][1.4]"));
    assert!(log.contains("[Add Own Text]The snake slept."));
    let trace = parse_log(&log, None).unwrap();
    assert_eq!(replay(&trace).unwrap().decision_times, vec![4.0, 2.0]);
}

#[test]
fn simulate_json() {
    let out = ok(&["simulate", "--policy", "greedy-positive", "--sessions", "5", "--seed", "2", "--format", "json"]);
    let result: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(result["sessions"], 5);
    let share = result["pool1_share"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&share));
    assert!(result["per_session"].as_array().unwrap().is_empty());
}

#[test]
fn simulate_rejects_bad_arguments() {
    assert!(!run(&["simulate", "--policy", "cautious"]).status.success());
    let out = run(&["simulate", "--policy", "greedy-positive", "--compare", "uniform-random", "--sessions", "5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("30"));
}
