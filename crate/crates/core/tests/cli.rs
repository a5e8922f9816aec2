use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urbansense")).args(args).env_remove("URBANSENSE_CONFIG").output().unwrap()
}

fn fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel).display().to_string()
}

fn small_scenario(dir: &Path) -> PathBuf {
    let mut spec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(fixture("scenarios/rome-oct15.json")).unwrap()).unwrap();
    spec["agents"] = serde_json::json!({"peaceful": 30, "violent": 5, "bystander": 10, "remote": 5});
    let path = dir.join("small.json");
    std::fs::write(&path, spec.to_string()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bad_flags_exit_2_and_pipeline_errors_exit_1() {
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["synth", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(cli(&["replay", "--in", "x", "--speed=-3"]).status.code(), Some(2));
    assert_eq!(cli(&["replay", "--in", "x", "--speed", "2", "--instant"]).status.code(), Some(2));
    let out = cli(&["export-surface", "--in", "/nonexistent.jsonl", "--window", "0", "--out", "/tmp/x.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn synth_is_deterministic_and_seed_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let scen = small_scenario(dir.path());
    let files: Vec<PathBuf> = ["a.jsonl", "a.json", "b.jsonl", "b.json", "c.jsonl", "c.json"].iter().map(|f| dir.path().join(f)).collect();
    for (pair, seed) in files.chunks(2).zip(["5", "5", "6"]) {
        let out = cli(&["synth", "--scenario", s(&scen), "--seed", seed, "--out", s(&pair[0]), "--truth", s(&pair[1])]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |p: &PathBuf| std::fs::read(p).unwrap();
    assert_eq!(read(&files[0]), read(&files[2]));
    assert_eq!(read(&files[1]), read(&files[3]));
    assert_ne!(read(&files[0]), read(&files[4]));
    // every line is a standalone JSON message
    for line in String::from_utf8(read(&files[0])).unwrap().lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn analyze_replay_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let scen = small_scenario(dir.path());
    let (log, truth, report, surf) = (dir.path().join("l.jsonl"), dir.path().join("t.json"), dir.path().join("r.json"), dir.path().join("s.json"));
    assert!(cli(&["synth", "--scenario", s(&scen), "--out", s(&log), "--truth", s(&truth)]).status.success());

    let out = cli(&["analyze", "--in", s(&log), "--event", &fixture("events/rome-oct15.json"), "--report", s(&report), "--truth", s(&truth)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert!(r["truth"]["precision"].is_number());
    assert!(r["categories"].is_object() && r["alerts"].is_array());
    let n = r["messages"].as_u64().unwrap();

    let out = cli(&["replay", "--in", s(&log), "--instant"]);
    assert!(out.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["delivered"].as_u64(), Some(n));

    let out = cli(&["export-surface", "--in", s(&log), "--window", "2011-10-15T15:00:00Z", "--out", s(&surf)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sv: serde_json::Value = serde_json::from_slice(&std::fs::read(&surf).unwrap()).unwrap();
    assert_eq!(sv["window"]["start"], "2011-10-15T15:00:00Z");
    assert_eq!(sv["heights"].as_array().unwrap().len(), 64 * 64);
}

#[test]
fn geocode_empty_text_has_no_matches() {
    let out = cli(&["geocode", "--gazetteer", &fixture("gazetteer/rome.csv"), "--text", ""]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["matches"], serde_json::json!([]));
    assert!(v["best"].is_null());
}

#[test]
fn config_from_environment_is_strict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"no_such_key": 1}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_urbansense"))
        .args(["geocode", "--gazetteer", &fixture("gazetteer/rome.csv"), "--text", "x"])
        .env("URBANSENSE_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
