mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::manifest_fixture;
use voxrisk::audio::{read_wav, write_wav, WavEncoding};
use voxrisk::synth::{self, VoiceParams};

fn voxrisk(args: &[&str], paths: &[&Path]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_voxrisk"));
    cmd.args(args);
    cmd.args(paths);
    cmd.output().unwrap()
}

fn run(args: &[&str]) -> Output {
    voxrisk(args, &[])
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn splice_writes_audio_and_plan() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.wav");
    let out = dir.path().join("out.wav");
    let plan = dir.path().join("plan.json");
    write_wav(&input, &synth::utterance(&VoiceParams::default(), 10.0, 16000, 1), WavEncoding::Pcm16).unwrap();
    let o = run(&["--seed", "9", "splice", "--in", arg(&input), "--out", arg(&out), "--plan-out", arg(&plan)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    let order = plan["permutation"].as_array().unwrap();
    assert!((9..=16).contains(&order.len()), "{}", order.len());
    let fade = (0.01 * 16000.0) as usize;
    assert_eq!(read_wav::<f64>(&out).unwrap().len(), 160_000 - (order.len() - 1) * fade);

    let again = dir.path().join("again.wav");
    run(&["--seed", "9", "splice", "--in", arg(&input), "--out", arg(&again)]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn extract_writes_one_row_per_file() {
    let dir = tempfile::tempdir().unwrap();
    for i in 0..3 {
        write_wav(dir.path().join(format!("u{i}.wav")), &synth::utterance(&VoiceParams::default(), 1.5, 16000, i), WavEncoding::Pcm16).unwrap();
    }
    let out = dir.path().join("features.csv");
    let o = run(&["extract", "--in", arg(dir.path()), "--out", arg(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(&out).unwrap();
    let header = r.headers().unwrap().clone();
    assert_eq!(&header[0], "file");
    assert!(header.iter().any(|h| h == "f0_semitone_mean"));
    assert_eq!(r.records().count(), 3);
}

#[test]
fn screen_writes_json_and_text_reports() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = manifest_fixture(dir.path());
    let json = dir.path().join("report.json");
    let text = dir.path().join("report.txt");
    let o = voxrisk(&["--seed", "3", "screen", "--manifest"], &[&manifest, Path::new("--out"), &json, Path::new("--text-out"), &text]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["ancova"].as_array().unwrap().len(), 13, "{}", report["warnings"]);
    assert_eq!(report["config"]["seed"], 3);
    let text = std::fs::read_to_string(&text).unwrap();
    assert!(text.contains(report["disclaimer"].as_str().unwrap()));
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = manifest_fixture(dir.path());
    let out = dir.path().join("r.json");
    let body = std::fs::read_to_string(&manifest).unwrap();

    let mut lines: Vec<String> = body.lines().map(String::from).collect();
    let fields: Vec<&str> = lines[1].split(',').collect();
    let mut bad = fields.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    bad[3] = "25".into();
    lines[1] = bad.join(",");
    let invalid = dir.path().join("invalid.csv");
    std::fs::write(&invalid, lines.join("\n") + "\n").unwrap();
    let o = voxrisk(&["screen", "--manifest"], &[&invalid, Path::new("--out"), &out]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("phq8"));

    let o = voxrisk(&["screen", "--manifest"], &[&dir.path().join("missing.csv"), Path::new("--out"), &out]);
    assert_eq!(code(&o), 2);

    let low_only: Vec<&str> = body.lines().enumerate().filter(|(i, l)| *i == 0 || l.split(',').nth(3).unwrap().parse::<u32>().unwrap() < 10).map(|(_, l)| l).collect();
    let one_group = dir.path().join("low.csv");
    std::fs::write(&one_group, low_only.join("\n") + "\n").unwrap();
    let o = voxrisk(&["screen", "--manifest"], &[&one_group, Path::new("--out"), &out]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(code(&run(&["--jobs", "0", "splice", "--in", "x.wav", "--out", "y.wav"])), 1);
    assert_eq!(code(&run(&["screen"])), 1);
}

#[test]
fn config_file_overrides_defaults_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.wav");
    write_wav(&input, &synth::utterance(&VoiceParams::default(), 6.0, 16000, 2), WavEncoding::Pcm16).unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "seed = 4\n[splice]\nseg_min_s = 1.0\nseg_max_s = 1.5\n").unwrap();
    let plan = dir.path().join("plan.json");
    let o = voxrisk(&["splice", "--config"], &[&cfg, Path::new("--in"), &input, Path::new("--out"), &dir.path().join("o.wav"), Path::new("--plan-out"), &plan]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    assert!((4..=6).contains(&plan["permutation"].as_array().unwrap().len()));

    std::fs::write(&cfg, "[splice]\nseg_minimum = 1.0\n").unwrap();
    let o = voxrisk(&["splice", "--config"], &[&cfg, Path::new("--in"), &input, Path::new("--out"), &dir.path().join("o.wav")]);
    assert_eq!(code(&o), 1);
}
