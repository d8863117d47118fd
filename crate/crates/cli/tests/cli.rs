use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vibrophone(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vibrophone")).args(args).current_dir(dir).output().unwrap()
}

/// Parses the single JSON error line and checks its exit code field.
fn error_of(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().unwrap_or_default();
    let v: Value = serde_json::from_str(line).unwrap_or_else(|e| panic!("stderr not JSON ({e}): {stderr}"));
    assert_eq!(v["error"]["exit_code"].as_i64(), out.status.code().map(i64::from));
    v["error"].clone()
}

fn write_scene(dir: &Path) {
    let scene = serde_json::json!({
        "width": 40, "height": 40, "frame_rate": 2200, "duration": 0.5, "noise_sigma": 1.0,
        "motion": [{"region": {"x": 0, "y": 0, "width": 40, "height": 40},
                    "displacement": {"type": "tones", "tones": [{"frequency_hz": 440, "amplitude_px": 0.2}]}}]
    });
    std::fs::write(dir.join("scene.json"), scene.to_string()).unwrap();
}

fn synth(dir: &Path) {
    write_scene(dir);
    let out = vibrophone(dir, &["synth", "scene.json", "--seed", "3", "--output-dir", "s"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn help_and_version_succeed() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["--help"][..], &["--version"], &["extract", "--help"]] {
        assert_eq!(vibrophone(dir.path(), args).status.code(), Some(0), "{args:?}");
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&[][..], &["extract"], &["extract", "v.rvid", "--no-such-flag"], &["bogus"]] {
        let out = vibrophone(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_of(&out)["kind"], "usage");
    }
}

#[test]
fn invalid_settings_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let cases: [&[&str]; 4] = [
        &["extract", "s/video.rvid", "--interpolation", "cubic"],
        &["extract", "s/video.rvid", "--block-size", "0"],
        &["extract", "s/video.rvid", "--top-fraction", "1.5"],
        &["extract", "s/video.rvid", "--band", "4000:85"],
    ];
    for args in cases {
        let out = vibrophone(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(error_of(&out)["kind"], "invalid_argument", "{args:?}");
    }

    std::fs::write(dir.path().join("bad.json"), r#"{"block_size": 8, "colour": "blue"}"#).unwrap();
    let out = vibrophone(dir.path(), &["--config", "bad.json", "extract", "s/video.rvid"]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(dir.path().join("scene_bad.json"), r#"{"width": 0}"#).unwrap();
    let out = vibrophone(dir.path(), &["synth", "scene_bad.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = vibrophone(dir.path(), &["extract", "missing.rvid"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["kind"], "io");

    std::fs::write(dir.path().join("junk.rvid"), b"definitely not a video container").unwrap();
    let out = vibrophone(dir.path(), &["extract", "junk.rvid"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["kind"], "malformed_header");
}

#[test]
fn extract_writes_stamped_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    synth(root);
    assert!(root.join("s/truth.csv").exists());
    let out = vibrophone(root, &["extract", "s/video.rvid", "--seed", "3", "--output-dir", "x"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let (rate, samples) = vibrophone::video::read_wav(root.join("x/audio.wav")).map(|a| (a.sample_rate(), a.len())).unwrap();
    assert_eq!(rate, 2200.0);
    assert_eq!(samples, 1100);

    let scores = std::fs::read_to_string(root.join("x/scores.csv")).unwrap();
    let header = scores.lines().next().unwrap();
    let stamp: Value = serde_json::from_str(header.strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(stamp["command"], "extract");
    assert_eq!(stamp["config"]["seed"], 3);
    assert!(stamp["config"].get("workers").is_none());
    assert_eq!(scores.lines().nth(1), Some("block_id,x,y,score,selected"));

    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(root.join("x/manifest.json")).unwrap()).unwrap();
    let artifacts: Vec<&str> = manifest["artifacts"].as_array().unwrap().iter().filter_map(|a| a.as_str()).collect();
    for name in ["audio.wav", "scores.csv", "spectrogram.csv", "spectrogram.png"] {
        assert!(artifacts.contains(&name), "{name} missing from {artifacts:?}");
        assert!(root.join("x").join(name).exists());
    }
}

#[test]
fn outputs_are_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    synth(root);
    for (workers, out_dir) in [("1", "a"), ("3", "b")] {
        let out = vibrophone(root, &["extract", "s/video.rvid", "--workers", workers, "--output-dir", out_dir]);
        assert!(out.status.success());
        let out = vibrophone(root, &["scoremap", "s/video.rvid", "--workers", workers, "--output-dir", &format!("{out_dir}/map")]);
        assert!(out.status.success());
    }
    for f in ["audio.wav", "scores.csv", "spectrogram.csv", "spectrogram.png", "manifest.json", "map/scores.csv"] {
        let a = std::fs::read(root.join("a").join(f)).unwrap();
        let b = std::fs::read(root.join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
}

#[test]
fn metrics_of_a_file_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    synth(root);
    let out = vibrophone(root, &["extract", "s/video.rvid", "--output-dir", "x"]);
    assert!(out.status.success());
    let out = vibrophone(root, &["metrics", "x/audio.wav", "x/audio.wav", "--output-dir", "m"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m: Value = serde_json::from_str(&std::fs::read_to_string(root.join("m/metrics.json")).unwrap()).unwrap();
    assert_eq!(m["seg_snr"], 35.0);
    assert_eq!(m["mean_llr"].as_f64().unwrap().abs(), 0.0);
}
