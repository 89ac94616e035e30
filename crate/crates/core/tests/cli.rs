mod common;

use std::path::Path;
use std::process::{Command, Output};

fn voxveil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voxveil")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn empty_manifest_anonymizes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.csv");
    std::fs::write(&manifest, "utt_id,speaker_id,audio_path\n").unwrap();
    let out = dir.path().join("out");
    let o = voxveil(&["anonymize", "--manifest", s(&manifest), "--out", s(&out), "--method", "mcadams"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["utterances"].as_array().unwrap().len(), 0);
    assert_eq!(std::fs::read_to_string(out.join("manifest.csv")).unwrap().trim(), "utt_id,speaker_id,audio_path");
}

#[test]
fn mcadams_run_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::corpus(2, 2, 0.8, 4);
    common::write_corpus(&corpus, &dir.path().join("data"));
    let manifest = dir.path().join("data/manifest.csv");
    let out = dir.path().join("anon");
    let o = voxveil(&[
        "anonymize", "--manifest", s(&manifest), "--out", s(&out), "--method", "mcadams", "--seed", "3", "--workers", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    let utts = report["utterances"].as_array().unwrap();
    assert_eq!(utts.len(), 4);
    assert_eq!(report["seed"], 3);
    for u in utts {
        let alpha = u["drawn_params"]["alpha"].as_f64().unwrap();
        assert!((0.5..=0.9).contains(&alpha));
    }
    assert!(out.join("spk00/spk00_u00.wav").exists());

    let eval = dir.path().join("eval.json");
    let o = voxveil(&[
        "evaluate", "--manifest", s(&manifest), "--anon-manifest", s(&out.join("manifest.csv")), "--out", s(&eval),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(&eval).unwrap()).unwrap();
    for key in ["eer_original", "eer_anonymized"] {
        let v = r[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    assert!(r["gvd_db"].is_number() || r["gvd_db"] == "-inf");
}

#[test]
fn same_input_and_output_directory_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::corpus(1, 1, 0.6, 1);
    let manifest = common::write_corpus(&corpus, dir.path());
    drop(manifest);
    let o = voxveil(&["anonymize", "--manifest", s(&dir.path().join("manifest.csv")), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("none.csv");
    let o = voxveil(&["anonymize", "--manifest", s(&missing), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(4));

    let manifest = dir.path().join("m.csv");
    std::fs::write(&manifest, "utt_id,speaker_id,audio_path\nu1,s1,nope.wav\n").unwrap();
    let o = voxveil(&["anonymize", "--manifest", s(&manifest), "--out", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    let o = voxveil(&[
        "anonymize", "--manifest", s(&manifest), "--out", s(&dir.path().join("o2")), "--alpha", "1.5",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let o = voxveil(&["anonymize", "--manifest", s(&manifest), "--out", s(&dir.path().join("o3")), "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn correlate_reproduces_fixture_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corr.json");
    let scatter = dir.path().join("scatter");
    let o = voxveil(&[
        "correlate", "--scores", &fixture("table1.csv"), "--out", s(&out), "--emit-scatter", s(&scatter),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let corr = r["correlations"].as_array().unwrap();
    assert_eq!(corr.len(), 12);
    let cell = corr.iter().find(|c| c["x"] == "GVD" && c["y"] == "TTS-SIM").unwrap();
    assert!((cell["r"].as_f64().unwrap() - 0.827).abs() < 0.005);
    assert!(scatter.join("scatter_GVD__TTS_SIM.csv").exists());

    let o = voxveil(&["correlate", "--scores", &fixture("table1.csv"), "--pairs", "EER:SA-SIM"]);
    assert!(o.status.success());
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r["correlations"][0]["r"].as_f64().unwrap() + 0.946).abs() < 0.001);
}

#[test]
fn correlate_single_system_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("one.csv");
    std::fs::write(&t, "system,EER,TTS-SIM\nA,1.0,2.0\n").unwrap();
    let o = voxveil(&["correlate", "--scores", s(&t)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn embed_writes_a_saeb_keyed_by_utterance() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = common::corpus(2, 1, 0.8, 8);
    common::write_corpus(&corpus, dir.path());
    let out = dir.path().join("emb.saeb");
    let o = voxveil(&["embed", "--manifest", s(&dir.path().join("manifest.csv")), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pool = voxveil::embeddings::load_pool(&out).unwrap();
    assert_eq!(pool.len(), 2);
    assert!(pool.get(&corpus[0].utt_id).is_some());
}
