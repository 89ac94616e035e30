use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use voxveil::embeddings::{save_pool, EmbeddingPool, PoolEntry, SpeakerEmbedding};
use voxveil_ffi::*;

fn voiced(secs: f64, f0: f64) -> Vec<f64> {
    let n = (secs * 16000.0) as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / 16000.0;
            (1..=8).map(|h| (2.0 * std::f64::consts::PI * f0 * h as f64 * t).sin() / h as f64).sum::<f64>() * 0.2
        })
        .collect()
}

fn audio(samples: &[f64]) -> *mut VvAudio {
    let mut out = ptr::null_mut();
    let st = unsafe { vv_audio_from_samples(samples.as_ptr(), samples.len(), 16000, &mut out) };
    assert_eq!(st, VvStatus::Ok);
    out
}

fn last_error() -> String {
    let p = vv_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn audio_round_trip_through_wav() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("a.wav").to_str().unwrap()).unwrap();
    let samples = voiced(0.3, 150.0);
    let a = audio(&samples);
    unsafe {
        let mut clipped = 99;
        assert_eq!(vv_audio_write_wav(a, path.as_ptr(), &mut clipped), VvStatus::Ok);
        assert_eq!(clipped, 0);
        let mut b = ptr::null_mut();
        assert_eq!(vv_audio_read_wav(path.as_ptr(), &mut b), VvStatus::Ok);
        assert_eq!(vv_audio_len(b), samples.len());
        assert_eq!(vv_audio_sample_rate(b), 16000);
        let back = std::slice::from_raw_parts(vv_audio_samples(b), vv_audio_len(b));
        let err = back.iter().zip(&samples).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1.0 / 16384.0, "{err}");
        vv_audio_free(a);
        vv_audio_free(b);
    }
}

#[test]
fn missing_file_reports_io() {
    let path = CString::new("/nonexistent/x.wav").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { vv_audio_read_wav(path.as_ptr(), &mut out) };
    assert_eq!(st, VvStatus::Io);
    assert!(out.is_null());
    assert!(last_error().contains("x.wav"));
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        assert_eq!(vv_audio_from_samples(ptr::null(), 5, 16000, &mut ptr::null_mut()), VvStatus::NullPointer);
        let mut out = 0.0;
        assert_eq!(vv_pearson(ptr::null(), ptr::null(), 3, &mut out), VvStatus::NullPointer);
        assert_eq!(vv_audio_len(ptr::null()), 0);
        assert!(vv_audio_samples(ptr::null()).is_null());
        vv_audio_free(ptr::null_mut());
        vv_pool_free(ptr::null_mut());
    }
}

#[test]
fn mcadams_is_deterministic_and_reports_alpha() {
    let samples = voiced(0.5, 130.0);
    let a = audio(&samples);
    let spk = CString::new("spk1").unwrap();
    let utt = CString::new("u1").unwrap();
    unsafe {
        let (mut o1, mut o2) = (ptr::null_mut(), ptr::null_mut());
        let (mut a1, mut a2) = (0.0, 0.0);
        assert_eq!(vv_anonymize_mcadams(a, spk.as_ptr(), utt.as_ptr(), 7, f64::NAN, &mut o1, &mut a1), VvStatus::Ok);
        assert_eq!(vv_anonymize_mcadams(a, spk.as_ptr(), utt.as_ptr(), 7, f64::NAN, &mut o2, &mut a2), VvStatus::Ok);
        assert_eq!(a1, a2);
        assert!((0.5..=0.9).contains(&a1));
        let s1 = std::slice::from_raw_parts(vv_audio_samples(o1), vv_audio_len(o1));
        let s2 = std::slice::from_raw_parts(vv_audio_samples(o2), vv_audio_len(o2));
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), samples.len());

        let mut o3 = ptr::null_mut();
        let mut used = 0.0;
        assert_eq!(vv_anonymize_mcadams(a, spk.as_ptr(), utt.as_ptr(), 7, 0.7, &mut o3, &mut used), VvStatus::Ok);
        assert_eq!(used, 0.7);

        let mut bad = ptr::null_mut();
        let st = vv_anonymize_mcadams(a, spk.as_ptr(), utt.as_ptr(), 7, 1.5, &mut bad, ptr::null_mut());
        assert_ne!(st, VvStatus::Ok);
        assert!(bad.is_null());
        for h in [a, o1, o2, o3] {
            vv_audio_free(h);
        }
    }
}

#[test]
fn pitch_shift_uses_fixed_semitones() {
    let a = audio(&voiced(0.5, 140.0));
    let spk = CString::new("s").unwrap();
    unsafe {
        let mut out = ptr::null_mut();
        let mut used = 0.0;
        assert_eq!(vv_anonymize_pitch_shift(a, spk.as_ptr(), spk.as_ptr(), 1, -4.0, &mut out, &mut used), VvStatus::Ok);
        assert_eq!(used, -4.0);
        assert_eq!(vv_audio_len(out), vv_audio_len(a));
        let mut drawn = 0.0;
        let mut out2 = ptr::null_mut();
        assert_eq!(
            vv_anonymize_pitch_shift(a, spk.as_ptr(), spk.as_ptr(), 1, f64::NAN, &mut out2, &mut drawn),
            VvStatus::Ok
        );
        assert!((3.0..=5.0).contains(&drawn.abs()));
        vv_audio_free(a);
        vv_audio_free(out);
        vv_audio_free(out2);
    }
}

#[test]
fn baseline_embedding_and_cosine() {
    let a = audio(&voiced(1.0, 120.0));
    unsafe {
        let mut buf = [0f32; 64];
        let mut dim = 0;
        assert_eq!(vv_baseline_embedding(a, buf.as_mut_ptr(), buf.len(), &mut dim), VvStatus::Ok);
        assert_eq!(dim, 42);
        let mut cos = 0.0;
        assert_eq!(vv_cosine_similarity(buf.as_ptr(), buf.as_ptr(), dim, &mut cos), VvStatus::Ok);
        assert!((cos - 1.0).abs() < 1e-9);
        let mut small = [0f32; 10];
        assert_eq!(vv_baseline_embedding(a, small.as_mut_ptr(), 10, ptr::null_mut()), VvStatus::InvalidArgument);
        vv_audio_free(a);

        let zero = [0f32; 4];
        let one = [1f32; 4];
        assert_eq!(vv_cosine_similarity(zero.as_ptr(), one.as_ptr(), 4, &mut cos), VvStatus::Validation);
    }
}

#[test]
fn metrics_match_known_values() {
    unsafe {
        let mut eer = 0.0;
        let mated = [0.9, 0.8, 0.7];
        let non = [0.1, 0.2, 0.3];
        assert_eq!(vv_compute_eer(mated.as_ptr(), 3, non.as_ptr(), 3, &mut eer), VvStatus::Ok);
        assert_eq!(eer, 0.0);
        assert_eq!(vv_compute_eer(mated.as_ptr(), 3, non.as_ptr(), 0, &mut eer), VvStatus::InvalidArgument);

        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.5];
        let mut r = 0.0;
        assert_eq!(vv_pearson(x.as_ptr(), y.as_ptr(), 4, &mut r), VvStatus::Ok);
        assert!(r > 0.99 && r <= 1.0);
        let flat = [1.0; 4];
        assert_eq!(vv_pearson(x.as_ptr(), flat.as_ptr(), 4, &mut r), VvStatus::UndefinedCorrelation);

        let orig = [1.0, 0.2, 0.2, 1.0];
        let same = [1.0, 0.5, 0.5, 0.5];
        let mut g = 0.0;
        assert_eq!(vv_gvd(orig.as_ptr(), orig.as_ptr(), 2, &mut g), VvStatus::Ok);
        assert_eq!(g, 0.0);
        let collapsed = [0.5; 4];
        assert_eq!(vv_gvd(orig.as_ptr(), collapsed.as_ptr(), 2, &mut g), VvStatus::Ok);
        assert_eq!(g, f64::NEG_INFINITY);
        assert_eq!(vv_gvd(collapsed.as_ptr(), same.as_ptr(), 2, &mut g), VvStatus::UndefinedBaseline);
    }
}

#[test]
fn pool_load_and_anonymize() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pool.saeb");
    let entries = (0..20)
        .map(|i| {
            let v: Vec<f32> = (0..4).map(|j| ((i * 7 + j * 3) % 11) as f32 - 5.0 + 0.1).collect();
            PoolEntry {
                id: format!("p{i:02}"),
                embedding: SpeakerEmbedding::new(v).unwrap(),
            }
        })
        .collect();
    save_pool(&EmbeddingPool::new(4, entries).unwrap(), &path).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let spk = CString::new("spk").unwrap();
    unsafe {
        let mut pool = ptr::null_mut();
        assert_eq!(vv_pool_load(cpath.as_ptr(), &mut pool), VvStatus::Ok);
        assert_eq!(vv_pool_len(pool), 20);
        assert_eq!(vv_pool_dim(pool), 4);
        let src = [1.0f32, 0.5, -0.2, 0.3];
        let (mut o1, mut o2) = ([0f32; 4], [0f32; 4]);
        let st = vv_anonymize_embedding_pool(pool, src.as_ptr(), 4, spk.as_ptr(), spk.as_ptr(), 3, 10, 5, o1.as_mut_ptr());
        assert_eq!(st, VvStatus::Ok);
        vv_anonymize_embedding_pool(pool, src.as_ptr(), 4, spk.as_ptr(), spk.as_ptr(), 3, 10, 5, o2.as_mut_ptr());
        assert_eq!(o1, o2);
        let st = vv_anonymize_embedding_pool(pool, src.as_ptr(), 4, spk.as_ptr(), spk.as_ptr(), 3, 50, 5, o1.as_mut_ptr());
        assert_ne!(st, VvStatus::Ok);
        vv_pool_free(pool);
    }
    std::fs::write(dir.path().join("bad.saeb"), b"NOPE").unwrap();
    let bad = CString::new(dir.path().join("bad.saeb").to_str().unwrap()).unwrap();
    let mut pool = ptr::null_mut();
    assert_eq!(unsafe { vv_pool_load(bad.as_ptr(), &mut pool) }, VvStatus::Format);
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(vv_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("voxveil.h")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "VV_STATUS_OK",
        "typedef struct VvAudio VvAudio",
        "typedef struct VvPool VvPool",
        "vv_last_error_message",
        "vv_audio_read_wav",
        "vv_anonymize_mcadams",
        "vv_anonymize_embedding_pool",
        "vv_compute_eer",
        "vv_gvd",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = lib_dir.join("libvoxveil_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <math.h>
#include <stdio.h>
#include "voxveil.h"
int main(void) {
    double mated[] = {0.9, 0.4}, non[] = {0.5, 0.1};
    double eer = -1.0;
    if (vv_compute_eer(mated, 2, non, 2, &eer) != VV_STATUS_OK) return 1;
    double s[1600];
    for (int i = 0; i < 1600; i++) s[i] = 0.3 * sin(i * 0.05);
    VvAudio *a = NULL;
    if (vv_audio_from_samples(s, 1600, 16000, &a) != VV_STATUS_OK) return 2;
    if (vv_audio_len(a) != 1600) return 3;
    vv_audio_free(a);
    if (vv_audio_read_wav("/nonexistent.wav", &a) != VV_STATUS_IO) return 4;
    if (vv_last_error_message() == NULL) return 5;
    printf("%.4f\n", eer);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.5000");
}
