use std::io::Write;

use proptest::prelude::*;
use voxveil::audio::{load_manifest, read_wav, resample, write_manifest, write_wav, AudioBuffer};
use voxveil::Error;

#[test]
fn pcm16_round_trip_is_within_one_lsb() {
    let dir = tempfile::tempdir().unwrap();
    let samples: Vec<f64> = (0..4000).map(|i| 0.8 * (i as f64 * 0.013).sin()).collect();
    let path = dir.path().join("x.wav");
    let summary = write_wav(&AudioBuffer::new(samples.clone(), 16000).unwrap(), &path).unwrap();
    assert_eq!(summary.clipped, 0);
    let back = read_wav(&path).unwrap();
    assert_eq!(back.sample_rate_hz, 16000);
    assert_eq!(back.len(), samples.len());
    for (a, b) in back.samples.iter().zip(&samples) {
        assert!((a - b).abs() <= 1.0 / 32768.0);
    }
}

#[test]
fn clipping_is_counted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.wav");
    let buf = AudioBuffer::new(vec![0.0, 1.5, -2.0, 0.5], 16000).unwrap();
    assert_eq!(write_wav(&buf, &path).unwrap().clipped, 2);
    let back = read_wav(&path).unwrap();
    assert!(back.samples[1] > 0.999 && back.samples[2] <= -0.999);
}

#[test]
fn stereo_float_is_averaged_to_mono() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.wav");
    let spec = hound::WavSpec {
        channels: 2,
        sample_rate: 22050,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::create(&path, spec).unwrap();
    for i in 0..100 {
        w.write_sample(i as f32 / 100.0).unwrap();
        w.write_sample(-(i as f32) / 200.0).unwrap();
    }
    w.finalize().unwrap();
    let back = read_wav(&path).unwrap();
    assert_eq!(back.sample_rate_hz, 22050);
    assert_eq!(back.len(), 100);
    assert!((back.samples[50] - 0.125).abs() < 1e-6);
}

#[test]
fn truncated_file_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.wav");
    write_wav(&AudioBuffer::new(vec![0.1; 1000], 16000).unwrap(), &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..30]).unwrap();
    assert!(matches!(read_wav(&path), Err(Error::Format { .. })));
}

#[test]
fn eight_bit_is_unsupported_and_missing_is_io() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u8.wav");
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: 16000,
        bits_per_sample: 8,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(&path, spec).unwrap();
    w.write_sample(3i8).unwrap();
    w.finalize().unwrap();
    assert!(matches!(read_wav(&path), Err(Error::Unsupported(_))));
    let err = read_wav(dir.path().join("missing.wav")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn manifest_round_trip_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    std::fs::write(&path, "utt_id,speaker_id,audio_path\nu1,s1,a/u1.wav\nu2,s2,b/u2.wav\n").unwrap();
    let m = load_manifest(&path, dir.path()).unwrap();
    assert_eq!(m.records.len(), 2);
    assert_eq!(m.resolve(&m.records[1]), dir.path().join("b/u2.wav"));
    let copy = dir.path().join("copy.csv");
    write_manifest(&m, &copy).unwrap();
    assert_eq!(load_manifest(&copy, dir.path()).unwrap().records, m.records);

    let dup = dir.path().join("dup.csv");
    let mut f = std::fs::File::create(&dup).unwrap();
    writeln!(f, "utt_id,speaker_id,audio_path\nu1,s1,x.wav\nu1,s2,y.wav").unwrap();
    assert!(matches!(load_manifest(&dup, dir.path()), Err(Error::Validation(_))));

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "utt_id,speaker_id,audio_path\n").unwrap();
    assert!(load_manifest(&empty, dir.path()).unwrap().records.is_empty());
}

#[test]
fn resampling_preserves_a_low_tone() {
    let src: Vec<f64> = (0..44100).map(|i| (2.0 * std::f64::consts::PI * 440.0 * i as f64 / 44100.0).sin()).collect();
    let out = resample(&AudioBuffer::new(src, 44100).unwrap(), 16000).unwrap();
    assert!((out.len() as i64 - 16000).abs() <= 1);
    let mid = &out.samples[2000..14000];
    let err = mid
        .iter()
        .enumerate()
        .map(|(k, v)| (v - (2.0 * std::f64::consts::PI * 440.0 * (k + 2000) as f64 / 16000.0).sin()).abs())
        .fold(0.0, f64::max);
    assert!(err < 0.01, "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wav_round_trip_any_in_range_signal(v in prop::collection::vec(-1.0f64..1.0, 1..500)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.wav");
        write_wav(&AudioBuffer::new(v.clone(), 16000).unwrap(), &path).unwrap();
        let back = read_wav(&path).unwrap();
        prop_assert_eq!(back.len(), v.len());
        for (a, b) in back.samples.iter().zip(&v) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0 + 1e-12);
        }
    }
}
