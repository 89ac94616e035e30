//! C ABI for voxveil.
//!
//! Every fallible function returns a [`VvStatus`]; on failure a message is
//! available from [`vv_last_error_message`] on the same thread. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use voxveil::anonymizers::{
    anonymize_embedding_pool, anonymize_mcadams, anonymize_pitch_shift, AnonymizerConfig, DrawnParams, Method,
    UtteranceKey,
};
use voxveil::audio::{read_wav, write_wav, AudioBuffer};
use voxveil::embeddings::{cosine_similarity, extract_baseline_embedding, load_pool, EmbeddingPool, SpeakerEmbedding};
use voxveil::metrics::{compute_eer, compute_gvd, pearson, Gvd, ScoreSet, SimilarityMatrix};
use voxveil::Error;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Format = 3,
    Io = 4,
    Validation = 5,
    Numerical = 6,
    SamplingExhausted = 7,
    UndefinedBaseline = 8,
    UndefinedCorrelation = 9,
    Panic = 10,
}

/// Audio buffer handle.
pub struct VvAudio(AudioBuffer);

/// Embedding pool handle.
pub struct VvPool(EmbeddingPool);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> VvStatus {
    match err {
        Error::Format { .. } | Error::Unsupported(_) | Error::Schema(_) => VvStatus::Format,
        Error::Io { .. } => VvStatus::Io,
        Error::Precondition(_) | Error::Configuration(_) => VvStatus::InvalidArgument,
        Error::Validation(_) => VvStatus::Validation,
        Error::DegenerateFrame | Error::Numerical(_) | Error::Stability(_) => VvStatus::Numerical,
        Error::SamplingExhausted { .. } => VvStatus::SamplingExhausted,
        Error::UndefinedBaseline => VvStatus::UndefinedBaseline,
        Error::UndefinedCorrelation(_) => VvStatus::UndefinedCorrelation,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), VvStatus>) -> VvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VvStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            VvStatus::Panic
        }
    }
}

fn fail(err: Error) -> VvStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn null(what: &str) -> VvStatus {
    set_error(format!("{what} is NULL"));
    VvStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, VvStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        VvStatus::InvalidArgument
    })
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], VvStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message describing the last failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies `len` samples into a new audio handle.
///
/// # Safety
/// `samples` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vv_audio_from_samples(
    samples: *const f64,
    len: usize,
    sample_rate_hz: u32,
    out: *mut *mut VvAudio,
) -> VvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let data = slice_arg(samples, len, "samples")?.to_vec();
        let buffer = AudioBuffer::new(data, sample_rate_hz).map_err(fail)?;
        *out = Box::into_raw(Box::new(VvAudio(buffer)));
        Ok(())
    })
}

/// Reads a WAV file (16-bit PCM or 32-bit float, channels averaged).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vv_audio_read_wav(path: *const c_char, out: *mut *mut VvAudio) -> VvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let buffer = read_wav(path).map_err(fail)?;
        *out = Box::into_raw(Box::new(VvAudio(buffer)));
        Ok(())
    })
}

/// Writes 16-bit PCM mono; `clipped` (optional) receives the clipped sample count.
///
/// # Safety
/// `audio` must be a live handle; `path` NUL-terminated; `clipped` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn vv_audio_write_wav(audio: *const VvAudio, path: *const c_char, clipped: *mut usize) -> VvStatus {
    guard(|| {
        let audio = audio.as_ref().ok_or_else(|| null("audio"))?;
        let path = str_arg(path, "path")?;
        let summary = write_wav(&audio.0, path).map_err(fail)?;
        if !clipped.is_null() {
            *clipped = summary.clipped;
        }
        Ok(())
    })
}

/// Number of samples; 0 for NULL.
///
/// # Safety
/// `audio` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vv_audio_len(audio: *const VvAudio) -> usize {
    audio.as_ref().map_or(0, |a| a.0.len())
}

/// Sample rate in Hz; 0 for NULL.
///
/// # Safety
/// `audio` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vv_audio_sample_rate(audio: *const VvAudio) -> u32 {
    audio.as_ref().map_or(0, |a| a.0.sample_rate_hz)
}

/// Borrowed pointer to the samples, valid while the handle lives.
///
/// # Safety
/// `audio` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vv_audio_samples(audio: *const VvAudio) -> *const f64 {
    audio.as_ref().map_or(ptr::null(), |a| a.0.samples.as_ptr())
}

/// # Safety
/// `audio` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vv_audio_free(audio: *mut VvAudio) {
    if !audio.is_null() {
        drop(Box::from_raw(audio));
    }
}

fn waveform_config(method: Method, seed: u64) -> AnonymizerConfig {
    AnonymizerConfig {
        method,
        seed,
        ..AnonymizerConfig::default()
    }
}

/// McAdams anonymization. Pass NaN as `alpha` to draw it from the seed; the
/// value used is written to `alpha_used` when non-NULL.
///
/// # Safety
/// `input` must be a live handle, ids NUL-terminated, `out` writable,
/// `alpha_used` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn vv_anonymize_mcadams(
    input: *const VvAudio,
    speaker_id: *const c_char,
    utt_id: *const c_char,
    seed: u64,
    alpha: f64,
    out: *mut *mut VvAudio,
    alpha_used: *mut f64,
) -> VvStatus {
    guard(|| {
        let input = input.as_ref().ok_or_else(|| null("input"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let key = UtteranceKey::new(str_arg(speaker_id, "speaker_id")?, str_arg(utt_id, "utt_id")?);
        let mut cfg = waveform_config(Method::Mcadams, seed);
        cfg.mcadams_alpha = (!alpha.is_nan()).then_some(alpha);
        let r = anonymize_mcadams(&input.0, &cfg, key).map_err(fail)?;
        if let (DrawnParams::Mcadams { alpha }, false) = (&r.drawn_params, alpha_used.is_null()) {
            *alpha_used = *alpha;
        }
        *out = Box::into_raw(Box::new(VvAudio(r.output)));
        Ok(())
    })
}

/// Pitch-shift anonymization. Pass NaN as `semitones` to draw the shift from
/// the seed; the shift used is written to `semitones_used` when non-NULL.
///
/// # Safety
/// As for [`vv_anonymize_mcadams`].
#[no_mangle]
pub unsafe extern "C" fn vv_anonymize_pitch_shift(
    input: *const VvAudio,
    speaker_id: *const c_char,
    utt_id: *const c_char,
    seed: u64,
    semitones: f64,
    out: *mut *mut VvAudio,
    semitones_used: *mut f64,
) -> VvStatus {
    guard(|| {
        let input = input.as_ref().ok_or_else(|| null("input"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let key = UtteranceKey::new(str_arg(speaker_id, "speaker_id")?, str_arg(utt_id, "utt_id")?);
        let mut cfg = waveform_config(Method::PitchShift, seed);
        cfg.semitones = (!semitones.is_nan()).then_some(semitones);
        let r = anonymize_pitch_shift(&input.0, &cfg, key).map_err(fail)?;
        if let (DrawnParams::PitchShift { semitones, .. }, false) = (&r.drawn_params, semitones_used.is_null()) {
            *semitones_used = *semitones;
        }
        *out = Box::into_raw(Box::new(VvAudio(r.output)));
        Ok(())
    })
}

/// Loads a SAEB pool file.
///
/// # Safety
/// `path` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vv_pool_load(path: *const c_char, out: *mut *mut VvPool) -> VvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let pool = load_pool(str_arg(path, "path")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(VvPool(pool)));
        Ok(())
    })
}

/// # Safety
/// `pool` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vv_pool_len(pool: *const VvPool) -> usize {
    pool.as_ref().map_or(0, |p| p.0.len())
}

/// # Safety
/// `pool` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vv_pool_dim(pool: *const VvPool) -> usize {
    pool.as_ref().map_or(0, |p| p.0.dim())
}

/// # Safety
/// `pool` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vv_pool_free(pool: *mut VvPool) {
    if !pool.is_null() {
        drop(Box::from_raw(pool));
    }
}

unsafe fn embedding_arg(p: *const f32, dim: usize, what: &str) -> Result<SpeakerEmbedding, VvStatus> {
    SpeakerEmbedding::new(slice_arg(p, dim, what)?.to_vec()).map_err(fail)
}

/// Averages `m` random members of the `k` pool entries farthest from
/// `source` and writes the unit-length result to `out` (`dim` floats).
///
/// # Safety
/// `pool` live; `source` and `out` point to `dim` floats; ids NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn vv_anonymize_embedding_pool(
    pool: *const VvPool,
    source: *const f32,
    dim: usize,
    speaker_id: *const c_char,
    utt_id: *const c_char,
    seed: u64,
    k: usize,
    m: usize,
    out: *mut f32,
) -> VvStatus {
    guard(|| {
        let pool = pool.as_ref().ok_or_else(|| null("pool"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let source = embedding_arg(source, dim, "source")?;
        let key = UtteranceKey::new(str_arg(speaker_id, "speaker_id")?, str_arg(utt_id, "utt_id")?);
        let cfg = AnonymizerConfig {
            method: Method::PoolAverage,
            seed,
            pool_farthest_k: k,
            pool_average_m: m,
            ..AnonymizerConfig::default()
        };
        let r = anonymize_embedding_pool(&source, &pool.0, &cfg, key).map_err(fail)?;
        ptr::copy_nonoverlapping(r.output.as_slice().as_ptr(), out, dim);
        Ok(())
    })
}

/// Writes the 42-dimensional baseline embedding of `audio` into `out`, which
/// must hold `capacity` >= 42 floats. `dim` (optional) receives 42.
///
/// # Safety
/// `audio` live; `out` writable for `capacity` floats; `dim` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn vv_baseline_embedding(
    audio: *const VvAudio,
    out: *mut f32,
    capacity: usize,
    dim: *mut usize,
) -> VvStatus {
    guard(|| {
        let audio = audio.as_ref().ok_or_else(|| null("audio"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let e = extract_baseline_embedding(&audio.0).map_err(fail)?;
        if capacity < e.dim() {
            set_error(format!("output holds {capacity} floats, need {}", e.dim()));
            return Err(VvStatus::InvalidArgument);
        }
        ptr::copy_nonoverlapping(e.as_slice().as_ptr(), out, e.dim());
        if !dim.is_null() {
            *dim = e.dim();
        }
        Ok(())
    })
}

/// # Safety
/// `a` and `b` point to `dim` floats; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vv_cosine_similarity(a: *const f32, b: *const f32, dim: usize, out: *mut f64) -> VvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = embedding_arg(a, dim, "a")?;
        let b = embedding_arg(b, dim, "b")?;
        *out = cosine_similarity(&a, &b).map_err(fail)?;
        Ok(())
    })
}

/// Equal error rate (fraction) of mated and non-mated score arrays.
///
/// # Safety
/// Arrays readable for their lengths; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vv_compute_eer(
    mated: *const f64,
    n_mated: usize,
    nonmated: *const f64,
    n_nonmated: usize,
    out: *mut f64,
) -> VvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let scores = ScoreSet {
            mated: slice_arg(mated, n_mated, "mated")?.to_vec(),
            nonmated: slice_arg(nonmated, n_nonmated, "nonmated")?.to_vec(),
        };
        *out = compute_eer(&scores).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `x` and `y` readable for `n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vv_pearson(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> VvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = pearson(slice_arg(x, n, "x")?, slice_arg(y, n, "y")?).map_err(fail)?;
        Ok(())
    })
}

fn matrix(values: &[f64], n: usize) -> Result<SimilarityMatrix, VvStatus> {
    let ids = (0..n).map(|i| i.to_string()).collect();
    let rows = values.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
    SimilarityMatrix::new(ids, rows).map_err(fail)
}

/// GVD in dB between two row-major `n` x `n` similarity matrices. Complete
/// collapse of the anonymized matrix yields `-INFINITY` with status OK.
///
/// # Safety
/// Both matrices readable for `n * n` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vv_gvd(original: *const f64, anonymized: *const f64, n: usize, out: *mut f64) -> VvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n.checked_mul(n).ok_or_else(|| {
            set_error("matrix size overflows");
            VvStatus::InvalidArgument
        })?;
        let a = matrix(slice_arg(original, len, "original")?, n)?;
        let b = matrix(slice_arg(anonymized, len, "anonymized")?, n)?;
        *out = match compute_gvd(&a, &b).map_err(fail)? {
            Gvd::Db(v) => v,
            Gvd::NegInfinity => f64::NEG_INFINITY,
        };
        Ok(())
    })
}
