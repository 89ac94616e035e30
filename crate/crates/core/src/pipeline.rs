//! Batch operations behind the command-line front end: dataset anonymization,
//! embedding extraction, evaluation and correlation, each producing a report.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::anonymizers::{
    anonymize_embedding_pool, anonymize_embedding_sampled, anonymize_mcadams, anonymize_pitch_shift, derive_seed,
    AnonymizerConfig, DiagonalGaussian, Diagnostics, DrawnParams, Method, Scope, UtteranceKey,
};
use crate::audio::{read_wav, resample, write_manifest, write_wav, AudioBuffer, DatasetManifest, UtteranceRecord, WORKING_RATE_HZ};
use crate::embeddings::{
    extract_baseline_embedding, load_pool, mean_embedding, save_pool, EmbeddingPool, SpeakerEmbedding, UtteranceEmbedding,
    UtteranceEmbeddingSet,
};
use crate::error::{Error, Result};
use crate::metrics::{
    build_similarity_matrix, compute_eer, compute_gvd, correlate_table, diagonal_dominance, score_trials,
    score_trials_between, write_scatter, Gvd, SystemMetricsTable, Trial, TrialList,
};

pub const TOOL_NAME: &str = "voxveil";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the JSON encoding of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Configuration(format!("cannot start worker pool: {e}")))
}

/// Reads a WAV file and brings it to the working rate.
pub fn load_audio(path: &Path) -> Result<AudioBuffer> {
    let buffer = read_wav(path)?;
    if buffer.sample_rate_hz == WORKING_RATE_HZ {
        Ok(buffer)
    } else {
        resample(&buffer, WORKING_RATE_HZ)
    }
}

/// Embedding for one artifact: `.saeb` files hold a stored embedding, anything
/// else is read as audio and passed to the baseline extractor.
pub fn artifact_embedding(path: &Path) -> Result<SpeakerEmbedding> {
    if path.extension().is_some_and(|e| e == "saeb") {
        let pool = load_pool(path)?;
        match pool.entries() {
            [one] => Ok(one.embedding.clone()),
            other => Err(Error::Validation(format!(
                "{}: expected one embedding, found {}",
                path.display(),
                other.len()
            ))),
        }
    } else {
        extract_baseline_embedding(&load_audio(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub utt_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtteranceEntry {
    pub utt_id: String,
    pub speaker_id: String,
    pub output: String,
    pub drawn_params: DrawnParams,
    pub diagnostics: Diagnostics,
    pub clipped_samples: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DiagnosticTotals {
    pub bypassed_frames: usize,
    pub clamped_f0_frames: usize,
    pub rescaled_outputs: usize,
    pub clipped_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnonymizeReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
    pub config: AnonymizerConfig,
    pub utterances: Vec<UtteranceEntry>,
    pub failures: Vec<Failure>,
    pub diagnostics: DiagnosticTotals,
}

impl AnonymizeReport {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Inputs for one anonymization run.
#[derive(Debug, Clone)]
pub struct AnonymizeJob {
    pub manifest: DatasetManifest,
    pub out_dir: PathBuf,
    pub config: AnonymizerConfig,
    /// Required by the embedding-domain methods.
    pub pool: Option<EmbeddingPool>,
    pub workers: usize,
}

/// Output location mirroring the input layout under `out_dir`.
fn mirrored(out_dir: &Path, record: &UtteranceRecord, extension: Option<&str>) -> (PathBuf, String) {
    let rel = Path::new(&record.audio_path);
    let mut rel: PathBuf = if rel.is_absolute() {
        PathBuf::from(rel.file_name().unwrap_or_default())
    } else {
        rel.components()
            .filter(|c| matches!(c, std::path::Component::Normal(_)))
            .collect()
    };
    if let Some(ext) = extension {
        rel.set_extension(ext);
    }
    let rel_str = rel
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/");
    (out_dir.join(&rel), rel_str)
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(())
}

fn same_dir(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

/// Anonymizes every utterance of the manifest. Per-utterance failures are
/// recorded and do not stop the batch. Writes one artifact per utterance,
/// `manifest.csv` and `report.json` into `out_dir`.
pub fn run_anonymize(job: &AnonymizeJob) -> Result<AnonymizeReport> {
    let cfg = &job.config;
    cfg.validate()?;
    if same_dir(&job.out_dir, &job.manifest.root_dir) {
        return Err(Error::Validation("output directory must differ from the input root".into()));
    }
    std::fs::create_dir_all(&job.out_dir).map_err(|e| Error::io(&job.out_dir, e))?;
    if job.manifest.records.is_empty() {
        log::warn!("empty manifest; nothing to anonymize");
    }
    let pool = thread_pool(job.workers)?;
    let results: Vec<(usize, Result<UtteranceEntry>)> = if cfg.method.is_waveform() {
        pool.install(|| {
            job.manifest
                .records
                .par_iter()
                .enumerate()
                .map(|(i, r)| (i, anonymize_waveform_record(job, r)))
                .collect()
        })
    } else {
        anonymize_embedding_records(job, &pool)?
    };

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (i, res) in results {
        match res {
            Ok(e) => entries.push(e),
            Err(e) => failures.push(Failure {
                utt_id: job.manifest.records[i].utt_id.clone(),
                error: e.to_string(),
            }),
        }
    }
    entries.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
    failures.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));

    let mut totals = DiagnosticTotals::default();
    for e in &entries {
        totals.bypassed_frames += e.diagnostics.bypassed_frames;
        totals.clamped_f0_frames += e.diagnostics.clamped_f0_frames;
        totals.rescaled_outputs += e.diagnostics.rescaled as usize;
        totals.clipped_samples += e.clipped_samples;
    }

    let anon_manifest = DatasetManifest::new(
        entries
            .iter()
            .map(|e| UtteranceRecord {
                utt_id: e.utt_id.clone(),
                speaker_id: e.speaker_id.clone(),
                audio_path: e.output.clone(),
            })
            .collect(),
        &job.out_dir,
    )?;
    write_manifest(&anon_manifest, job.out_dir.join("manifest.csv"))?;

    let report = AnonymizeReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "anonymize",
        seed: cfg.seed,
        config_hash: config_hash(cfg),
        config: cfg.clone(),
        utterances: entries,
        failures,
        diagnostics: totals,
    };
    write_json(&report, job.out_dir.join("report.json"))?;
    Ok(report)
}

fn anonymize_waveform_record(job: &AnonymizeJob, record: &UtteranceRecord) -> Result<UtteranceEntry> {
    let buffer = load_audio(&job.manifest.resolve(record))?;
    let key = UtteranceKey::new(&record.speaker_id, &record.utt_id);
    let result = match job.config.method {
        Method::PitchShift => anonymize_pitch_shift(&buffer, &job.config, key)?,
        Method::Mcadams => anonymize_mcadams(&buffer, &job.config, key)?,
        _ => unreachable!("waveform methods only"),
    };
    let (path, rel) = mirrored(&job.out_dir, record, Some("wav"));
    ensure_parent(&path)?;
    let summary = write_wav(&result.output, &path)?;
    Ok(UtteranceEntry {
        utt_id: record.utt_id.clone(),
        speaker_id: record.speaker_id.clone(),
        output: rel,
        drawn_params: result.drawn_params,
        diagnostics: result.diagnostics,
        clipped_samples: summary.clipped,
    })
}

fn anonymize_embedding_records(
    job: &AnonymizeJob,
    pool: &rayon::ThreadPool,
) -> Result<Vec<(usize, Result<UtteranceEntry>)>> {
    let cfg = &job.config;
    let speaker_pool = job
        .pool
        .as_ref()
        .ok_or_else(|| Error::Validation(format!("method {} needs a speaker pool (--pool)", cfg.method)))?;
    let sampler = match cfg.method {
        Method::ConstrainedSample => Some(DiagonalGaussian::fit(speaker_pool)?),
        _ => None,
    };
    if cfg.method == Method::PoolAverage {
        cfg.validate_pool_size(speaker_pool.len())?;
    }
    let records = &job.manifest.records;
    let sources: Vec<Result<SpeakerEmbedding>> = pool.install(|| {
        records
            .par_iter()
            .map(|r| artifact_embedding(&job.manifest.resolve(r)))
            .collect()
    });

    // per-speaker scope anonymizes the mean embedding of each speaker
    let mut speaker_means: HashMap<&str, SpeakerEmbedding> = HashMap::new();
    if cfg.scope() == Scope::PerSpeaker {
        let mut groups: BTreeMap<&str, Vec<&SpeakerEmbedding>> = BTreeMap::new();
        for (r, s) in records.iter().zip(&sources) {
            if let Ok(e) = s {
                groups.entry(&r.speaker_id).or_default().push(e);
            }
        }
        for (spk, g) in groups {
            speaker_means.insert(spk, mean_embedding(g)?);
        }
    }

    let results = pool.install(|| {
        records
            .par_iter()
            .zip(sources.into_par_iter())
            .enumerate()
            .map(|(i, (record, source))| {
                let res = source.and_then(|utt_embedding| {
                    let source = speaker_means.get(record.speaker_id.as_str()).unwrap_or(&utt_embedding);
                    let key = UtteranceKey::new(&record.speaker_id, &record.utt_id);
                    let result = match &sampler {
                        Some(s) => anonymize_embedding_sampled(source, s, cfg, key)?,
                        None => anonymize_embedding_pool(source, speaker_pool, cfg, key)?,
                    };
                    let (path, rel) = mirrored(&job.out_dir, record, Some("saeb"));
                    ensure_parent(&path)?;
                    let single = EmbeddingPool::from_pairs(result.output.dim(), [(record.utt_id.clone(), result.output)])?;
                    save_pool(&single, &path)?;
                    Ok(UtteranceEntry {
                        utt_id: record.utt_id.clone(),
                        speaker_id: record.speaker_id.clone(),
                        output: rel,
                        drawn_params: result.drawn_params,
                        diagnostics: result.diagnostics,
                        clipped_samples: 0,
                    })
                });
                (i, res)
            })
            .collect()
    });
    Ok(results)
}

/// Embeddings for every manifest entry, in manifest order, with failures kept apart.
pub fn embed_manifest(manifest: &DatasetManifest, workers: usize) -> Result<(UtteranceEmbeddingSet, Vec<Failure>)> {
    let pool = thread_pool(workers)?;
    let results: Vec<Result<SpeakerEmbedding>> = pool.install(|| {
        manifest
            .records
            .par_iter()
            .map(|r| artifact_embedding(&manifest.resolve(r)))
            .collect()
    });
    let mut items = Vec::new();
    let mut failures = Vec::new();
    for (r, res) in manifest.records.iter().zip(results) {
        match res {
            Ok(embedding) => items.push(UtteranceEmbedding {
                utt_id: r.utt_id.clone(),
                speaker_id: r.speaker_id.clone(),
                embedding,
            }),
            Err(e) => failures.push(Failure {
                utt_id: r.utt_id.clone(),
                error: e.to_string(),
            }),
        }
    }
    items.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
    failures.sort_by(|a, b| a.utt_id.cmp(&b.utt_id));
    Ok((UtteranceEmbeddingSet::new(items)?, failures))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub output: String,
    pub count: usize,
    pub dimension: usize,
    pub failures: Vec<Failure>,
}

/// Extracts baseline embeddings and saves them as one `SAEB` file keyed by utt_id.
pub fn run_embed(manifest: &DatasetManifest, out_file: &Path, workers: usize) -> Result<EmbedReport> {
    let (set, failures) = embed_manifest(manifest, workers)?;
    let pool = set.to_pool()?;
    ensure_parent(out_file)?;
    save_pool(&pool, out_file)?;
    Ok(EmbedReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "embed",
        output: out_file.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
        count: pool.len(),
        dimension: pool.dim(),
        failures,
    })
}

/// Same-speaker cross-utterance ordered pairs as mated trials, plus an equal
/// number of distinct cross-speaker pairs drawn with the derived seed.
pub fn auto_trials(set: &UtteranceEmbeddingSet, seed: u64) -> TrialList {
    let items = set.items();
    let mut mated = Vec::new();
    let mut cross = Vec::new();
    for a in items {
        for b in items {
            if a.utt_id == b.utt_id {
                continue;
            }
            let pair = (a.utt_id.clone(), b.utt_id.clone());
            if a.speaker_id == b.speaker_id {
                mated.push(pair);
            } else {
                cross.push(pair);
            }
        }
    }
    mated.sort();
    cross.sort();
    let want = mated.len().min(cross.len());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "", "", "trials"));
    let mut picks = index::sample(&mut rng, cross.len(), want).into_vec();
    picks.sort_unstable();
    let mut trials: Vec<Trial> = mated
        .into_iter()
        .map(|(e, t)| Trial { enroll_utt: e, test_utt: t, is_mated: true })
        .collect();
    trials.extend(picks.into_iter().map(|i| Trial {
        enroll_utt: cross[i].0.clone(),
        test_utt: cross[i].1.clone(),
        is_mated: false,
    }));
    TrialList::new(trials)
}

/// Which embeddings an attacker enrolls with when scoring anonymized test audio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnrollConvention {
    /// Enrollment from original audio.
    #[default]
    Original,
    /// Enrollment from anonymized audio as well.
    Anonymized,
}

#[derive(Debug, Clone)]
pub struct EvaluateJob {
    pub original: UtteranceEmbeddingSet,
    pub anonymized: UtteranceEmbeddingSet,
    pub trials: Option<TrialList>,
    pub external: Option<SystemMetricsTable>,
    pub seed: u64,
    pub enroll: EnrollConvention,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluateReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub enroll: EnrollConvention,
    pub mated_trials: usize,
    pub nonmated_trials: usize,
    pub eer_original: f64,
    pub eer_anonymized: f64,
    pub diagonal_dominance_original: f64,
    pub diagonal_dominance_anonymized: f64,
    pub gvd_db: Gvd,
    pub external: BTreeMap<String, BTreeMap<String, Option<f64>>>,
}

fn check_counterparts(original: &UtteranceEmbeddingSet, anonymized: &UtteranceEmbeddingSet) -> Result<()> {
    let anon: HashMap<&str, &str> = anonymized
        .items()
        .iter()
        .map(|i| (i.utt_id.as_str(), i.speaker_id.as_str()))
        .collect();
    for it in original.items() {
        match anon.get(it.utt_id.as_str()) {
            None => {
                return Err(Error::Validation(format!(
                    "utterance '{}' has no anonymized counterpart",
                    it.utt_id
                )))
            }
            Some(&s) if s != it.speaker_id => {
                return Err(Error::Validation(format!(
                    "utterance '{}' has speaker '{}' originally but '{s}' after anonymization",
                    it.utt_id, it.speaker_id
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

/// EER before and after anonymization, and GVD between the two speaker
/// similarity matrices.
pub fn run_evaluate(job: &EvaluateJob) -> Result<EvaluateReport> {
    check_counterparts(&job.original, &job.anonymized)?;
    let trials = match &job.trials {
        Some(t) => t.clone(),
        None => auto_trials(&job.original, job.seed),
    };
    let orig_scores = score_trials(&trials, &job.original)?;
    let anon_scores = match job.enroll {
        EnrollConvention::Original => score_trials_between(&trials, &job.original, &job.anonymized)?,
        EnrollConvention::Anonymized => score_trials(&trials, &job.anonymized)?,
    };
    let m_orig = build_similarity_matrix(&job.original)?;
    let m_anon = build_similarity_matrix(&job.anonymized)?;
    let external = job
        .external
        .as_ref()
        .map(|t| {
            t.rows
                .iter()
                .map(|r| {
                    let cells = t.columns.iter().cloned().zip(r.values.iter().copied()).collect();
                    (r.system.clone(), cells)
                })
                .collect()
        })
        .unwrap_or_default();
    Ok(EvaluateReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "evaluate",
        seed: job.seed,
        enroll: job.enroll,
        mated_trials: orig_scores.mated.len(),
        nonmated_trials: orig_scores.nonmated.len(),
        eer_original: compute_eer(&orig_scores)?,
        eer_anonymized: compute_eer(&anon_scores)?,
        diagonal_dominance_original: diagonal_dominance(&m_orig)?,
        diagonal_dominance_anonymized: diagonal_dominance(&m_anon)?,
        gvd_db: compute_gvd(&m_orig, &m_anon)?,
        external,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationEntry {
    pub x: String,
    pub y: String,
    pub r: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scatter: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelateReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub systems: Vec<String>,
    pub correlations: Vec<CorrelationEntry>,
}

fn scatter_name(x: &str, y: &str) -> String {
    let clean = |s: &str| s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect::<String>();
    format!("scatter_{}__{}.csv", clean(x), clean(y))
}

/// Correlates column pairs of a per-system table; optionally writes one
/// scatter CSV per pair into `scatter_dir`.
pub fn run_correlate(
    table: &SystemMetricsTable,
    pairs: &[(String, String)],
    scatter_dir: Option<&Path>,
) -> Result<CorrelateReport> {
    if table.rows.len() < 2 {
        return Err(Error::Validation(format!(
            "correlation needs at least 2 systems, table has {}",
            table.rows.len()
        )));
    }
    let pairs = if pairs.is_empty() { crate::metrics::default_pairs() } else { pairs.to_vec() };
    let result = correlate_table(table, &pairs)?;
    if let Some(dir) = scatter_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut correlations = Vec::with_capacity(result.len());
    let mut written = HashSet::new();
    for pc in &result {
        let scatter = match scatter_dir {
            Some(dir) => {
                let name = scatter_name(&pc.x, &pc.y);
                if written.insert(name.clone()) {
                    write_scatter(pc, dir.join(&name))?;
                }
                Some(name)
            }
            None => None,
        };
        correlations.push(CorrelationEntry {
            x: pc.x.clone(),
            y: pc.y.clone(),
            r: pc.r,
            n: pc.n,
            scatter,
        });
    }
    Ok(CorrelateReport {
        tool: TOOL_NAME,
        version: TOOL_VERSION,
        command: "correlate",
        systems: table.rows.iter().map(|r| r.system.clone()).collect(),
        correlations,
    })
}

/// Parses `X:Y,X:Y,...` pair lists.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|p| {
            p.split_once(':')
                .map(|(x, y)| (x.trim().to_string(), y.trim().to_string()))
                .filter(|(x, y)| !x.is_empty() && !y.is_empty())
                .ok_or_else(|| Error::Validation(format!("pair '{p}' must look like X:Y")))
        })
        .collect()
}
