use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use voxveil::anonymizers::{AnonymizerConfig, Method, Scope};
use voxveil::audio::{load_manifest, DatasetManifest};
use voxveil::embeddings::{load_pool, load_pool_csv, EmbeddingPool, UtteranceEmbeddingSet};
use voxveil::metrics::{aggregate_scores, load_system_table, load_trials, load_utterance_scores};
use voxveil::pipeline::{
    embed_manifest, parse_pairs, run_anonymize, run_correlate, run_embed, run_evaluate, write_json, AnonymizeJob,
    EnrollConvention, EvaluateJob,
};
use voxveil::{Error, Result};

const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(name = "voxveil", version, about = "Speaker anonymization and evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Anonymize every utterance of a dataset manifest.
    Anonymize(AnonymizeArgs),
    /// Extract baseline speaker embeddings into a SAEB file.
    Embed(EmbedArgs),
    /// Measure EER before/after anonymization and GVD.
    Evaluate(EvaluateArgs),
    /// Correlate per-system metric columns.
    Correlate(CorrelateArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// CSV with header utt_id,speaker_id,audio_path.
    #[arg(long)]
    manifest: PathBuf,
    /// Directory audio paths are relative to (default: the manifest's directory).
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    PitchShift,
    Mcadams,
    PoolAverage,
    ConstrainedSample,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::PitchShift => Method::PitchShift,
            MethodArg::Mcadams => Method::Mcadams,
            MethodArg::PoolAverage => Method::PoolAverage,
            MethodArg::ConstrainedSample => Method::ConstrainedSample,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    PerSpeaker,
    PerUtterance,
}

#[derive(Args)]
struct AnonymizeArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Speaker pool (SAEB or CSV) for the embedding methods.
    #[arg(long)]
    pool: Option<PathBuf>,
    /// TOML file with anonymizer settings; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scope: Option<ScopeArg>,
    /// Fixed McAdams coefficient instead of a random draw.
    #[arg(long)]
    alpha: Option<f64>,
    /// Fixed signed semitone shift instead of a random draw.
    #[arg(long, allow_hyphen_values = true)]
    semitones: Option<f64>,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Output SAEB file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnrollArg {
    Original,
    Anonymized,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Manifest of the anonymized dataset (paths relative to its directory).
    #[arg(long)]
    anon_manifest: PathBuf,
    /// Precomputed original embeddings keyed by utt_id, replacing extraction.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Precomputed anonymized embeddings keyed by utt_id.
    #[arg(long)]
    anon_embeddings: Option<PathBuf>,
    /// Trials CSV (enroll_utt,test_utt,label); generated when absent.
    #[arg(long)]
    trials: Option<PathBuf>,
    /// Per-utterance external scores (system,utt_id,metric,value).
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "original")]
    enroll: EnrollArg,
    /// Report path (default: print to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// Per-system CSV with header system,<metric>,...
    #[arg(long)]
    scores: PathBuf,
    /// Column pairs as X:Y,X:Y (default: SA metrics x TTS metrics).
    #[arg(long)]
    pairs: Option<String>,
    /// Directory for one scatter CSV per pair.
    #[arg(long)]
    emit_scatter: Option<PathBuf>,
    /// Report path (default: print to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Anonymize(a) => anonymize(a),
        Command::Embed(a) => embed(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Correlate(a) => correlate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_PARTIAL),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn open_manifest(path: &Path, root: Option<&Path>) -> Result<DatasetManifest> {
    let root = match root {
        Some(r) => r.to_path_buf(),
        None => path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    load_manifest(path, root)
}

fn open_pool(path: &Path) -> Result<EmbeddingPool> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        load_pool_csv(path)
    } else {
        load_pool(path)
    }
}

fn report_failures(failures: &[voxveil::pipeline::Failure]) {
    for f in failures {
        eprintln!("failed {}: {}", f.utt_id, f.error);
    }
}

fn anonymize(a: AnonymizeArgs) -> Result<bool> {
    let mut config = match &a.config {
        Some(p) => AnonymizerConfig::from_toml_file(p)?,
        None => AnonymizerConfig::default(),
    };
    if let Some(m) = a.method {
        config.method = m.into();
    }
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(s) = a.scope {
        config.randomization_scope = Some(match s {
            ScopeArg::PerSpeaker => Scope::PerSpeaker,
            ScopeArg::PerUtterance => Scope::PerUtterance,
        });
    }
    if a.alpha.is_some() {
        config.mcadams_alpha = a.alpha;
    }
    if a.semitones.is_some() {
        config.semitones = a.semitones;
    }
    config.validate()?;
    let manifest = open_manifest(&a.dataset.manifest, a.dataset.root.as_deref())?;
    let pool = a.pool.as_deref().map(open_pool).transpose()?;
    let report = run_anonymize(&AnonymizeJob {
        manifest,
        out_dir: a.out.clone(),
        config,
        pool,
        workers: a.dataset.workers,
    })?;
    report_failures(&report.failures);
    println!(
        "anonymized {} utterance(s), {} failure(s); report: {}",
        report.utterances.len(),
        report.failures.len(),
        a.out.join("report.json").display()
    );
    Ok(report.is_complete())
}

fn embed(a: EmbedArgs) -> Result<bool> {
    let manifest = open_manifest(&a.dataset.manifest, a.dataset.root.as_deref())?;
    let report = run_embed(&manifest, &a.out, a.dataset.workers)?;
    report_failures(&report.failures);
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(report.failures.is_empty())
}

fn embedding_set(
    manifest: &DatasetManifest,
    precomputed: Option<&Path>,
    workers: usize,
) -> Result<UtteranceEmbeddingSet> {
    match precomputed {
        Some(p) => UtteranceEmbeddingSet::from_pool(&open_pool(p)?, manifest),
        None => {
            let (set, failures) = embed_manifest(manifest, workers)?;
            if let Some(f) = failures.first() {
                report_failures(&failures);
                return Err(Error::Validation(format!("cannot embed '{}': {}", f.utt_id, f.error)));
            }
            Ok(set)
        }
    }
}

fn emit<T: serde::Serialize>(report: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_json(report, p),
        None => {
            println!("{}", serde_json::to_string_pretty(report).expect("report serializes"));
            Ok(())
        }
    }
}

fn evaluate(a: EvaluateArgs) -> Result<bool> {
    let original = open_manifest(&a.dataset.manifest, a.dataset.root.as_deref())?;
    let anonymized = open_manifest(&a.anon_manifest, None)?;
    let workers = a.dataset.workers;
    let original_set = embedding_set(&original, a.embeddings.as_deref(), workers)?;
    let anonymized_set = embedding_set(&anonymized, a.anon_embeddings.as_deref(), workers)?;
    let trials = a.trials.as_deref().map(load_trials).transpose()?;
    let external = match &a.scores {
        Some(p) => {
            let known: HashSet<String> = original
                .records
                .iter()
                .chain(&anonymized.records)
                .map(|r| r.utt_id.clone())
                .collect();
            Some(aggregate_scores(&load_utterance_scores(p, Some(&known))?)?)
        }
        None => None,
    };
    let report = run_evaluate(&EvaluateJob {
        original: original_set,
        anonymized: anonymized_set,
        trials,
        external,
        seed: a.seed,
        enroll: match a.enroll {
            EnrollArg::Original => EnrollConvention::Original,
            EnrollArg::Anonymized => EnrollConvention::Anonymized,
        },
    })?;
    emit(&report, a.out.as_deref())?;
    Ok(true)
}

fn correlate(a: CorrelateArgs) -> Result<bool> {
    let table = load_system_table(&a.scores)?;
    let pairs = match &a.pairs {
        Some(p) => parse_pairs(p)?,
        None => Vec::new(),
    };
    let report = run_correlate(&table, &pairs, a.emit_scatter.as_deref())?;
    emit(&report, a.out.as_deref())?;
    Ok(true)
}
