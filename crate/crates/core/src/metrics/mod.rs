//! Privacy (EER), distinctiveness (GVD) and correlation metrics.

mod eer;
mod similarity;
mod table;

pub use eer::{
    compute_eer, load_trials, score_trials, score_trials_between, write_trials, ScoreSet, Trial, TrialList,
};
pub use similarity::{build_similarity_matrix, compute_gvd, diagonal_dominance, Gvd, SimilarityMatrix};
pub use table::{
    aggregate_scores, correlate_table, default_pairs, load_system_table, load_utterance_scores, pearson,
    write_scatter, write_system_table, PairCorrelation, ScatterPoint, SystemMetricsTable, SystemRow,
    UtteranceScore, SA_METRICS, TTS_METRICS,
};
