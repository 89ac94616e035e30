//! Verification trials, cosine scoring and equal error rate.

use std::path::Path;

use crate::embeddings::{cosine_similarity, UtteranceEmbeddingSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub enroll_utt: String,
    pub test_utt: String,
    pub is_mated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrialList {
    pub trials: Vec<Trial>,
}

impl TrialList {
    pub fn new(trials: Vec<Trial>) -> Self {
        Self { trials }
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }
}

/// Reads a trials CSV with header `enroll_utt,test_utt,label`.
pub fn load_trials(path: impl AsRef<Path>) -> Result<TrialList> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| crate::embeddings::csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| crate::embeddings::csv_error(path, e))?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["enroll_utt", "test_utt", "label"] {
        return Err(Error::Schema(format!(
            "{}: expected header 'enroll_utt,test_utt,label'",
            path.display()
        )));
    }
    let mut trials = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| crate::embeddings::csv_error(path, e))?;
        let row = i + 2;
        let is_mated = match rec[2].trim() {
            "mated" => true,
            "nonmated" => false,
            other => {
                return Err(Error::Validation(format!(
                    "{}: row {row}: label must be 'mated' or 'nonmated', got '{other}'",
                    path.display()
                )))
            }
        };
        trials.push(Trial {
            enroll_utt: rec[0].trim().to_string(),
            test_utt: rec[1].trim().to_string(),
            is_mated,
        });
    }
    Ok(TrialList { trials })
}

pub fn write_trials(trials: &TrialList, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| crate::embeddings::csv_error(path, e))?;
    let res: std::result::Result<(), csv::Error> = (|| {
        w.write_record(["enroll_utt", "test_utt", "label"])?;
        for t in &trials.trials {
            w.write_record([t.enroll_utt.as_str(), t.test_utt.as_str(), if t.is_mated { "mated" } else { "nonmated" }])?;
        }
        Ok(())
    })();
    res.map_err(|e| crate::embeddings::csv_error(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreSet {
    pub mated: Vec<f64>,
    pub nonmated: Vec<f64>,
}

/// Scores every trial against one embedding set.
pub fn score_trials(trials: &TrialList, embeddings: &UtteranceEmbeddingSet) -> Result<ScoreSet> {
    score_trials_between(trials, embeddings, embeddings)
}

/// Scores trials with enrollment and test embeddings taken from different sets.
pub fn score_trials_between(
    trials: &TrialList,
    enroll: &UtteranceEmbeddingSet,
    test: &UtteranceEmbeddingSet,
) -> Result<ScoreSet> {
    let enroll_index = enroll.index();
    let test_index = test.index();
    let mut scores = ScoreSet::default();
    let missing = |i: usize, id: &str| Error::Validation(format!("trial {}: unknown utterance '{id}'", i + 1));
    for (i, t) in trials.trials.iter().enumerate() {
        let a = match enroll_index.get(t.enroll_utt.as_str()) {
            Some(&k) => &enroll.items()[k].embedding,
            None => return Err(missing(i, &t.enroll_utt)),
        };
        let b = match test_index.get(t.test_utt.as_str()) {
            Some(&k) => &test.items()[k].embedding,
            None => return Err(missing(i, &t.test_utt)),
        };
        let s = cosine_similarity(a, b)?;
        if t.is_mated {
            scores.mated.push(s);
        } else {
            scores.nonmated.push(s);
        }
    }
    Ok(scores)
}

/// Equal error rate as a fraction. FRR(t) counts mated scores below `t`,
/// FAR(t) non-mated scores at or above `t`; thresholds run over every
/// distinct score plus +inf and the crossing is linearly interpolated
/// between the two bracketing operating points.
pub fn compute_eer(scores: &ScoreSet) -> Result<f64> {
    if scores.mated.is_empty() || scores.nonmated.is_empty() {
        return Err(Error::Precondition(
            "EER needs at least one mated and one non-mated score".into(),
        ));
    }
    if scores.mated.iter().chain(&scores.nonmated).any(|s| s.is_nan()) {
        return Err(Error::Validation("NaN score".into()));
    }
    let mut mated = scores.mated.clone();
    let mut nonmated = scores.nonmated.clone();
    mated.sort_by(f64::total_cmp);
    nonmated.sort_by(f64::total_cmp);
    let mut thresholds: Vec<f64> = mated.iter().chain(&nonmated).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    thresholds.push(f64::INFINITY);

    let (nm, nn) = (mated.len() as f64, nonmated.len() as f64);
    let (mut im, mut inn) = (0usize, 0usize);
    let mut prev: Option<(f64, f64)> = None;
    for &t in &thresholds {
        while im < mated.len() && mated[im] < t {
            im += 1;
        }
        while inn < nonmated.len() && nonmated[inn] < t {
            inn += 1;
        }
        let frr = im as f64 / nm;
        let far = (nonmated.len() - inn) as f64 / nn;
        if frr >= far {
            return Ok(match prev {
                None => 0.5 * (frr + far),
                Some((pfrr, pfar)) => {
                    let d0 = pfar - pfrr;
                    let d1 = far - frr;
                    let lambda = d0 / (d0 - d1);
                    pfrr + lambda * (frr - pfrr)
                }
            });
        }
        prev = Some((frr, far));
    }
    unreachable!("FRR reaches 1 at +inf")
}
