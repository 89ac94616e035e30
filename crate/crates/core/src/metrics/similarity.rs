//! Speaker similarity matrices, diagonal dominance and GVD.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::embeddings::{cosine_similarity, SpeakerEmbedding, UtteranceEmbeddingSet};
use crate::error::{Error, Result};

/// Mean cosine similarity between the utterances of each pair of speakers.
/// Speakers are sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub speaker_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn new(speaker_ids: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = speaker_ids.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(format!("similarity matrix must be {n}x{n}")));
        }
        Ok(Self { speaker_ids, values })
    }

    pub fn len(&self) -> usize {
        self.speaker_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speaker_ids.is_empty()
    }
}

pub fn build_similarity_matrix(embeddings: &UtteranceEmbeddingSet) -> Result<SimilarityMatrix> {
    let mut groups: BTreeMap<&str, Vec<&SpeakerEmbedding>> = BTreeMap::new();
    for it in embeddings.items() {
        groups.entry(it.speaker_id.as_str()).or_default().push(&it.embedding);
    }
    if groups.len() < 2 {
        return Err(Error::Validation(format!(
            "similarity matrix needs at least 2 speakers, got {}",
            groups.len()
        )));
    }
    if let Some((spk, _)) = groups.iter().find(|(_, g)| g.len() < 2) {
        return Err(Error::Validation(format!(
            "speaker '{spk}' has a single utterance; within-speaker similarity is undefined"
        )));
    }
    let speakers: Vec<&str> = groups.keys().copied().collect();
    let n = speakers.len();
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        let gi = &groups[speakers[i]];
        for j in i..n {
            let gj = &groups[speakers[j]];
            let mut sum = 0.0;
            let mut count = 0usize;
            for (a, ea) in gi.iter().enumerate() {
                for (b, eb) in gj.iter().enumerate() {
                    if i == j && a == b {
                        continue;
                    }
                    sum += cosine_similarity(ea, eb)?;
                    count += 1;
                }
            }
            values[i][j] = sum / count as f64;
            values[j][i] = values[i][j];
        }
    }
    SimilarityMatrix::new(speakers.into_iter().map(String::from).collect(), values)
}

/// `|mean(diagonal) - mean(off-diagonal)|`.
pub fn diagonal_dominance(m: &SimilarityMatrix) -> Result<f64> {
    let n = m.len();
    if n < 2 {
        return Err(Error::Precondition("diagonal dominance needs n >= 2".into()));
    }
    let mut diag = 0.0;
    let mut off = 0.0;
    for (i, row) in m.values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if i == j {
                diag += v;
            } else {
                off += v;
            }
        }
    }
    Ok((diag / n as f64 - off / (n * (n - 1)) as f64).abs())
}

/// Gain of voice distinctiveness in dB. Total collapse of the anonymized voices
/// yields the `NegInfinity` sentinel rather than a float infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gvd {
    Db(f64),
    NegInfinity,
}

impl Gvd {
    pub fn as_f64(self) -> f64 {
        match self {
            Gvd::Db(v) => v,
            Gvd::NegInfinity => f64::NEG_INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Gvd::Db(_))
    }
}

impl fmt::Display for Gvd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gvd::Db(v) => write!(f, "{v}"),
            Gvd::NegInfinity => f.write_str("-inf"),
        }
    }
}

impl Serialize for Gvd {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Gvd::Db(v) => s.serialize_f64(*v),
            Gvd::NegInfinity => s.serialize_str("-inf"),
        }
    }
}

pub fn compute_gvd(original: &SimilarityMatrix, anonymized: &SimilarityMatrix) -> Result<Gvd> {
    if original.speaker_ids != anonymized.speaker_ids {
        return Err(Error::Validation(
            "original and anonymized similarity matrices cover different speakers".into(),
        ));
    }
    let base = diagonal_dominance(original)?;
    if base == 0.0 {
        return Err(Error::UndefinedBaseline);
    }
    let anon = diagonal_dominance(anonymized)?;
    if anon == 0.0 {
        return Ok(Gvd::NegInfinity);
    }
    Ok(Gvd::Db(10.0 * (anon / base).log10()))
}
