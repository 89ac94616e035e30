//! Speaker embeddings, pools, cosine scoring and the native baseline extractor.

mod baseline;
mod store;

use std::collections::{HashMap, HashSet};

pub use baseline::{extract_baseline_embedding, BASELINE_DIM, MIN_DURATION_SECS};
pub(crate) use store::csv_err as csv_error;
pub use store::{load_pool, load_pool_csv, save_pool, save_pool_csv, SAEB_MAGIC, SAEB_VERSION};

use crate::audio::DatasetManifest;
use crate::error::{Error, Result};

/// A fixed-dimension speaker vector. Values are stored as `f32` so they
/// round-trip bit-exactly through the on-disk format.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerEmbedding {
    vector: Vec<f32>,
    norm: f64,
}

impl SpeakerEmbedding {
    pub fn new(vector: Vec<f32>) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::Validation("embedding has zero dimension".into()));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("embedding contains a non-finite value".into()));
        }
        let norm = vector.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
        if norm <= 0.0 {
            return Err(Error::Validation("embedding is the zero vector".into()));
        }
        Ok(Self { vector, norm })
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| v as f32).collect())
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.vector
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.vector.iter().map(|&v| v as f64).collect()
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Cosine similarity computed in double precision, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &SpeakerEmbedding, b: &SpeakerEmbedding) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Validation(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let dot: f64 = a
        .vector
        .iter()
        .zip(&b.vector)
        .map(|(&x, &y)| x as f64 * y as f64)
        .sum();
    Ok((dot / (a.norm * b.norm)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub id: String,
    pub embedding: SpeakerEmbedding,
}

/// Named embeddings sharing one dimension, with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPool {
    entries: Vec<PoolEntry>,
    dim: usize,
}

impl EmbeddingPool {
    pub fn new(dim: usize, entries: Vec<PoolEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            if e.embedding.dim() != dim {
                return Err(Error::Validation(format!(
                    "entry {i} ('{}') has dimension {}, expected {dim}",
                    e.id,
                    e.embedding.dim()
                )));
            }
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Validation(format!("duplicate pool id '{}'", e.id)));
            }
        }
        Ok(Self { entries, dim })
    }

    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (String, SpeakerEmbedding)>) -> Result<Self> {
        Self::new(
            dim,
            pairs
                .into_iter()
                .map(|(id, embedding)| PoolEntry { id, embedding })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&SpeakerEmbedding> {
        self.entries.iter().find(|e| e.id == id).map(|e| &e.embedding)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceEmbedding {
    pub utt_id: String,
    pub speaker_id: String,
    pub embedding: SpeakerEmbedding,
}

/// Per-utterance embeddings used for trial scoring and similarity matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceEmbeddingSet {
    items: Vec<UtteranceEmbedding>,
}

impl UtteranceEmbeddingSet {
    pub fn new(items: Vec<UtteranceEmbedding>) -> Result<Self> {
        let mut seen = HashSet::new();
        let dim = items.first().map(|i| i.embedding.dim());
        for it in &items {
            if Some(it.embedding.dim()) != dim {
                return Err(Error::Validation(format!(
                    "utterance '{}' has dimension {}, expected {}",
                    it.utt_id,
                    it.embedding.dim(),
                    dim.unwrap_or(0)
                )));
            }
            if !seen.insert(it.utt_id.as_str()) {
                return Err(Error::Validation(format!("duplicate utt_id '{}'", it.utt_id)));
            }
        }
        Ok(Self { items })
    }

    /// Attaches speaker labels from a manifest to a pool keyed by utt_id.
    pub fn from_pool(pool: &EmbeddingPool, manifest: &DatasetManifest) -> Result<Self> {
        let mut items = Vec::with_capacity(pool.len());
        for e in pool.entries() {
            let rec = manifest
                .get(&e.id)
                .ok_or_else(|| Error::Validation(format!("embedding id '{}' not in manifest", e.id)))?;
            items.push(UtteranceEmbedding {
                utt_id: e.id.clone(),
                speaker_id: rec.speaker_id.clone(),
                embedding: e.embedding.clone(),
            });
        }
        Self::new(items)
    }

    pub fn items(&self) -> &[UtteranceEmbedding] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, utt_id: &str) -> Option<&UtteranceEmbedding> {
        self.items.iter().find(|i| i.utt_id == utt_id)
    }

    /// Position of each utterance in `items()`.
    pub fn index(&self) -> HashMap<&str, usize> {
        self.items.iter().enumerate().map(|(k, i)| (i.utt_id.as_str(), k)).collect()
    }

    pub fn to_pool(&self) -> Result<EmbeddingPool> {
        EmbeddingPool::from_pairs(
            self.items.first().map_or(0, |i| i.embedding.dim()),
            self.items.iter().map(|i| (i.utt_id.clone(), i.embedding.clone())),
        )
    }
}

/// Elementwise mean of several embeddings, in double precision.
pub fn mean_embedding<'a>(embeddings: impl IntoIterator<Item = &'a SpeakerEmbedding>) -> Result<SpeakerEmbedding> {
    let mut acc: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for e in embeddings {
        if acc.is_empty() {
            acc = vec![0.0; e.dim()];
        } else if acc.len() != e.dim() {
            return Err(Error::Validation("dimension mismatch in mean".into()));
        }
        for (a, &v) in acc.iter_mut().zip(e.as_slice()) {
            *a += v as f64;
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Precondition("mean of no embeddings".into()));
    }
    SpeakerEmbedding::from_f64(&acc.iter().map(|a| a / n as f64).collect::<Vec<_>>())
}
