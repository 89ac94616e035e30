//! Embedding-domain anonymizers.

use rand::seq::index;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{AnonymizationResult, AnonymizerConfig, Diagnostics, DrawnParams, Method, UtteranceKey};
use crate::embeddings::{cosine_similarity, EmbeddingPool, SpeakerEmbedding};
use crate::error::{Error, Result};

pub const MAX_SAMPLING_ATTEMPTS: usize = 1000;

/// Pool indices ordered by cosine distance to `source`, farthest first; ties
/// are broken by ascending id.
pub fn rank_farthest(source: &SpeakerEmbedding, pool: &EmbeddingPool) -> Result<Vec<usize>> {
    let dist = pool
        .entries()
        .iter()
        .map(|e| cosine_similarity(source, &e.embedding).map(|c| 1.0 - c))
        .collect::<Result<Vec<f64>>>()?;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| {
        dist[b]
            .total_cmp(&dist[a])
            .then_with(|| pool.entries()[a].id.cmp(&pool.entries()[b].id))
    });
    Ok(order)
}

/// Mean of the named pool members, renormalized to unit length.
pub fn pool_average_of(pool: &EmbeddingPool, ids: &[String]) -> Result<SpeakerEmbedding> {
    if ids.is_empty() {
        return Err(Error::Precondition("no pool members to average".into()));
    }
    let mut acc = vec![0.0f64; pool.dim()];
    for id in ids {
        let e = pool
            .get(id)
            .ok_or_else(|| Error::Validation(format!("pool has no entry '{id}'")))?;
        for (a, &v) in acc.iter_mut().zip(e.as_slice()) {
            *a += v as f64;
        }
    }
    let n = ids.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    let norm = acc.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::Numerical("averaged pool embedding has zero length".into()));
    }
    SpeakerEmbedding::from_f64(&acc.iter().map(|a| a / norm).collect::<Vec<_>>())
}

/// Takes the `k` farthest pool members and averages a random `m` of them.
pub fn anonymize_embedding_pool(
    source: &SpeakerEmbedding,
    pool: &EmbeddingPool,
    cfg: &AnonymizerConfig,
    key: UtteranceKey<'_>,
) -> Result<AnonymizationResult<SpeakerEmbedding>> {
    cfg.validate()?;
    cfg.validate_pool_size(pool.len())?;
    let (k, m) = (cfg.pool_farthest_k, cfg.pool_average_m);
    let ranked = rank_farthest(source, pool)?;
    let seed = AnonymizerConfig { method: Method::PoolAverage, ..cfg.clone() }.derived_seed(key.speaker_id, key.utt_id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = index::sample(&mut rng, k, m).into_vec();
    picks.sort_unstable();
    let chosen_ids: Vec<String> = picks.iter().map(|&i| pool.entries()[ranked[i]].id.clone()).collect();
    let output = pool_average_of(pool, &chosen_ids)?;
    Ok(AnonymizationResult {
        output,
        drawn_params: DrawnParams::PoolAverage { chosen_ids },
        diagnostics: Diagnostics::default(),
    })
}

/// Source of candidate embeddings for the constrained sampler.
pub trait EmbeddingSampler {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64>;
}

/// Independent Gaussian per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGaussian {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl DiagonalGaussian {
    pub fn new(mean: Vec<f64>, std: Vec<f64>) -> Result<Self> {
        if mean.len() != std.len() || mean.is_empty() {
            return Err(Error::Validation("mean and std must have the same non-zero length".into()));
        }
        if std.iter().chain(&mean).any(|v| !v.is_finite()) || std.iter().any(|&s| s < 0.0) {
            return Err(Error::Validation("Gaussian parameters must be finite with std >= 0".into()));
        }
        Ok(Self { mean, std })
    }

    /// Per-dimension mean and unbiased standard deviation of the pool.
    pub fn fit(pool: &EmbeddingPool) -> Result<Self> {
        if pool.len() < 2 {
            return Err(Error::Validation(format!(
                "fitting a Gaussian needs at least 2 pool entries, got {}",
                pool.len()
            )));
        }
        let n = pool.len() as f64;
        let mut mean = vec![0.0; pool.dim()];
        for e in pool.entries() {
            for (m, &v) in mean.iter_mut().zip(e.embedding.as_slice()) {
                *m += v as f64;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; pool.dim()];
        for e in pool.entries() {
            for ((s, m), &v) in var.iter_mut().zip(&mean).zip(e.embedding.as_slice()) {
                *s += (v as f64 - m).powi(2);
            }
        }
        Self::new(mean, var.iter().map(|s| (s / (n - 1.0)).sqrt()).collect())
    }
}

impl EmbeddingSampler for DiagonalGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.std)
            .map(|(m, s)| {
                let z: f64 = StandardNormal.sample(rng);
                m + s * z
            })
            .collect()
    }
}

/// Draws one candidate; `None` when it cannot form a valid embedding.
fn candidate(sampler: &dyn EmbeddingSampler, rng: &mut ChaCha8Rng) -> Option<SpeakerEmbedding> {
    SpeakerEmbedding::from_f64(&sampler.sample(rng)).ok()
}

/// Rejection-samples until the candidate's cosine similarity to `source` is
/// below the threshold.
pub fn anonymize_embedding_sampled(
    source: &SpeakerEmbedding,
    sampler: &dyn EmbeddingSampler,
    cfg: &AnonymizerConfig,
    key: UtteranceKey<'_>,
) -> Result<AnonymizationResult<SpeakerEmbedding>> {
    cfg.validate()?;
    if sampler.dim() != source.dim() {
        return Err(Error::Validation(format!(
            "sampler dimension {} does not match source dimension {}",
            sampler.dim(),
            source.dim()
        )));
    }
    let seed =
        AnonymizerConfig { method: Method::ConstrainedSample, ..cfg.clone() }.derived_seed(key.speaker_id, key.utt_id);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=MAX_SAMPLING_ATTEMPTS {
        let Some(c) = candidate(sampler, &mut rng) else {
            continue;
        };
        if cosine_similarity(&c, source)? < cfg.cosine_threshold {
            return Ok(AnonymizationResult {
                output: c,
                drawn_params: DrawnParams::ConstrainedSample { attempts: attempt, seed },
                diagnostics: Diagnostics::default(),
            });
        }
    }
    Err(Error::SamplingExhausted {
        attempts: MAX_SAMPLING_ATTEMPTS,
        threshold: cfg.cosine_threshold,
    })
}

/// Regenerates the accepted candidate from a recorded seed and attempt count.
pub fn replay_sampled(sampler: &dyn EmbeddingSampler, attempts: usize, seed: u64) -> Result<SpeakerEmbedding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..attempts {
        last = candidate(sampler, &mut rng);
    }
    last.ok_or_else(|| Error::Precondition("recorded attempt did not yield a valid embedding".into()))
}
