//! Next-token log-probability providers.
//!
//! A [`Scorer`] maps a batch of prefixes to one full-vocabulary row of
//! natural-log probabilities per prefix. Every call bumps the scorer's
//! [`CallCounters`], which is what the runtime comparisons between
//! decoders are measured with.

mod external;
mod ngram;
mod vocab;

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::TokenId;

pub use external::{serve_lines, ExternalScorer, DEFAULT_TIMEOUT, SCORER_CMD_ENV};
pub use ngram::{NgramConfig, NgramLm, MODEL_MAGIC, MODEL_VERSION};
pub use vocab::Vocab;

#[derive(Debug, Error)]
pub enum ScorerError {
    #[error("scorer protocol violation: {0}")]
    Protocol(String),
    #[error("score row {row} is not normalized (logsumexp = {logsumexp})")]
    Normalization { row: usize, logsumexp: f64 },
    #[error("scorer did not answer within {0:?}")]
    Timeout(std::time::Duration),
    #[error("scorer i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("invalid n-gram configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("not a model file or unsupported version ({0})")]
    Version(String),
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Wire shape of a scoring request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub prefixes: Vec<Vec<TokenId>>,
}

/// Wire shape of a scoring response: one row per request prefix.
///
/// JSON has no infinities, so a zero-probability entry travels as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    #[serde(deserialize_with = "null_as_neg_inf")]
    pub logprobs: Vec<Vec<f64>>,
}

fn null_as_neg_inf<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
    let rows: Vec<Vec<Option<f64>>> = Deserialize::deserialize(d)?;
    Ok(rows
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| x.unwrap_or(f64::NEG_INFINITY))
                .collect()
        })
        .collect())
}

/// Exact call/row counters, safe to bump from concurrent callers.
#[derive(Debug, Default)]
pub struct CallCounters {
    calls: AtomicU64,
    rows: AtomicU64,
}

impl CallCounters {
    pub fn record(&self, rows: usize) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.rows.fetch_add(rows as u64, Ordering::Relaxed);
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn rows(&self) -> u64 {
        self.rows.load(Ordering::Relaxed)
    }

    pub fn snapshot(&self) -> (u64, u64) {
        (self.calls(), self.rows())
    }
}

pub trait Scorer: Send + Sync {
    fn vocab_size(&self) -> usize;

    fn eos(&self) -> TokenId;

    /// One log-probability row per prefix. Implementations record exactly
    /// one call and `prefixes.len()` rows per invocation.
    fn score_next(&self, prefixes: &[Vec<TokenId>]) -> Result<Vec<Vec<f64>>, ScorerError>;

    fn counters(&self) -> &CallCounters;
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }
    fn eos(&self) -> TokenId {
        (**self).eos()
    }
    fn score_next(&self, prefixes: &[Vec<TokenId>]) -> Result<Vec<Vec<f64>>, ScorerError> {
        (**self).score_next(prefixes)
    }
    fn counters(&self) -> &CallCounters {
        (**self).counters()
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }
    fn eos(&self) -> TokenId {
        (**self).eos()
    }
    fn score_next(&self, prefixes: &[Vec<TokenId>]) -> Result<Vec<Vec<f64>>, ScorerError> {
        (**self).score_next(prefixes)
    }
    fn counters(&self) -> &CallCounters {
        (**self).counters()
    }
}

/// Every token gets `-ln |V|` regardless of the prefix.
#[derive(Debug)]
pub struct UniformScorer {
    size: usize,
    eos: TokenId,
    counters: CallCounters,
}

impl UniformScorer {
    pub fn new(size: usize, eos: TokenId) -> Self {
        assert!(size > 0 && (eos as usize) < size);
        UniformScorer {
            size,
            eos,
            counters: CallCounters::default(),
        }
    }

    pub fn for_vocab(vocab: &Vocab) -> Self {
        Self::new(vocab.len(), Vocab::EOS)
    }
}

impl Scorer for UniformScorer {
    fn vocab_size(&self) -> usize {
        self.size
    }

    fn eos(&self) -> TokenId {
        self.eos
    }

    fn score_next(&self, prefixes: &[Vec<TokenId>]) -> Result<Vec<Vec<f64>>, ScorerError> {
        self.counters.record(prefixes.len());
        let lp = -(self.size as f64).ln();
        Ok(vec![vec![lp; self.size]; prefixes.len()])
    }

    fn counters(&self) -> &CallCounters {
        &self.counters
    }
}

/// `ln Σ exp(x)`, stable for rows containing `-inf`.
pub fn logsumexp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + row.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}
