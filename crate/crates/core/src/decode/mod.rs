//! Decoders over a [`Scorer`].
//!
//! All decoders share the same conventions:
//!
//! - A hypothesis score is the running sum of natural-log token
//!   probabilities; tokens scored `-inf` are never expanded.
//! - Candidates are ranked by higher score, then lower token id, then
//!   lower parent index in the current beam.
//! - When a beam is refilled, an end-of-sequence candidate that lands in
//!   the first `k` ranked positions becomes a finished hypothesis; the
//!   beam itself is filled with the best non-terminal candidates.
//! - At `max_len` generated tokens, live hypotheses are finished as-is.
//! - The answer is the finished hypothesis with the most satisfied
//!   clauses, then the best score, then the lexicographically smallest
//!   token sequence.

mod banked;
mod beam;
mod neurologic;
mod oracle;
mod sampling;

use std::cmp::Ordering;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Cnf;
use crate::matcher::{CompileError, ConstraintState};
use crate::scorer::{Scorer, ScorerError};
use crate::TokenId;

pub use banked::{cbs_decode, gbs_decode, positive_conjunction_size, MAX_CBS_CONSTRAINTS};
pub use beam::{beam_search, greedy_decode};
pub use neurologic::neurologic_decode;
pub use oracle::{brute_force_oracle, OracleResult, ORACLE_LIMIT};
pub use sampling::{sample_decode, sample_from_row, Truncation};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("invalid decoder configuration: {0}")]
    InvalidConfig(String),
    #[error("constraints were compiled for {constraints} tokens but the scorer has {scorer}")]
    VocabMismatch { scorer: usize, constraints: usize },
    #[error("no hypothesis survives: every continuation violates the constraints")]
    Infeasible,
    #[error("decoder only supports a conjunction of positive phrases: {0}")]
    UnsupportedConstraint(String),
    #[error("{c} constraints exceed the limit of {max}")]
    TooManyConstraints { c: usize, max: usize },
    #[error("exhaustive search over {size} sequences exceeds the limit of {limit}")]
    InstanceTooLarge { size: f64, limit: u64 },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    /// Beam size.
    pub k: usize,
    /// Keep only the best `alpha` candidates by score; `None` keeps all.
    pub alpha: Option<usize>,
    /// Keep only candidates whose satisfied-clause count is among the
    /// `beta` largest counts present; `None` keeps every count.
    pub beta: Option<usize>,
    /// Maximum number of generated tokens, end marker included.
    pub max_len: usize,
    /// Rank finished hypotheses by score / length instead of raw score.
    pub length_normalize: bool,
    pub seed: u64,
    /// Let phrases in the context satisfy or violate clauses.
    pub match_in_prompt: bool,
    /// Attach every finished hypothesis to the result.
    pub return_all: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            k: 5,
            alpha: None,
            beta: None,
            max_len: 20,
            length_normalize: false,
            seed: 0,
            match_in_prompt: false,
            return_all: false,
        }
    }
}

impl DecoderConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.max_len = max_len;
        self
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        let bad = |m: &str| Err(DecodeError::InvalidConfig(m.to_string()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.max_len == 0 {
            return bad("max_len must be at least 1");
        }
        if self.alpha == Some(0) {
            return bad("alpha must be at least 1");
        }
        if self.beta == Some(0) {
            return bad("beta must be at least 1");
        }
        Ok(())
    }
}

/// Work counters for one decode. Deterministic for a fixed input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeStats {
    pub steps: u64,
    pub scorer_calls: u64,
    pub scored_rows: u64,
    pub discarded_unsatisfiable: u64,
}

impl DecodeStats {
    pub fn rows_per_step(&self) -> f64 {
        if self.scorer_calls == 0 {
            0.0
        } else {
            self.scored_rows as f64 / self.scorer_calls as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinishedHypothesis {
    pub tokens: Vec<TokenId>,
    pub score: f64,
    pub satisfied_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Generated tokens, including a trailing end marker if one was chosen.
    pub tokens: Vec<TokenId>,
    pub score: f64,
    pub clause_truth: Vec<bool>,
    pub satisfied_count: usize,
    pub stats: DecodeStats,
    pub elapsed: Duration,
    /// Every finished hypothesis when `return_all` is set.
    pub finished: Vec<FinishedHypothesis>,
}

impl DecodeResult {
    pub fn num_clauses(&self) -> usize {
        self.clause_truth.len()
    }

    pub fn all_satisfied(&self) -> bool {
        self.clause_truth.iter().all(|&t| t)
    }

    /// Same decode modulo wall-clock time.
    pub fn same_output(&self, other: &DecodeResult) -> bool {
        self.tokens == other.tokens
            && self.score.to_bits() == other.score.to_bits()
            && self.clause_truth == other.clause_truth
            && self.satisfied_count == other.satisfied_count
            && self.stats == other.stats
            && self.finished == other.finished
    }

    /// Recomputes clause truth for `cnf` from the output tokens (prefixed
    /// by `prompt`, which may be empty). Used for decoders that do not
    /// track constraints themselves.
    pub fn evaluate_against(&mut self, cnf: &Cnf, prompt: &[TokenId]) {
        let mut seq = prompt.to_vec();
        seq.extend_from_slice(&self.tokens);
        self.clause_truth = cnf.clause_values(&seq);
        self.satisfied_count = self.clause_truth.iter().filter(|&&t| t).count();
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Hypothesis {
    pub tokens: Vec<TokenId>,
    pub score: f64,
    pub state: ConstraintState,
}

#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub parent: usize,
    pub token: TokenId,
    pub score: f64,
    pub state: ConstraintState,
}

/// Higher score first, then lower token id, then lower parent index.
pub(crate) fn rank(
    a_score: f64,
    a_tok: TokenId,
    a_par: usize,
    b_score: f64,
    b_tok: TokenId,
    b_par: usize,
) -> Ordering {
    b_score
        .total_cmp(&a_score)
        .then(a_tok.cmp(&b_tok))
        .then(a_par.cmp(&b_par))
}

pub(crate) fn rank_candidates(a: &Candidate, b: &Candidate) -> Ordering {
    rank(a.score, a.token, a.parent, b.score, b.token, b.parent)
}

/// Scores `context ++ h.tokens` for each live hypothesis in one call.
pub(crate) fn score_live<S: Scorer + ?Sized>(
    scorer: &S,
    context: &[TokenId],
    live: &[&[TokenId]],
    stats: &mut DecodeStats,
) -> Result<Vec<Vec<f64>>, DecodeError> {
    let prefixes: Vec<Vec<TokenId>> = live
        .iter()
        .map(|t| {
            let mut p = Vec::with_capacity(context.len() + t.len());
            p.extend_from_slice(context);
            p.extend_from_slice(t);
            p
        })
        .collect();
    let rows = scorer.score_next(&prefixes)?;
    stats.scorer_calls += 1;
    stats.scored_rows += prefixes.len() as u64;
    stats.steps += 1;
    if rows.len() != prefixes.len() || rows.iter().any(|r| r.len() != scorer.vocab_size()) {
        return Err(ScorerError::Protocol("score matrix has the wrong shape".into()).into());
    }
    Ok(rows)
}

/// Applies the shared refill rule to an already ranked candidate stream.
/// Returns (finished, beam).
pub(crate) fn refill<I>(ranked: I, k: usize, eos: TokenId) -> (Vec<Candidate>, Vec<Candidate>)
where
    I: IntoIterator<Item = Candidate>,
{
    let mut finished = Vec::new();
    let mut beam = Vec::with_capacity(k);
    for (pos, c) in ranked.into_iter().enumerate() {
        if c.token == eos {
            if pos < k {
                finished.push(c);
            }
        } else {
            beam.push(c);
            if beam.len() == k {
                break;
            }
        }
    }
    (finished, beam)
}

pub(crate) fn extend(parents: &[Hypothesis], c: Candidate) -> Hypothesis {
    let parent = &parents[c.parent];
    let mut tokens = Vec::with_capacity(parent.tokens.len() + 1);
    tokens.extend_from_slice(&parent.tokens);
    tokens.push(c.token);
    Hypothesis {
        tokens,
        score: c.score,
        state: c.state,
    }
}

fn selection_key(h: &Hypothesis, length_normalize: bool) -> f64 {
    if length_normalize && !h.tokens.is_empty() {
        h.score / h.tokens.len() as f64
    } else {
        h.score
    }
}

/// Most satisfied clauses, then best (optionally length-normalized)
/// score, then smallest token sequence.
pub(crate) fn better_final(a: &Hypothesis, b: &Hypothesis, length_normalize: bool) -> Ordering {
    b.state
        .satisfied_count()
        .cmp(&a.state.satisfied_count())
        .then(selection_key(b, length_normalize).total_cmp(&selection_key(a, length_normalize)))
        .then(a.tokens.cmp(&b.tokens))
}

/// Early exit: the best finished hypothesis already satisfies every
/// clause and no live hypothesis scores above it. Scores never increase,
/// so no continuation can win.
pub(crate) fn can_stop(
    finished: &[Hypothesis],
    live: &[&Hypothesis],
    num_clauses: usize,
    cfg: &DecoderConfig,
) -> bool {
    if cfg.length_normalize {
        return false;
    }
    let best = finished
        .iter()
        .filter(|h| h.state.satisfied_count() == num_clauses)
        .map(|h| h.score)
        .max_by(f64::total_cmp);
    match best {
        Some(best) => live.iter().all(|h| h.score <= best),
        None => false,
    }
}

pub(crate) fn finish(
    mut pool: Vec<Hypothesis>,
    cfg: &DecoderConfig,
    stats: DecodeStats,
    started: std::time::Instant,
) -> Result<DecodeResult, DecodeError> {
    if pool.is_empty() {
        return Err(DecodeError::Infeasible);
    }
    pool.sort_by(|a, b| better_final(a, b, cfg.length_normalize));
    let finished = if cfg.return_all {
        pool.iter()
            .map(|h| FinishedHypothesis {
                tokens: h.tokens.clone(),
                score: h.score,
                satisfied_count: h.state.satisfied_count(),
            })
            .collect()
    } else {
        Vec::new()
    };
    let best = pool.swap_remove(0);
    let fin = best.state.finalize();
    Ok(DecodeResult {
        tokens: best.tokens,
        score: best.score,
        clause_truth: fin.clause_truth,
        satisfied_count: fin.satisfied_count,
        stats,
        elapsed: started.elapsed(),
        finished,
    })
}

pub(crate) fn check_vocab<S: Scorer + ?Sized>(
    scorer: &S,
    constraints: usize,
) -> Result<(), DecodeError> {
    if scorer.vocab_size() != constraints {
        return Err(DecodeError::VocabMismatch {
            scorer: scorer.vocab_size(),
            constraints,
        });
    }
    Ok(())
}
