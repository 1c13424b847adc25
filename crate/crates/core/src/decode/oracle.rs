use serde::{Deserialize, Serialize};

use super::DecodeError;
use crate::formula::Cnf;
use crate::scorer::Scorer;
use crate::TokenId;

/// Largest `|V|^(max_len+1)` the oracle will enumerate.
pub const ORACLE_LIMIT: u64 = 1 << 22;

const BATCH: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    /// Best sequence at the maximum satisfied count.
    pub tokens: Vec<TokenId>,
    /// Its cumulative log-probability.
    pub score: f64,
    /// Most clauses any sequence satisfies.
    pub max_count: usize,
    pub num_clauses: usize,
    /// Number of complete sequences examined.
    pub sequences: u64,
}

impl OracleResult {
    pub fn feasible(&self) -> bool {
        self.max_count == self.num_clauses
    }
}

/// Exhaustive search over every sequence that ends in the end marker
/// within `max_len` tokens, or that runs exactly `max_len` tokens.
///
/// Sequences are ranked by satisfied-clause count, then score, then
/// lexicographically. Clauses are evaluated on the generated tokens by
/// direct substring search.
pub fn brute_force_oracle<S: Scorer + ?Sized>(
    scorer: &S,
    context: &[TokenId],
    cnf: &Cnf,
    max_len: usize,
) -> Result<OracleResult, DecodeError> {
    if max_len == 0 {
        return Err(DecodeError::InvalidConfig(
            "max_len must be at least 1".into(),
        ));
    }
    let v = scorer.vocab_size();
    let size = (v as f64).powi(max_len as i32 + 1);
    if size > ORACLE_LIMIT as f64 {
        return Err(DecodeError::InstanceTooLarge {
            size,
            limit: ORACLE_LIMIT,
        });
    }
    let eos = scorer.eos();
    let mut best: Option<(usize, f64, Vec<TokenId>)> = None;
    let mut sequences = 0u64;
    let mut consider = |tokens: Vec<TokenId>, score: f64| {
        sequences += 1;
        let count = cnf
            .clause_values(&tokens)
            .into_iter()
            .filter(|&t| t)
            .count();
        let better = match &best {
            None => true,
            Some((bc, bs, bt)) => {
                count > *bc || (count == *bc && (score > *bs || (score == *bs && tokens < *bt)))
            }
        };
        if better {
            best = Some((count, score, tokens));
        }
    };

    let mut level: Vec<(Vec<TokenId>, f64)> = vec![(Vec::new(), 0.0)];
    for depth in 0..max_len {
        let last = depth + 1 == max_len;
        let mut next = Vec::new();
        for chunk in level.chunks(BATCH) {
            let prefixes: Vec<Vec<TokenId>> = chunk
                .iter()
                .map(|(t, _)| context.iter().chain(t).copied().collect())
                .collect();
            let rows = scorer.score_next(&prefixes)?;
            for ((tokens, score), row) in chunk.iter().zip(rows) {
                for (t, &lp) in row.iter().enumerate() {
                    if lp.is_nan() || lp == f64::NEG_INFINITY {
                        continue;
                    }
                    let mut seq = tokens.clone();
                    seq.push(t as TokenId);
                    let s = score + lp;
                    if last || t as TokenId == eos {
                        consider(seq, s);
                    } else {
                        next.push((seq, s));
                    }
                }
            }
        }
        level = next;
    }

    let (max_count, score, tokens) = best.ok_or(DecodeError::Infeasible)?;
    Ok(OracleResult {
        tokens,
        score,
        max_count,
        num_clauses: cnf.len(),
        sequences,
    })
}
