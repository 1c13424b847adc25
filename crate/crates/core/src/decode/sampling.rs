use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    finish, score_live, DecodeError, DecodeResult, DecodeStats, DecoderConfig, Hypothesis,
};
use crate::formula::Cnf;
use crate::matcher::compile;
use crate::scorer::Scorer;
use crate::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    /// Sample among the `n` most likely tokens.
    TopK(usize),
    /// Sample among the smallest most-likely set with mass at least `p`.
    TopP(f64),
}

impl Truncation {
    pub fn validate(&self, vocab_size: usize) -> Result<(), DecodeError> {
        match *self {
            Truncation::TopK(n) if n >= 1 && n <= vocab_size => Ok(()),
            Truncation::TopP(p) if p > 0.0 && p <= 1.0 => Ok(()),
            other => Err(DecodeError::InvalidConfig(format!(
                "invalid truncation {other:?} for a vocabulary of {vocab_size}"
            ))),
        }
    }
}

/// Draws one token from `row` after truncation and renormalization.
/// Ranks by log-probability, ties to the lower id. `None` if every
/// entry is `-inf`.
pub fn sample_from_row<R: Rng + ?Sized>(
    row: &[f64],
    trunc: Truncation,
    rng: &mut R,
) -> Option<TokenId> {
    let mut ranked: Vec<(TokenId, f64)> = row
        .iter()
        .enumerate()
        .filter(|(_, &lp)| lp > f64::NEG_INFINITY)
        .map(|(t, &lp)| (t as TokenId, lp))
        .collect();
    if ranked.is_empty() {
        return None;
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let top = ranked[0].1;
    let weights: Vec<f64> = ranked.iter().map(|&(_, lp)| (lp - top).exp()).collect();
    let keep = match trunc {
        Truncation::TopK(n) => n.min(ranked.len()),
        Truncation::TopP(p) => {
            let total: f64 = weights.iter().sum();
            let mut acc = 0.0;
            let mut n = 0;
            for w in &weights {
                acc += w / total;
                n += 1;
                // tolerate rounding in the running sum
                if acc >= p - 1e-12 {
                    break;
                }
            }
            n
        }
    };
    let mass: f64 = weights[..keep].iter().sum();
    let u = rng.random::<f64>() * mass;
    let mut acc = 0.0;
    for i in 0..keep {
        acc += weights[i];
        if u < acc {
            return Some(ranked[i].0);
        }
    }
    Some(ranked[keep - 1].0)
}

/// Ancestral sampling with top-k or top-p truncation, seeded by
/// `cfg.seed`. The reported score is the untruncated model log-probability.
pub fn sample_decode<S: Scorer + ?Sized>(
    scorer: &S,
    context: &[TokenId],
    cfg: &DecoderConfig,
    trunc: Truncation,
) -> Result<DecodeResult, DecodeError> {
    let started = Instant::now();
    cfg.validate()?;
    trunc.validate(scorer.vocab_size())?;
    let eos = scorer.eos();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut h = Hypothesis {
        tokens: Vec::new(),
        score: 0.0,
        state: compile(&Cnf::empty(), scorer.vocab_size())?.init_state(),
    };
    let mut stats = DecodeStats::default();
    while h.tokens.len() < cfg.max_len {
        let rows = score_live(scorer, context, &[h.tokens.as_slice()], &mut stats)?;
        let Some(t) = sample_from_row(&rows[0], trunc, &mut rng) else {
            break;
        };
        h.score += rows[0][t as usize];
        h.tokens.push(t);
        if t == eos {
            break;
        }
    }
    finish(vec![h], cfg, stats, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::greedy_decode;
    use crate::scorer::{UniformScorer, Vocab};

    #[test]
    fn top_k_two_never_draws_third() {
        let row = [(0.5f64).ln(), (0.3f64).ln(), (0.2f64).ln()];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; 3];
        for _ in 0..10_000 {
            counts[sample_from_row(&row, Truncation::TopK(2), &mut rng).unwrap() as usize] += 1;
        }
        assert_eq!(counts[2], 0);
        // renormalized: 0.625 / 0.375
        assert!((counts[0] as f64 / 10_000.0 - 0.625).abs() < 0.02);
    }

    #[test]
    fn top_p_keeps_smallest_covering_set() {
        let row = [(0.5f64).ln(), (0.3f64).ln(), (0.2f64).ln()];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let drawn: std::collections::BTreeSet<_> = (0..2000)
            .map(|_| sample_from_row(&row, Truncation::TopP(0.8), &mut rng).unwrap())
            .collect();
        assert_eq!(drawn.into_iter().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn top_k_one_is_greedy() {
        let v = Vocab::from_words(["a", "b"]);
        let s = UniformScorer::new(v.len(), 4);
        let cfg = DecoderConfig {
            max_len: 6,
            ..Default::default()
        };
        let a = sample_decode(&s, &[], &cfg, Truncation::TopK(1)).unwrap();
        let b = greedy_decode(&s, &[], &cfg).unwrap();
        assert!(a.same_output(&b));
    }

    #[test]
    fn seeded_reproducible() {
        let s = UniformScorer::new(6, 0);
        let cfg = DecoderConfig {
            max_len: 30,
            seed: 11,
            ..Default::default()
        };
        let a = sample_decode(&s, &[], &cfg, Truncation::TopP(1.0)).unwrap();
        let b = sample_decode(&s, &[], &cfg, Truncation::TopP(1.0)).unwrap();
        assert!(a.same_output(&b));
    }

    #[test]
    fn bad_truncation() {
        let s = UniformScorer::new(3, 0);
        let cfg = DecoderConfig::default();
        for t in [
            Truncation::TopK(0),
            Truncation::TopK(4),
            Truncation::TopP(0.0),
            Truncation::TopP(1.5),
        ] {
            assert!(matches!(
                sample_decode(&s, &[], &cfg, t),
                Err(DecodeError::InvalidConfig(_))
            ));
        }
    }
}
