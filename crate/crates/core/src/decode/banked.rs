//! Grid and constrained beam search over positive conjunctions.
//!
//! Both keep a separate beam of up to `k` hypotheses per bank and score
//! every bank's hypotheses in one scorer call per step. Grid beam search
//! keys banks by how many constraints are met (`C + 1` banks); constrained
//! beam search keys them by which constraints are met (`2^C` banks).

use std::collections::BTreeMap;
use std::time::Instant;

use super::{
    can_stop, check_vocab, extend, finish, rank_candidates, refill, score_live, Candidate,
    DecodeError, DecodeResult, DecodeStats, DecoderConfig, Hypothesis,
};
use crate::matcher::{CompiledConstraints, ConstraintState};
use crate::scorer::Scorer;
use crate::TokenId;

pub const MAX_CBS_CONSTRAINTS: usize = 16;

/// Number of constraints `C`, or an error unless every clause is a
/// single positive phrase.
pub fn positive_conjunction_size(cc: &CompiledConstraints) -> Result<usize, DecodeError> {
    if cc.cnf().is_positive_conjunction() {
        Ok(cc.num_clauses())
    } else {
        Err(DecodeError::UnsupportedConstraint(
            "disjunctions and negations are not supported".into(),
        ))
    }
}

pub fn gbs_decode<S: Scorer + ?Sized>(
    scorer: &S,
    context: &[TokenId],
    cc: &CompiledConstraints,
    cfg: &DecoderConfig,
) -> Result<DecodeResult, DecodeError> {
    positive_conjunction_size(cc)?;
    banked(scorer, context, cc, cfg, |s| s.satisfied_count() as u64)
}

pub fn cbs_decode<S: Scorer + ?Sized>(
    scorer: &S,
    context: &[TokenId],
    cc: &CompiledConstraints,
    cfg: &DecoderConfig,
) -> Result<DecodeResult, DecodeError> {
    let c = positive_conjunction_size(cc)?;
    if c > MAX_CBS_CONSTRAINTS {
        return Err(DecodeError::TooManyConstraints {
            c,
            max: MAX_CBS_CONSTRAINTS,
        });
    }
    banked(scorer, context, cc, cfg, |s| s.satisfied_set().low_bits())
}

fn banked<S, K>(
    scorer: &S,
    context: &[TokenId],
    cc: &CompiledConstraints,
    cfg: &DecoderConfig,
    key: K,
) -> Result<DecodeResult, DecodeError>
where
    S: Scorer + ?Sized,
    K: Fn(&ConstraintState) -> u64,
{
    let started = Instant::now();
    cfg.validate()?;
    check_vocab(scorer, cc.vocab_size())?;
    let eos = scorer.eos();

    let mut init = cc.init_state();
    if cfg.match_in_prompt {
        for &t in context {
            init.advance_mut(cc, t);
        }
    }
    let mut live = vec![Hypothesis {
        tokens: Vec::new(),
        score: 0.0,
        state: init,
    }];
    let mut finished = Vec::new();
    let mut stats = DecodeStats::default();

    for _ in 0..cfg.max_len {
        let prefixes: Vec<&[TokenId]> = live.iter().map(|h| h.tokens.as_slice()).collect();
        let rows = score_live(scorer, context, &prefixes, &mut stats)?;

        let mut banks: BTreeMap<u64, Vec<Candidate>> = BTreeMap::new();
        for (i, (h, row)) in live.iter().zip(&rows).enumerate() {
            for (t, &lp) in row.iter().enumerate() {
                if lp.is_nan() || lp == f64::NEG_INFINITY {
                    continue;
                }
                let state = h.state.advance(cc, t as TokenId);
                banks.entry(key(&state)).or_default().push(Candidate {
                    parent: i,
                    token: t as TokenId,
                    score: h.score + lp,
                    state,
                });
            }
        }

        let mut next = Vec::new();
        for (_, mut cands) in banks {
            cands.sort_by(rank_candidates);
            let (done, keep) = refill(cands, cfg.k, eos);
            finished.extend(done.into_iter().map(|c| extend(&live, c)));
            next.extend(keep.into_iter().map(|c| extend(&live, c)));
        }
        live = next;

        if live.is_empty() {
            break;
        }
        let refs: Vec<&Hypothesis> = live.iter().collect();
        if can_stop(&finished, &refs, cc.num_clauses(), cfg) {
            live.clear();
            break;
        }
    }
    finished.extend(live);
    finish(finished, cfg, stats, started)
}
