use std::time::Instant;

use super::{
    can_stop, extend, finish, rank_candidates, refill, score_live, Candidate, DecodeError,
    DecodeResult, DecodeStats, DecoderConfig, Hypothesis,
};
use crate::formula::Cnf;
use crate::matcher::compile;
use crate::scorer::Scorer;
use crate::TokenId;

/// Plain k-best beam search. Clause truth is left empty; see
/// [`DecodeResult::evaluate_against`].
pub fn beam_search<S: Scorer + ?Sized>(
    scorer: &S,
    context: &[TokenId],
    cfg: &DecoderConfig,
) -> Result<DecodeResult, DecodeError> {
    let started = Instant::now();
    cfg.validate()?;
    let eos = scorer.eos();
    let state = compile(&Cnf::empty(), scorer.vocab_size())?.init_state();
    let mut beam = vec![Hypothesis {
        tokens: Vec::new(),
        score: 0.0,
        state,
    }];
    let mut finished = Vec::new();
    let mut stats = DecodeStats::default();

    for _ in 0..cfg.max_len {
        let live: Vec<&[TokenId]> = beam.iter().map(|h| h.tokens.as_slice()).collect();
        let rows = score_live(scorer, context, &live, &mut stats)?;
        let mut cands = Vec::with_capacity(beam.len() * scorer.vocab_size());
        for (i, (h, row)) in beam.iter().zip(&rows).enumerate() {
            for (t, &lp) in row.iter().enumerate() {
                if lp > f64::NEG_INFINITY {
                    cands.push(Candidate {
                        parent: i,
                        token: t as TokenId,
                        score: h.score + lp,
                        state: h.state.clone(),
                    });
                }
            }
        }
        cands.sort_by(rank_candidates);
        let (done, next) = refill(cands, cfg.k, eos);
        finished.extend(done.into_iter().map(|c| extend(&beam, c)));
        beam = next.into_iter().map(|c| extend(&beam, c)).collect();
        if beam.is_empty() {
            break;
        }
        let live: Vec<&Hypothesis> = beam.iter().collect();
        if can_stop(&finished, &live, 0, cfg) {
            beam.clear();
            break;
        }
    }
    finished.extend(beam);
    finish(finished, cfg, stats, started)
}

/// Beam search with a single slot.
pub fn greedy_decode<S: Scorer + ?Sized>(
    scorer: &S,
    context: &[TokenId],
    cfg: &DecoderConfig,
) -> Result<DecodeResult, DecodeError> {
    let cfg = DecoderConfig {
        k: 1,
        ..cfg.clone()
    };
    beam_search(scorer, context, &cfg)
}
