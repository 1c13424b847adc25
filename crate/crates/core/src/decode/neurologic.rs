use std::collections::BTreeMap;
use std::time::Instant;

use super::{
    can_stop, check_vocab, extend, finish, rank_candidates, refill, score_live, Candidate,
    DecodeError, DecodeResult, DecodeStats, DecoderConfig, Hypothesis,
};
use crate::matcher::{ClauseSet, CompiledConstraints};
use crate::scorer::Scorer;
use crate::TokenId;

/// Beam search that tracks every clause of `cc` per hypothesis.
///
/// Each step scores the live beam once, advances every candidate's
/// constraint state, drops candidates with an unsatisfiable clause,
/// applies the `alpha`/`beta` filters, groups survivors by the set of
/// clauses they satisfy, and refills the beam round-robin across groups.
pub fn neurologic_decode<S: Scorer + ?Sized>(
    scorer: &S,
    context: &[TokenId],
    cc: &CompiledConstraints,
    cfg: &DecoderConfig,
) -> Result<DecodeResult, DecodeError> {
    let started = Instant::now();
    cfg.validate()?;
    check_vocab(scorer, cc.vocab_size())?;
    let eos = scorer.eos();
    let num_clauses = cc.num_clauses();

    let mut init = cc.init_state();
    if cfg.match_in_prompt {
        for &t in context {
            init.advance_mut(cc, t);
        }
    }
    let mut beam = vec![Hypothesis {
        tokens: Vec::new(),
        score: 0.0,
        state: init,
    }];
    let mut finished = Vec::new();
    let mut stats = DecodeStats::default();

    for _ in 0..cfg.max_len {
        let live: Vec<&[TokenId]> = beam.iter().map(|h| h.tokens.as_slice()).collect();
        let rows = score_live(scorer, context, &live, &mut stats)?;

        let mut cands = Vec::new();
        for (i, (h, row)) in beam.iter().zip(&rows).enumerate() {
            for (t, &lp) in row.iter().enumerate() {
                if lp.is_nan() || lp == f64::NEG_INFINITY {
                    continue;
                }
                let state = h.state.advance(cc, t as TokenId);
                if state.is_unsatisfiable() {
                    stats.discarded_unsatisfiable += 1;
                    continue;
                }
                cands.push(Candidate {
                    parent: i,
                    token: t as TokenId,
                    score: h.score + lp,
                    state,
                });
            }
        }

        let ordered = select(cands, cfg, eos);
        let (done, next) = refill(ordered, cfg.k, eos);
        finished.extend(done.into_iter().map(|c| extend(&beam, c)));
        beam = next.into_iter().map(|c| extend(&beam, c)).collect();

        if beam.is_empty() {
            break;
        }
        let live: Vec<&Hypothesis> = beam.iter().collect();
        if can_stop(&finished, &live, num_clauses, cfg) {
            beam.clear();
            break;
        }
    }
    // Whatever is still live reached max_len.
    finished.extend(beam);
    finish(finished, cfg, stats, started)
}

/// Filters and orders the candidate pool. The returned order is the one
/// in which beam slots are filled.
fn select(mut cands: Vec<Candidate>, cfg: &DecoderConfig, eos: TokenId) -> Vec<Candidate> {
    cands.sort_by(rank_candidates);
    if let Some(alpha) = cfg.alpha {
        cands.truncate(alpha);
    }
    if let Some(beta) = cfg.beta {
        let mut counts: Vec<usize> = cands.iter().map(|c| c.state.satisfied_count()).collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        counts.dedup();
        if counts.len() > beta {
            let floor = counts[beta - 1];
            cands.retain(|c| c.state.satisfied_count() >= floor);
        }
    }

    let total = cands.len();
    let mut bins: BTreeMap<ClauseSet, Vec<Candidate>> = BTreeMap::new();
    for c in cands {
        bins.entry(c.state.satisfied_set().clone())
            .or_default()
            .push(c);
    }
    if bins.len() == 1 {
        return bins.into_values().next().unwrap_or_default();
    }

    let mut bins: Vec<_> = bins.into_values().map(|v| v.into_iter()).collect();
    let mut out = Vec::with_capacity(total);
    let mut live = 0;
    while live < cfg.k {
        let mut round: Vec<Candidate> = bins.iter_mut().filter_map(|b| b.next()).collect();
        if round.is_empty() {
            break;
        }
        round.sort_by(rank_candidates);
        live += round.iter().filter(|c| c.token != eos).count();
        out.extend(round);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::beam_search;
    use crate::formula::{parse_formula, to_cnf, Cnf};
    use crate::matcher::compile;
    use crate::scorer::{UniformScorer, Vocab};

    fn compiled(src: &str, v: &Vocab) -> CompiledConstraints {
        let cnf = to_cnf(&parse_formula(src, v).unwrap()).unwrap();
        compile(&cnf, v.len()).unwrap()
    }

    #[test]
    fn uniform_single_positive() {
        // tokens: </s>=0 <s>=1 <unk>=2 a=3 b=4
        let v = Vocab::from_words(["a", "b"]);
        let s = UniformScorer::for_vocab(&v);
        let cc = compiled(r#""b""#, &v);
        let cfg = DecoderConfig {
            k: 4,
            max_len: 2,
            ..Default::default()
        };
        let r = neurologic_decode(&s, &[], &cc, &cfg).unwrap();
        assert_eq!(r.satisfied_count, 1);
        assert!(r.tokens.contains(&4) && r.tokens.len() <= 2);
        let lp = -(5f64).ln();
        assert_eq!(r.score, lp + lp);
        assert_eq!(r.clause_truth, vec![true]);
    }

    #[test]
    fn empty_cnf_matches_beam() {
        let v = Vocab::from_words(["a", "b", "c"]);
        let s = UniformScorer::for_vocab(&v);
        let cc = compile(&Cnf::empty(), v.len()).unwrap();
        let cfg = DecoderConfig {
            k: 3,
            max_len: 4,
            beta: Some(1),
            ..Default::default()
        };
        let a = neurologic_decode(&s, &[], &cc, &cfg).unwrap();
        let b = beam_search(&s, &[], &cfg).unwrap();
        assert!(a.same_output(&b));
    }

    #[test]
    fn negative_constraint_discards() {
        let v = Vocab::from_words(["a"]);
        let s = UniformScorer::for_vocab(&v);
        let cc = compiled(r#"!"a""#, &v);
        let cfg = DecoderConfig {
            k: 2,
            max_len: 3,
            ..Default::default()
        };
        let r = neurologic_decode(&s, &[], &cc, &cfg).unwrap();
        assert!(!r.tokens.contains(&3));
        assert!(r.stats.discarded_unsatisfiable >= 1);
        assert_eq!(r.satisfied_count, 1);
    }

    #[test]
    fn infeasible_returns_best_count() {
        let v = Vocab::from_words(["a"]);
        let s = UniformScorer::for_vocab(&v);
        let cc = compiled(r#""a" & "<unk>""#, &v);
        let cfg = DecoderConfig {
            k: 2,
            max_len: 1,
            ..Default::default()
        };
        let r = neurologic_decode(&s, &[], &cc, &cfg).unwrap();
        assert_eq!(r.satisfied_count, 1);
        assert_eq!(r.num_clauses(), 2);
    }

    #[test]
    fn prompt_violation_is_infeasible() {
        let v = Vocab::from_words(["a"]);
        let s = UniformScorer::for_vocab(&v);
        let cc = compiled(r#"!"a""#, &v);
        let cfg = DecoderConfig {
            match_in_prompt: true,
            ..Default::default()
        };
        assert!(matches!(
            neurologic_decode(&s, &[3], &cc, &cfg),
            Err(DecodeError::Infeasible)
        ));
    }

    #[test]
    fn vocab_mismatch() {
        let v = Vocab::from_words(["a"]);
        let cc = compiled(r#""a""#, &v);
        let s = UniformScorer::new(9, 0);
        assert!(matches!(
            neurologic_decode(&s, &[], &cc, &DecoderConfig::default()),
            Err(DecodeError::VocabMismatch { .. })
        ));
    }
}
