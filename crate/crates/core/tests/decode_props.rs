use logicbeam::decode::{
    beam_search, brute_force_oracle, cbs_decode, gbs_decode, greedy_decode, neurologic_decode,
    sample_decode, DecodeResult, DecoderConfig, Truncation,
};
use logicbeam::formula::{Clause, Cnf, Literal, Phrase};
use logicbeam::matcher::compile;
use logicbeam::scorer::{NgramLm, Scorer, UniformScorer};
use logicbeam::synth::{random_bigram_lm, random_cnf, random_stream, scaling_instance, word_ids};
use logicbeam::TokenId;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    lm: NgramLm,
    context: Vec<TokenId>,
    cnf: Cnf,
    cfg: DecoderConfig,
}

fn case(seed: u64) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = rng.random_range(1..=4);
    let ids = word_ids(words);
    let lm = random_bigram_lm(&mut rng, words, 30);
    let context = random_stream(&mut rng, &ids, 2);
    let cnf = random_cnf(&mut rng, &ids, 3, 2, 2);
    let cfg = DecoderConfig {
        k: rng.random_range(1..=8),
        max_len: rng.random_range(1..=8),
        ..Default::default()
    };
    Case {
        lm,
        context,
        cnf,
        cfg,
    }
}

/// Rescores `r.tokens` one row at a time.
fn rescore(lm: &NgramLm, context: &[TokenId], tokens: &[TokenId]) -> f64 {
    let mut prefix = context.to_vec();
    let mut total = 0.0;
    for &t in tokens {
        total += lm.row(&prefix)[t as usize];
        prefix.push(t);
    }
    total
}

fn check_valid(c: &Case, r: &DecodeResult) -> Result<(), TestCaseError> {
    let eos = c.lm.eos();
    prop_assert!(r.tokens.len() <= c.cfg.max_len);
    prop_assert!(r.tokens.iter().all(|&t| (t as usize) < c.lm.vocab_size()));
    if let Some(pos) = r.tokens.iter().position(|&t| t == eos) {
        prop_assert_eq!(pos, r.tokens.len() - 1, "end marker before the end");
    } else {
        prop_assert_eq!(r.tokens.len(), c.cfg.max_len, "unfinished sequence");
    }
    prop_assert!((r.score - rescore(&c.lm, &c.context, &r.tokens)).abs() < 1e-9);
    let truth = c.cnf.clause_values(&r.tokens);
    prop_assert_eq!(&r.clause_truth, &truth);
    prop_assert_eq!(r.satisfied_count, truth.iter().filter(|&&t| t).count());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn empty_cnf_reduces_to_beam(seed in any::<u64>()) {
        let c = case(seed);
        let cc = compile(&Cnf::empty(), c.lm.vocab_size()).unwrap();
        let a = neurologic_decode(&c.lm, &c.context, &cc, &c.cfg).unwrap();
        let b = beam_search(&c.lm, &c.context, &c.cfg).unwrap();
        prop_assert!(a.same_output(&b), "{:?} vs {:?}", a.tokens, b.tokens);
    }

    #[test]
    fn neurologic_output_is_valid(seed in any::<u64>()) {
        let c = case(seed);
        let cc = compile(&c.cnf, c.lm.vocab_size()).unwrap();
        match neurologic_decode(&c.lm, &c.context, &cc, &c.cfg) {
            Ok(r) => check_valid(&c, &r)?,
            // only a prompt can make every hypothesis unsatisfiable, and
            // prompt matching is off here
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn baseline_outputs_are_valid(seed in any::<u64>()) {
        let c = case(seed);
        let runs = [
            beam_search(&c.lm, &c.context, &c.cfg),
            greedy_decode(&c.lm, &c.context, &c.cfg),
            sample_decode(&c.lm, &c.context, &c.cfg, Truncation::TopK(2)),
            sample_decode(&c.lm, &c.context, &c.cfg, Truncation::TopP(0.9)),
        ];
        for r in runs {
            let mut r = r.unwrap();
            r.evaluate_against(&c.cnf, &[]);
            check_valid(&c, &r)?;
        }
    }

    #[test]
    fn call_count_law(seed in any::<u64>()) {
        let c = case(seed);
        let cc = compile(&c.cnf, c.lm.vocab_size()).unwrap();
        let k = c.cfg.k as u64;
        let results = [
            neurologic_decode(&c.lm, &c.context, &cc, &c.cfg).unwrap(),
            beam_search(&c.lm, &c.context, &c.cfg).unwrap(),
            greedy_decode(&c.lm, &c.context, &c.cfg).unwrap(),
        ];
        for (i, r) in results.iter().enumerate() {
            let s = r.stats;
            prop_assert_eq!(s.scorer_calls, s.steps);
            prop_assert!(s.steps <= c.cfg.max_len as u64);
            let width = if i == 2 { 1 } else { k };
            prop_assert!(s.scored_rows <= width * s.steps);
        }
    }

    #[test]
    fn counters_agree_with_scorer(seed in any::<u64>()) {
        let c = case(seed);
        let cc = compile(&c.cnf, c.lm.vocab_size()).unwrap();
        let (calls0, rows0) = c.lm.counters().snapshot();
        let r = neurologic_decode(&c.lm, &c.context, &cc, &c.cfg).unwrap();
        let (calls1, rows1) = c.lm.counters().snapshot();
        prop_assert_eq!(r.stats.scorer_calls, calls1 - calls0);
        prop_assert_eq!(r.stats.scored_rows, rows1 - rows0);
    }

    #[test]
    fn rows_per_step_ignore_clause_count(k in 1usize..=6, max_len in 4usize..=40) {
        let cfg = DecoderConfig { k, max_len, ..Default::default() };
        let stats: Vec<_> = (1..=6)
            .map(|l| {
                let (s, cc) = scaling_instance(l, 20);
                neurologic_decode(&s, &[], &cc, &cfg).unwrap().stats
            })
            .collect();
        for s in &stats[1..] {
            prop_assert_eq!((s.scorer_calls, s.scored_rows), (stats[0].scorer_calls, stats[0].scored_rows));
        }
    }

    #[test]
    fn deterministic(seed in any::<u64>()) {
        let c = case(seed);
        let cc = compile(&c.cnf, c.lm.vocab_size()).unwrap();
        let a = neurologic_decode(&c.lm, &c.context, &cc, &c.cfg).unwrap();
        let b = neurologic_decode(&c.lm, &c.context, &cc, &c.cfg).unwrap();
        prop_assert!(a.same_output(&b));
        prop_assert_eq!(a.stats, b.stats);
        let cfg = DecoderConfig { seed, ..c.cfg.clone() };
        let x = sample_decode(&c.lm, &c.context, &cfg, Truncation::TopP(0.95)).unwrap();
        let y = sample_decode(&c.lm, &c.context, &cfg, Truncation::TopP(0.95)).unwrap();
        prop_assert!(x.same_output(&y));
    }

    #[test]
    fn banked_decoders_satisfy_positive_conjunctions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = rng.random_range(2..=4);
        let lm = random_bigram_lm(&mut rng, words, 30);
        let ids = word_ids(words);
        let n = rng.random_range(1..=2);
        let clauses = ids[..n]
            .iter()
            .map(|&t| Clause::new(vec![Literal::positive(Phrase::new(vec![t]).unwrap())]).unwrap())
            .collect();
        let cnf = Cnf::new(clauses);
        let cc = compile(&cnf, lm.vocab_size()).unwrap();
        let cfg = DecoderConfig { k: 4, max_len: 6, ..Default::default() };
        let c = Case { lm, context: Vec::new(), cnf, cfg };
        for r in [
            gbs_decode(&c.lm, &[], &cc, &c.cfg).unwrap(),
            cbs_decode(&c.lm, &[], &cc, &c.cfg).unwrap(),
        ] {
            check_valid(&c, &r)?;
            prop_assert!(r.all_satisfied());
        }
    }
}

#[test]
fn satisfaction_dominance_over_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut feasible, mut matched) = (0, 0);
    for _ in 0..200 {
        let ids = word_ids(rng.random_range(1..=3));
        let lm = random_bigram_lm(&mut rng, ids.len(), 30);
        let cnf = random_cnf(&mut rng, &ids, 3, 2, 2);
        let max_len = rng.random_range(1..=6);
        let cc = compile(&cnf, lm.vocab_size()).unwrap();
        let cfg = DecoderConfig {
            k: 25,
            beta: Some(cnf.len() + 1),
            max_len,
            ..Default::default()
        };
        let o = brute_force_oracle(&lm, &[], &cnf, max_len).unwrap();
        let r = neurologic_decode(&lm, &[], &cc, &cfg).unwrap();
        assert!(r.satisfied_count <= o.max_count);
        if o.feasible() {
            feasible += 1;
            matched += usize::from(r.satisfied_count == cnf.len());
        }
    }
    assert!(feasible > 50, "suite too easy to infeasible: {feasible}");
    assert!(
        matched as f64 >= 0.95 * feasible as f64,
        "{matched}/{feasible}"
    );
}

#[test]
fn mean_satisfaction_non_decreasing_in_k() {
    let cases: Vec<Case> = (0..60).map(|s| case(1000 + s)).collect();
    let mut last = f64::MIN;
    for k in [1, 2, 4, 8, 16] {
        let total: usize = cases
            .iter()
            .map(|c| {
                let cfg = DecoderConfig {
                    k,
                    max_len: 6,
                    ..c.cfg.clone()
                };
                let cc = compile(&c.cnf, c.lm.vocab_size()).unwrap();
                neurologic_decode(&c.lm, &c.context, &cc, &cfg)
                    .unwrap()
                    .satisfied_count
            })
            .sum();
        let mean = total as f64 / cases.len() as f64;
        assert!(mean >= last, "k={k}: mean {mean} fell below {last}");
        last = mean;
    }
}

/// Vocabulary {a, b, end}: every sequence of at most two tokens is
/// enumerated here directly.
#[test]
fn three_token_uniform_example() {
    let (a, b, eos) = (0u32, 1u32, 2u32);
    let s = UniformScorer::new(3, eos);
    let cnf = Cnf::new(vec![Clause::new(vec![Literal::positive(
        Phrase::new(vec![b]).unwrap(),
    )])
    .unwrap()]);
    let cc = compile(&cnf, 3).unwrap();
    let cfg = DecoderConfig {
        k: 4,
        max_len: 2,
        ..Default::default()
    };
    let r = neurologic_decode(&s, &[], &cc, &cfg).unwrap();

    let mut terminal = vec![vec![eos]];
    for x in [a, b, eos] {
        if x != eos {
            for y in [a, b, eos] {
                terminal.push(vec![x, y]);
            }
        }
    }
    let lp = (1.0f64 / 3.0).ln();
    let best = terminal
        .iter()
        .filter(|t| t.contains(&b))
        .map(|t| (t.len() as f64 * lp, t.clone()))
        .max_by(|x, y| x.0.total_cmp(&y.0).then(y.1.cmp(&x.1)))
        .unwrap();
    assert_eq!(r.satisfied_count, 1);
    assert_eq!(r.tokens, best.1);
    assert_eq!(r.tokens, vec![a, b]);
    assert!((r.score - 2.0 * lp).abs() < 1e-12);
    let o = brute_force_oracle(&s, &[], &cnf, 2).unwrap();
    assert_eq!((o.tokens.clone(), o.max_count), (r.tokens.clone(), 1));
}

#[test]
fn bigram_include_exclude_matches_oracle() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lm = random_bigram_lm(&mut rng, 2, 40);
        assert_eq!(lm.vocab_size(), 5);
        let (w1, w3) = (3u32, 4u32);
        let cnf = Cnf::new(vec![
            Clause::new(vec![Literal::positive(Phrase::new(vec![w3]).unwrap())]).unwrap(),
            Clause::new(vec![Literal::negative(Phrase::new(vec![w1]).unwrap())]).unwrap(),
        ]);
        let cc = compile(&cnf, 5).unwrap();
        let cfg = DecoderConfig {
            k: 25,
            beta: Some(3),
            max_len: 5,
            ..Default::default()
        };
        let r = neurologic_decode(&lm, &[], &cc, &cfg).unwrap();
        let o = brute_force_oracle(&lm, &[], &cnf, 5).unwrap();
        assert_eq!(r.satisfied_count, o.max_count, "seed {seed}");
    }
}
