use logicbeam::decode::{neurologic_decode, DecoderConfig};
use logicbeam::eval::{bench_scaling, coverage, extra_rate, BenchDecoder};
use logicbeam::formula::{build_cover_all, build_include_exclude, Phrase};
use logicbeam::matcher::compile;
use logicbeam::scorer::{logsumexp, NgramConfig, NgramLm, Scorer, UniformScorer, Vocab};
use logicbeam::synth::{random_bigram_lm, scaling_instance, word_ids};
use logicbeam::TokenId;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus() -> impl Strategy<Value = Vec<Vec<TokenId>>> {
    prop::collection::vec(prop::collection::vec(3u32..7, 1..6), 1..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ngram_rows_are_distributions(
        corpus in corpus(),
        order in 1usize..=4,
        add_k in prop_oneof![Just(0.0), 0.01f64..2.0],
        prefix in prop::collection::vec(0u32..8, 0..6),
    ) {
        let lm = NgramLm::train(&corpus, 8, NgramConfig::new(order, add_k)).unwrap();
        let row = lm.row(&prefix);
        prop_assert_eq!(row.len(), 8);
        prop_assert!(logsumexp(&row).abs() <= 1e-9);
        prop_assert_eq!(row[Vocab::BOS as usize], f64::NEG_INFINITY);
        prop_assert_eq!(lm.row(&prefix), row);
    }

    #[test]
    fn save_load_is_bitwise(corpus in corpus(), order in 1usize..=3) {
        let lm = NgramLm::train(&corpus, 8, NgramConfig::new(order, 0.1)).unwrap();
        let mut bytes = Vec::new();
        lm.save(&mut bytes).unwrap();
        let back = NgramLm::load(&bytes[..]).unwrap();
        for p in [vec![], vec![3], vec![4, 5], vec![6, 6, 6]] {
            let (a, b) = (lm.row(&p), back.row(&p));
            prop_assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn uniform_rows_are_distributions(n in 2usize..200) {
        let s = UniformScorer::new(n, 0);
        for row in s.score_next(&[vec![], vec![1, 2]]).unwrap() {
            prop_assert!(logsumexp(&row).abs() <= 1e-9);
        }
    }

    #[test]
    fn satisfied_outputs_have_full_coverage_and_no_extras(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = rng.random_range(3..=5);
        let lm = random_bigram_lm(&mut rng, words, 40);
        let ids = word_ids(words);
        let single = |t: TokenId| Phrase::new(vec![t]).unwrap();
        let include = vec![vec![single(ids[0]), single(ids[1])]];
        let exclude = vec![single(ids[2])];
        let cnf = build_include_exclude(&include, &exclude).unwrap();
        let cc = compile(&cnf, lm.vocab_size()).unwrap();
        let cfg = DecoderConfig { k: 5, max_len: 6, ..Default::default() };
        let r = neurologic_decode(&lm, &[], &cc, &cfg).unwrap();
        if r.all_satisfied() {
            let out = vec![r.tokens.clone()];
            prop_assert_eq!(coverage(&out, std::slice::from_ref(&include)).unwrap().per_instance[0], 1.0);
            prop_assert_eq!(extra_rate(&out, &[include], &[exclude]).unwrap().mean, 0.0);
        }
        let cover = build_cover_all(&[vec![single(ids[0])], vec![single(ids[1])]]).unwrap();
        prop_assert_eq!(cover.len(), 2);
    }
}

#[test]
fn unigram_without_smoothing_by_hand() {
    let (a, b) = (3, 4);
    let lm = NgramLm::train(&[vec![a, b]], 5, NgramConfig::new(1, 0.0)).unwrap();
    let row = lm.row(&[]);
    for t in [a, b, Vocab::EOS] {
        assert!((row[t as usize] - (1.0f64 / 3.0).ln()).abs() < 1e-12);
    }
}

#[test]
fn bigram_prefers_seen_continuation() {
    let (a, b) = (3, 4);
    let lm = NgramLm::train(&[vec![a, b], vec![a, b]], 5, NgramConfig::new(2, 0.1)).unwrap();
    let row = lm.row(&[a]);
    let best = (0..5).max_by(|&x, &y| row[x].total_cmp(&row[y])).unwrap();
    assert_eq!(best as TokenId, b);
}

#[test]
fn bench_counters_match_scorer() {
    let s = UniformScorer::new(20, 19);
    let cfg = DecoderConfig {
        k: 3,
        max_len: 20,
        ..Default::default()
    };
    let records = bench_scaling(
        &s,
        |c| (Vec::new(), scaling_instance(c, 20).1),
        &[
            BenchDecoder::Neurologic,
            BenchDecoder::Gbs,
            BenchDecoder::Cbs,
            BenchDecoder::Beam,
        ],
        &[1, 2, 3],
        &[2, 3],
        &cfg,
    );
    assert_eq!(records.len(), 24);
    assert!(records.iter().all(|r| r.error.is_none()));
    let (calls, rows) = s.counters().snapshot();
    assert_eq!(calls, records.iter().map(|r| r.calls).sum::<u64>());
    assert_eq!(rows, records.iter().map(|r| r.rows).sum::<u64>());
}
