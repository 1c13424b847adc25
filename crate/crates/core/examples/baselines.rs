//! Every decoder on one constrained prompt, with scorer work counters.

use logicbeam::decode::{
    beam_search, brute_force_oracle, cbs_decode, gbs_decode, greedy_decode, neurologic_decode,
    sample_decode, DecodeResult, DecoderConfig, Truncation,
};
use logicbeam::formula::{parse_formula, to_cnf};
use logicbeam::matcher::compile;
use logicbeam::scorer::{NgramConfig, NgramLm};

const CORPUS: &str = include_str!("../data/toy_corpus.txt");

fn main() {
    let config = NgramConfig {
        lambdas: vec![0.1, 0.3, 0.6],
        ..NgramConfig::new(3, 0.1)
    };
    let (lm, vocab) = NgramLm::train_text(CORPUS.lines(), config).unwrap();
    let formula = r#""dogs" & "ball" & "park""#;
    let cnf = to_cnf(&parse_formula(formula, &vocab).unwrap()).unwrap();
    let cc = compile(&cnf, vocab.len()).unwrap();
    let cfg = DecoderConfig {
        k: 6,
        max_len: 14,
        seed: 3,
        ..Default::default()
    };
    println!("constraint: {}\n", cnf.display(&vocab));

    let posthoc = |mut r: DecodeResult| {
        r.evaluate_against(&cnf, &[]);
        r
    };
    let runs: Vec<(&str, DecodeResult)> = vec![
        ("greedy", posthoc(greedy_decode(&lm, &[], &cfg).unwrap())),
        ("beam", posthoc(beam_search(&lm, &[], &cfg).unwrap())),
        (
            "top-k 5",
            posthoc(sample_decode(&lm, &[], &cfg, Truncation::TopK(5)).unwrap()),
        ),
        (
            "top-p 0.9",
            posthoc(sample_decode(&lm, &[], &cfg, Truncation::TopP(0.9)).unwrap()),
        ),
        ("gbs", gbs_decode(&lm, &[], &cc, &cfg).unwrap()),
        ("cbs", cbs_decode(&lm, &[], &cc, &cfg).unwrap()),
        (
            "neurologic",
            neurologic_decode(&lm, &[], &cc, &cfg).unwrap(),
        ),
    ];
    println!(
        "{:<11} {:>5} {:>6} {:>6} {:>8}  output",
        "decoder", "sat", "calls", "rows", "score"
    );
    for (name, r) in &runs {
        println!(
            "{name:<11} {:>3}/{} {:>6} {:>6} {:>8.3}  {}",
            r.satisfied_count,
            r.num_clauses(),
            r.stats.scorer_calls,
            r.stats.scored_rows,
            r.score,
            vocab.decode(&r.tokens)
        );
    }
    // exhaustive search is out of reach at this vocabulary size
    println!(
        "\noracle: {}",
        brute_force_oracle(&lm, &[], &cnf, cfg.max_len).unwrap_err()
    );
}
