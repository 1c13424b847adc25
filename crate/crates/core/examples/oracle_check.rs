//! Compare NeuroLogic against exhaustive search on random tiny
//! instances: satisfied-clause count and score of the chosen sequence.

use logicbeam::decode::{brute_force_oracle, neurologic_decode, DecoderConfig};
use logicbeam::matcher::compile;
use logicbeam::scorer::Scorer;
use logicbeam::synth::{random_bigram_lm, random_cnf, word_ids};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let trials: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200);
    let mut rng = ChaCha8Rng::seed_from_u64(2020);
    let (mut count_match, mut score_match, mut exceeded, mut sequences) = (0, 0, 0, 0u64);
    for i in 0..trials {
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
        sequences += o.sequences;
        exceeded += usize::from(r.satisfied_count > o.max_count);
        if r.satisfied_count == o.max_count {
            count_match += 1;
            score_match += usize::from((r.score - o.score).abs() < 1e-9);
        } else if i < 50 {
            println!(
                "trial {i}: oracle {}/{} {:?}, decoder {}/{} {:?}",
                o.max_count, o.num_clauses, o.tokens, r.satisfied_count, o.num_clauses, r.tokens
            );
        }
    }
    println!("{trials} instances, {sequences} sequences enumerated");
    println!(
        "count matches oracle: {count_match} ({:.1}%)",
        100.0 * count_match as f64 / trials as f64
    );
    println!("exceeds oracle:       {exceeded}");
    println!("score matches too:    {score_match} of {count_match}");
}
