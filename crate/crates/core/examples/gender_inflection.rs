//! Pin the grammatical gender of an entity: require the matching
//! pronoun and forbid the other one.

use logicbeam::decode::{beam_search, neurologic_decode, DecoderConfig};
use logicbeam::formula::{build_include_exclude, Phrase};
use logicbeam::matcher::compile;
use logicbeam::scorer::{NgramConfig, NgramLm};

const CORPUS: &[&str] = &[
    "the doctor finished his shift early",
    "the doctor finished his rounds",
    "the doctor said he was tired",
    "the doctor thanked his nurse",
    "the nurse finished her shift",
    "the nurse said she was tired",
    "the engineer fixed his bike",
    "the engineer said he would help",
    "the teacher graded her tests",
    "the teacher said she was proud",
    "the doctor said she would call",
];

fn main() {
    let (lm, vocab) =
        NgramLm::train_text(CORPUS.iter().copied(), NgramConfig::new(3, 0.1)).unwrap();
    let cfg = DecoderConfig {
        k: 8,
        max_len: 10,
        length_normalize: true,
        ..Default::default()
    };
    let word = |w: &str| Phrase::from_words(&vocab, w).unwrap();

    for entity in ["doctor", "engineer", "nurse"] {
        let context = vocab.encode(&format!("the {entity}"));
        let plain = beam_search(&lm, &context, &cfg).unwrap();
        println!("the {entity} ...");
        println!("    unconstrained: {}", vocab.decode(&plain.tokens));
        for (want, avoid) in [
            (["she", "her"], ["he", "his"]),
            (["he", "his"], ["she", "her"]),
        ] {
            let include = vec![want.iter().map(|w| word(w)).collect()];
            let exclude: Vec<Phrase> = avoid.iter().map(|w| word(w)).collect();
            let cnf = build_include_exclude(&include, &exclude).unwrap();
            let cc = compile(&cnf, vocab.len()).unwrap();
            let r = neurologic_decode(&lm, &context, &cc, &cfg).unwrap();
            println!(
                "    {:<13} {}  [{}/{}]",
                format!("{}:", want[0]),
                vocab.decode(&r.tokens),
                r.satisfied_count,
                r.num_clauses()
            );
        }
    }
}
