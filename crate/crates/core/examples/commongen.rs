//! Concept-to-sentence generation on the bundled instances: NeuroLogic
//! against plain beam search, scored by concept coverage.

use logicbeam::decode::{beam_search, neurologic_decode, DecoderConfig};
use logicbeam::eval::coverage;
use logicbeam::formula::{parse_formula, to_cnf, Phrase};
use logicbeam::matcher::compile;
use logicbeam::scorer::{NgramConfig, NgramLm};
use serde::Deserialize;

const CORPUS: &str = include_str!("../data/toy_corpus.txt");
const INSTANCES: &str = include_str!("../data/commongen_instances.jsonl");

#[derive(Deserialize)]
struct Instance {
    id: String,
    formula: String,
    concepts: Vec<Vec<String>>,
}

fn main() {
    let config = NgramConfig {
        lambdas: vec![0.1, 0.3, 0.6],
        ..NgramConfig::new(3, 0.1)
    };
    let (lm, vocab) = NgramLm::train_text(CORPUS.lines(), config).unwrap();
    let cfg = DecoderConfig {
        k: 10,
        max_len: 15,
        ..Default::default()
    };

    let mut ours = Vec::new();
    let mut beam = Vec::new();
    let mut concepts = Vec::new();
    for (i, line) in INSTANCES.lines().enumerate() {
        let inst: Instance = serde_json::from_str(line).unwrap();
        let cnf = to_cnf(&parse_formula(&inst.formula, &vocab).unwrap()).unwrap();
        let cc = compile(&cnf, vocab.len()).unwrap();
        let r = neurologic_decode(&lm, &[], &cc, &cfg).unwrap();
        let b = beam_search(&lm, &[], &cfg).unwrap();
        if i < 8 {
            println!("{} {}", inst.id, inst.formula);
            println!(
                "    neurologic: {}  [{}/{}]",
                vocab.decode(&r.tokens),
                r.satisfied_count,
                r.num_clauses()
            );
            println!("    beam:       {}", vocab.decode(&b.tokens));
        }
        ours.push(r.tokens);
        beam.push(b.tokens);
        concepts.push(
            inst.concepts
                .iter()
                .map(|set| {
                    set.iter()
                        .map(|w| Phrase::from_words(&vocab, w).unwrap())
                        .collect()
                })
                .collect::<Vec<_>>(),
        );
    }
    println!();
    println!("coverage over {} instances", ours.len());
    println!(
        "  neurologic {:6.1}%",
        coverage(&ours, &concepts).unwrap().mean_percent
    );
    println!(
        "  beam       {:6.1}%",
        coverage(&beam, &concepts).unwrap().mean_percent
    );
}
