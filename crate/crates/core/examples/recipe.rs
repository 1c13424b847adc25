//! Recipe-style include/exclude constraints. Reports coverage of the
//! given ingredients and the extra-ingredient rate.

use logicbeam::decode::{beam_search, neurologic_decode, DecoderConfig};
use logicbeam::eval::{coverage, extra_rate};
use logicbeam::formula::{build_include_exclude, Phrase};
use logicbeam::matcher::compile;
use logicbeam::scorer::{NgramConfig, NgramLm, Vocab};
use serde::Deserialize;

const CORPUS: &str = include_str!("../data/toy_corpus.txt");
const INSTANCES: &str = include_str!("../data/recipe_instances.jsonl");

#[derive(Deserialize)]
struct Instance {
    id: String,
    concepts: Vec<Vec<String>>,
    forbidden: Vec<String>,
}

fn phrases(vocab: &Vocab, words: &[String]) -> Vec<Phrase> {
    words
        .iter()
        .map(|w| Phrase::from_words(vocab, w).unwrap())
        .collect()
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

    let (mut ours, mut beam, mut given, mut extra) = (vec![], vec![], vec![], vec![]);
    for (i, line) in INSTANCES.lines().enumerate() {
        let inst: Instance = serde_json::from_str(line).unwrap();
        let include: Vec<Vec<Phrase>> = inst.concepts.iter().map(|s| phrases(&vocab, s)).collect();
        let exclude = phrases(&vocab, &inst.forbidden);
        // the same constraint the instance file spells out as a formula
        let cnf = build_include_exclude(&include, &exclude).unwrap();
        let cc = compile(&cnf, vocab.len()).unwrap();
        let r = neurologic_decode(&lm, &[], &cc, &cfg).unwrap();
        let b = beam_search(&lm, &[], &cfg).unwrap();
        if i < 6 {
            println!(
                "{} use {:?} avoid {:?}",
                inst.id, inst.concepts, inst.forbidden
            );
            println!("    neurologic: {}", vocab.decode(&r.tokens));
            println!("    beam:       {}", vocab.decode(&b.tokens));
        }
        ours.push(r.tokens);
        beam.push(b.tokens);
        given.push(include);
        extra.push(exclude);
    }
    println!();
    for (name, outs) in [("neurologic", &ours), ("beam", &beam)] {
        println!(
            "{name:<10} coverage {:5.1}%  extra {:.3}",
            coverage(outs, &given).unwrap().mean_percent,
            extra_rate(outs, &given, &extra).unwrap().mean
        );
    }
}
