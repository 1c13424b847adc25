//! Train the interpolated trigram model on the bundled corpus, save and
//! reload it, and print the most likely continuations of a few prefixes.

use logicbeam::scorer::{logsumexp, NgramConfig, NgramLm};

const CORPUS: &str = include_str!("../data/toy_corpus.txt");

fn main() {
    let config = NgramConfig {
        lambdas: vec![0.1, 0.3, 0.6],
        ..NgramConfig::new(3, 0.1)
    };
    let (lm, vocab) = NgramLm::train_text(CORPUS.lines(), config).unwrap();
    println!("{} sentences, {} ids", CORPUS.lines().count(), vocab.len());

    let mut bytes = Vec::new();
    lm.save(&mut bytes).unwrap();
    let lm = NgramLm::load(&bytes[..]).unwrap();
    println!("model file: {} bytes", bytes.len());

    for prefix in ["", "the", "the dog", "she slices the"] {
        let row = lm.row(&vocab.encode(prefix));
        let mut top: Vec<(usize, f64)> = row.iter().copied().enumerate().collect();
        top.sort_by(|a, b| b.1.total_cmp(&a.1));
        let shown: Vec<String> = top[..5]
            .iter()
            .map(|&(t, lp)| format!("{} {:.3}", vocab.word(t as u32).unwrap(), lp.exp()))
            .collect();
        println!(
            "{prefix:>16} | {}   (logsumexp {:+.1e})",
            shown.join(", "),
            logsumexp(&row)
        );
    }
    let s = vocab.encode("the dog runs in the park");
    println!(
        "log p(\"the dog runs in the park\") = {:.3}",
        lm.sequence_logprob(&s)
    );
}
