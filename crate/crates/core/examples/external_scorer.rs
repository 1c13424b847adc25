//! Drive the decoder through a scorer running in a child process.
//!
//! The example re-executes itself with `serve` to play the child, so the
//! line protocol is exercised end to end without any other program.

use std::io::{stdin, stdout};
use std::time::Duration;

use logicbeam::decode::{neurologic_decode, DecoderConfig};
use logicbeam::formula::{parse_formula, to_cnf};
use logicbeam::matcher::compile;
use logicbeam::scorer::{serve_lines, ExternalScorer, NgramConfig, NgramLm, Scorer, Vocab};

const CORPUS: &str = include_str!("../data/toy_corpus.txt");

fn model() -> (NgramLm, Vocab) {
    NgramLm::train_text(CORPUS.lines(), NgramConfig::new(3, 0.1)).unwrap()
}

fn main() {
    let (lm, vocab) = model();
    if std::env::args().nth(1).as_deref() == Some("serve") {
        serve_lines(&lm, stdin().lock(), stdout().lock()).unwrap();
        return;
    }

    let me = std::env::current_exe().unwrap();
    let remote = ExternalScorer::spawn(
        &format!("'{}' serve", me.display()),
        vocab.len(),
        lm.eos(),
        Duration::from_secs(10),
    )
    .unwrap();

    let cnf = to_cnf(&parse_formula(r#""dogs" & "window""#, &vocab).unwrap()).unwrap();
    let cc = compile(&cnf, vocab.len()).unwrap();
    let cfg = DecoderConfig {
        k: 8,
        max_len: 12,
        ..Default::default()
    };
    let local = neurologic_decode(&lm, &[], &cc, &cfg).unwrap();
    let piped = neurologic_decode(&remote, &[], &cc, &cfg).unwrap();
    println!("in-process: {}", vocab.decode(&local.tokens));
    println!("subprocess: {}", vocab.decode(&piped.tokens));
    println!(
        "same output: {}, calls {} rows {}",
        local.same_output(&piped),
        remote.counters().calls(),
        remote.counters().rows()
    );
}
