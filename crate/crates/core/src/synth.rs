//! Seeded generators for random test instances.
//!
//! Everything here is a pure function of the RNG it is handed, so a fixed
//! seed reproduces the same formulas, streams and models.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::formula::{Clause, Cnf, Formula, Literal, Phrase};
use crate::matcher::{compile, CompiledConstraints};
use crate::scorer::{NgramConfig, NgramLm, UniformScorer, Vocab};
use crate::TokenId;

/// First id available for ordinary words.
pub const FIRST_WORD: TokenId = Vocab::UNK + 1;

pub fn random_phrase<R: Rng + ?Sized>(rng: &mut R, alphabet: &[TokenId], max_len: usize) -> Phrase {
    let n = rng.random_range(1..=max_len.max(1));
    let toks = (0..n)
        .map(|_| *alphabet.choose(rng).expect("non-empty alphabet"))
        .collect();
    Phrase::new(toks).expect("non-empty phrase")
}

/// A random formula tree with exactly `literals` leaves.
pub fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    alphabet: &[TokenId],
    literals: usize,
    max_phrase_len: usize,
) -> Formula {
    assert!(literals >= 1);
    let f = if literals == 1 {
        let p = random_phrase(rng, alphabet, max_phrase_len);
        if rng.random_bool(0.3) {
            Formula::neg(p)
        } else {
            Formula::pos(p)
        }
    } else {
        let left = rng.random_range(1..literals);
        let a = random_formula(rng, alphabet, left, max_phrase_len);
        let b = random_formula(rng, alphabet, literals - left, max_phrase_len);
        if rng.random_bool(0.5) {
            Formula::And(vec![a, b])
        } else {
            Formula::Or(vec![a, b])
        }
    };
    if rng.random_bool(0.15) {
        Formula::not(f)
    } else {
        f
    }
}

pub fn random_cnf<R: Rng + ?Sized>(
    rng: &mut R,
    alphabet: &[TokenId],
    max_clauses: usize,
    max_literals: usize,
    max_phrase_len: usize,
) -> Cnf {
    let n = rng.random_range(1..=max_clauses.max(1));
    let clauses = (0..n)
        .map(|_| {
            let m = rng.random_range(1..=max_literals.max(1));
            let lits = (0..m)
                .map(|_| {
                    let p = random_phrase(rng, alphabet, max_phrase_len);
                    if rng.random_bool(0.5) {
                        Literal::positive(p)
                    } else {
                        Literal::negative(p)
                    }
                })
                .collect();
            Clause::new(lits).expect("non-empty clause")
        })
        .collect();
    Cnf::new(clauses)
}

pub fn random_stream<R: Rng + ?Sized>(
    rng: &mut R,
    alphabet: &[TokenId],
    max_len: usize,
) -> Vec<TokenId> {
    let n = rng.random_range(0..=max_len);
    (0..n)
        .map(|_| *alphabet.choose(rng).expect("non-empty alphabet"))
        .collect()
}

/// Word ids of a vocabulary with `words` ordinary words.
pub fn word_ids(words: usize) -> Vec<TokenId> {
    (FIRST_WORD..FIRST_WORD + words as TokenId).collect()
}

/// Bigram model trained on sentences from a random Markov chain over
/// `words` words. The vocabulary has `words + 3` ids.
pub fn random_bigram_lm<R: Rng + ?Sized>(rng: &mut R, words: usize, sentences: usize) -> NgramLm {
    let ids = word_ids(words);
    // row 0 is the start state
    let weights: Vec<Vec<f64>> = (0..=words)
        .map(|_| {
            (0..=words)
                .map(|_| rng.random::<f64>().powi(2) + 0.01)
                .collect()
        })
        .collect();
    let draw = |rng: &mut R, row: &[f64]| -> usize {
        let total: f64 = row.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (i, w) in row.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        row.len() - 1
    };
    let corpus: Vec<Vec<TokenId>> = (0..sentences.max(1))
        .map(|_| {
            let mut s = Vec::new();
            let mut state = 0;
            // column 0 ends the sentence
            while s.len() < 12 {
                let next = draw(rng, &weights[state]);
                if next == 0 && !s.is_empty() {
                    break;
                }
                let next = next.max(1);
                s.push(ids[next - 1]);
                state = next;
            }
            s
        })
        .collect();
    NgramLm::train(
        &corpus,
        words + FIRST_WORD as usize,
        NgramConfig::new(2, 0.5),
    )
    .expect("valid synthetic corpus")
}

/// Scorer plus `c` single-token positive constraints for runtime sweeps.
///
/// The scorer is uniform over `vocab_size` ids with the end marker on the
/// last id, so it loses every tie and hypotheses run to the length limit.
pub fn scaling_instance(c: usize, vocab_size: usize) -> (UniformScorer, CompiledConstraints) {
    assert!(c + 2 <= vocab_size);
    let eos = (vocab_size - 1) as TokenId;
    let clauses = (1..=c as TokenId)
        .map(|t| Clause::new(vec![Literal::positive(Phrase::new(vec![t]).unwrap())]).unwrap())
        .collect();
    let cc = compile(&Cnf::new(clauses), vocab_size).expect("ids within vocabulary");
    (UniformScorer::new(vocab_size, eos), cc)
}
