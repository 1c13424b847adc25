//! Randomized self-checks: matcher vs. naive recomputation, CNF
//! equivalence, reduction to beam search, and agreement with the
//! exhaustive oracle on tiny instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decode::{beam_search, brute_force_oracle, neurologic_decode, DecoderConfig};
use crate::formula::{to_cnf, Cnf};
use crate::matcher::{compile, naive_status, CompiledConstraints};
use crate::synth::{random_bigram_lm, random_cnf, random_formula, random_stream, word_ids};
use crate::TokenId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    /// Largest number of ordinary words in a random vocabulary.
    pub max_words: usize,
    /// Largest decode length for the oracle comparison.
    pub max_len: usize,
    /// Swap in a matcher without failure links.
    pub corrupt_matcher: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 200,
            seed: 0,
            max_words: 3,
            max_len: 6,
            corrupt_matcher: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub trials: usize,
    pub passed: usize,
    pub rate: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

fn check(
    name: &str,
    trials: usize,
    passed: usize,
    threshold: f64,
    first_failure: Option<String>,
) -> CheckReport {
    let rate = if trials == 0 {
        1.0
    } else {
        passed as f64 / trials as f64
    };
    CheckReport {
        name: name.to_string(),
        trials,
        passed,
        rate,
        threshold,
        pass: rate >= threshold,
        first_failure,
    }
}

fn lower(cnf: &Cnf, vocab_size: usize, corrupt: bool) -> CompiledConstraints {
    let cc = compile(cnf, vocab_size).expect("generated ids fit the vocabulary");
    if corrupt {
        cc.with_reset_to_head()
    } else {
        cc
    }
}

pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let checks = vec![
        matcher_check(opts),
        cnf_check(opts),
        reduction_check(opts),
        oracle_check(opts),
    ];
    let pass = checks.iter().all(|c| c.pass);
    VerifyReport {
        options: opts.clone(),
        checks,
        pass,
    }
}

fn rng_for(opts: &VerifyOptions, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(opts.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Longest proper prefix of `pat` ending `seq`, by trying every length.
fn longest_border(pat: &[TokenId], seq: &[TokenId]) -> u32 {
    (0..pat.len())
        .rev()
        .find(|&j| j <= seq.len() && seq[seq.len() - j..] == pat[..j])
        .unwrap_or(0) as u32
}

fn matcher_check(opts: &VerifyOptions) -> CheckReport {
    let mut rng = rng_for(opts, 1);
    let mut passed = 0;
    let mut first = None;
    for trial in 0..opts.trials {
        let words = rng.random_range(1..=opts.max_words.max(1));
        let ids = word_ids(words);
        let vsize = ids.len() + 3;
        let cnf = random_cnf(&mut rng, &ids, 4, 3, 3);
        let stream = random_stream(&mut rng, &ids, 20);
        let cc = lower(&cnf, vsize, opts.corrupt_matcher);
        let mut state = cc.init_state();
        let mut ok = true;
        for i in 0..stream.len() {
            state.advance_mut(&cc, stream[i]);
            let pointers_ok = cc.automata().iter().enumerate().all(|(a, auto)| {
                state
                    .pointer(a)
                    .is_none_or(|p| p == longest_border(auto.pattern().tokens(), &stream[..=i]))
            });
            if !pointers_ok || state.finalize().clause_truth != naive_status(&cnf, &stream[..=i]) {
                ok = false;
                break;
            }
        }
        if ok {
            passed += 1;
        } else if first.is_none() {
            first = Some(format!("trial {trial}: stream {stream:?}"));
        }
    }
    check("matcher_equivalence", opts.trials, passed, 1.0, first)
}

fn cnf_check(opts: &VerifyOptions) -> CheckReport {
    let mut rng = rng_for(opts, 2);
    let mut passed = 0;
    let mut first = None;
    for trial in 0..opts.trials {
        let ids = word_ids(rng.random_range(1..=opts.max_words.max(1)));
        let n = rng.random_range(1..=8);
        let f = random_formula(&mut rng, &ids, n, 2);
        let ok = match to_cnf(&f) {
            Ok(cnf) => (0..50).all(|_| {
                let seq = random_stream(&mut rng, &ids, 8);
                f.evaluate(&seq) == cnf.evaluate(&seq)
            }),
            Err(_) => false,
        };
        if ok {
            passed += 1;
        } else if first.is_none() {
            first = Some(format!("trial {trial}"));
        }
    }
    check("cnf_equivalence", opts.trials, passed, 1.0, first)
}

fn reduction_check(opts: &VerifyOptions) -> CheckReport {
    let mut rng = rng_for(opts, 3);
    let mut passed = 0;
    let mut first = None;
    for trial in 0..opts.trials {
        let words = rng.random_range(1..=opts.max_words.max(1));
        let lm = random_bigram_lm(&mut rng, words, 30);
        let cfg = DecoderConfig {
            k: rng.random_range(1..=5),
            max_len: rng.random_range(1..=opts.max_len.max(1)),
            beta: Some(1),
            ..Default::default()
        };
        let cc = lower(
            &Cnf::empty(),
            crate::scorer::Scorer::vocab_size(&lm),
            opts.corrupt_matcher,
        );
        let ok = match (
            neurologic_decode(&lm, &[], &cc, &cfg),
            beam_search(&lm, &[], &cfg),
        ) {
            (Ok(a), Ok(b)) => a.same_output(&b),
            _ => false,
        };
        if ok {
            passed += 1;
        } else if first.is_none() {
            first = Some(format!("trial {trial}"));
        }
    }
    check("reduction_to_beam", opts.trials, passed, 1.0, first)
}

fn oracle_check(opts: &VerifyOptions) -> CheckReport {
    let mut rng = rng_for(opts, 4);
    let mut count_match = 0;
    let mut exceeded = 0;
    let mut first = None;
    for trial in 0..opts.trials {
        let ids = word_ids(rng.random_range(1..=opts.max_words.max(1)));
        let lm = random_bigram_lm(&mut rng, ids.len(), 30);
        let cnf = random_cnf(&mut rng, &ids, 3, 2, 2);
        let max_len = rng.random_range(1..=opts.max_len.max(1));
        let cc = lower(&cnf, ids.len() + 3, opts.corrupt_matcher);
        let cfg = DecoderConfig {
            k: 25,
            alpha: None,
            beta: Some(cnf.len() + 1),
            max_len,
            ..Default::default()
        };
        let (Ok(o), Ok(r)) = (
            brute_force_oracle(&lm, &[], &cnf, max_len),
            neurologic_decode(&lm, &[], &cc, &cfg),
        ) else {
            continue;
        };
        let truth = cnf.clause_values(&r.tokens).iter().filter(|&&t| t).count();
        if truth > o.max_count {
            exceeded += 1;
        }
        if truth == o.max_count && r.satisfied_count == truth {
            count_match += 1;
        } else if first.is_none() {
            first = Some(format!(
                "trial {trial}: oracle {} vs decoder {truth}",
                o.max_count
            ));
        }
    }
    let mut c = check("oracle_satisfaction", opts.trials, count_match, 0.95, first);
    c.pass &= exceeded == 0;
    c
}
