//! Incremental clause tracking for hypotheses under construction.

mod automaton;
mod state;

pub use automaton::{compile, failure_table, CompileError, CompiledConstraints, LiteralAutomaton};
pub use state::{ClauseSet, ClauseStatus, ConstraintState, FinalStatus};

use crate::formula::Cnf;
use crate::TokenId;

/// Per-clause truth recomputed from scratch by scanning all of `seq`.
/// Reference for checking the incremental tracker.
pub fn naive_status(cnf: &Cnf, seq: &[TokenId]) -> Vec<bool> {
    cnf.clauses()
        .iter()
        .map(|clause| {
            clause.literals().iter().any(|lit| {
                let pat = lit.phrase.tokens();
                let mut present = false;
                for start in 0..seq.len() {
                    if seq.len() - start >= pat.len() && seq[start..start + pat.len()] == *pat {
                        present = true;
                        break;
                    }
                }
                match lit.polarity {
                    crate::formula::Polarity::Positive => present,
                    crate::formula::Polarity::Negative => !present,
                }
            })
        })
        .collect()
}
