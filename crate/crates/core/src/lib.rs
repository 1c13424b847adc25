//! Constrained decoding under predicate-logic lexical constraints.
//!
//! A constraint is written in a small formula language (quoted phrases
//! combined with `&`, `|` and `!`), converted to conjunctive normal form,
//! and compiled into per-phrase prefix automata. The NeuroLogic decoder
//! then runs a beam search in which every hypothesis carries the state of
//! each clause, discards hypotheses that can no longer satisfy the
//! constraint, and fills the beam round-robin across groups of
//! hypotheses that satisfy the same set of clauses.
//!
//! The crate also ships the pieces needed to exercise the decoder at desk
//! scale:
//!
//! - [`scorer`]: next-token log-probability providers (an interpolated
//!   add-k n-gram model, a uniform model, and a subprocess client).
//! - [`decode`]: NeuroLogic plus greedy, beam, top-k/top-p sampling, grid
//!   beam search, constrained beam search, and an exhaustive oracle.
//! - [`eval`]: coverage / extra-phrase metrics and runtime scaling sweeps.
//! - [`cli`]: the command implementations behind the `logicbeam` binary.
//!
//! ```
//! use logicbeam::formula::{parse_formula_open, to_cnf};
//! use logicbeam::scorer::Vocab;
//!
//! let mut vocab = Vocab::new();
//! let f = parse_formula_open(r#""a" | ("b" & "c")"#, &mut vocab).unwrap();
//! let cnf = to_cnf(&f).unwrap();
//! assert_eq!(cnf.display(&vocab).to_string(), r#"("a" | "b") & ("a" | "c")"#);
//! ```

pub mod cli;
pub mod decode;
pub mod eval;
pub mod formula;
pub mod matcher;
pub mod scorer;
pub mod synth;

/// Index into a [`scorer::Vocab`].
pub type TokenId = u32;

pub use decode::{DecodeError, DecodeResult, DecoderConfig};
pub use formula::{Cnf, Formula, Phrase};
pub use matcher::{ClauseStatus, CompiledConstraints, ConstraintState};
pub use scorer::{Scorer, Vocab};
