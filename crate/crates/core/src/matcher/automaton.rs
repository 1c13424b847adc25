use thiserror::Error;

use crate::formula::{Cnf, Phrase, Polarity};
use crate::TokenId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("token id {token} is outside the vocabulary (size {vocab_size})")]
    InvalidToken { token: TokenId, vocab_size: usize },
}

/// Prefix function of `pattern`: entry `i` is the length of the longest
/// proper prefix of `pattern[..=i]` that is also its suffix.
pub fn failure_table(pattern: &[TokenId]) -> Vec<u32> {
    let mut fail = vec![0u32; pattern.len()];
    let mut k = 0usize;
    for i in 1..pattern.len() {
        while k > 0 && pattern[i] != pattern[k] {
            k = fail[k - 1] as usize;
        }
        if pattern[i] == pattern[k] {
            k += 1;
        }
        fail[i] = k as u32;
    }
    fail
}

/// Streaming matcher for one phrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralAutomaton {
    pattern: Phrase,
    failure: Vec<u32>,
}

impl LiteralAutomaton {
    pub fn new(pattern: Phrase) -> Self {
        let failure = failure_table(pattern.tokens());
        LiteralAutomaton { pattern, failure }
    }

    pub fn pattern(&self) -> &Phrase {
        &self.pattern
    }

    pub fn failure(&self) -> &[u32] {
        &self.failure
    }

    pub fn len(&self) -> usize {
        self.failure.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Feeds one token to a matched-prefix pointer. Returns the new pointer
    /// and whether the whole pattern just completed; on completion the
    /// pointer already sits at the longest proper border so overlapping
    /// occurrences keep matching.
    #[inline]
    pub fn step(&self, pointer: u32, token: TokenId) -> (u32, bool) {
        let pat = self.pattern.tokens();
        let mut p = pointer as usize;
        while p > 0 && pat[p] != token {
            p = self.failure[p - 1] as usize;
        }
        if pat[p] == token {
            p += 1;
        }
        if p == pat.len() {
            (self.failure[p - 1], true)
        } else {
            (p as u32, false)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct CompiledClause {
    /// (automaton index, polarity)
    pub literals: Vec<(usize, Polarity)>,
    pub tautology: bool,
}

/// A CNF lowered to token-level automata. Each distinct phrase gets one
/// automaton shared by every clause that mentions it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledConstraints {
    pub(crate) automata: Vec<LiteralAutomaton>,
    pub(crate) clauses: Vec<CompiledClause>,
    /// automaton index -> clauses referencing it
    pub(crate) clauses_of: Vec<Vec<usize>>,
    pub(crate) vocab_size: usize,
    cnf: Cnf,
}

impl CompiledConstraints {
    pub fn automata(&self) -> &[LiteralAutomaton] {
        &self.automata
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn cnf(&self) -> &Cnf {
        &self.cnf
    }

    /// Automaton indices used by clause `c`, in literal order.
    pub fn clause_literals(&self, c: usize) -> impl Iterator<Item = (usize, Polarity)> + '_ {
        self.clauses[c].literals.iter().copied()
    }

    /// Test hook: discards the failure tables so every mismatch resets the
    /// pointer to the head of the phrase. Misses overlapping occurrences.
    #[doc(hidden)]
    pub fn with_reset_to_head(mut self) -> Self {
        for a in &mut self.automata {
            a.failure.iter_mut().for_each(|f| *f = 0);
        }
        self
    }
}

/// Lowers `cnf` for a vocabulary of `vocab_size` ids. Automata are numbered
/// by first appearance (clause order, then literal order).
pub fn compile(cnf: &Cnf, vocab_size: usize) -> Result<CompiledConstraints, CompileError> {
    let mut automata: Vec<LiteralAutomaton> = Vec::new();
    let mut clauses = Vec::with_capacity(cnf.len());
    for clause in cnf.clauses() {
        let mut lits = Vec::with_capacity(clause.literals().len());
        for lit in clause.literals() {
            if let Some(&token) = lit
                .phrase
                .tokens()
                .iter()
                .find(|&&t| t as usize >= vocab_size)
            {
                return Err(CompileError::InvalidToken { token, vocab_size });
            }
            let idx = match automata.iter().position(|a| a.pattern == lit.phrase) {
                Some(i) => i,
                None => {
                    automata.push(LiteralAutomaton::new(lit.phrase.clone()));
                    automata.len() - 1
                }
            };
            lits.push((idx, lit.polarity));
        }
        clauses.push(CompiledClause {
            literals: lits,
            tautology: clause.is_tautology(),
        });
    }
    let mut clauses_of = vec![Vec::new(); automata.len()];
    for (c, clause) in clauses.iter().enumerate() {
        for &(a, _) in &clause.literals {
            if !clauses_of[a].contains(&c) {
                clauses_of[a].push(c);
            }
        }
    }
    Ok(CompiledConstraints {
        automata,
        clauses,
        clauses_of,
        vocab_size,
        cnf: cnf.clone(),
    })
}
