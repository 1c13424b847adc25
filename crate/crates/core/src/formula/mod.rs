//! Constraint formulas over phrase-inclusion predicates.
//!
//! A leaf asserts that a phrase occurs (or does not occur) as a contiguous
//! run of tokens somewhere in the generated sequence. Formulas combine
//! leaves with and / or / not and are normalized to [`Cnf`] before
//! compilation.

mod build;
mod cnf;
mod parse;

use std::fmt;

use thiserror::Error;

use crate::scorer::Vocab;
use crate::TokenId;

pub use build::{build_cover_all, build_include_exclude, phrases};
pub use cnf::{to_cnf, to_cnf_with_limit, DEFAULT_CLAUSE_LIMIT};
pub use parse::{parse_formula, parse_formula_open, parse_formula_with};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown word {word:?} at byte {offset}")]
    UnknownWord { word: String, offset: usize },
    #[error("CNF would exceed {limit} clauses")]
    TooManyClauses { limit: usize },
    #[error("variant set {index} is empty")]
    EmptyVariantSet { index: usize },
    #[error("phrase {0} is both required and excluded")]
    IncludeExcludeOverlap(String),
    #[error("phrases must contain at least one token")]
    EmptyPhrase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// Non-empty run of token ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phrase(Vec<TokenId>);

impl Phrase {
    pub fn new(tokens: Vec<TokenId>) -> Result<Self, FormulaError> {
        if tokens.is_empty() {
            return Err(FormulaError::EmptyPhrase);
        }
        Ok(Phrase(tokens))
    }

    /// Looks up every whitespace-separated word; `None` if any is unknown.
    pub fn from_words(vocab: &Vocab, text: &str) -> Option<Self> {
        let tokens = text
            .split_whitespace()
            .map(|w| vocab.id(w))
            .collect::<Option<Vec<_>>>()?;
        Phrase::new(tokens).ok()
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True iff the phrase is a contiguous subsequence of `seq`.
    pub fn occurs_in(&self, seq: &[TokenId]) -> bool {
        seq.windows(self.0.len()).any(|w| w == self.0.as_slice())
    }

    pub fn text(&self, vocab: &Vocab) -> String {
        self.0
            .iter()
            .map(|&t| vocab.word(t).unwrap_or(Vocab::UNK_WORD))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub polarity: Polarity,
    pub phrase: Phrase,
}

impl Literal {
    pub fn positive(phrase: Phrase) -> Self {
        Literal {
            polarity: Polarity::Positive,
            phrase,
        }
    }

    pub fn negative(phrase: Phrase) -> Self {
        Literal {
            polarity: Polarity::Negative,
            phrase,
        }
    }

    pub fn negated(&self) -> Self {
        Literal {
            polarity: self.polarity.flip(),
            phrase: self.phrase.clone(),
        }
    }

    pub fn evaluate(&self, seq: &[TokenId]) -> bool {
        let present = self.phrase.occurs_in(seq);
        match self.polarity {
            Polarity::Positive => present,
            Polarity::Negative => !present,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Leaf(Literal),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    pub fn pos(phrase: Phrase) -> Self {
        Formula::Leaf(Literal::positive(phrase))
    }

    pub fn neg(phrase: Phrase) -> Self {
        Formula::Leaf(Literal::negative(phrase))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn evaluate(&self, seq: &[TokenId]) -> bool {
        match self {
            Formula::Leaf(lit) => lit.evaluate(seq),
            Formula::And(cs) => cs.iter().all(|c| c.evaluate(seq)),
            Formula::Or(cs) => cs.iter().any(|c| c.evaluate(seq)),
            Formula::Not(c) => !c.evaluate(seq),
        }
    }

    pub fn literal_count(&self) -> usize {
        match self {
            Formula::Leaf(_) => 1,
            Formula::And(cs) | Formula::Or(cs) => cs.iter().map(Formula::literal_count).sum(),
            Formula::Not(c) => c.literal_count(),
        }
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocab) -> FormulaDisplay<'a> {
        FormulaDisplay { f: self, vocab }
    }
}

pub struct FormulaDisplay<'a> {
    f: &'a Formula,
    vocab: &'a Vocab,
}

fn write_phrase(out: &mut fmt::Formatter<'_>, p: &Phrase, vocab: &Vocab) -> fmt::Result {
    write!(out, "\"{}\"", p.text(vocab))
}

fn write_formula(out: &mut fmt::Formatter<'_>, f: &Formula, vocab: &Vocab) -> fmt::Result {
    // Binding strength: leaf/not = 3, and = 2, or = 1. A child is wrapped
    // whenever it binds no tighter than its parent, so parser-shaped trees
    // print back to themselves.
    fn strength(f: &Formula) -> u8 {
        match f {
            Formula::Leaf(_) | Formula::Not(_) => 3,
            Formula::And(cs) | Formula::Or(cs) if cs.len() == 1 => 0,
            Formula::And(_) => 2,
            Formula::Or(_) => 1,
        }
    }
    fn child(out: &mut fmt::Formatter<'_>, c: &Formula, parent: u8, vocab: &Vocab) -> fmt::Result {
        if strength(c) <= parent {
            out.write_str("(")?;
            write_formula(out, c, vocab)?;
            out.write_str(")")
        } else {
            write_formula(out, c, vocab)
        }
    }
    match f {
        Formula::Leaf(lit) => {
            if lit.polarity == Polarity::Negative {
                out.write_str("!")?;
            }
            write_phrase(out, &lit.phrase, vocab)
        }
        Formula::Not(c) => {
            out.write_str("!")?;
            child(out, c, 2, vocab)
        }
        Formula::And(cs) | Formula::Or(cs) => {
            let (sep, s) = if matches!(f, Formula::And(_)) {
                (" & ", 2)
            } else {
                (" | ", 1)
            };
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    out.write_str(sep)?;
                }
                child(out, c, s, vocab)?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(out, self.f, self.vocab)
    }
}

/// Disjunction of literals; never empty, no repeated literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause(Vec<Literal>);

impl Clause {
    /// Removes repeated literals, keeping first occurrences.
    pub fn new(literals: Vec<Literal>) -> Option<Self> {
        let mut out: Vec<Literal> = Vec::with_capacity(literals.len());
        for l in literals {
            if !out.contains(&l) {
                out.push(l);
            }
        }
        (!out.is_empty()).then_some(Clause(out))
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn evaluate(&self, seq: &[TokenId]) -> bool {
        self.0.iter().any(|l| l.evaluate(seq))
    }

    /// Contains both D(a) and ¬D(a) for some phrase a.
    pub fn is_tautology(&self) -> bool {
        self.0
            .iter()
            .any(|l| l.polarity == Polarity::Positive && self.0.contains(&l.negated()))
    }
}

/// Conjunction of clauses. The empty CNF is unconstrained.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cnf {
    clauses: Vec<Clause>,
}

impl Cnf {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Cnf { clauses }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn evaluate(&self, seq: &[TokenId]) -> bool {
        self.clauses.iter().all(|c| c.evaluate(seq))
    }

    pub fn clause_values(&self, seq: &[TokenId]) -> Vec<bool> {
        self.clauses.iter().map(|c| c.evaluate(seq)).collect()
    }

    /// Every clause is a single positive literal.
    pub fn is_positive_conjunction(&self) -> bool {
        self.clauses
            .iter()
            .all(|c| c.0.len() == 1 && c.0[0].polarity == Polarity::Positive)
    }

    /// Rebuilds the formula tree this CNF denotes.
    pub fn to_formula(&self) -> Formula {
        Formula::And(
            self.clauses
                .iter()
                .map(|c| Formula::Or(c.0.iter().cloned().map(Formula::Leaf).collect()))
                .collect(),
        )
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocab) -> CnfDisplay<'a> {
        CnfDisplay { cnf: self, vocab }
    }
}

pub struct CnfDisplay<'a> {
    cnf: &'a Cnf,
    vocab: &'a Vocab,
}

impl fmt::Display for CnfDisplay<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let many = self.cnf.clauses.len() > 1;
        for (i, clause) in self.cnf.clauses.iter().enumerate() {
            if i > 0 {
                out.write_str(" & ")?;
            }
            let wrap = many && clause.0.len() > 1;
            if wrap {
                out.write_str("(")?;
            }
            for (j, lit) in clause.0.iter().enumerate() {
                if j > 0 {
                    out.write_str(" | ")?;
                }
                if lit.polarity == Polarity::Negative {
                    out.write_str("!")?;
                }
                write_phrase(out, &lit.phrase, self.vocab)?;
            }
            if wrap {
                out.write_str(")")?;
            }
        }
        Ok(())
    }
}
