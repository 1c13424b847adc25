//! Constraint constructions for the common task shapes.

use super::{Clause, Cnf, FormulaError, Literal, Phrase};
use crate::scorer::Vocab;

/// Every concept must appear under at least one of its surface variants:
/// one positive disjunctive clause per variant set.
pub fn build_cover_all(variant_sets: &[Vec<Phrase>]) -> Result<Cnf, FormulaError> {
    variant_sets
        .iter()
        .enumerate()
        .map(|(index, set)| {
            Clause::new(set.iter().cloned().map(Literal::positive).collect())
                .ok_or(FormulaError::EmptyVariantSet { index })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Cnf::new)
}

/// Cover every include set and never produce an excluded phrase.
///
/// Also expresses fact inclusion (include only) and gendered-entity
/// constraints (one include singleton plus one exclude per entity).
pub fn build_include_exclude(
    include: &[Vec<Phrase>],
    exclude: &[Phrase],
) -> Result<Cnf, FormulaError> {
    for set in include {
        if let Some(p) = set.iter().find(|p| exclude.contains(p)) {
            return Err(FormulaError::IncludeExcludeOverlap(format!(
                "{:?}",
                p.tokens()
            )));
        }
    }
    let mut clauses = build_cover_all(include)?.clauses().to_vec();
    let mut seen: Vec<&Phrase> = Vec::new();
    for p in exclude {
        if seen.contains(&p) {
            continue;
        }
        seen.push(p);
        clauses.push(Clause::new(vec![Literal::negative(p.clone())]).unwrap());
    }
    Ok(Cnf::new(clauses))
}

/// Convenience for callers holding words rather than ids; `None` if any
/// word is missing from `vocab`.
pub fn phrases(vocab: &Vocab, texts: &[&str]) -> Option<Vec<Phrase>> {
    texts.iter().map(|t| Phrase::from_words(vocab, t)).collect()
}
