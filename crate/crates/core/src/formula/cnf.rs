use super::{Clause, Cnf, Formula, FormulaError, Literal};

pub const DEFAULT_CLAUSE_LIMIT: usize = 4096;

/// Converts to an equivalent CNF by pushing negations to the leaves and
/// distributing `or` over `and`.
pub fn to_cnf(f: &Formula) -> Result<Cnf, FormulaError> {
    to_cnf_with_limit(f, DEFAULT_CLAUSE_LIMIT)
}

pub fn to_cnf_with_limit(f: &Formula, limit: usize) -> Result<Cnf, FormulaError> {
    let clauses = convert(f, false, limit)?;
    Ok(Cnf::new(
        clauses.into_iter().filter_map(Clause::new).collect(),
    ))
}

type RawClause = Vec<Literal>;

// `negate` carries an odd number of enclosing negations down the tree.
fn convert(f: &Formula, negate: bool, limit: usize) -> Result<Vec<RawClause>, FormulaError> {
    match f {
        Formula::Leaf(lit) => Ok(vec![vec![if negate { lit.negated() } else { lit.clone() }]]),
        Formula::Not(c) => convert(c, !negate, limit),
        Formula::And(cs) if !negate => conjoin(cs, negate, limit),
        Formula::Or(cs) if negate => conjoin(cs, negate, limit),
        Formula::And(cs) | Formula::Or(cs) => disjoin(cs, negate, limit),
    }
}

fn conjoin(cs: &[Formula], negate: bool, limit: usize) -> Result<Vec<RawClause>, FormulaError> {
    let mut out = Vec::new();
    for c in cs {
        out.extend(convert(c, negate, limit)?);
        if out.len() > limit {
            return Err(FormulaError::TooManyClauses { limit });
        }
    }
    Ok(out)
}

fn disjoin(cs: &[Formula], negate: bool, limit: usize) -> Result<Vec<RawClause>, FormulaError> {
    // Start from the single empty clause: the identity of clause-wise
    // cross product.
    let mut acc: Vec<RawClause> = vec![Vec::new()];
    for c in cs {
        let rhs = convert(c, negate, limit)?;
        if acc.len().saturating_mul(rhs.len()) > limit {
            return Err(FormulaError::TooManyClauses { limit });
        }
        let mut next = Vec::with_capacity(acc.len() * rhs.len());
        for a in &acc {
            for b in &rhs {
                let mut clause = a.clone();
                clause.extend(b.iter().cloned());
                next.push(clause);
            }
        }
        acc = next;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Phrase, Polarity};
    use crate::scorer::Vocab;

    fn lits(cnf: &Cnf, v: &Vocab) -> Vec<Vec<String>> {
        cnf.clauses()
            .iter()
            .map(|c| {
                c.literals()
                    .iter()
                    .map(|l| {
                        let sign = if l.polarity == Polarity::Negative {
                            "~"
                        } else {
                            "+"
                        };
                        format!("{sign}{}", l.phrase.text(v))
                    })
                    .collect()
            })
            .collect()
    }

    fn cnf_of(src: &str) -> (Cnf, Vocab) {
        let v = Vocab::from_words(["a", "b", "c", "d"]);
        let f = parse_formula(src, &v).unwrap();
        (to_cnf(&f).unwrap(), v)
    }

    #[test]
    fn de_morgan() {
        let (cnf, v) = cnf_of(r#"!("a" & "b")"#);
        assert_eq!(lits(&cnf, &v), vec![vec!["~a", "~b"]]);
    }

    #[test]
    fn distribution() {
        let (cnf, v) = cnf_of(r#""a" | ("b" & "c")"#);
        assert_eq!(lits(&cnf, &v), vec![vec!["+a", "+b"], vec!["+a", "+c"]]);
    }

    #[test]
    fn already_cnf() {
        let (cnf, v) = cnf_of(r#""a" & ("b" | !"c")"#);
        assert_eq!(lits(&cnf, &v), vec![vec!["+a"], vec!["+b", "~c"]]);
    }

    #[test]
    fn double_negation_and_duplicates() {
        let (cnf, v) = cnf_of(r#"!!"a" | "a" | !("b" | "c")"#);
        assert_eq!(lits(&cnf, &v), vec![vec!["+a", "~b"], vec!["+a", "~c"]]);
    }

    #[test]
    fn tautology_is_kept() {
        let (cnf, v) = cnf_of(r#""a" | !"a""#);
        assert_eq!(lits(&cnf, &v), vec![vec!["+a", "~a"]]);
        assert!(cnf.clauses()[0].is_tautology());
    }

    #[test]
    fn clause_guard() {
        // (a1&b1) | (a2&b2) | ... produces 2^n clauses
        let v = Vocab::from_words(["a", "b"]);
        let pair = Formula::And(vec![
            Formula::pos(Phrase::from_words(&v, "a").unwrap()),
            Formula::pos(Phrase::from_words(&v, "b").unwrap()),
        ]);
        let f = Formula::Or(vec![pair; 13]);
        assert_eq!(
            to_cnf(&f),
            Err(FormulaError::TooManyClauses {
                limit: DEFAULT_CLAUSE_LIMIT
            })
        );
        assert_eq!(to_cnf_with_limit(&f, 1 << 13).unwrap().len(), 1 << 13);
    }
}
