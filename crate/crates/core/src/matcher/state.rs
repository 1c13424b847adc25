use std::fmt;

use super::CompiledConstraints;
use crate::formula::Polarity;
use crate::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClauseStatus {
    /// A positive literal has occurred. Absorbing.
    IrreversiblySatisfied,
    /// True only through negative literals whose phrase has not occurred.
    ReversiblySatisfied,
    /// Not currently true, but a positive literal can still fire.
    Unsatisfied,
    /// Every literal is negative and every phrase has occurred. Absorbing.
    Unsatisfiable,
}

impl ClauseStatus {
    pub fn is_satisfied(self) -> bool {
        matches!(
            self,
            ClauseStatus::IrreversiblySatisfied | ClauseStatus::ReversiblySatisfied
        )
    }

    pub fn is_absorbing(self) -> bool {
        matches!(
            self,
            ClauseStatus::IrreversiblySatisfied | ClauseStatus::Unsatisfiable
        )
    }
}

/// Bit set over clause indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ClauseSet(Vec<u64>);

impl ClauseSet {
    pub fn with_capacity(n: usize) -> Self {
        ClauseSet(vec![0; n.div_ceil(64)])
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.get(i / 64).is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    pub fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// The low 64 clause bits.
    pub fn low_bits(&self) -> u64 {
        self.0.first().copied().unwrap_or(0)
    }
}

impl fmt::Debug for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: Vec<usize> = (0..self.0.len() * 64)
            .filter(|&i| self.contains(i))
            .collect();
        write!(f, "{bits:?}")
    }
}

const UNTRACKED: u32 = u32::MAX;

/// Matched-prefix pointers and clause statuses for one hypothesis.
///
/// Pointers are kept only for phrases that still appear in some clause
/// which is not irreversibly satisfied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintState {
    pointers: Vec<u32>,
    /// phrases that have occurred at least once
    seen: Vec<bool>,
    statuses: Vec<ClauseStatus>,
    satisfied: ClauseSet,
    satisfied_count: usize,
}

/// Per-clause outcome of a finished hypothesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalStatus {
    pub clause_truth: Vec<bool>,
    pub satisfied_count: usize,
}

impl CompiledConstraints {
    pub fn init_state(&self) -> ConstraintState {
        let statuses: Vec<ClauseStatus> = self
            .clauses
            .iter()
            .map(|c| {
                if c.tautology {
                    ClauseStatus::IrreversiblySatisfied
                } else if c.literals.iter().any(|&(_, p)| p == Polarity::Negative) {
                    ClauseStatus::ReversiblySatisfied
                } else {
                    ClauseStatus::Unsatisfied
                }
            })
            .collect();
        let mut satisfied = ClauseSet::with_capacity(statuses.len());
        for (i, s) in statuses.iter().enumerate() {
            if s.is_satisfied() {
                satisfied.insert(i);
            }
        }
        let pointers = (0..self.automata.len())
            .map(|a| {
                let live = self.clauses_of[a]
                    .iter()
                    .any(|&c| statuses[c] != ClauseStatus::IrreversiblySatisfied);
                if live {
                    0
                } else {
                    UNTRACKED
                }
            })
            .collect();
        ConstraintState {
            pointers,
            seen: vec![false; self.automata.len()],
            satisfied_count: satisfied.count(),
            satisfied,
            statuses,
        }
    }
}

impl ConstraintState {
    pub fn statuses(&self) -> &[ClauseStatus] {
        &self.statuses
    }

    pub fn satisfied_set(&self) -> &ClauseSet {
        &self.satisfied
    }

    pub fn satisfied_count(&self) -> usize {
        self.satisfied_count
    }

    /// Matched-prefix length of automaton `a`, or `None` once it is no
    /// longer tracked.
    pub fn pointer(&self, a: usize) -> Option<u32> {
        let p = self.pointers[a];
        (p != UNTRACKED).then_some(p)
    }

    pub fn is_unsatisfiable(&self) -> bool {
        self.statuses.contains(&ClauseStatus::Unsatisfiable)
    }

    /// Pure transition: the state after appending `token`.
    pub fn advance(&self, cc: &CompiledConstraints, token: TokenId) -> ConstraintState {
        let mut next = self.clone();
        next.advance_mut(cc, token);
        next
    }

    pub fn advance_mut(&mut self, cc: &CompiledConstraints, token: TokenId) {
        let mut fired_any = false;
        for (a, automaton) in cc.automata.iter().enumerate() {
            let p = self.pointers[a];
            if p == UNTRACKED {
                continue;
            }
            let (np, fired) = automaton.step(p, token);
            self.pointers[a] = np;
            if fired && !self.seen[a] {
                self.seen[a] = true;
                fired_any = true;
            }
        }
        if !fired_any {
            return;
        }
        let mut newly_irreversible = false;
        for (c, clause) in cc.clauses.iter().enumerate() {
            let old = self.statuses[c];
            if old.is_absorbing() {
                continue;
            }
            let new = self.clause_status(clause);
            if new == old {
                continue;
            }
            self.statuses[c] = new;
            if new.is_satisfied() {
                self.satisfied.insert(c);
            } else {
                self.satisfied.remove(c);
            }
            newly_irreversible |= new == ClauseStatus::IrreversiblySatisfied;
        }
        self.satisfied_count = self.satisfied.count();
        if newly_irreversible {
            for (a, clauses) in cc.clauses_of.iter().enumerate() {
                if self.pointers[a] != UNTRACKED
                    && clauses
                        .iter()
                        .all(|&c| self.statuses[c] == ClauseStatus::IrreversiblySatisfied)
                {
                    self.pointers[a] = UNTRACKED;
                }
            }
        }
    }

    fn clause_status(&self, clause: &super::automaton::CompiledClause) -> ClauseStatus {
        let mut has_positive = false;
        let mut live_negative = false;
        for &(a, pol) in &clause.literals {
            match pol {
                Polarity::Positive if self.seen[a] => return ClauseStatus::IrreversiblySatisfied,
                Polarity::Positive => has_positive = true,
                Polarity::Negative => live_negative |= !self.seen[a],
            }
        }
        if live_negative {
            ClauseStatus::ReversiblySatisfied
        } else if has_positive {
            ClauseStatus::Unsatisfied
        } else {
            ClauseStatus::Unsatisfiable
        }
    }

    pub fn finalize(&self) -> FinalStatus {
        FinalStatus {
            clause_truth: self.statuses.iter().map(|s| s.is_satisfied()).collect(),
            satisfied_count: self.satisfied_count,
        }
    }
}
