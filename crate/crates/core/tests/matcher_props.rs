use logicbeam::formula::{Clause, Cnf, Literal, Phrase};
use logicbeam::matcher::{compile, failure_table, naive_status, ClauseStatus};
use logicbeam::TokenId;
use proptest::prelude::*;

const A: TokenId = 3;
const B: TokenId = 4;

fn literal() -> impl Strategy<Value = Literal> {
    (prop::collection::vec(3u32..6, 1..=3), any::<bool>()).prop_map(|(t, pos)| {
        let p = Phrase::new(t).unwrap();
        if pos {
            Literal::positive(p)
        } else {
            Literal::negative(p)
        }
    })
}

fn cnf() -> impl Strategy<Value = Cnf> {
    prop::collection::vec(
        prop::collection::vec(literal(), 1..=3).prop_map(|l| Clause::new(l).unwrap()),
        1..=4,
    )
    .prop_map(Cnf::new)
}

fn stream() -> impl Strategy<Value = Vec<TokenId>> {
    prop::collection::vec(3u32..6, 0..=20)
}

/// Longest proper prefix of `pat` that is a suffix of `seq`, by trying
/// every length.
fn naive_pointer(pat: &[TokenId], seq: &[TokenId]) -> u32 {
    (0..pat.len())
        .rev()
        .find(|&j| j <= seq.len() && seq[seq.len() - j..] == pat[..j])
        .unwrap() as u32
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn incremental_matches_naive_on_every_prefix(cnf in cnf(), s in stream()) {
        let cc = compile(&cnf, 6).unwrap();
        let mut st = cc.init_state();
        prop_assert_eq!(st.finalize().clause_truth, naive_status(&cnf, &[]));
        for i in 0..s.len() {
            st.advance_mut(&cc, s[i]);
            prop_assert_eq!(st.finalize().clause_truth, naive_status(&cnf, &s[..=i]));
        }
    }

    #[test]
    fn tracked_pointers_are_longest_borders(cnf in cnf(), s in stream()) {
        let cc = compile(&cnf, 6).unwrap();
        let mut st = cc.init_state();
        for i in 0..s.len() {
            st.advance_mut(&cc, s[i]);
            for (a, auto) in cc.automata().iter().enumerate() {
                if let Some(p) = st.pointer(a) {
                    prop_assert_eq!(p, naive_pointer(auto.pattern().tokens(), &s[..=i]));
                }
            }
        }
    }

    #[test]
    fn absorbing_statuses_stay_put(cnf in cnf(), s in stream()) {
        let cc = compile(&cnf, 6).unwrap();
        let mut st = cc.init_state();
        let mut frozen: Vec<Option<ClauseStatus>> = vec![None; cnf.len()];
        for &t in &s {
            st.advance_mut(&cc, t);
            for (c, &status) in st.statuses().iter().enumerate() {
                if let Some(f) = frozen[c] {
                    prop_assert_eq!(f, status);
                } else if status.is_absorbing() {
                    frozen[c] = Some(status);
                }
            }
        }
    }

    #[test]
    fn advance_is_pure(cnf in cnf(), s in stream(), t in 3u32..6) {
        let cc = compile(&cnf, 6).unwrap();
        let mut st = cc.init_state();
        for &x in &s {
            st = st.advance(&cc, x);
        }
        let before = st.clone();
        let next = st.advance(&cc, t);
        prop_assert_eq!(&st, &before);
        let mut manual = before.clone();
        manual.advance_mut(&cc, t);
        prop_assert_eq!(next, manual);
    }

    #[test]
    fn failure_table_is_prefix_function(pat in prop::collection::vec(3u32..5, 1..=8)) {
        let table = failure_table(&pat);
        for i in 0..pat.len() {
            let prefix = &pat[..=i];
            let border = (0..prefix.len())
                .rev()
                .find(|&j| prefix[..j] == prefix[prefix.len() - j..])
                .unwrap();
            prop_assert_eq!(table[i] as usize, border);
        }
    }
}

#[test]
fn abab_failure_table() {
    assert_eq!(failure_table(&[A, B, A, B]), vec![0, 0, 1, 2]);
    assert_eq!(failure_table(&[A]), vec![0]);
}

#[test]
fn mismatch_falls_back_to_border() {
    let cnf = Cnf::new(vec![Clause::new(vec![Literal::positive(
        Phrase::new(vec![A, B]).unwrap(),
    )])
    .unwrap()]);
    let cc = compile(&cnf, 6).unwrap();
    let s1 = cc.init_state().advance(&cc, A);
    let s2 = s1.advance(&cc, A);
    assert_eq!((s1.pointer(0), s2.pointer(0)), (Some(1), Some(1)));
    assert_eq!(naive_pointer(&[A, B], &[A, A]), 1);
}

#[test]
fn all_negative_clause_dies_on_second_phrase() {
    let neg = |t| Literal::negative(Phrase::new(vec![t]).unwrap());
    let cnf = Cnf::new(vec![Clause::new(vec![neg(A), neg(B)]).unwrap()]);
    let cc = compile(&cnf, 6).unwrap();
    let after_a = cc.init_state().advance(&cc, A);
    assert_eq!(after_a.statuses(), &[ClauseStatus::ReversiblySatisfied]);
    let after_b = after_a.advance(&cc, B);
    assert_eq!(after_b.statuses(), &[ClauseStatus::Unsatisfiable]);
    assert_eq!(naive_status(&cnf, &[A, B]), vec![false]);
}
