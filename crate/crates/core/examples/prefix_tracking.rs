//! Step a constraint state through a sentence and show each clause's
//! status and the phrase pointers after every token.

use logicbeam::formula::{parse_formula, to_cnf};
use logicbeam::matcher::compile;
use logicbeam::scorer::Vocab;

fn main() {
    let vocab = Vocab::from_words(["the", "olive", "oil", "and", "salt", "pepper", "on", "top"]);
    let formula = r#"("olive oil" | "salt") & !"pepper" & ("on top" | !"the")"#;
    let cnf = to_cnf(&parse_formula(formula, &vocab).unwrap()).unwrap();
    let cc = compile(&cnf, vocab.len()).unwrap();
    println!("cnf: {}", cnf.display(&vocab));
    for (a, auto) in cc.automata().iter().enumerate() {
        println!(
            "  phrase {a}: \"{}\" failure {:?}",
            auto.pattern().text(&vocab),
            auto.failure()
        );
    }

    let mut state = cc.init_state();
    println!("{:<8} {:?}", "<start>", state.statuses());
    for word in "the olive olive oil and salt on top".split(' ') {
        state = state.advance(&cc, vocab.id(word).unwrap());
        let pointers: Vec<String> = (0..cc.automata().len())
            .map(|a| state.pointer(a).map_or("-".into(), |p| p.to_string()))
            .collect();
        println!(
            "{word:<8} {:?} satisfied={} pointers=[{}]",
            state.statuses(),
            state.satisfied_count(),
            pointers.join(" ")
        );
    }
    println!("final truth: {:?}", state.finalize().clause_truth);
}
