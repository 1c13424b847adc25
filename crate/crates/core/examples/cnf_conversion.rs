//! Parse a few formulas and print their clause form.
//!
//! cargo run --example cnf_conversion -- '"a" | ("b" & !"c")'

use logicbeam::formula::{parse_formula_open, to_cnf};
use logicbeam::scorer::Vocab;

fn main() {
    let mut inputs: Vec<String> = std::env::args().skip(1).collect();
    if inputs.is_empty() {
        inputs = vec![
            r#""a" | ("b" & "c")"#.into(),
            r#"!("a" | "b")"#.into(),
            r#"("food" | "foods") & ("table" | "tables") & ("sit" | "sits")"#.into(),
            r#"!("olive oil" & "pepper") | "salt""#.into(),
            r#""x" | !"x""#.into(),
        ];
    }
    let mut vocab = Vocab::new();
    for text in &inputs {
        match parse_formula_open(text, &mut vocab).map(|f| to_cnf(&f)) {
            Ok(Ok(cnf)) => println!(
                "{text}\n  => {}  ({} clauses)",
                cnf.display(&vocab),
                cnf.len()
            ),
            Ok(Err(e)) | Err(e) => println!("{text}\n  error: {e}"),
        }
    }
}
