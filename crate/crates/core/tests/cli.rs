use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_logicbeam");
const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn data(name: &str) -> String {
    format!("{DATA}/{name}")
}

fn lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn trained(dir: &Path) -> PathBuf {
    let model = dir.join("toy.lm");
    let o = run(&[
        "train-lm",
        "--corpus",
        &data("toy_corpus.txt"),
        "--lambdas",
        "0.1,0.3,0.6",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(model.with_extension("lm.vocab").exists() || dir.join("toy.lm.vocab").exists());
    model
}

#[test]
fn decode_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let out = dir.path().join("out.jsonl");
    let manifest = dir.path().join("run.json");
    let o = run(&[
        "decode",
        "--model",
        model.to_str().unwrap(),
        "--instances",
        &data("commongen_instances.jsonl"),
        "--decoder",
        "neurologic",
        "--k",
        "10",
        "--max-len",
        "15",
        "--jobs",
        "3",
        "--out",
        out.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = lines(&out);
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0]["id"], "cg-000");
    assert_eq!(rows[49]["id"], "cg-049");
    assert!(rows.iter().all(|r| r["coverage"] == 1.0));

    let o = run(&["replay", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));

    // a changed output file no longer replays
    std::fs::write(&out, b"{}\n").unwrap();
    let o = run(&["replay", "--manifest", manifest.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn empty_formula_decodes_like_beam() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let inst = dir.path().join("inst.jsonl");
    std::fs::write(
        &inst,
        "{\"id\":\"x\",\"context\":\"the dog\",\"formula\":\"\"}\n",
    )
    .unwrap();
    let mut outs = Vec::new();
    for d in ["neurologic", "beam"] {
        let out = dir.path().join(format!("{d}.jsonl"));
        let o = run(&[
            "decode",
            "--model",
            model.to_str().unwrap(),
            "--instances",
            inst.to_str().unwrap(),
            "--decoder",
            d,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        outs.push(lines(&out).remove(0));
    }
    assert_eq!(outs[0]["tokens"], outs[1]["tokens"]);
    assert_eq!(outs[0]["score"], outs[1]["score"]);
}

#[test]
fn per_instance_errors_stay_in_band() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let inst = dir.path().join("inst.jsonl");
    std::fs::write(
        &inst,
        concat!(
            "{\"id\":\"or\",\"formula\":\"\\\"dog\\\" | \\\"cat\\\"\"}\n",
            "{\"id\":\"unknown\",\"formula\":\"\\\"zebra_xyz\\\"\"}\n",
            "{\"id\":\"ok\",\"formula\":\"\\\"dog\\\"\"}\n",
        ),
    )
    .unwrap();
    let out = dir.path().join("out.jsonl");
    let o = run(&[
        "decode",
        "--model",
        model.to_str().unwrap(),
        "--instances",
        inst.to_str().unwrap(),
        "--decoder",
        "gbs",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows = lines(&out);
    assert!(
        rows[0]["error"].is_string(),
        "disjunction is not a positive conjunction"
    );
    assert!(rows[1]["error"].is_string());
    assert!(rows[2]["error"].is_null());
    assert_eq!(rows[2]["satisfied_count"], 1);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = run(&[
        "verify",
        "--trials",
        "40",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["pass"], true);
    assert_eq!(r["checks"].as_array().unwrap().len(), 4);

    let o = run(&["verify", "--trials", "40", "--corrupt-matcher"]);
    assert_eq!(code(&o), 3);
    let o = run(&["verify", "--trials", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn cnf_command() {
    let o = run(&["cnf", r#""a" | ("b" & "c")"#]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        String::from_utf8_lossy(&o.stdout).trim(),
        r#"("a" | "b") & ("a" | "c")"#
    );
    let o = run(&["cnf", r#"!("a" | "b")"#]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), r#"!"a" & !"b""#);
    let o = run(&["cnf", r#""a" &"#]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = run(&[
        "bench",
        "--c-max",
        "3",
        "--max-len",
        "16",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("decoder,C,k,calls,rows,wall_ms"));
    assert_eq!(rows.count(), 9);
}

#[test]
fn missing_files_and_bad_flags() {
    let o = run(&[
        "decode",
        "--model",
        "/nonexistent/m.lm",
        "--instances",
        "/nonexistent/i.jsonl",
    ]);
    assert_eq!(code(&o), 2);
    let o = run(&["decode", "--k", "0"]);
    assert_eq!(code(&o), 1);
    let o = run(&["no-such-command"]);
    assert_eq!(code(&o), 1);
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn external_scorer_via_env() {
    let dir = tempfile::tempdir().unwrap();
    let model = trained(dir.path());
    let mut texts = Vec::new();
    for external in [false, true] {
        let out = dir.path().join(format!("out{external}.jsonl"));
        let mut cmd = Command::new(BIN);
        cmd.args([
            "decode",
            "--model",
            model.to_str().unwrap(),
            "--instances",
            &data("recipe_instances.jsonl"),
            "--k",
            "5",
            "--out",
            out.to_str().unwrap(),
        ]);
        if external {
            cmd.env(
                "LOGICBEAM_SCORER_CMD",
                format!("'{BIN}' serve --model '{}'", model.display()),
            );
        }
        let o = cmd.output().unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        texts.push(
            lines(&out)
                .into_iter()
                .map(|r| r["text"].clone())
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(texts[0], texts[1]);
}
