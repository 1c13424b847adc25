//! Batch decoding over JSON-lines instance files, plus replay.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{load_model, load_vocab, sha256_file, sha256_hex, CliError};
use crate::decode::{
    beam_search, brute_force_oracle, cbs_decode, gbs_decode, greedy_decode, neurologic_decode,
    sample_decode, DecodeResult, DecodeStats, DecoderConfig, Truncation,
};
use crate::eval::{coverage, extra_rate};
use crate::formula::{parse_formula, to_cnf, Cnf, Phrase};
use crate::matcher::compile;
use crate::scorer::{ExternalScorer, Scorer, Vocab, DEFAULT_TIMEOUT, SCORER_CMD_ENV};
use crate::TokenId;

pub const MANIFEST_FORMAT: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DecoderName {
    Neurologic,
    Beam,
    Greedy,
    Topk,
    Topp,
    Gbs,
    Cbs,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeOptions {
    pub decoder: DecoderName,
    pub config: DecoderConfig,
    pub top_k: usize,
    pub top_p: f64,
}

/// One line of an instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub id: String,
    #[serde(default)]
    pub context: String,
    /// Constraint in the formula language; empty means unconstrained.
    #[serde(default)]
    pub formula: String,
    /// Concept variant sets, for coverage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concepts: Option<Vec<Vec<String>>>,
    /// Phrases that count as extras.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forbidden: Option<Vec<String>>,
}

/// One line of a result file. Either the decode fields or `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceOutput {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<TokenId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfied_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_clauses: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause_truth: Option<Vec<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extra: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<DecodeStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl InstanceOutput {
    fn failed(id: &str, error: String) -> Self {
        InstanceOutput {
            id: id.to_string(),
            text: None,
            tokens: None,
            score: None,
            satisfied_count: None,
            num_clauses: None,
            clause_truth: None,
            coverage: None,
            extra: None,
            stats: None,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfied_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_clauses: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Everything needed to rerun a decode and check its output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: u32,
    pub tool_version: String,
    pub model: PathBuf,
    pub model_sha256: String,
    pub vocab_sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scorer_cmd: Option<String>,
    pub instances: PathBuf,
    pub instances_sha256: String,
    pub options: DecodeOptions,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub output_sha256: String,
    pub summaries: Vec<InstanceSummary>,
}

pub fn read_instances(path: &Path) -> Result<Vec<TaskInstance>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_instances(&text)
}

pub fn parse_instances(text: &str) -> Result<Vec<TaskInstance>, CliError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let inst: TaskInstance = serde_json::from_str(line)
            .map_err(|e| CliError::Validation(format!("instance line {}: {e}", i + 1)))?;
        if !ids.insert(inst.id.clone()) {
            return Err(CliError::Validation(format!(
                "duplicate instance id {:?}",
                inst.id
            )));
        }
        out.push(inst);
    }
    Ok(out)
}

fn variant_phrases(vocab: &Vocab, texts: &[String]) -> Vec<Phrase> {
    texts
        .iter()
        .filter_map(|t| Phrase::from_words(vocab, t))
        .collect()
}

/// Decodes one instance. `index` offsets the sampling seed so that each
/// instance draws from its own stream regardless of scheduling.
pub fn decode_instance(
    scorer: &dyn Scorer,
    vocab: &Vocab,
    inst: &TaskInstance,
    opts: &DecodeOptions,
    index: usize,
) -> InstanceOutput {
    match try_decode(scorer, vocab, inst, opts, index) {
        Ok(out) => out,
        Err(e) => InstanceOutput::failed(&inst.id, e),
    }
}

fn try_decode(
    scorer: &dyn Scorer,
    vocab: &Vocab,
    inst: &TaskInstance,
    opts: &DecodeOptions,
    index: usize,
) -> Result<InstanceOutput, String> {
    let context = vocab.encode(&inst.context);
    let cnf = if inst.formula.trim().is_empty() {
        Cnf::empty()
    } else {
        let f = parse_formula(&inst.formula, vocab).map_err(|e| e.to_string())?;
        to_cnf(&f).map_err(|e| e.to_string())?
    };
    let cc = compile(&cnf, vocab.len()).map_err(|e| e.to_string())?;
    let cfg = DecoderConfig {
        seed: opts.config.seed.wrapping_add(index as u64),
        ..opts.config.clone()
    };
    let prompt: &[TokenId] = if cfg.match_in_prompt { &context } else { &[] };
    let posthoc = |r: Result<DecodeResult, _>| -> Result<DecodeResult, String> {
        let mut r = r.map_err(|e: crate::decode::DecodeError| e.to_string())?;
        r.evaluate_against(&cnf, prompt);
        Ok(r)
    };
    let (tokens, score, truth, stats) = match opts.decoder {
        DecoderName::Oracle => {
            let o = brute_force_oracle(scorer, &context, &cnf, cfg.max_len)
                .map_err(|e| e.to_string())?;
            let truth = cnf.clause_values(&o.tokens);
            (o.tokens, o.score, truth, DecodeStats::default())
        }
        d => {
            let r = match d {
                DecoderName::Neurologic => {
                    neurologic_decode(scorer, &context, &cc, &cfg).map_err(|e| e.to_string())?
                }
                DecoderName::Gbs => {
                    gbs_decode(scorer, &context, &cc, &cfg).map_err(|e| e.to_string())?
                }
                DecoderName::Cbs => {
                    cbs_decode(scorer, &context, &cc, &cfg).map_err(|e| e.to_string())?
                }
                DecoderName::Beam => posthoc(beam_search(scorer, &context, &cfg))?,
                DecoderName::Greedy => posthoc(greedy_decode(scorer, &context, &cfg))?,
                DecoderName::Topk => posthoc(sample_decode(
                    scorer,
                    &context,
                    &cfg,
                    Truncation::TopK(opts.top_k),
                ))?,
                DecoderName::Topp => posthoc(sample_decode(
                    scorer,
                    &context,
                    &cfg,
                    Truncation::TopP(opts.top_p),
                ))?,
                DecoderName::Oracle => unreachable!(),
            };
            (r.tokens, r.score, r.clause_truth, r.stats)
        }
    };

    let out = vec![tokens.clone()];
    let concepts: Option<Vec<Vec<Phrase>>> = inst
        .concepts
        .as_ref()
        .map(|sets| sets.iter().map(|s| variant_phrases(vocab, s)).collect());
    let cov = concepts
        .as_ref()
        .map(|c| coverage(&out, std::slice::from_ref(c)).map(|r| r.per_instance[0]))
        .transpose()
        .map_err(|e| e.to_string())?;
    let extra = match &inst.forbidden {
        Some(bad) => {
            let given = concepts.clone().unwrap_or_default();
            let bad = variant_phrases(vocab, bad);
            Some(
                extra_rate(&out, &[given], &[bad])
                    .map_err(|e| e.to_string())?
                    .mean,
            )
        }
        None => None,
    };

    Ok(InstanceOutput {
        id: inst.id.clone(),
        text: Some(vocab.decode(&tokens)),
        satisfied_count: Some(truth.iter().filter(|&&t| t).count()),
        num_clauses: Some(truth.len()),
        clause_truth: Some(truth),
        tokens: Some(tokens),
        score: Some(score),
        coverage: cov,
        extra,
        stats: Some(stats),
        error: None,
    })
}

/// Decodes every instance on `jobs` threads; output order follows input.
pub fn decode_all(
    scorer: &dyn Scorer,
    vocab: &Vocab,
    instances: &[TaskInstance],
    opts: &DecodeOptions,
    jobs: usize,
) -> Result<Vec<InstanceOutput>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(pool.install(|| {
        instances
            .par_iter()
            .enumerate()
            .map(|(i, inst)| decode_instance(scorer, vocab, inst, opts, i))
            .collect()
    }))
}

pub fn render_outputs(outputs: &[InstanceOutput]) -> Vec<u8> {
    let mut buf = Vec::new();
    for o in outputs {
        serde_json::to_writer(&mut buf, o).expect("serializable output");
        buf.push(b'\n');
    }
    buf
}

fn open_scorer(
    model: &Path,
    scorer_cmd: Option<&str>,
) -> Result<(Box<dyn Scorer>, Vocab), CliError> {
    match scorer_cmd {
        Some(cmd) => {
            let vocab = load_vocab(model)?;
            let s = ExternalScorer::spawn(cmd, vocab.len(), Vocab::EOS, DEFAULT_TIMEOUT)
                .map_err(|e| CliError::Io(format!("starting scorer {cmd:?}: {e}")))?;
            Ok((Box::new(s), vocab))
        }
        None => {
            let (lm, vocab) = load_model(model)?;
            Ok((Box::new(lm), vocab))
        }
    }
}

pub struct DecodeRun {
    pub model: PathBuf,
    pub instances: PathBuf,
    pub output: Option<PathBuf>,
    pub options: DecodeOptions,
    pub jobs: usize,
}

/// Decodes, writes the result file (or stdout), and returns the manifest.
pub fn cmd_decode(run: &DecodeRun) -> Result<RunManifest, CliError> {
    run.options
        .config
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let scorer_cmd = std::env::var(SCORER_CMD_ENV).ok();
    let (bytes, outputs) = produce(
        &run.model,
        &run.instances,
        &run.options,
        run.jobs,
        scorer_cmd.as_deref(),
    )?;
    match &run.output {
        Some(p) => fs::write(p, &bytes).map_err(|e| CliError::io(p, e))?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(RunManifest {
        format: MANIFEST_FORMAT,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        model: run.model.clone(),
        model_sha256: sha256_file(&run.model)?,
        vocab_sha256: sha256_file(&super::vocab_path(&run.model))?,
        scorer_cmd,
        instances: run.instances.clone(),
        instances_sha256: sha256_file(&run.instances)?,
        options: run.options.clone(),
        seed: run.options.config.seed,
        output: run.output.clone(),
        output_sha256: sha256_hex(&bytes),
        summaries: outputs
            .into_iter()
            .map(|o| InstanceSummary {
                id: o.id,
                satisfied_count: o.satisfied_count,
                num_clauses: o.num_clauses,
                score: o.score,
                error: o.error,
            })
            .collect(),
    })
}

fn produce(
    model: &Path,
    instances: &Path,
    opts: &DecodeOptions,
    jobs: usize,
    scorer_cmd: Option<&str>,
) -> Result<(Vec<u8>, Vec<InstanceOutput>), CliError> {
    let (scorer, vocab) = open_scorer(model, scorer_cmd)?;
    let insts = read_instances(instances)?;
    let outputs = decode_all(&*scorer, &vocab, &insts, opts, jobs)?;
    Ok((render_outputs(&outputs), outputs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub inputs_match: bool,
    pub output_hash_match: bool,
    /// `None` when the recorded output file is not on disk.
    pub output_file_match: Option<bool>,
    pub pass: bool,
}

/// Reruns the decode recorded in a manifest and compares outputs.
pub fn cmd_replay(manifest_path: &Path) -> Result<ReplayReport, CliError> {
    let text = fs::read_to_string(manifest_path).map_err(|e| CliError::io(manifest_path, e))?;
    let m: RunManifest =
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("manifest: {e}")))?;
    let inputs_match = sha256_file(&m.model)? == m.model_sha256
        && sha256_file(&super::vocab_path(&m.model))? == m.vocab_sha256
        && sha256_file(&m.instances)? == m.instances_sha256;
    let (bytes, _) = produce(
        &m.model,
        &m.instances,
        &m.options,
        1,
        m.scorer_cmd.as_deref(),
    )?;
    let output_hash_match = sha256_hex(&bytes) == m.output_sha256;
    let output_file_match = match &m.output {
        Some(p) if p.exists() => Some(fs::read(p).map_err(|e| CliError::io(p, e))? == bytes),
        _ => None,
    };
    Ok(ReplayReport {
        inputs_match,
        output_hash_match,
        output_file_match,
        pass: inputs_match && output_hash_match && output_file_match != Some(false),
    })
}
