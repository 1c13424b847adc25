//! Command implementations behind the `logicbeam` binary.
//!
//! Exit codes: 0 success, 1 validation error, 2 I/O error, 3 verification
//! failure.

mod decode;
mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decode::DecoderConfig;
use crate::eval::{bench_scaling, write_csv, BenchDecoder, BenchRecord};
use crate::formula::{parse_formula_open, to_cnf};
use crate::scorer::{
    serve_lines, ModelFileError, NgramConfig, NgramLm, Scorer, TrainError, UniformScorer, Vocab,
};
use crate::synth::scaling_instance;

pub use decode::{
    cmd_decode, cmd_replay, decode_all, decode_instance, parse_instances, read_instances,
    render_outputs, DecodeOptions, DecodeRun, DecoderName, InstanceOutput, InstanceSummary,
    ReplayReport, RunManifest, TaskInstance, MANIFEST_FORMAT,
};
pub use verify::{run_verify, CheckReport, VerifyOptions, VerifyReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, e: io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Companion vocabulary file of a model: `<model>.vocab`.
pub fn vocab_path(model: &Path) -> PathBuf {
    let mut s = model.as_os_str().to_owned();
    s.push(".vocab");
    PathBuf::from(s)
}

pub fn load_vocab(model: &Path) -> Result<Vocab, CliError> {
    let p = vocab_path(model);
    let f = fs::File::open(&p).map_err(|e| CliError::io(&p, e))?;
    Vocab::read_from(BufReader::new(f)).map_err(|e| match e.kind() {
        io::ErrorKind::InvalidData => CliError::Validation(format!("{}: {e}", p.display())),
        _ => CliError::io(&p, e),
    })
}

pub fn load_model(model: &Path) -> Result<(NgramLm, Vocab), CliError> {
    let f = fs::File::open(model).map_err(|e| CliError::io(model, e))?;
    let lm = NgramLm::load(BufReader::new(f)).map_err(|e| match e {
        ModelFileError::Io(e) => CliError::io(model, e),
        other => CliError::Validation(format!("{}: {other}", model.display())),
    })?;
    let vocab = load_vocab(model)?;
    if vocab.len() != lm.vocab_size() {
        return Err(CliError::Validation(format!(
            "vocabulary has {} entries but the model expects {}",
            vocab.len(),
            lm.vocab_size()
        )));
    }
    Ok((lm, vocab))
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub(crate) fn sha256_file(path: &Path) -> Result<String, CliError> {
    Ok(sha256_hex(
        &fs::read(path).map_err(|e| CliError::io(path, e))?,
    ))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TrainSummary {
    pub sentences: usize,
    pub vocab_size: usize,
    pub model: PathBuf,
    pub vocab: PathBuf,
}

/// Trains an n-gram model on a whitespace-tokenized corpus (one sentence
/// per line) and writes the model and its vocabulary.
pub fn cmd_train_lm(
    corpus: &Path,
    config: NgramConfig,
    out: &Path,
) -> Result<TrainSummary, CliError> {
    config.validate()?;
    let text = fs::read_to_string(corpus).map_err(|e| CliError::io(corpus, e))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let (lm, vocab) = NgramLm::train_text(lines.iter().copied(), config)?;
    let mut w = BufWriter::new(fs::File::create(out).map_err(|e| CliError::io(out, e))?);
    lm.save(&mut w).map_err(|e| CliError::Io(e.to_string()))?;
    w.flush().map_err(|e| CliError::io(out, e))?;
    let vp = vocab_path(out);
    let mut w = BufWriter::new(fs::File::create(&vp).map_err(|e| CliError::io(&vp, e))?);
    vocab.write_to(&mut w).map_err(|e| CliError::io(&vp, e))?;
    w.flush().map_err(|e| CliError::io(&vp, e))?;
    Ok(TrainSummary {
        sentences: lines.len(),
        vocab_size: vocab.len(),
        model: out.to_path_buf(),
        vocab: vp,
    })
}

/// Canonical CNF of a formula, with words taken as they come.
pub fn cmd_cnf(formula: &str) -> Result<String, CliError> {
    let mut vocab = Vocab::new();
    let f =
        parse_formula_open(formula, &mut vocab).map_err(|e| CliError::Validation(e.to_string()))?;
    let cnf = to_cnf(&f).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(cnf.display(&vocab).to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub decoders: Vec<BenchDecoder>,
    pub cs: Vec<usize>,
    pub ks: Vec<usize>,
    pub vocab_size: usize,
    pub max_len: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            decoders: vec![
                BenchDecoder::Neurologic,
                BenchDecoder::Gbs,
                BenchDecoder::Cbs,
            ],
            cs: (1..=6).collect(),
            ks: vec![4],
            vocab_size: 20,
            max_len: 64,
        }
    }
}

/// Runtime sweep on synthetic single-token constraints under a uniform
/// scorer.
pub fn cmd_bench(opts: &BenchOptions) -> Result<Vec<BenchRecord>, CliError> {
    let max_c = opts.cs.iter().copied().max().unwrap_or(0);
    if max_c + 2 > opts.vocab_size {
        return Err(CliError::Validation(format!(
            "vocabulary of {} is too small for {max_c} constraints",
            opts.vocab_size
        )));
    }
    if opts.ks.contains(&0) || opts.max_len == 0 {
        return Err(CliError::Validation(
            "k and max-len must be at least 1".into(),
        ));
    }
    let (scorer, _) = scaling_instance(0, opts.vocab_size);
    let base = DecoderConfig {
        max_len: opts.max_len,
        ..Default::default()
    };
    Ok(bench_scaling(
        &scorer,
        |c| (Vec::new(), scaling_instance(c, opts.vocab_size).1),
        &opts.decoders,
        &opts.cs,
        &opts.ks,
        &base,
    ))
}

#[derive(Parser, Debug)]
#[command(
    name = "logicbeam",
    version,
    about = "Beam search under predicate-logic lexical constraints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train an n-gram model; writes MODEL and MODEL.vocab.
    TrainLm {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, short = 'n', default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.1)]
        add_k: f64,
        /// Comma-separated interpolation weights, lowest order first.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode a JSON-lines instance file.
    Decode(DecodeArgs),
    /// Rerun a decode from its manifest and compare outputs.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Randomized self-checks; prints a JSON report.
    Verify {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_words: usize,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, hide = true)]
        corrupt_matcher: bool,
    },
    /// Scorer-call scaling sweep; writes CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "neurologic,gbs,cbs")]
        decoders: Vec<BenchDecoderArg>,
        #[arg(long, default_value_t = 1)]
        c_min: usize,
        #[arg(long, default_value_t = 6)]
        c_max: usize,
        #[arg(long, value_delimiter = ',', default_value = "4")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        vocab_size: usize,
        #[arg(long, default_value_t = 64)]
        max_len: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the records as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print the CNF of a formula.
    Cnf { formula: String },
    /// Answer scoring requests on stdin/stdout.
    #[command(hide = true)]
    Serve {
        #[arg(long, conflicts_with = "uniform")]
        model: Option<PathBuf>,
        /// Uniform scorer over this many ids, end marker 0.
        #[arg(long)]
        uniform: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BenchDecoderArg {
    Neurologic,
    Gbs,
    Cbs,
    Beam,
}

impl From<BenchDecoderArg> for BenchDecoder {
    fn from(d: BenchDecoderArg) -> Self {
        match d {
            BenchDecoderArg::Neurologic => BenchDecoder::Neurologic,
            BenchDecoderArg::Gbs => BenchDecoder::Gbs,
            BenchDecoderArg::Cbs => BenchDecoder::Cbs,
            BenchDecoderArg::Beam => BenchDecoder::Beam,
        }
    }
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub instances: PathBuf,
    #[arg(long, value_enum, default_value = "neurologic")]
    pub decoder: DecoderName,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Candidates kept by score rank each step (default: all).
    #[arg(long)]
    pub alpha: Option<usize>,
    /// Distinct satisfied-clause counts kept each step (default: all).
    #[arg(long)]
    pub beta: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub length_normalize: bool,
    #[arg(long)]
    pub match_in_prompt: bool,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long, default_value_t = 0.9)]
    pub top_p: f64,
    /// Result file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

impl DecodeArgs {
    pub fn run(&self) -> DecodeRun {
        DecodeRun {
            model: self.model.clone(),
            instances: self.instances.clone(),
            output: self.out.clone(),
            options: DecodeOptions {
                decoder: self.decoder,
                config: DecoderConfig {
                    k: self.k,
                    alpha: self.alpha,
                    beta: self.beta,
                    max_len: self.max_len,
                    length_normalize: self.length_normalize,
                    seed: self.seed,
                    match_in_prompt: self.match_in_prompt,
                    return_all: false,
                },
                top_k: self.top_k,
                top_p: self.top_p,
            },
            jobs: self.jobs,
        }
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::TrainLm {
            corpus,
            order,
            add_k,
            lambdas,
            out,
        } => {
            let mut config = NgramConfig::new(order, add_k);
            if let Some(l) = lambdas {
                config.lambdas = l;
            }
            let summary = cmd_train_lm(&corpus, config, &out)?;
            print_json(&summary);
        }
        Command::Decode(args) => {
            let run = args.run();
            let manifest = cmd_decode(&run)?;
            if let Some(p) = &args.manifest {
                write_json(p, &manifest)?;
            }
        }
        Command::Replay { manifest } => {
            let report = cmd_replay(&manifest)?;
            print_json(&report);
            if !report.pass {
                return Err(CliError::Verification("replay output differs".into()));
            }
        }
        Command::Verify {
            trials,
            seed,
            max_words,
            max_len,
            report,
            corrupt_matcher,
        } => {
            if trials == 0 {
                return Err(CliError::Validation("trials must be at least 1".into()));
            }
            if max_words == 0 || max_words > 3 || max_len == 0 || max_len > 6 {
                return Err(CliError::Validation(
                    "max-words must be in 1..=3 and max-len in 1..=6".into(),
                ));
            }
            let r = run_verify(&VerifyOptions {
                trials,
                seed,
                max_words,
                max_len,
                corrupt_matcher,
            });
            match &report {
                Some(p) => write_json(p, &r)?,
                None => print_json(&r),
            }
            if !r.pass {
                return Err(CliError::Verification("verification failed".into()));
            }
        }
        Command::Bench {
            decoders,
            c_min,
            c_max,
            k,
            vocab_size,
            max_len,
            out,
            json,
        } => {
            let opts = BenchOptions {
                decoders: decoders.into_iter().map(Into::into).collect(),
                cs: (c_min..=c_max).collect(),
                ks: k,
                vocab_size,
                max_len,
            };
            let records = cmd_bench(&opts)?;
            match &out {
                Some(p) => {
                    let f = fs::File::create(p).map_err(|e| CliError::io(p, e))?;
                    write_csv(&records, BufWriter::new(f)).map_err(|e| CliError::io(p, e))?;
                }
                None => write_csv(&records, io::stdout().lock())
                    .map_err(|e| CliError::Io(e.to_string()))?,
            }
            if let Some(p) = &json {
                write_json(p, &records)?;
            }
            for r in records.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "{} C={} k={}: {}",
                    r.decoder,
                    r.c,
                    r.k,
                    r.error.as_deref().unwrap_or("")
                );
            }
        }
        Command::Cnf { formula } => println!("{}", cmd_cnf(&formula)?),
        Command::Serve { model, uniform } => {
            let scorer: Box<dyn Scorer> = match (model, uniform) {
                (Some(m), _) => Box::new(load_model(&m)?.0),
                (None, Some(n)) if n >= 1 => Box::new(UniformScorer::new(n, 0)),
                _ => return Err(CliError::Validation("give --model or --uniform N".into())),
            };
            serve_lines(&*scorer, io::stdin().lock(), io::stdout().lock())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(())
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
