//! Line-delimited JSON scoring over a child process's stdin/stdout.
//!
//! Request line: `{"prefixes": [[int, ...], ...]}`.
//! Response line: `{"logprobs": [[float x |V|], ...]}`, one per request,
//! in order.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::{logsumexp, CallCounters, ScoreRequest, ScoreResponse, Scorer, ScorerError};
use crate::TokenId;

/// Environment variable naming the scorer command line (run through `sh -c`).
pub const SCORER_CMD_ENV: &str = "LOGICBEAM_SCORER_CMD";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Rows whose logsumexp strays further than this from 0 are rejected.
const NORMALIZATION_TOLERANCE: f64 = 1e-3;

struct Connection {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

pub struct ExternalScorer {
    vocab_size: usize,
    eos: TokenId,
    timeout: Duration,
    conn: Mutex<Connection>,
    counters: CallCounters,
}

impl std::fmt::Debug for ExternalScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalScorer")
            .field("vocab_size", &self.vocab_size)
            .field("timeout", &self.timeout)
            .finish_non_exhaustive()
    }
}

impl ExternalScorer {
    pub fn spawn(
        command: &str,
        vocab_size: usize,
        eos: TokenId,
        timeout: Duration,
    ) -> Result<Self, ScorerError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(ExternalScorer {
            vocab_size,
            eos,
            timeout,
            conn: Mutex::new(Connection {
                child,
                stdin,
                lines: rx,
            }),
            counters: CallCounters::default(),
        })
    }

    /// Spawns the command in [`SCORER_CMD_ENV`], if set.
    pub fn from_env(vocab_size: usize, eos: TokenId) -> Option<Result<Self, ScorerError>> {
        let cmd = std::env::var(SCORER_CMD_ENV).ok()?;
        Some(Self::spawn(&cmd, vocab_size, eos, DEFAULT_TIMEOUT))
    }

    fn round_trip(&self, prefixes: &[Vec<TokenId>]) -> Result<Vec<Vec<f64>>, ScorerError> {
        let mut conn = self.conn.lock().unwrap_or_else(|e| e.into_inner());
        let mut line = serde_json::to_string(&ScoreRequest {
            prefixes: prefixes.to_vec(),
        })
        .map_err(|e| ScorerError::Protocol(e.to_string()))?;
        line.push('\n');
        conn.stdin.write_all(line.as_bytes())?;
        conn.stdin.flush()?;
        let reply = match conn.lines.recv_timeout(self.timeout) {
            Ok(r) => r?,
            Err(RecvTimeoutError::Timeout) => return Err(ScorerError::Timeout(self.timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                return Err(ScorerError::Protocol("scorer closed its output".into()))
            }
        };
        let resp: ScoreResponse = serde_json::from_str(&reply)
            .map_err(|e| ScorerError::Protocol(format!("bad response line: {e}")))?;
        validate_rows(&resp.logprobs, prefixes.len(), self.vocab_size)?;
        Ok(resp.logprobs)
    }
}

fn validate_rows(rows: &[Vec<f64>], batch: usize, vocab_size: usize) -> Result<(), ScorerError> {
    if rows.len() != batch {
        return Err(ScorerError::Protocol(format!(
            "expected {batch} rows, got {}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != vocab_size {
            return Err(ScorerError::Protocol(format!(
                "row {i} has {} entries, vocabulary has {vocab_size}",
                row.len()
            )));
        }
        let lse = logsumexp(row);
        if lse.is_nan() || lse.abs() > NORMALIZATION_TOLERANCE {
            return Err(ScorerError::Normalization {
                row: i,
                logsumexp: lse,
            });
        }
    }
    Ok(())
}

impl Scorer for ExternalScorer {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn eos(&self) -> TokenId {
        self.eos
    }

    fn score_next(&self, prefixes: &[Vec<TokenId>]) -> Result<Vec<Vec<f64>>, ScorerError> {
        self.counters.record(prefixes.len());
        self.round_trip(prefixes)
    }

    fn counters(&self) -> &CallCounters {
        &self.counters
    }
}

impl Drop for ExternalScorer {
    fn drop(&mut self) {
        let conn = self.conn.get_mut().unwrap_or_else(|e| e.into_inner());
        let _ = conn.child.kill();
        let _ = conn.child.wait();
    }
}

/// Server side of the protocol: answers each request line on `input`
/// with `scorer` until end of input.
pub fn serve_lines(
    scorer: &dyn Scorer,
    input: impl BufRead,
    mut output: impl Write,
) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let req: ScoreRequest = serde_json::from_str(&line)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        let logprobs = scorer
            .score_next(&req.prefixes)
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        serde_json::to_writer(&mut output, &ScoreResponse { logprobs })
            .map_err(std::io::Error::other)?;
        output.write_all(b"\n")?;
        output.flush()?;
    }
    Ok(())
}
