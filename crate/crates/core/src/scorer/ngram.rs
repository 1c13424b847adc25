//! Interpolated add-k n-gram language model.
//!
//! Each order `j` in `1..=n` contributes
//! `P_j(w | h) = (c(h, w) + k) / (c(h) + k |S|)` where `S` is every id
//! except `<s>`, which only ever pads the history. The model mixes orders
//! with fixed weights. A context never seen at training time with `k = 0`
//! has no estimate of its own and borrows the next lower order.

use std::collections::HashMap;
use std::io::{Read, Write};

use byteorder::{ReadBytesExt, WriteBytesExt, LE};

use super::{CallCounters, ModelFileError, Scorer, ScorerError, TrainError, Vocab};
use crate::TokenId;

pub const MODEL_MAGIC: &[u8; 4] = b"NLLM";
pub const MODEL_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct NgramConfig {
    pub order: usize,
    pub add_k: f64,
    /// `lambdas[j]` weights order `j + 1`.
    pub lambdas: Vec<f64>,
}

impl NgramConfig {
    /// Uniform interpolation weights.
    pub fn new(order: usize, add_k: f64) -> Self {
        NgramConfig {
            order,
            add_k,
            lambdas: vec![1.0 / order.max(1) as f64; order],
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::InvalidConfig(m));
        if self.order == 0 {
            return bad("order must be at least 1".into());
        }
        if !(self.add_k >= 0.0 && self.add_k.is_finite()) {
            return bad(format!(
                "add-k must be a finite non-negative number, got {}",
                self.add_k
            ));
        }
        if self.lambdas.len() != self.order {
            return bad(format!(
                "expected {} interpolation weights, got {}",
                self.order,
                self.lambdas.len()
            ));
        }
        if self.lambdas.iter().any(|&l| l.is_nan() || l < 0.0) {
            return bad("interpolation weights must be non-negative".into());
        }
        let sum: f64 = self.lambdas.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("interpolation weights sum to {sum}, not 1"));
        }
        Ok(())
    }
}

impl Default for NgramConfig {
    fn default() -> Self {
        Self::new(3, 0.1)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct ContextCounts {
    total: u64,
    next: HashMap<TokenId, u64>,
}

#[derive(Debug)]
pub struct NgramLm {
    config: NgramConfig,
    vocab_size: usize,
    /// `tables[j]` is keyed by contexts of length `j`.
    tables: Vec<HashMap<Vec<TokenId>, ContextCounts>>,
    counters: CallCounters,
}

impl NgramLm {
    /// Trains on sentences of token ids (without markers); `<s>` padding
    /// and a closing `</s>` are added per sentence.
    pub fn train(
        corpus: &[Vec<TokenId>],
        vocab_size: usize,
        config: NgramConfig,
    ) -> Result<Self, TrainError> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(TrainError::EmptyCorpus);
        }
        if vocab_size <= Vocab::UNK as usize {
            return Err(TrainError::InvalidConfig(
                "vocabulary lacks reserved ids".into(),
            ));
        }
        if let Some(t) = corpus.iter().flatten().find(|&&t| t as usize >= vocab_size) {
            return Err(TrainError::InvalidConfig(format!(
                "token {t} outside vocabulary of size {vocab_size}"
            )));
        }
        let n = config.order;
        let mut tables: Vec<HashMap<Vec<TokenId>, ContextCounts>> = vec![HashMap::new(); n];
        for sentence in corpus {
            let mut padded = vec![Vocab::BOS; n - 1];
            padded.extend_from_slice(sentence);
            padded.push(Vocab::EOS);
            for i in n - 1..padded.len() {
                let w = padded[i];
                for (j, table) in tables.iter_mut().enumerate() {
                    let entry = table.entry(padded[i - j..i].to_vec()).or_default();
                    entry.total += 1;
                    *entry.next.entry(w).or_default() += 1;
                }
            }
        }
        Ok(NgramLm {
            config,
            vocab_size,
            tables,
            counters: CallCounters::default(),
        })
    }

    /// Builds a vocabulary from whitespace-tokenized lines (blank lines
    /// skipped) and trains on them.
    pub fn train_text<'a>(
        lines: impl IntoIterator<Item = &'a str>,
        config: NgramConfig,
    ) -> Result<(Self, Vocab), TrainError> {
        let mut vocab = Vocab::new();
        let corpus: Vec<Vec<TokenId>> = lines
            .into_iter()
            .filter(|l| !l.trim().is_empty())
            .map(|l| vocab.encode_mut(l))
            .collect();
        let lm = Self::train(&corpus, vocab.len(), config)?;
        Ok((lm, vocab))
    }

    pub fn config(&self) -> &NgramConfig {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    /// Log-probability row for the next token after `prefix`.
    pub fn row(&self, prefix: &[TokenId]) -> Vec<f64> {
        let v = self.vocab_size;
        let support = (v - 1) as f64;
        let k = self.config.add_k;
        let n = self.config.order;
        // history = <s>^(n-1) ++ prefix, read from the right
        let history = |len: usize| -> Vec<TokenId> {
            let mut h = Vec::with_capacity(len);
            for back in (1..=len).rev() {
                h.push(if back <= prefix.len() {
                    prefix[prefix.len() - back]
                } else {
                    Vocab::BOS
                });
            }
            h
        };
        let mut mix = vec![0.0; v];
        let mut lower: Vec<f64> = Vec::new();
        for j in 0..n {
            let ctx = self.tables[j].get(&history(j));
            let dist: Vec<f64> = match ctx {
                Some(c) if c.total > 0 || k > 0.0 => {
                    let denom = c.total as f64 + k * support;
                    (0..v as TokenId)
                        .map(|w| {
                            if w == Vocab::BOS {
                                0.0
                            } else {
                                (c.next.get(&w).copied().unwrap_or(0) as f64 + k) / denom
                            }
                        })
                        .collect()
                }
                None if k > 0.0 => (0..v as TokenId)
                    .map(|w| if w == Vocab::BOS { 0.0 } else { 1.0 / support })
                    .collect(),
                // unseen context, no smoothing: borrow the lower order
                _ => lower.clone(),
            };
            let lambda = self.config.lambdas[j];
            for (m, p) in mix.iter_mut().zip(&dist) {
                *m += lambda * p;
            }
            lower = dist;
        }
        mix.into_iter().map(f64::ln).collect()
    }

    /// Total log-probability of `seq` (no implicit `</s>`).
    pub fn sequence_logprob(&self, seq: &[TokenId]) -> f64 {
        (0..seq.len())
            .map(|i| self.row(&seq[..i])[seq[i] as usize])
            .sum()
    }

    pub fn save(&self, mut w: impl Write) -> Result<(), ModelFileError> {
        w.write_all(MODEL_MAGIC)?;
        w.write_u16::<LE>(MODEL_VERSION)?;
        w.write_u32::<LE>(self.config.order as u32)?;
        w.write_f64::<LE>(self.config.add_k)?;
        for &l in &self.config.lambdas {
            w.write_f64::<LE>(l)?;
        }
        w.write_u32::<LE>(self.vocab_size as u32)?;
        for table in &self.tables {
            let mut contexts: Vec<_> = table.iter().collect();
            contexts.sort_by(|a, b| a.0.cmp(b.0));
            w.write_u32::<LE>(contexts.len() as u32)?;
            for (ctx, counts) in contexts {
                for &t in ctx {
                    w.write_u32::<LE>(t)?;
                }
                w.write_u64::<LE>(counts.total)?;
                let mut next: Vec<_> = counts.next.iter().collect();
                next.sort();
                w.write_u32::<LE>(next.len() as u32)?;
                for (&t, &c) in next {
                    w.write_u32::<LE>(t)?;
                    w.write_u64::<LE>(c)?;
                }
            }
        }
        Ok(())
    }

    pub fn load(mut r: impl Read) -> Result<Self, ModelFileError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.is_empty() {
            return Err(ModelFileError::Corrupt("empty file".into()));
        }
        if bytes.len() < 4 || &bytes[..4] != MODEL_MAGIC {
            return Err(ModelFileError::Version("bad magic bytes".into()));
        }
        let mut cur = &bytes[4..];
        let corrupt = |e: std::io::Error| ModelFileError::Corrupt(e.to_string());
        let version = cur.read_u16::<LE>().map_err(corrupt)?;
        if version != MODEL_VERSION {
            return Err(ModelFileError::Version(format!(
                "file version {version}, expected {MODEL_VERSION}"
            )));
        }
        let order = cur.read_u32::<LE>().map_err(corrupt)? as usize;
        if order == 0 || order > 64 {
            return Err(ModelFileError::Corrupt(format!(
                "implausible order {order}"
            )));
        }
        let add_k = cur.read_f64::<LE>().map_err(corrupt)?;
        let lambdas = (0..order)
            .map(|_| cur.read_f64::<LE>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(corrupt)?;
        let config = NgramConfig {
            order,
            add_k,
            lambdas,
        };
        config
            .validate()
            .map_err(|e| ModelFileError::Corrupt(e.to_string()))?;
        let vocab_size = cur.read_u32::<LE>().map_err(corrupt)? as usize;
        if vocab_size <= Vocab::UNK as usize {
            return Err(ModelFileError::Corrupt("vocabulary too small".into()));
        }
        let check = |t: TokenId| {
            if (t as usize) < vocab_size {
                Ok(t)
            } else {
                Err(ModelFileError::Corrupt(format!("token {t} out of range")))
            }
        };
        let mut tables = Vec::with_capacity(order);
        for j in 0..order {
            let n_ctx = cur.read_u32::<LE>().map_err(corrupt)?;
            let mut table = HashMap::new();
            for _ in 0..n_ctx {
                let ctx = (0..j)
                    .map(|_| cur.read_u32::<LE>().map_err(corrupt).and_then(check))
                    .collect::<Result<Vec<_>, _>>()?;
                let total = cur.read_u64::<LE>().map_err(corrupt)?;
                let n_next = cur.read_u32::<LE>().map_err(corrupt)?;
                let mut next = HashMap::new();
                for _ in 0..n_next {
                    let t = check(cur.read_u32::<LE>().map_err(corrupt)?)?;
                    next.insert(t, cur.read_u64::<LE>().map_err(corrupt)?);
                }
                if next.values().sum::<u64>() != total {
                    return Err(ModelFileError::Corrupt("context total mismatch".into()));
                }
                table.insert(ctx, ContextCounts { total, next });
            }
            tables.push(table);
        }
        if !cur.is_empty() {
            return Err(ModelFileError::Corrupt(format!(
                "{} trailing bytes",
                cur.len()
            )));
        }
        if tables[0].get(&Vec::new()).is_none_or(|c| c.total == 0) {
            return Err(ModelFileError::Corrupt("missing unigram counts".into()));
        }
        Ok(NgramLm {
            config,
            vocab_size,
            tables,
            counters: CallCounters::default(),
        })
    }
}

impl Scorer for NgramLm {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn eos(&self) -> TokenId {
        Vocab::EOS
    }

    fn score_next(&self, prefixes: &[Vec<TokenId>]) -> Result<Vec<Vec<f64>>, ScorerError> {
        self.counters.record(prefixes.len());
        Ok(prefixes.iter().map(|p| self.row(p)).collect())
    }

    fn counters(&self) -> &CallCounters {
        &self.counters
    }
}
