use std::io::{self, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::decode::{
    beam_search, cbs_decode, gbs_decode, neurologic_decode, DecodeError, DecodeResult,
    DecoderConfig,
};
use crate::matcher::CompiledConstraints;
use crate::scorer::Scorer;
use crate::TokenId;

pub const CSV_HEADER: &str = "decoder,C,k,calls,rows,wall_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchDecoder {
    Neurologic,
    Gbs,
    Cbs,
    Beam,
}

impl BenchDecoder {
    pub fn name(self) -> &'static str {
        match self {
            BenchDecoder::Neurologic => "neurologic",
            BenchDecoder::Gbs => "gbs",
            BenchDecoder::Cbs => "cbs",
            BenchDecoder::Beam => "beam",
        }
    }

    fn run<S: Scorer + ?Sized>(
        self,
        scorer: &S,
        context: &[TokenId],
        cc: &CompiledConstraints,
        cfg: &DecoderConfig,
    ) -> Result<DecodeResult, DecodeError> {
        match self {
            BenchDecoder::Neurologic => neurologic_decode(scorer, context, cc, cfg),
            BenchDecoder::Gbs => gbs_decode(scorer, context, cc, cfg),
            BenchDecoder::Cbs => cbs_decode(scorer, context, cc, cfg),
            BenchDecoder::Beam => beam_search(scorer, context, cfg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub decoder: String,
    /// Number of clauses (constraints).
    pub c: usize,
    pub k: usize,
    /// Taken from the scorer's own counters.
    pub calls: u64,
    pub rows: u64,
    pub wall_ms: f64,
    /// Set when the decoder rejected the instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BenchRecord {
    pub fn rows_per_step(&self) -> f64 {
        if self.calls == 0 {
            0.0
        } else {
            self.rows as f64 / self.calls as f64
        }
    }
}

/// Runs every decoder on `instance(c)` for every `c` and `k`, recording
/// scorer work. A decoder error becomes a record with `error` set.
pub fn bench_scaling<S, G>(
    scorer: &S,
    instance: G,
    decoders: &[BenchDecoder],
    cs: &[usize],
    ks: &[usize],
    base: &DecoderConfig,
) -> Vec<BenchRecord>
where
    S: Scorer + ?Sized,
    G: Fn(usize) -> (Vec<TokenId>, CompiledConstraints),
{
    let mut out = Vec::new();
    for &c in cs {
        let (context, cc) = instance(c);
        for &k in ks {
            let cfg = DecoderConfig { k, ..base.clone() };
            for &d in decoders {
                let (calls0, rows0) = scorer.counters().snapshot();
                let started = Instant::now();
                let result = d.run(scorer, &context, &cc, &cfg);
                let wall_ms = started.elapsed().as_secs_f64() * 1e3;
                let (calls1, rows1) = scorer.counters().snapshot();
                let mut rec = BenchRecord {
                    decoder: d.name().to_string(),
                    c,
                    k,
                    calls: calls1 - calls0,
                    rows: rows1 - rows0,
                    wall_ms,
                    error: None,
                };
                match result {
                    Ok(r) => {
                        if r.stats.scorer_calls != rec.calls || r.stats.scored_rows != rec.rows {
                            rec.error = Some(format!(
                                "decoder reported {}/{} calls/rows, scorer counted {}/{}",
                                r.stats.scorer_calls, r.stats.scored_rows, rec.calls, rec.rows
                            ));
                        }
                    }
                    Err(e) => rec.error = Some(e.to_string()),
                }
                out.push(rec);
            }
        }
    }
    out
}

/// Writes successful records as CSV under [`CSV_HEADER`].
pub fn write_csv(records: &[BenchRecord], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records.iter().filter(|r| r.error.is_none()) {
        writeln!(
            w,
            "{},{},{},{},{},{:.3}",
            r.decoder, r.c, r.k, r.calls, r.rows, r.wall_ms
        )?;
    }
    Ok(())
}

/// Least-squares line through the points: (slope, intercept, R²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, intercept, r2)
}
