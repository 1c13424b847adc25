//! Constraint metrics and runtime scaling sweeps.

mod bench;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Phrase;
use crate::TokenId;

pub use bench::{bench_scaling, linear_fit, write_csv, BenchDecoder, BenchRecord, CSV_HEADER};

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("{outputs} outputs but {instances} instances")]
    LengthMismatch { outputs: usize, instances: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Fraction of concepts covered, per instance.
    pub per_instance: Vec<f64>,
    /// Mean over instances, in percent.
    pub mean_percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraReport {
    /// Forbidden phrases present over the number of given concept sets.
    pub per_instance: Vec<f64>,
    pub mean: f64,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn check_len(outputs: usize, instances: usize) -> Result<(), EvalError> {
    if outputs != instances {
        return Err(EvalError::LengthMismatch { outputs, instances });
    }
    Ok(())
}

/// A concept is covered when any of its variants occurs contiguously in
/// the output. An instance with no concepts counts as fully covered.
pub fn coverage(
    outputs: &[Vec<TokenId>],
    concepts: &[Vec<Vec<Phrase>>],
) -> Result<CoverageReport, EvalError> {
    check_len(outputs.len(), concepts.len())?;
    let per_instance: Vec<f64> = outputs
        .iter()
        .zip(concepts)
        .map(|(out, sets)| {
            if sets.is_empty() {
                return 1.0;
            }
            let hit = sets
                .iter()
                .filter(|variants| variants.iter().any(|p| p.occurs_in(out)))
                .count();
            hit as f64 / sets.len() as f64
        })
        .collect();
    Ok(CoverageReport {
        mean_percent: 100.0 * mean(&per_instance),
        per_instance,
    })
}

/// Counts each forbidden phrase at most once per output and divides by
/// the number of given concept sets (or 1 when none are given).
pub fn extra_rate(
    outputs: &[Vec<TokenId>],
    given: &[Vec<Vec<Phrase>>],
    forbidden: &[Vec<Phrase>],
) -> Result<ExtraReport, EvalError> {
    check_len(outputs.len(), given.len())?;
    check_len(outputs.len(), forbidden.len())?;
    let per_instance: Vec<f64> = outputs
        .iter()
        .zip(given.iter().zip(forbidden))
        .map(|(out, (sets, bad))| {
            let present = bad.iter().filter(|p| p.occurs_in(out)).count();
            present as f64 / sets.len().max(1) as f64
        })
        .collect();
    Ok(ExtraReport {
        mean: mean(&per_instance),
        per_instance,
    })
}
