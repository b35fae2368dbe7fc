//! Serialized factorization traces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use chandiv::channel::{compose, ensure_cptp};
use chandiv::elementary::{build_psi, ElementaryParams};
use chandiv::factorization::FactorizationTrace;
use chandiv::Tolerance;

use crate::document::{decode_vector, encode_vector, ChannelDocument, Entry};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub x: Vec<Entry>,
    pub x_perp: Vec<Entry>,
    pub lambda: f64,
    pub lambda_max: f64,
    pub rank_before: usize,
    pub rank_after: usize,
    pub state_gap: f64,
    pub split: bool,
    pub source: String,
}

/// `original = residual ∘ Ψ_m ∘ … ∘ Ψ_1`, with step `k` describing `Ψ_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub original: ChannelDocument,
    pub steps: Vec<StepRecord>,
    pub residual: ChannelDocument,
    pub terminal: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl TraceDocument {
    pub fn from_trace(trace: &FactorizationTrace) -> Self {
        let steps = trace
            .steps
            .iter()
            .map(|s| StepRecord {
                x: encode_vector(&s.pair.x),
                x_perp: encode_vector(&s.pair.x_perp),
                lambda: s.lambda,
                lambda_max: s.lambda_max,
                rank_before: s.rank_before,
                rank_after: s.rank_after,
                state_gap: s.state_gap,
                split: s.split,
                source: s.pair.source.as_str().to_string(),
            })
            .collect();
        Self {
            original: ChannelDocument::from_choi(&trace.original),
            steps,
            residual: ChannelDocument::from_choi(&trace.residual),
            terminal: trace.terminal.as_str().to_string(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces serialize")
    }

    /// Rebuilds every factor from the stored parameters and returns the
    /// largest Choi entry deviation of the recomposition from the original.
    /// Fails if a step is malformed, the residual is not CPTP or the
    /// deviation exceeds `max(1, steps)·1e-9`.
    pub fn verify(&self, tol: &Tolerance) -> Result<f64, CliError> {
        let original = self.original.to_channel(tol)?;
        let residual = self.residual.to_channel(tol)?;
        ensure_cptp(&residual, tol)?;
        let mut acc = residual;
        for (k, s) in self.steps.iter().enumerate().rev() {
            if !(0.0..1.0).contains(&s.lambda) || s.rank_after > s.rank_before {
                return Err(CliError::Internal(format!("step {k} is malformed")));
            }
            let p = ElementaryParams::new(decode_vector(&s.x), decode_vector(&s.x_perp), s.lambda, tol)?;
            acc = compose(&acc, &build_psi(&p, tol)?, tol)?;
        }
        let err = acc.choi().max_abs_diff(original.choi());
        let bound = self.steps.len().max(1) as f64 * 1e-9;
        if err > bound {
            return Err(CliError::Internal(format!(
                "recomposition deviates by {err:e} (bound {bound:e})"
            )));
        }
        Ok(err)
    }
}
