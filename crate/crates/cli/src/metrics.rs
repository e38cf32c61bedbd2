//! Ranking-quality metrics: precision at rank K and mean reciprocal rank.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::queryset::QuerySetEntry;

/// The largest K reported by precision-at-K.
pub const MAX_K: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("result set and golden standard disagree on query ids: {detail}")]
    IdMismatch { detail: String },
}

/// P@K for K = 1..=10, the mean reciprocal rank, and each query's
/// reciprocal rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// p_at_k[k-1] is P@K.
    pub p_at_k: Vec<f64>,
    pub mrr: f64,
    pub per_query_rr: BTreeMap<String, f64>,
}

impl MetricsReport {
    pub fn p_at(&self, k: usize) -> f64 {
        self.p_at_k[k - 1]
    }
}

/// Computes the report from ranked canonical network serializations per
/// query id. A query whose golden network never shows up contributes a
/// reciprocal rank of zero and misses every P@K.
pub fn compute_metrics(
    results: &BTreeMap<String, Vec<String>>,
    golden: &[QuerySetEntry],
) -> Result<MetricsReport, MetricsError> {
    let golden_ids: Vec<&str> = golden.iter().map(|e| e.id.as_str()).collect();
    let missing: Vec<&str> = golden_ids
        .iter()
        .filter(|id| !results.contains_key(**id))
        .copied()
        .collect();
    let extra: Vec<&str> = results
        .keys()
        .filter(|id| !golden_ids.contains(&id.as_str()))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(MetricsError::IdMismatch {
            detail: format!("missing {missing:?}, unexpected {extra:?}"),
        });
    }

    let mut per_query_rr = BTreeMap::new();
    let mut hits_at_k = [0usize; MAX_K];
    for entry in golden {
        let ranked = &results[&entry.id];
        let position = ranked.iter().position(|c| c == &entry.golden_cjn);
        let rr = match position {
            Some(p) => 1.0 / (p as f64 + 1.0),
            None => 0.0,
        };
        per_query_rr.insert(entry.id.clone(), rr);
        if let Some(p) = position {
            for (k, hits) in hits_at_k.iter_mut().enumerate() {
                if p <= k {
                    *hits += 1;
                }
            }
        }
    }
    let n = golden.len().max(1) as f64;
    let p_at_k = hits_at_k.iter().map(|&h| h as f64 / n).collect();
    let mrr = per_query_rr.values().sum::<f64>() / n;
    Ok(MetricsReport { p_at_k, mrr, per_query_rr })
}
