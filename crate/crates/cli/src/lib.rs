//! Library side of the command-line front end: query-set loading, metrics,
//! statistics, and output rendering. The binary in `main.rs` is a thin
//! argument-parsing shell over these pieces.

pub mod metrics;
pub mod queryset;
pub mod report;
pub mod stats;

use std::collections::BTreeMap;

use kwsql_core::{EngineError, EngineOptions, SearchEngine};

use queryset::QuerySetEntry;

/// Runs every query of a set and collects the ranked canonical network
/// serializations per query id, the shape `compute_metrics` consumes.
pub fn run_query_set(
    engine: &SearchEngine,
    entries: &[QuerySetEntry],
    opts: &EngineOptions,
) -> Result<BTreeMap<String, Vec<String>>, EngineError> {
    let mut results = BTreeMap::new();
    for entry in entries {
        let outcome = engine.run(&entry.keywords, opts)?;
        let ranked = outcome
            .report
            .ranked
            .iter()
            .map(|network| network.canonical())
            .collect();
        results.insert(entry.id.clone(), ranked);
    }
    Ok(results)
}
