//! Result statistics per query: how many keyword matches, query matches,
//! and joining networks the pipeline generates without any pruning.

use serde::Serialize;

use kwsql_core::{cjn_interleave, EngineError, EngineOptions, SearchEngine, SetupConfig};

#[derive(Debug, Clone, Serialize)]
pub struct StatsRow {
    pub id: String,
    pub keyword_matches: usize,
    pub query_matches: usize,
    pub networks: usize,
}

/// Cap on networks enumerated per query match; statistics runs are
/// unpruned, so a bound keeps dense schema graphs from running away.
const NETWORK_CAP: usize = 10_000;

/// Counts for one query: all keyword matches, all query matches, and the
/// networks generated across every query match with pruning disabled.
pub fn stats_for_query(
    engine: &SearchEngine,
    id: &str,
    keywords: &str,
    opts: &EngineOptions,
) -> Result<StatsRow, EngineError> {
    let unpruned = EngineOptions {
        setup: SetupConfig {
            top_query_matches: usize::MAX,
            networks_per_match: NETWORK_CAP,
            probes_per_match: 0,
            ..opts.setup
        },
        ..*opts
    };
    let outcome = engine.run(keywords, &unpruned)?;
    let mut networks = 0usize;
    for qm in &outcome.query_matches {
        networks += cjn_interleave(
            qm,
            &engine.graph,
            &unpruned.setup,
            NETWORK_CAP,
            &engine.value_index,
            &engine.schema_index,
        )
        .len();
    }
    Ok(StatsRow {
        id: id.to_string(),
        keyword_matches: outcome.value_matches.len() + outcome.schema_matches.len(),
        query_matches: outcome.query_matches.len(),
        networks,
    })
}
