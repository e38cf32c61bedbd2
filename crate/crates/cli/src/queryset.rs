//! Query sets with golden standards: each entry names a keyword query, the
//! relevant network in canonical form, and the query match behind it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use kwsql_core::canon::{
    mentioned_keywords, parse_network, parse_query_match_text, validate_network, CanonError,
};
use kwsql_core::matching::KeywordQuery;
use kwsql_core::{DatabaseInstance, SchemaGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySetEntry {
    pub id: String,
    pub keywords: String,
    pub golden_cjn: String,
    pub golden_qm: String,
}

#[derive(Debug, Error)]
pub enum QuerySetError {
    #[error("cannot read query set {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed query set {path}: {detail}")]
    Malformed { path: String, detail: String },
    #[error("query {id}: duplicate id")]
    DuplicateId { id: String },
    #[error("query {id}: golden structure invalid: {source}")]
    InvalidGolden {
        id: String,
        #[source]
        source: CanonError,
    },
    #[error("query {id}: golden structure mentions keywords outside the query: {extra:?}")]
    ForeignKeywords { id: String, extra: Vec<String> },
    #[error("query {id}: keywords do not tokenize to anything")]
    EmptyKeywords { id: String },
}

pub fn load_query_set(path: &Path) -> Result<Vec<QuerySetEntry>, QuerySetError> {
    let text = fs::read_to_string(path).map_err(|source| QuerySetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| QuerySetError::Malformed {
        path: path.display().to_string(),
        detail: e.to_string(),
    })
}

/// Validates every entry against a concrete dataset: golden structures must
/// parse, conform to the schema graph, and mention only query keywords.
pub fn validate_query_set(
    entries: &[QuerySetEntry],
    db: &DatabaseInstance,
    graph: &SchemaGraph,
) -> Result<(), QuerySetError> {
    let mut seen = std::collections::BTreeSet::new();
    for entry in entries {
        if !seen.insert(entry.id.clone()) {
            return Err(QuerySetError::DuplicateId { id: entry.id.clone() });
        }
        let query = KeywordQuery::parse(&entry.keywords)
            .ok_or_else(|| QuerySetError::EmptyKeywords { id: entry.id.clone() })?;

        let (nodes, edges) = parse_network(&entry.golden_cjn)
            .map_err(|source| QuerySetError::InvalidGolden { id: entry.id.clone(), source })?;
        validate_network(&nodes, &edges, db, graph)
            .map_err(|source| QuerySetError::InvalidGolden { id: entry.id.clone(), source })?;
        let extra: Vec<String> = mentioned_keywords(&nodes)
            .difference(&query.keyword_set())
            .cloned()
            .collect();
        if !extra.is_empty() {
            return Err(QuerySetError::ForeignKeywords { id: entry.id.clone(), extra });
        }

        let qm_nodes = parse_query_match_text(&entry.golden_qm)
            .map_err(|source| QuerySetError::InvalidGolden { id: entry.id.clone(), source })?;
        let extra: Vec<String> = mentioned_keywords(&qm_nodes)
            .difference(&query.keyword_set())
            .cloned()
            .collect();
        if !extra.is_empty() {
            return Err(QuerySetError::ForeignKeywords { id: entry.id.clone(), extra });
        }
    }
    Ok(())
}
