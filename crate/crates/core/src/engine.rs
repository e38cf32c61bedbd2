//! End-to-end pipeline: load a dataset, build (or reload) the indexes, and
//! answer keyword queries with ranked candidate joining networks.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::catalog::{build_schema_graph, load_dataset_dir, DataError, DatabaseInstance, SchemaGraph};
use crate::cjn::{cjn_generate, GenerationReport, SetupConfig};
use crate::executor::InstanceProbe;
use crate::indexes::{
    build_schema_index, build_value_index, dataset_fingerprint, load_index_cache,
    save_index_cache, SchemaIndex, ValueIndex,
};
use crate::matching::{skm_generate, vkm_generate, KeywordMatch, KeywordQuery};
use crate::query_matching::{qm_generate, qm_rank, QueryMatch, RankError};
use crate::similarity::{load_taxonomy, SimilarityConfig, Taxonomy, TaxonomyError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error("query contains no usable keywords")]
    EmptyQuery,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// How to treat the on-disk index cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheMode {
    /// Always rebuild, never touch the cache file.
    Ignore,
    /// Load when fingerprint and version match, rebuild otherwise.
    Use,
    /// Rebuild and write the cache file.
    Refresh,
}

/// Everything per-query evaluation needs, immutable once constructed.
/// Queries may run concurrently against one engine.
pub struct SearchEngine {
    pub db: DatabaseInstance,
    pub graph: SchemaGraph,
    pub taxonomy: Taxonomy,
    pub value_index: ValueIndex,
    pub schema_index: SchemaIndex,
}

/// Per-run knobs; defaults mirror the 5/1/9 setup with query matches of at
/// most three members and the path metric at threshold 0.6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    pub similarity: SimilarityConfig,
    pub setup: SetupConfig,
    /// Maximum query-match size (number of keyword matches).
    pub max_match_size: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            similarity: SimilarityConfig::default(),
            setup: SetupConfig::default(),
            max_match_size: 3,
        }
    }
}

impl EngineOptions {
    pub fn validate(&self) -> Result<(), EngineError> {
        self.similarity.validate().map_err(EngineError::Config)?;
        self.setup.validate().map_err(EngineError::Config)?;
        if self.max_match_size == 0 {
            return Err(EngineError::Config("maximum match size must be at least 1".into()));
        }
        Ok(())
    }
}

/// The full output of one query run.
#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub query: KeywordQuery,
    pub value_matches: Vec<KeywordMatch>,
    pub schema_matches: Vec<KeywordMatch>,
    /// All generated query matches, ranked.
    pub query_matches: Vec<QueryMatch>,
    pub report: GenerationReport,
}

impl SearchEngine {
    pub fn new(db: DatabaseInstance, taxonomy: Taxonomy) -> Self {
        let graph = build_schema_graph(&db);
        let value_index = build_value_index(&db);
        let schema_index = build_schema_index(&db, &value_index);
        SearchEngine { db, graph, taxonomy, value_index, schema_index }
    }

    /// Loads `dataset_dir/schema.json` plus its CSVs and the taxonomy file.
    pub fn from_dir(
        dataset_dir: &Path,
        taxonomy_path: &Path,
        cache: CacheMode,
    ) -> Result<Self, EngineError> {
        let db = load_dataset_dir(dataset_dir)?;
        let taxonomy = load_taxonomy(taxonomy_path)?;
        let graph = build_schema_graph(&db);
        let fingerprint = dataset_fingerprint(&db);
        let cache_path = index_cache_path(dataset_dir);

        let cached = match cache {
            CacheMode::Use => load_index_cache(&cache_path, fingerprint),
            _ => None,
        };
        let (value_index, schema_index) = match cached {
            Some(pair) => pair,
            None => {
                let vi = build_value_index(&db);
                let si = build_schema_index(&db, &vi);
                if cache == CacheMode::Refresh {
                    save_index_cache(&cache_path, fingerprint, &vi, &si).map_err(|source| {
                        DataError::Io { path: cache_path.display().to_string(), source }
                    })?;
                }
                (vi, si)
            }
        };
        Ok(SearchEngine { db, graph, taxonomy, value_index, schema_index })
    }

    /// Runs the whole pipeline for one query. Deterministic for a fixed
    /// dataset and options.
    pub fn run(&self, raw_query: &str, opts: &EngineOptions) -> Result<QueryOutcome, EngineError> {
        opts.validate()?;
        let query = KeywordQuery::parse(raw_query).ok_or(EngineError::EmptyQuery)?;

        let value_matches = vkm_generate(&query, &self.value_index);
        let schema_matches =
            skm_generate(&query, &self.db, &opts.similarity, &self.taxonomy);

        let generated =
            qm_generate(&query, &value_matches, &schema_matches, opts.max_match_size);
        let query_matches = qm_rank(
            generated,
            &self.value_index,
            &self.schema_index,
            &self.taxonomy,
            &opts.similarity,
        )?;

        let probe = InstanceProbe(&self.db);
        let report = cjn_generate(
            &query_matches,
            &self.graph,
            &opts.setup,
            if opts.setup.eager() { Some(&probe) } else { None },
            &self.value_index,
            &self.schema_index,
        );

        Ok(QueryOutcome { query, value_matches, schema_matches, query_matches, report })
    }
}

/// Cache file location for a dataset directory.
pub fn index_cache_path(dataset_dir: &Path) -> PathBuf {
    dataset_dir.join(".index.cache")
}
