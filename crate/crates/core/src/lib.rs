//! Keyword search over relational data.
//!
//! Turns free keyword queries — whose terms may refer to stored values or
//! to schema element names — into ranked, executable join queries. The
//! pipeline:
//!
//! 0. [`catalog`] / [`indexes`]: load the dataset, build the value and
//!    schema indexes.
//! 1. [`matching`]: value-keyword and schema-keyword matches, the latter
//!    through [`similarity`] over a bundled word taxonomy.
//! 2. [`query_matching`]: minimal covers of the query keywords, ranked by
//!    a TF-IDF / name-similarity model.
//! 3. [`cjn`]: candidate joining networks over the schema graph — minimal,
//!    sound join trees — with optional eager pruning of void networks,
//!    ranked by origin score over size.
//!
//! [`executor`] evaluates networks in memory and emits portable SQL;
//! [`engine`] wires the phases together behind one call.

pub mod canon;
pub mod catalog;
pub mod cjn;
pub mod engine;
pub mod executor;
pub mod indexes;
pub mod matching;
pub mod query_matching;
pub mod similarity;

#[cfg(test)]
pub(crate) mod testutil;

pub use catalog::{
    build_schema_graph, load_dataset, load_dataset_dir, tokenize, DatabaseInstance, ForeignKey,
    RelationSchema, SchemaGraph, TupleId,
};
pub use cjn::{
    cjn_generate, cjn_interleave, cjn_rank, is_minimal, is_sound, GenerationReport,
    JoiningNetwork, NetworkEdge, NetworkProbe, ProbeError, SetupConfig,
};
pub use engine::{CacheMode, EngineError, EngineOptions, QueryOutcome, SearchEngine};
pub use executor::{
    emit_sql, emit_sql_with_dialect, evaluate, probe_nonvoid, InstanceProbe, Jnt, SqlDialect,
    SqlQuery,
};
pub use indexes::{build_schema_index, build_value_index, SchemaIndex, ValueIndex};
pub use matching::{
    skm_generate, vkm_generate, vkm_intersect, vkm_pool, KeywordMatch, KeywordQuery,
    SchemaElement,
};
pub use query_matching::{
    merge_keyword_matches, minimal_cover, minimal_covers, qm_generate, qm_rank,
    score_query_match, QueryMatch, RankingWeights,
};
pub use similarity::{
    load_taxonomy, name_similarity, path_similarity, wup_similarity, SimilarityConfig,
    SimilarityMetric, Taxonomy,
};
