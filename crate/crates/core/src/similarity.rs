//! Taxonomy-backed lexical similarity between query keywords and schema
//! element names.
//!
//! The taxonomy is a small thesaurus file: synsets (sense groups) with
//! hypernym links forming a tree. Two metrics are supported: path similarity
//! (inverse of the node count along the shortest path between senses) and
//! Wu-Palmer (depth of the least common subsumer against the sense depths).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::tokenize;

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("malformed taxonomy {path}: {detail}")]
    Malformed { path: String, detail: String },
    #[error("duplicate synset id {id}")]
    DuplicateSynset { id: String },
    #[error("synset {id} has unknown parent {parent}")]
    OrphanSynset { id: String, parent: String },
    #[error("hypernym cycle through synset {id}")]
    Cycle { id: String },
    #[error("taxonomy must have exactly one root, found {count}")]
    UnknownRoot { count: usize },
    #[error("synset {id} lists no words")]
    EmptyWords { id: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Deserialize)]
struct TaxonomyFile {
    synsets: Vec<SynsetRecord>,
}

#[derive(Debug, Deserialize)]
struct SynsetRecord {
    id: String,
    parent: Option<String>,
    words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Synset {
    parent: Option<String>,
    depth: u32, // root has depth 1
}

/// An in-memory word taxonomy: words map to senses, senses form a tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    synsets: BTreeMap<String, Synset>,
    word_senses: BTreeMap<String, BTreeSet<String>>,
    root: String,
}

impl Taxonomy {
    pub fn contains_word(&self, word: &str) -> bool {
        self.word_senses.contains_key(word)
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    fn senses(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.word_senses.get(word)
    }

    fn depth(&self, synset: &str) -> u32 {
        self.synsets[synset].depth
    }

    /// The synset and its ancestors up to the root, nearest first.
    fn ancestry<'a>(&'a self, synset: &'a str) -> Vec<&'a str> {
        let mut chain = vec![synset];
        let mut current = synset;
        while let Some(parent) = self.synsets[current].parent.as_deref() {
            chain.push(parent);
            current = parent;
        }
        chain
    }

    /// Least common subsumer of two senses.
    fn lcs<'a>(&'a self, a: &'a str, b: &'a str) -> &'a str {
        let ancestors_a: BTreeSet<&str> = self.ancestry(a).into_iter().collect();
        for candidate in self.ancestry(b) {
            if ancestors_a.contains(candidate) {
                return candidate;
            }
        }
        self.root.as_str()
    }

    /// Edge distance between two senses in the tree.
    fn distance(&self, a: &str, b: &str) -> u32 {
        let lcs = self.lcs(a, b);
        self.depth(a) + self.depth(b) - 2 * self.depth(lcs)
    }
}

/// Loads and validates a taxonomy file.
///
/// The file must describe a single tree: exactly one synset without a
/// parent (the root), no unknown parents, no cycles.
pub fn load_taxonomy(path: &Path) -> Result<Taxonomy, TaxonomyError> {
    let text = fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: TaxonomyFile = serde_json::from_str(&text).map_err(|e| TaxonomyError::Malformed {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    build_taxonomy(file.synsets)
}

fn build_taxonomy(records: Vec<SynsetRecord>) -> Result<Taxonomy, TaxonomyError> {
    let mut parents: BTreeMap<String, Option<String>> = BTreeMap::new();
    let mut word_senses: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut roots = Vec::new();

    for record in &records {
        if parents
            .insert(record.id.clone(), record.parent.clone())
            .is_some()
        {
            return Err(TaxonomyError::DuplicateSynset { id: record.id.clone() });
        }
        if record.words.is_empty() {
            return Err(TaxonomyError::EmptyWords { id: record.id.clone() });
        }
        if record.parent.is_none() {
            roots.push(record.id.clone());
        }
        for word in &record.words {
            word_senses
                .entry(word.to_lowercase())
                .or_default()
                .insert(record.id.clone());
        }
    }
    if roots.len() != 1 {
        return Err(TaxonomyError::UnknownRoot { count: roots.len() });
    }
    for (id, parent) in &parents {
        if let Some(parent) = parent {
            if !parents.contains_key(parent) {
                return Err(TaxonomyError::OrphanSynset {
                    id: id.clone(),
                    parent: parent.clone(),
                });
            }
        }
    }

    // Depth by walking parents; a walk longer than the synset count is a cycle.
    let mut synsets = BTreeMap::new();
    for (id, parent) in &parents {
        let mut depth = 1u32;
        let mut current = id.as_str();
        while let Some(p) = parents[current].as_deref() {
            depth += 1;
            current = p;
            if depth as usize > parents.len() {
                return Err(TaxonomyError::Cycle { id: id.clone() });
            }
        }
        synsets.insert(
            id.clone(),
            Synset { parent: parent.clone(), depth },
        );
    }

    Ok(Taxonomy {
        synsets,
        word_senses,
        root: roots.remove(0),
    })
}

/// Which similarity metric to use for schema-keyword matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SimilarityMetric {
    #[default]
    Path,
    Wup,
}

impl FromStr for SimilarityMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "path" => Ok(SimilarityMetric::Path),
            "wup" => Ok(SimilarityMetric::Wup),
            other => Err(format!("unknown similarity metric {other:?}, expected path or wup")),
        }
    }
}

/// Metric plus acceptance threshold for schema-keyword matches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    pub metric: SimilarityMetric,
    pub epsilon: f64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig { metric: SimilarityMetric::Path, epsilon: 0.6 }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.epsilon > 0.0 && self.epsilon <= 1.0 {
            Ok(())
        } else {
            Err(format!("epsilon must be in (0, 1], got {}", self.epsilon))
        }
    }
}

/// Path similarity: max over sense pairs of 1 / (number of nodes on the
/// shortest path). Synonyms share a synset, giving path length 1 and score
/// 1.0. Words missing from the taxonomy score 0.
pub fn path_similarity(w1: &str, w2: &str, tax: &Taxonomy) -> f64 {
    best_over_senses(w1, w2, tax, |tax, a, b| {
        1.0 / (tax.distance(a, b) as f64 + 1.0)
    })
}

/// Wu-Palmer similarity: max over sense pairs of
/// 2·depth(lcs) / (depth(a) + depth(b)), with the root at depth 1.
/// Identical synsets score 1.0; out-of-taxonomy words score 0.
pub fn wup_similarity(w1: &str, w2: &str, tax: &Taxonomy) -> f64 {
    best_over_senses(w1, w2, tax, |tax, a, b| {
        let lcs = tax.lcs(a, b);
        2.0 * tax.depth(lcs) as f64 / (tax.depth(a) as f64 + tax.depth(b) as f64)
    })
}

fn best_over_senses(
    w1: &str,
    w2: &str,
    tax: &Taxonomy,
    score: impl Fn(&Taxonomy, &str, &str) -> f64,
) -> f64 {
    let (Some(senses1), Some(senses2)) = (tax.senses(w1), tax.senses(w2)) else {
        return 0.0;
    };
    let mut best = 0.0f64;
    for a in senses1 {
        for b in senses2 {
            best = best.max(score(tax, a, b));
        }
    }
    best
}

pub fn word_similarity(w1: &str, w2: &str, tax: &Taxonomy, metric: SimilarityMetric) -> f64 {
    match metric {
        SimilarityMetric::Path => path_similarity(w1, w2, tax),
        SimilarityMetric::Wup => wup_similarity(w1, w2, tax),
    }
}

/// Similarity between a schema element name and a keyword: the name is
/// tokenized and the best token score wins, so multi-word names like
/// `capital_id` are matchable through any of their parts.
pub fn name_similarity(
    name: &str,
    keyword: &str,
    tax: &Taxonomy,
    metric: SimilarityMetric,
) -> f64 {
    tokenize(name)
        .iter()
        .map(|token| word_similarity(token, keyword, tax, metric))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::taxonomy;

    #[test]
    fn synonyms_score_one() {
        let tax = taxonomy();
        assert_eq!(path_similarity("films", "movie", &tax), 1.0);
        assert_eq!(wup_similarity("films", "movie", &tax), 1.0);
    }

    #[test]
    fn identity_scores_one() {
        let tax = taxonomy();
        for word in ["movie", "person", "city"] {
            assert_eq!(path_similarity(word, word, &tax), 1.0);
            assert_eq!(wup_similarity(word, word, &tax), 1.0);
        }
    }

    #[test]
    fn direct_hyponym_path() {
        let tax = taxonomy();
        // actor is a direct hyponym of person: two nodes on the path.
        assert_eq!(path_similarity("actor", "person", &tax), 0.5);
    }

    #[test]
    fn wup_direct_child() {
        let tax = taxonomy();
        // movie (depth 3) under show (depth 2): 2·2 / (3+2).
        let got = wup_similarity("movie", "show", &tax);
        assert!((got - 0.8).abs() < 1e-12, "{got}");
        // Hand-checked lcs: show itself.
        assert_eq!(path_similarity("movie", "show", &tax), 0.5);
    }

    #[test]
    fn out_of_vocabulary_scores_zero() {
        let tax = taxonomy();
        assert_eq!(path_similarity("zzz", "movie", &tax), 0.0);
        assert_eq!(wup_similarity("movie", "zzz", &tax), 0.0);
    }

    #[test]
    fn symmetry() {
        let tax = taxonomy();
        let words = ["movie", "show", "actor", "person", "city", "capital", "border"];
        for a in words {
            for b in words {
                assert_eq!(
                    path_similarity(a, b, &tax),
                    path_similarity(b, a, &tax)
                );
                assert_eq!(wup_similarity(a, b, &tax), wup_similarity(b, a, &tax));
            }
        }
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let tax = taxonomy();
        let words = ["movie", "film", "show", "actor", "person", "character", "role"];
        for a in words {
            for b in words {
                for metric in [SimilarityMetric::Path, SimilarityMetric::Wup] {
                    let s = word_similarity(a, b, &tax, metric);
                    assert!(s > 0.0 && s <= 1.0, "{a} {b} {s}");
                }
            }
        }
    }

    #[test]
    fn name_similarity_tokenizes_element_names() {
        let tax = taxonomy();
        let s = name_similarity("Capital_ID", "capital", &tax, SimilarityMetric::Path);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn single_synset_taxonomy() {
        let tax = build_taxonomy(vec![SynsetRecord {
            id: "only".into(),
            parent: None,
            words: vec!["alpha".into(), "beta".into()],
        }])
        .unwrap();
        assert_eq!(path_similarity("alpha", "beta", &tax), 1.0);
        assert_eq!(wup_similarity("alpha", "beta", &tax), 1.0);
    }

    #[test]
    fn cyclic_taxonomy_is_rejected() {
        let err = build_taxonomy(vec![
            SynsetRecord { id: "r".into(), parent: None, words: vec!["r".into()] },
            SynsetRecord { id: "a".into(), parent: Some("b".into()), words: vec!["a".into()] },
            SynsetRecord { id: "b".into(), parent: Some("a".into()), words: vec!["b".into()] },
        ])
        .unwrap_err();
        assert!(matches!(err, TaxonomyError::Cycle { .. }), "{err}");
    }

    #[test]
    fn orphan_parent_is_rejected() {
        let err = build_taxonomy(vec![
            SynsetRecord { id: "r".into(), parent: None, words: vec!["r".into()] },
            SynsetRecord { id: "a".into(), parent: Some("nope".into()), words: vec!["a".into()] },
        ])
        .unwrap_err();
        assert!(matches!(err, TaxonomyError::OrphanSynset { .. }), "{err}");
    }

    #[test]
    fn multiple_roots_are_rejected() {
        let err = build_taxonomy(vec![
            SynsetRecord { id: "r1".into(), parent: None, words: vec!["x".into()] },
            SynsetRecord { id: "r2".into(), parent: None, words: vec!["y".into()] },
        ])
        .unwrap_err();
        assert!(matches!(err, TaxonomyError::UnknownRoot { count: 2 }), "{err}");
    }

    #[test]
    fn bundled_taxonomy_keeps_unrelated_branches_below_default_threshold() {
        let tax = taxonomy();
        let cfg = SimilarityConfig::default();
        for (a, b) in [("character", "role"), ("country", "cities"), ("city", "capital")] {
            assert!(path_similarity(a, b, &tax) < cfg.epsilon, "{a} vs {b}");
        }
    }
}
