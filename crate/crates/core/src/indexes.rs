//! Preprocessing-stage indexes: the Value Index (term postings) and the
//! Schema Index (per-attribute TF-IDF statistics).
//!
//! Both are built once per dataset, are immutable afterwards, and can be
//! persisted to a binary cache keyed by a content hash of the instance.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::catalog::{token_set, DatabaseInstance, TupleId};

/// Inverted index over attribute values: term → relation → attribute → the
/// tuples whose value contains the term. Also carries the global statistics
/// the ranking model reads: the total attribute count and, per term, how
/// many (relation, attribute) pairs it occurs in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueIndex {
    postings: BTreeMap<String, BTreeMap<String, BTreeMap<String, BTreeSet<TupleId>>>>,
    attribute_count: usize,
    term_attribute_count: BTreeMap<String, usize>,
}

impl ValueIndex {
    /// Scans every attribute value of every tuple exactly once.
    pub fn build(db: &DatabaseInstance) -> Self {
        let mut postings: BTreeMap<String, BTreeMap<String, BTreeMap<String, BTreeSet<TupleId>>>> =
            BTreeMap::new();
        for relation in db.relations() {
            for tuple in &relation.tuples {
                for (attribute, value) in relation.schema.attributes.iter().zip(&tuple.values) {
                    for term in token_set(value) {
                        postings
                            .entry(term)
                            .or_default()
                            .entry(relation.schema.name.clone())
                            .or_default()
                            .entry(attribute.clone())
                            .or_default()
                            .insert(tuple.id);
                    }
                }
            }
        }
        let term_attribute_count = postings
            .iter()
            .map(|(term, rels)| {
                let n = rels.values().map(|attrs| attrs.len()).sum();
                (term.clone(), n)
            })
            .collect();
        ValueIndex {
            postings,
            attribute_count: db.attribute_count(),
            term_attribute_count,
        }
    }

    pub fn lookup(
        &self,
        term: &str,
    ) -> Option<&BTreeMap<String, BTreeMap<String, BTreeSet<TupleId>>>> {
        self.postings.get(term)
    }

    /// Posting set for one (term, relation, attribute) triple; empty when absent.
    pub fn postings(&self, term: &str, relation: &str, attribute: &str) -> BTreeSet<TupleId> {
        self.postings
            .get(term)
            .and_then(|r| r.get(relation))
            .and_then(|a| a.get(attribute))
            .cloned()
            .unwrap_or_default()
    }

    /// Term frequency of `term` in an attribute: the posting-set cardinality.
    /// Within-tuple repetition does not count.
    pub fn frequency(&self, term: &str, relation: &str, attribute: &str) -> usize {
        self.postings
            .get(term)
            .and_then(|r| r.get(relation))
            .and_then(|a| a.get(attribute))
            .map(BTreeSet::len)
            .unwrap_or(0)
    }

    /// Total number of attributes in the database (N_A).
    pub fn attribute_count(&self) -> usize {
        self.attribute_count
    }

    /// Number of (relation, attribute) pairs the term occurs in (n_t).
    pub fn term_attribute_count(&self, term: &str) -> usize {
        self.term_attribute_count.get(term).copied().unwrap_or(0)
    }

    /// Inverse attribute frequency ln(N_A / n_t); 0 for unseen terms.
    pub fn iaf(&self, term: &str) -> f64 {
        match self.term_attribute_count(term) {
            0 => 0.0,
            n => (self.attribute_count as f64 / n as f64).ln(),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }
}

/// Per-attribute statistics read by the ranking model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct AttributeStats {
    /// sqrt of the sum of squared TF-IDF weights over the attribute's terms.
    pub norm: f64,
    /// Largest posting-set size among the attribute's terms. Stored for
    /// completeness; the ranking reads only `norm`.
    pub max_frequency: u64,
}

/// Statistics for every (relation, attribute) pair of the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaIndex {
    stats: BTreeMap<String, BTreeMap<String, AttributeStats>>,
}

impl SchemaIndex {
    pub fn build(db: &DatabaseInstance, vi: &ValueIndex) -> Self {
        let mut stats: BTreeMap<String, BTreeMap<String, AttributeStats>> = BTreeMap::new();
        for relation in db.relations() {
            let entry = stats.entry(relation.schema.name.clone()).or_default();
            for attribute in &relation.schema.attributes {
                entry.insert(attribute.clone(), AttributeStats::default());
            }
        }
        for term in vi.terms().map(str::to_string).collect::<Vec<_>>() {
            let iaf = vi.iaf(&term);
            if let Some(rels) = vi.lookup(&term) {
                for (relation, attrs) in rels {
                    for (attribute, tuples) in attrs {
                        let slot = stats
                            .get_mut(relation)
                            .and_then(|r| r.get_mut(attribute))
                            .expect("postings only reference schema attributes");
                        let weight = tuples.len() as f64 * iaf;
                        slot.norm += weight * weight;
                        slot.max_frequency = slot.max_frequency.max(tuples.len() as u64);
                    }
                }
            }
        }
        for rel in stats.values_mut() {
            for slot in rel.values_mut() {
                slot.norm = slot.norm.sqrt();
            }
        }
        SchemaIndex { stats }
    }

    pub fn attribute(&self, relation: &str, attribute: &str) -> AttributeStats {
        self.stats
            .get(relation)
            .and_then(|r| r.get(attribute))
            .copied()
            .unwrap_or_default()
    }

    pub fn norm(&self, relation: &str, attribute: &str) -> f64 {
        self.attribute(relation, attribute).norm
    }
}

pub fn build_value_index(db: &DatabaseInstance) -> ValueIndex {
    ValueIndex::build(db)
}

pub fn build_schema_index(db: &DatabaseInstance, vi: &ValueIndex) -> SchemaIndex {
    SchemaIndex::build(db, vi)
}

const CACHE_MAGIC: &[u8; 8] = b"KWSQLIX\0";
const CACHE_VERSION: u32 = 1;

/// Content hash of an instance, used as the cache key.
pub fn dataset_fingerprint(db: &DatabaseInstance) -> [u8; 32] {
    let bytes = serde_json::to_vec(db).expect("instance serializes");
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    hasher.finalize().into()
}

/// Writes both indexes to a versioned binary cache file.
pub fn save_index_cache(
    path: &Path,
    fingerprint: [u8; 32],
    vi: &ValueIndex,
    si: &SchemaIndex,
) -> std::io::Result<()> {
    let mut out = Vec::new();
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&fingerprint);
    let payload = bincode::serialize(&(vi, si))
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    out.extend_from_slice(&payload);
    fs::write(path, out)
}

/// Reads the cache back; `None` on any mismatch (missing file, wrong magic,
/// wrong version, stale fingerprint, corrupt payload). Callers rebuild then.
pub fn load_index_cache(path: &Path, fingerprint: [u8; 32]) -> Option<(ValueIndex, SchemaIndex)> {
    let bytes = fs::read(path).ok()?;
    let header = CACHE_MAGIC.len() + 4 + 32;
    if bytes.len() < header || &bytes[..CACHE_MAGIC.len()] != CACHE_MAGIC {
        return None;
    }
    let mut version = [0u8; 4];
    version.copy_from_slice(&bytes[CACHE_MAGIC.len()..CACHE_MAGIC.len() + 4]);
    if u32::from_le_bytes(version) != CACHE_VERSION {
        return None;
    }
    if bytes[CACHE_MAGIC.len() + 4..header] != fingerprint {
        return None;
    }
    bincode::deserialize(&bytes[header..]).ok()
}
