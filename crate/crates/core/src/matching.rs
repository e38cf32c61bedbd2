//! Keyword matching (phase 1): value-keyword matches, schema-keyword
//! matches, and the generalized keyword-match algebra that later phases
//! combine into query matches.
//!
//! A value-keyword match groups the tuples of one relation whose attribute
//! values contain exactly a given set of query keywords per attribute; the
//! groups of one query partition the keyword-bearing tuples. A
//! schema-keyword match associates keywords with a relation or attribute
//! name through lexical similarity and never filters tuples.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{token_set, tokenize, DatabaseInstance, TupleId};
use crate::indexes::ValueIndex;
use crate::similarity::{name_similarity, SimilarityConfig, Taxonomy};

/// A schema element a keyword can attach to: the relation name itself
/// (printed `self`) or one of its attributes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SchemaElement {
    Relation,
    Attribute(String),
}

impl fmt::Display for SchemaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaElement::Relation => write!(f, "self"),
            SchemaElement::Attribute(name) => write!(f, "{name}"),
        }
    }
}

/// A generalized keyword match: one relation plus per-element schema-keyword
/// sets and per-attribute value-keyword sets. Empty keyword sets are never
/// stored; a match with both maps empty is a keyword-free match, usable only
/// as a connector node in joining networks.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct KeywordMatch {
    relation: String,
    schema_map: BTreeMap<SchemaElement, BTreeSet<String>>,
    value_map: BTreeMap<String, BTreeSet<String>>,
}

impl KeywordMatch {
    pub fn free(relation: impl Into<String>) -> Self {
        KeywordMatch { relation: relation.into(), ..Default::default() }
    }

    pub fn value(
        relation: impl Into<String>,
        attribute: impl Into<String>,
        keywords: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        let mut km = KeywordMatch::free(relation);
        km.add_value_keywords(attribute, keywords);
        km
    }

    pub fn schema(
        relation: impl Into<String>,
        element: SchemaElement,
        keywords: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        let mut km = KeywordMatch::free(relation);
        km.add_schema_keywords(element, keywords);
        km
    }

    pub fn add_value_keywords(
        &mut self,
        attribute: impl Into<String>,
        keywords: impl IntoIterator<Item = impl Into<String>>,
    ) {
        let set: BTreeSet<String> = keywords.into_iter().map(Into::into).collect();
        if !set.is_empty() {
            self.value_map.entry(attribute.into()).or_default().extend(set);
        }
    }

    pub fn add_schema_keywords(
        &mut self,
        element: SchemaElement,
        keywords: impl IntoIterator<Item = impl Into<String>>,
    ) {
        let set: BTreeSet<String> = keywords.into_iter().map(Into::into).collect();
        if !set.is_empty() {
            self.schema_map.entry(element).or_default().extend(set);
        }
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn schema_map(&self) -> &BTreeMap<SchemaElement, BTreeSet<String>> {
        &self.schema_map
    }

    pub fn value_map(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.value_map
    }

    pub fn is_free(&self) -> bool {
        self.schema_map.is_empty() && self.value_map.is_empty()
    }

    pub fn has_value_keywords(&self) -> bool {
        !self.value_map.is_empty()
    }

    /// All keywords this match covers, across both maps.
    pub fn covered_keywords(&self) -> BTreeSet<String> {
        self.schema_map
            .values()
            .chain(self.value_map.values())
            .flatten()
            .cloned()
            .collect()
    }

    /// Intersection of two keyword matches. Undefined across relations;
    /// over the same relation both maps union element-wise. The keyword-free
    /// match is the identity element.
    pub fn intersect(&self, other: &KeywordMatch) -> Option<KeywordMatch> {
        if self.relation != other.relation {
            return None;
        }
        let mut merged = self.clone();
        for (element, keywords) in &other.schema_map {
            merged
                .schema_map
                .entry(element.clone())
                .or_default()
                .extend(keywords.iter().cloned());
        }
        for (attribute, keywords) in &other.value_map {
            merged
                .value_map
                .entry(attribute.clone())
                .or_default()
                .extend(keywords.iter().cloned());
        }
        Some(merged)
    }

    /// True when every named attribute exists in the relation's schema.
    pub fn conforms_to(&self, db: &DatabaseInstance) -> bool {
        let Some(relation) = db.relation(&self.relation) else {
            return false;
        };
        let schema_ok = self.schema_map.keys().all(|element| match element {
            SchemaElement::Relation => true,
            SchemaElement::Attribute(a) => relation.schema.has_attribute(a),
        });
        schema_ok && self.value_map.keys().all(|a| relation.schema.has_attribute(a))
    }
}

impl fmt::Display for KeywordMatch {
    /// Canonical text form, e.g. `MOVIE^S[self^{films}]^V[title^{lord,rings}]`.
    /// Free matches print as the bare relation name.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.relation)?;
        if !self.schema_map.is_empty() {
            write!(f, "^S[")?;
            for (i, (element, keywords)) in self.schema_map.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{element}^{{{}}}", join(keywords))?;
            }
            write!(f, "]")?;
        }
        if !self.value_map.is_empty() {
            write!(f, "^V[")?;
            for (i, (attribute, keywords)) in self.value_map.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{attribute}^{{{}}}", join(keywords))?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

fn join(keywords: &BTreeSet<String>) -> String {
    keywords.iter().cloned().collect::<Vec<_>>().join(",")
}

/// A tokenized keyword query: the raw text plus its distinct terms in first
/// appearance order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordQuery {
    pub raw: String,
    pub keywords: Vec<String>,
}

impl KeywordQuery {
    /// Tokenizes and deduplicates; `None` when nothing survives tokenization.
    pub fn parse(raw: &str) -> Option<KeywordQuery> {
        let mut seen = BTreeSet::new();
        let mut keywords = Vec::new();
        for term in tokenize(raw) {
            if seen.insert(term.clone()) {
                keywords.push(term);
            }
        }
        if keywords.is_empty() {
            return None;
        }
        Some(KeywordQuery { raw: raw.to_string(), keywords })
    }

    pub fn keyword_set(&self) -> BTreeSet<String> {
        self.keywords.iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.keywords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keywords.is_empty()
    }
}

/// The matching-time table: value-keyword matches with their tuple extents.
pub type VkmPool = BTreeMap<KeywordMatch, BTreeSet<TupleId>>;

/// Generates the value-keyword matches of a query, returning the disjoint
/// pool (match → tuple set). Later phases only need the keys; the extents
/// exist to establish disjointness during generation.
pub fn vkm_pool(query: &KeywordQuery, vi: &ValueIndex) -> VkmPool {
    let mut pool: VkmPool = BTreeMap::new();
    for keyword in &query.keywords {
        if let Some(relations) = vi.lookup(keyword) {
            for (relation, attributes) in relations {
                for (attribute, tuples) in attributes {
                    let km = KeywordMatch::value(relation, attribute, [keyword.clone()]);
                    pool.entry(km).or_default().extend(tuples.iter().copied());
                }
            }
        }
    }
    vkm_intersect(pool)
}

/// Value-keyword matches of a query, canonical order.
pub fn vkm_generate(query: &KeywordQuery, vi: &ValueIndex) -> Vec<KeywordMatch> {
    vkm_pool(query, vi).into_keys().collect()
}

/// Drives overlapping partial matches to the disjoint fixed point.
///
/// Level by level (pairs, then their products, ...), every same-relation
/// pair with a nonempty tuple intersection spawns the merged match for the
/// next level and claims those tuples from both parents. Keyword sets grow
/// strictly and are bounded by the query, so the process terminates with
/// each keyword-bearing tuple sitting in the match labeled exactly like it.
pub fn vkm_intersect(pool: VkmPool) -> VkmPool {
    let mut result: VkmPool = BTreeMap::new();
    let mut current = pool;
    while !current.is_empty() {
        let keys: Vec<KeywordMatch> = current.keys().cloned().collect();
        let mut next: VkmPool = BTreeMap::new();
        let mut claimed: BTreeMap<KeywordMatch, BTreeSet<TupleId>> = BTreeMap::new();
        for i in 0..keys.len() {
            for j in i + 1..keys.len() {
                let (a, b) = (&keys[i], &keys[j]);
                let Some(merged) = a.intersect(b) else {
                    continue;
                };
                let overlap: BTreeSet<TupleId> =
                    current[a].intersection(&current[b]).copied().collect();
                if overlap.is_empty() {
                    continue;
                }
                next.entry(merged).or_default().extend(overlap.iter().copied());
                claimed.entry(a.clone()).or_default().extend(overlap.iter().copied());
                claimed.entry(b.clone()).or_default().extend(overlap.iter().copied());
            }
        }
        for (km, tuples) in claimed {
            if let Some(remaining) = current.get_mut(&km) {
                for t in &tuples {
                    remaining.remove(t);
                }
                if remaining.is_empty() {
                    current.remove(&km);
                }
            }
        }
        for (km, tuples) in current {
            result.entry(km).or_default().extend(tuples);
        }
        current = next;
    }
    result
}

/// Generates schema-keyword matches: one per (keyword, schema element) pair
/// whose name similarity reaches the configured threshold. Relation-name
/// matches attach to the artificial `self` element. Schema matches never
/// constrain tuples.
pub fn skm_generate(
    query: &KeywordQuery,
    db: &DatabaseInstance,
    config: &SimilarityConfig,
    tax: &Taxonomy,
) -> Vec<KeywordMatch> {
    let mut out = BTreeSet::new();
    for keyword in &query.keywords {
        for relation in db.relations() {
            let name = &relation.schema.name;
            if name_similarity(name, keyword, tax, config.metric) >= config.epsilon {
                out.insert(KeywordMatch::schema(
                    name.clone(),
                    SchemaElement::Relation,
                    [keyword.clone()],
                ));
            }
            for attribute in &relation.schema.attributes {
                if name_similarity(attribute, keyword, tax, config.metric) >= config.epsilon {
                    out.insert(KeywordMatch::schema(
                        name.clone(),
                        SchemaElement::Attribute(attribute.clone()),
                        [keyword.clone()],
                    ));
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Exact per-attribute keyword labels of a tuple against a query: attribute
/// → W(t[A]) ∩ Q, empty intersections omitted. This is the label the VKM
/// partition assigns to keyword-bearing tuples; test oracles rebuild the
/// partition from it.
pub fn tuple_label(
    db: &DatabaseInstance,
    relation: &str,
    tuple_id: TupleId,
    query: &KeywordQuery,
) -> Option<KeywordMatch> {
    let rel = db.relation(relation)?;
    let tuple = rel.tuple_by_id(tuple_id)?;
    let query_set = query.keyword_set();
    let mut km = KeywordMatch::free(relation);
    for (attribute, value) in rel.schema.attributes.iter().zip(&tuple.values) {
        let hits: Vec<String> = token_set(value).intersection(&query_set).cloned().collect();
        km.add_value_keywords(attribute.clone(), hits);
    }
    Some(km)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexes::ValueIndex;
    use crate::testutil::{imdb, taxonomy};

    fn query(text: &str) -> KeywordQuery {
        KeywordQuery::parse(text).unwrap()
    }

    fn vkm_texts(query_text: &str) -> Vec<String> {
        let db = imdb();
        let vi = ValueIndex::build(&db);
        vkm_generate(&query(query_text), &vi)
            .iter()
            .map(|km| km.to_string())
            .collect()
    }

    #[test]
    fn will_smith_films_vkms() {
        let texts = vkm_texts("will smith films");
        // The three person matches, plus the title and character hits for
        // smith; "films" appears in no value.
        assert_eq!(
            texts,
            vec![
                "CHARACTER^V[name^{smith}]",
                "MOVIE^V[title^{smith}]",
                "PERSON^V[name^{smith}]",
                "PERSON^V[name^{smith,will}]",
                "PERSON^V[name^{will}]",
            ]
        );
    }

    #[test]
    fn will_smith_films_person_extents() {
        let db = imdb();
        let vi = ValueIndex::build(&db);
        let pool = vkm_pool(&query("will smith films"), &vi);
        let get = |text: &str| {
            pool.iter()
                .find(|(km, _)| km.to_string() == text)
                .map(|(_, tuples)| tuples.iter().map(|t| t.0).collect::<Vec<_>>())
                .unwrap()
        };
        assert_eq!(get("PERSON^V[name^{smith,will}]"), vec![1]);
        assert_eq!(get("PERSON^V[name^{will}]"), vec![2]);
        assert_eq!(get("PERSON^V[name^{smith}]"), vec![3]);
    }

    #[test]
    fn lord_rings_2001_spans_two_attributes() {
        let texts = vkm_texts("lord rings 2001");
        assert_eq!(
            texts,
            vec![
                "MOVIE^V[title^{lord,rings}]",
                "MOVIE^V[title^{lord,rings},year^{2001}]",
                "MOVIE^V[year^{2001}]",
            ]
        );
    }

    #[test]
    fn no_value_occurrences_yields_no_vkms() {
        assert!(vkm_texts("zebra quagga").is_empty());
    }

    #[test]
    fn intersect_splits_overlapping_postings() {
        // The worked posting example: will {t1,t2}, smith {t1,t3}.
        let mut pool: VkmPool = BTreeMap::new();
        pool.insert(
            KeywordMatch::value("PERSON", "name", ["will"]),
            [TupleId(1), TupleId(2)].into(),
        );
        pool.insert(
            KeywordMatch::value("PERSON", "name", ["smith"]),
            [TupleId(1), TupleId(3)].into(),
        );
        let fixed = vkm_intersect(pool);
        let as_text: Vec<(String, Vec<u64>)> = fixed
            .iter()
            .map(|(km, ts)| (km.to_string(), ts.iter().map(|t| t.0).collect()))
            .collect();
        assert_eq!(
            as_text,
            vec![
                ("PERSON^V[name^{smith}]".to_string(), vec![3]),
                ("PERSON^V[name^{smith,will}]".to_string(), vec![1]),
                ("PERSON^V[name^{will}]".to_string(), vec![2]),
            ]
        );
    }

    #[test]
    fn three_way_overlap_partitions_a_synthetic_relation() {
        // Seven tuples covering every nonempty keyword combination; the
        // fixed point must label each tuple with exactly its combination.
        let t = |ids: &[u64]| ids.iter().map(|&i| TupleId(i)).collect::<BTreeSet<_>>();
        let mut pool: VkmPool = BTreeMap::new();
        pool.insert(KeywordMatch::value("R", "v", ["a"]), t(&[1, 4, 5, 7]));
        pool.insert(KeywordMatch::value("R", "v", ["b"]), t(&[2, 4, 6, 7]));
        pool.insert(KeywordMatch::value("R", "v", ["c"]), t(&[3, 5, 6, 7]));
        let fixed = vkm_intersect(pool);
        let expected: Vec<(KeywordMatch, BTreeSet<TupleId>)> = vec![
            (KeywordMatch::value("R", "v", ["a"]), t(&[1])),
            (KeywordMatch::value("R", "v", ["a", "b"]), t(&[4])),
            (KeywordMatch::value("R", "v", ["a", "b", "c"]), t(&[7])),
            (KeywordMatch::value("R", "v", ["a", "c"]), t(&[5])),
            (KeywordMatch::value("R", "v", ["b"]), t(&[2])),
            (KeywordMatch::value("R", "v", ["b", "c"]), t(&[6])),
            (KeywordMatch::value("R", "v", ["c"]), t(&[3])),
        ];
        assert_eq!(fixed.into_iter().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn disjoint_pool_is_a_fixed_point() {
        let mut pool: VkmPool = BTreeMap::new();
        pool.insert(KeywordMatch::value("R", "a", ["x"]), [TupleId(1)].into());
        pool.insert(KeywordMatch::value("R", "a", ["y"]), [TupleId(2)].into());
        pool.insert(KeywordMatch::value("S", "b", ["x"]), [TupleId(1)].into());
        assert_eq!(vkm_intersect(pool.clone()), pool);
    }

    #[test]
    fn skm_films_matches_movie_relation() {
        let db = imdb();
        let tax = taxonomy();
        let skms = skm_generate(&query("will smith films"), &db, &SimilarityConfig::default(), &tax);
        let texts: Vec<String> = skms.iter().map(|km| km.to_string()).collect();
        assert!(texts.contains(&"MOVIE^S[self^{films}]".to_string()), "{texts:?}");
    }

    #[test]
    fn skm_at_epsilon_one_only_exact_synonyms() {
        let db = imdb();
        let tax = taxonomy();
        let cfg = SimilarityConfig { epsilon: 1.0, ..Default::default() };
        let skms = skm_generate(&query("will smith films"), &db, &cfg, &tax);
        let texts: Vec<String> = skms.iter().map(|km| km.to_string()).collect();
        assert_eq!(texts, vec!["MOVIE^S[self^{films}]".to_string()]);
    }

    #[test]
    fn out_of_taxonomy_keyword_contributes_no_skm() {
        let db = imdb();
        let tax = taxonomy();
        let skms = skm_generate(&query("theakston"), &db, &SimilarityConfig::default(), &tax);
        assert!(skms.is_empty());
    }

    #[test]
    fn intersect_requires_same_relation() {
        let a = KeywordMatch::value("PERSON", "name", ["will"]);
        let b = KeywordMatch::schema("MOVIE", SchemaElement::Relation, ["films"]);
        assert!(a.intersect(&b).is_none());
    }

    #[test]
    fn free_match_is_identity_for_intersect() {
        let km = KeywordMatch::value("PERSON", "name", ["will"]);
        let free = KeywordMatch::free("PERSON");
        assert_eq!(km.intersect(&free), Some(km.clone()));
        assert_eq!(free.intersect(&km), Some(km));
    }

    #[test]
    fn intersect_unions_schema_and_value_maps() {
        let schema = KeywordMatch::schema(
            "PERSON",
            SchemaElement::Attribute("name".into()),
            ["smith"],
        );
        let value = KeywordMatch::value("PERSON", "name", ["will"]);
        let merged = schema.intersect(&value).unwrap();
        assert_eq!(merged.to_string(), "PERSON^S[name^{smith}]^V[name^{will}]");
    }

    #[test]
    fn intersect_is_commutative_and_associative_on_same_relation() {
        let a = KeywordMatch::value("R", "x", ["k1"]);
        let b = KeywordMatch::schema("R", SchemaElement::Relation, ["k2"]);
        let c = KeywordMatch::value("R", "y", ["k3"]);
        assert_eq!(a.intersect(&b), b.intersect(&a));
        let ab_c = a.intersect(&b).unwrap().intersect(&c);
        let a_bc = a.intersect(&b.intersect(&c).unwrap());
        assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn query_parse_dedups_and_normalizes() {
        let q = KeywordQuery::parse("Will  SMITH will").unwrap();
        assert_eq!(q.keywords, vec!["will", "smith"]);
        assert!(KeywordQuery::parse("  ,, ").is_none());
    }

    #[test]
    fn keyword_both_value_and_schema_produces_both_matches() {
        // "character" is a relation name; plant it in a value too.
        let db = imdb();
        let vi = ValueIndex::build(&db);
        let tax = taxonomy();
        let q = query("character smith");
        let vkms = vkm_generate(&q, &vi);
        let skms = skm_generate(&q, &db, &SimilarityConfig::default(), &tax);
        assert!(skms.iter().any(|km| km.to_string() == "CHARACTER^S[self^{character}]"));
        // smith value matches still exist independently.
        assert!(vkms.iter().any(|km| km.relation() == "PERSON"));
    }
}
