//! Query matching (phase 2): enumerates minimal covers of the query
//! keywords by keyword matches and ranks them with the TF-IDF / similarity
//! scoring model.
//!
//! Scores drop every factor that is constant across the query's matches
//! (the Bayesian normalizer, the prior of the observed keyword sets, and
//! the query norm of the cosine), so they are comparable only within one
//! query.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::indexes::{SchemaIndex, ValueIndex};
use crate::matching::{KeywordMatch, KeywordQuery, SchemaElement};
use crate::similarity::{name_similarity, SimilarityConfig, Taxonomy};

/// A minimal-cover set of keyword matches with its ranking score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryMatch {
    matches: Vec<KeywordMatch>,
    covered: BTreeSet<String>,
    score: f64,
}

impl QueryMatch {
    fn new(mut matches: Vec<KeywordMatch>) -> Self {
        matches.sort();
        let covered = matches.iter().flat_map(|km| km.covered_keywords()).collect();
        QueryMatch { matches, covered, score: 0.0 }
    }

    /// Builds a query match directly from its members, unscored. Used when
    /// reconstructing golden structures and in tests.
    pub fn from_matches(matches: impl IntoIterator<Item = KeywordMatch>) -> Self {
        QueryMatch::new(matches.into_iter().collect())
    }

    #[doc(hidden)]
    pub fn with_score(mut self, score: f64) -> Self {
        self.score = score;
        self
    }

    pub fn matches(&self) -> &[KeywordMatch] {
        &self.matches
    }

    pub fn covered(&self) -> &BTreeSet<String> {
        &self.covered
    }

    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn contains(&self, km: &KeywordMatch) -> bool {
        self.matches.binary_search(km).is_ok()
    }

    /// Canonical text: member texts sorted inside braces.
    pub fn canonical(&self) -> String {
        let texts: Vec<String> = self.matches.iter().map(|km| km.to_string()).collect();
        format!("{{{}}}", texts.join(","))
    }
}

/// The two ranking factors and their product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingWeights {
    pub value_score: f64,
    pub schema_score: f64,
    pub final_score: f64,
}

#[derive(Debug, Error)]
pub enum RankError {
    /// A value keyword landed on an attribute with a zero norm. Value
    /// keywords come from postings, which force a positive norm, so this
    /// can only signal index corruption.
    #[error("internal: attribute {relation}.{attribute} has zero norm but value keywords")]
    ZeroNorm { relation: String, attribute: String },
}

/// True when `matches` forms a minimal cover of the query keywords: all
/// keywords covered, and removing any member loses at least one keyword.
pub fn minimal_cover(matches: &[KeywordMatch], query: &KeywordQuery) -> bool {
    let target = query.keyword_set();
    let covered: BTreeSet<String> =
        matches.iter().flat_map(|km| km.covered_keywords()).collect();
    if covered != target {
        return false;
    }
    for skip in 0..matches.len() {
        let rest: BTreeSet<String> = matches
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != skip)
            .flat_map(|(_, km)| km.covered_keywords())
            .collect();
        if rest == target {
            return false;
        }
    }
    true
}

/// Enumerates the minimal covers of the query by elements of the pool,
/// smallest subsets first, before any merging. Any minimal cover of n
/// keywords has at most n members, so subset size is capped at
/// min(|Q|, t_max).
pub fn minimal_covers(
    query: &KeywordQuery,
    pool: &[KeywordMatch],
    t_max: usize,
) -> Vec<Vec<KeywordMatch>> {
    let cap = query.len().min(t_max);
    let mut covers = Vec::new();
    let mut indices = Vec::new();
    for size in 1..=cap.min(pool.len()) {
        indices.clear();
        combinations(pool.len(), size, &mut indices, &mut |chosen| {
            let subset: Vec<KeywordMatch> =
                chosen.iter().map(|&i| pool[i].clone()).collect();
            if minimal_cover(&subset, query) {
                covers.push(subset);
            }
        });
    }
    covers
}

fn combinations(n: usize, k: usize, scratch: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    fn go(
        n: usize,
        k: usize,
        start: usize,
        scratch: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if scratch.len() == k {
            visit(scratch);
            return;
        }
        for i in start..n {
            scratch.push(i);
            go(n, k, i + 1, scratch, visit);
            scratch.pop();
        }
    }
    go(n, k, 0, scratch, visit)
}

/// Folds the matches of one cover per relation: all schema matches of a
/// relation merge into one, which then merges into one of the relation's
/// value matches if any. Distinct value matches are disjoint tuple sets and
/// stay separate. The absorbing value match is the canonically least one,
/// for determinism.
pub fn merge_keyword_matches(matches: &[KeywordMatch]) -> Vec<KeywordMatch> {
    let relations: BTreeSet<&str> = matches.iter().map(KeywordMatch::relation).collect();
    let mut merged = Vec::new();
    for relation in relations {
        let mut skms: Vec<&KeywordMatch> = matches
            .iter()
            .filter(|km| km.relation() == relation && km.value_map().is_empty())
            .collect();
        skms.sort();
        let mut vkms: Vec<&KeywordMatch> = matches
            .iter()
            .filter(|km| km.relation() == relation && !km.value_map().is_empty())
            .collect();
        vkms.sort();

        if skms.is_empty() {
            merged.extend(vkms.into_iter().cloned());
            continue;
        }
        let mut folded = KeywordMatch::free(relation);
        for skm in skms {
            folded = folded.intersect(skm).expect("same relation");
        }
        if !vkms.is_empty() {
            folded = folded.intersect(vkms[0]).expect("same relation");
            merged.extend(vkms[1..].iter().copied().cloned());
        }
        merged.push(folded);
    }
    merged.sort();
    merged
}

/// Generates the query matches of a query: all minimal covers of size at
/// most min(|Q|, t_max) drawn from the value and schema matches, each
/// post-processed by the per-relation merge. Duplicates arising from the
/// merge collapse; first-generated wins, preserving enumeration order.
pub fn qm_generate(
    query: &KeywordQuery,
    vkms: &[KeywordMatch],
    skms: &[KeywordMatch],
    t_max: usize,
) -> Vec<QueryMatch> {
    let mut pool: Vec<KeywordMatch> = Vec::with_capacity(vkms.len() + skms.len());
    pool.extend(vkms.iter().cloned());
    pool.extend(skms.iter().cloned());

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for cover in minimal_covers(query, &pool, t_max) {
        let qm = QueryMatch::new(merge_keyword_matches(&cover));
        if seen.insert(qm.matches.clone()) {
            out.push(qm);
        }
    }
    out
}

/// Cosine factor of one value-mapped attribute: the summed TF-IDF weights
/// of its keywords over the attribute norm.
fn value_factor(
    relation: &str,
    attribute: &str,
    keywords: &BTreeSet<String>,
    vi: &ValueIndex,
    si: &SchemaIndex,
) -> Result<f64, RankError> {
    let norm = si.norm(relation, attribute);
    if norm == 0.0 {
        return Err(RankError::ZeroNorm {
            relation: relation.to_string(),
            attribute: attribute.to_string(),
        });
    }
    let mut weight_sum = 0.0;
    for keyword in keywords {
        let tf = vi.frequency(keyword, relation, attribute) as f64;
        weight_sum += tf * vi.iaf(keyword);
    }
    Ok(weight_sum / norm)
}

/// Product of the value factors of one keyword match; `None` when it maps
/// no value keywords. Also the tie-breaking signal for picking a network
/// expansion start node.
pub fn value_contribution(
    km: &KeywordMatch,
    vi: &ValueIndex,
    si: &SchemaIndex,
) -> Result<Option<f64>, RankError> {
    if km.value_map().is_empty() {
        return Ok(None);
    }
    let mut product = 1.0;
    for (attribute, keywords) in km.value_map() {
        product *= value_factor(km.relation(), attribute, keywords, vi, si)?;
    }
    Ok(Some(product))
}

/// Scores one query match: the value score multiplies the cosine factor of
/// every value-mapped attribute, the schema score multiplies the mean name
/// similarity of every schema-mapped element.
pub fn score_query_match(
    qm: &QueryMatch,
    vi: &ValueIndex,
    si: &SchemaIndex,
    tax: &Taxonomy,
    config: &SimilarityConfig,
) -> Result<RankingWeights, RankError> {
    let mut value_score = 1.0;
    let mut schema_score = 1.0;
    for km in qm.matches() {
        for (attribute, keywords) in km.value_map() {
            value_score *= value_factor(km.relation(), attribute, keywords, vi, si)?;
        }
        for (element, keywords) in km.schema_map() {
            let name = match element {
                SchemaElement::Relation => km.relation(),
                SchemaElement::Attribute(a) => a.as_str(),
            };
            let sum: f64 = keywords
                .iter()
                .map(|k| name_similarity(name, k, tax, config.metric))
                .sum();
            schema_score *= sum / keywords.len() as f64;
        }
    }
    Ok(RankingWeights {
        value_score,
        schema_score,
        final_score: value_score * schema_score,
    })
}

/// Ranks query matches by final score, descending. The sort is stable, so
/// equal scores keep generation order.
pub fn qm_rank(
    qms: Vec<QueryMatch>,
    vi: &ValueIndex,
    si: &SchemaIndex,
    tax: &Taxonomy,
    config: &SimilarityConfig,
) -> Result<Vec<QueryMatch>, RankError> {
    let mut scored = Vec::with_capacity(qms.len());
    for mut qm in qms {
        qm.score = score_query_match(&qm, vi, si, tax, config)?.final_score;
        scored.push(qm);
    }
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexes::{SchemaIndex, ValueIndex};
    use crate::matching::{skm_generate, vkm_generate};
    use crate::testutil::{imdb, taxonomy};

    fn query(text: &str) -> KeywordQuery {
        KeywordQuery::parse(text).unwrap()
    }

    fn will_smith_films_qms() -> Vec<QueryMatch> {
        let db = imdb();
        let vi = ValueIndex::build(&db);
        let tax = taxonomy();
        let q = query("will smith films");
        let vkms = vkm_generate(&q, &vi);
        let skms = skm_generate(&q, &db, &SimilarityConfig::default(), &tax);
        qm_generate(&q, &vkms, &skms, 3)
    }

    #[test]
    fn worked_example_query_matches() {
        let canon: Vec<String> =
            will_smith_films_qms().iter().map(|qm| qm.canonical()).collect();
        let m1 = "{MOVIE^S[self^{films}],PERSON^V[name^{smith,will}]}";
        let m2 = "{MOVIE^S[self^{films}],PERSON^V[name^{smith}],PERSON^V[name^{will}]}";
        assert!(canon.contains(&m1.to_string()), "{canon:?}");
        assert!(canon.contains(&m2.to_string()), "{canon:?}");
        // Not total (drops films) and not minimal (redundant smith match).
        let m3 = "{PERSON^V[name^{smith}],PERSON^V[name^{will}]}";
        let m5 =
            "{MOVIE^S[self^{films}],PERSON^V[name^{smith,will}],PERSON^V[name^{smith}]}";
        assert!(!canon.contains(&m3.to_string()));
        assert!(!canon.contains(&m5.to_string()));
        // No query match may contain a keyword-free connector.
        for qm in will_smith_films_qms() {
            assert!(qm.matches().iter().all(|km| !km.is_free()));
        }
    }

    #[test]
    fn every_generated_qm_is_a_minimal_cover() {
        let q = query("will smith films");
        for qm in will_smith_films_qms() {
            assert!(minimal_cover(qm.matches(), &q), "{}", qm.canonical());
            assert!(qm.len() <= 3);
            assert_eq!(qm.covered(), &q.keyword_set());
        }
    }

    #[test]
    fn minimal_cover_rejects_partial_and_redundant_sets() {
        let q = query("will smith films");
        let will = KeywordMatch::value("PERSON", "name", ["will"]);
        let smith = KeywordMatch::value("PERSON", "name", ["smith"]);
        let both = KeywordMatch::value("PERSON", "name", ["will", "smith"]);
        let films = KeywordMatch::schema("MOVIE", SchemaElement::Relation, ["films"]);

        assert!(minimal_cover(&[both.clone(), films.clone()], &q));
        assert!(minimal_cover(&[will.clone(), smith.clone(), films.clone()], &q));
        // M3: not total.
        assert!(!minimal_cover(&[will.clone(), smith.clone()], &q));
        // M4: keyword-free member makes it non-minimal.
        let free = KeywordMatch::free("CHARACTER");
        assert!(!minimal_cover(&[both.clone(), films.clone(), free], &q));
        // M5: redundant member.
        assert!(!minimal_cover(&[both, smith, films], &q));
    }

    #[test]
    fn merge_folds_schema_into_value_match() {
        let skm = KeywordMatch::schema("MOVIE", SchemaElement::Relation, ["films"]);
        let vkm = KeywordMatch::value("MOVIE", "title", ["lord", "rings"]);
        let merged = merge_keyword_matches(&[skm, vkm]);
        assert_eq!(merged.len(), 1);
        assert_eq!(
            merged[0].to_string(),
            "MOVIE^S[self^{films}]^V[title^{lord,rings}]"
        );
    }

    #[test]
    fn merge_keeps_value_matches_apart() {
        let a = KeywordMatch::value("PERSON", "name", ["will"]);
        let b = KeywordMatch::value("PERSON", "name", ["smith"]);
        let merged = merge_keyword_matches(&[a.clone(), b.clone()]);
        // Disjoint value matches never merge; output is canonically sorted.
        assert_eq!(merged, vec![b, a]);
    }

    #[test]
    fn merge_singleton_unchanged() {
        let km = KeywordMatch::value("PERSON", "name", ["will"]);
        assert_eq!(merge_keyword_matches(std::slice::from_ref(&km)), vec![km.clone()]);
    }

    #[test]
    fn singleton_cover_for_single_covering_match() {
        let q = query("lord rings");
        let km = KeywordMatch::value("MOVIE", "title", ["lord", "rings"]);
        let covers = minimal_covers(&q, std::slice::from_ref(&km), 3);
        assert_eq!(covers, vec![vec![km]]);
    }

    #[test]
    fn ranking_puts_compact_interpretation_first() {
        let db = imdb();
        let vi = ValueIndex::build(&db);
        let si = SchemaIndex::build(&db, &vi);
        let tax = taxonomy();
        let ranked = qm_rank(
            will_smith_films_qms(),
            &vi,
            &si,
            &tax,
            &SimilarityConfig::default(),
        )
        .unwrap();
        assert_eq!(
            ranked[0].canonical(),
            "{MOVIE^S[self^{films}],PERSON^V[name^{smith,will}]}"
        );
        let m2 = "{MOVIE^S[self^{films}],PERSON^V[name^{smith}],PERSON^V[name^{will}]}";
        let pos_m2 = ranked.iter().position(|qm| qm.canonical() == m2).unwrap();
        assert!(pos_m2 >= 1);
        for pair in ranked.windows(2) {
            assert!(pair[0].score() >= pair[1].score());
        }
    }

    #[test]
    fn schema_score_of_pure_synonym_skm_is_one() {
        let db = imdb();
        let vi = ValueIndex::build(&db);
        let si = SchemaIndex::build(&db, &vi);
        let tax = taxonomy();
        let qm = QueryMatch::new(vec![KeywordMatch::schema(
            "MOVIE",
            SchemaElement::Relation,
            ["films"],
        )]);
        let weights =
            score_query_match(&qm, &vi, &si, &tax, &SimilarityConfig::default()).unwrap();
        assert_eq!(weights.schema_score, 1.0);
        assert_eq!(weights.value_score, 1.0);
        assert_eq!(weights.final_score, 1.0);
    }

    #[test]
    fn rank_is_stable_for_equal_scores() {
        let a = QueryMatch::new(vec![KeywordMatch::schema(
            "MOVIE",
            SchemaElement::Relation,
            ["films"],
        )]);
        let b = QueryMatch::new(vec![KeywordMatch::schema(
            "CHARACTER",
            SchemaElement::Relation,
            ["character"],
        )]);
        let db = imdb();
        let vi = ValueIndex::build(&db);
        let si = SchemaIndex::build(&db, &vi);
        let tax = taxonomy();
        let ranked = qm_rank(
            vec![a.clone(), b.clone()],
            &vi,
            &si,
            &tax,
            &SimilarityConfig::default(),
        )
        .unwrap();
        assert_eq!(ranked[0].matches(), a.matches());
        assert_eq!(ranked[1].matches(), b.matches());
        assert_eq!(ranked[0].score(), ranked[1].score());
    }

    #[test]
    fn extra_keyword_with_positive_iaf_never_lowers_the_numerator() {
        let db = imdb();
        let vi = ValueIndex::build(&db);
        let si = SchemaIndex::build(&db, &vi);
        let with_one = KeywordMatch::value("PERSON", "name", ["will"]);
        let with_two = KeywordMatch::value("PERSON", "name", ["will", "smith"]);
        let one = value_contribution(&with_one, &vi, &si).unwrap().unwrap();
        let two = value_contribution(&with_two, &vi, &si).unwrap().unwrap();
        assert!(vi.iaf("smith") > 0.0);
        assert!(two >= one);
    }

    #[test]
    fn hearne_bound_holds() {
        let q = query("a b");
        let pool: Vec<KeywordMatch> = vec![
            KeywordMatch::value("R", "x", ["a"]),
            KeywordMatch::value("R", "x", ["b"]),
            KeywordMatch::value("S", "y", ["a"]),
            KeywordMatch::value("S", "y", ["b"]),
        ];
        for cover in minimal_covers(&q, &pool, 5) {
            assert!(cover.len() <= q.len());
        }
    }
}
