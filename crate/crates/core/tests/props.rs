//! Property tests for the tokenizer, query parsing, and the canonical
//! network serialization.

mod common;

use proptest::prelude::*;

use kwsql_core::canon::{canonical_string, parse_network};
use kwsql_core::{tokenize, EngineOptions, KeywordQuery, SearchEngine};

use common::{imdb, taxonomy};

proptest! {
    #[test]
    fn tokenize_is_idempotent_on_its_tokens(input in ".{0,60}") {
        for token in tokenize(&input) {
            prop_assert_eq!(tokenize(&token), vec![token.clone()]);
        }
    }

    #[test]
    fn tokens_are_lowercase_alphanumeric(input in ".{0,60}") {
        for token in tokenize(&input) {
            prop_assert!(!token.is_empty());
            prop_assert!(token.chars().all(|c| c.is_alphanumeric()));
            prop_assert_eq!(token.to_lowercase(), token.clone());
        }
    }

    #[test]
    fn parsed_queries_have_distinct_normalized_keywords(input in ".{0,60}") {
        if let Some(query) = KeywordQuery::parse(&input) {
            prop_assert!(!query.keywords.is_empty());
            let set = query.keyword_set();
            prop_assert_eq!(set.len(), query.keywords.len());
        }
    }
}

#[test]
fn canonical_text_round_trips_for_generated_networks() {
    let engine = SearchEngine::new(imdb(), taxonomy());
    let opts = EngineOptions::default();
    for query in [
        "will smith films",
        "lord rings 2001",
        "will smith character",
        "actor lord rings",
        "movies sean bean",
    ] {
        let outcome = engine.run(query, &opts).unwrap();
        for network in outcome
            .report
            .ranked
            .iter()
            .chain(outcome.report.pruned_void.iter())
        {
            let text = network.canonical();
            let (nodes, edges) = parse_network(&text).unwrap();
            assert_eq!(canonical_string(&nodes, &edges), text, "round trip for {query}");
        }
    }
}
