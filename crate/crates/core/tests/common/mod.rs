//! Fixture helpers shared by the integration tests. Not every test
//! target uses every helper.
#![allow(dead_code)]

use std::path::PathBuf;

use kwsql_core::similarity::Taxonomy;
use kwsql_core::{load_dataset_dir, load_taxonomy, DatabaseInstance};

pub fn datasets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../datasets")
}

pub fn imdb() -> DatabaseInstance {
    load_dataset_dir(&datasets_dir().join("imdb_toy")).expect("imdb_toy loads")
}

pub fn mondial() -> DatabaseInstance {
    load_dataset_dir(&datasets_dir().join("mondial_toy")).expect("mondial_toy loads")
}

pub fn taxonomy() -> Taxonomy {
    load_taxonomy(&datasets_dir().join("mini_wordnet.json")).expect("taxonomy loads")
}

/// Distinct terms occurring anywhere in the instance, plus a few schema
/// words, for drawing random queries.
pub fn vocabulary(db: &DatabaseInstance) -> Vec<String> {
    let vi = kwsql_core::build_value_index(db);
    let mut words: Vec<String> = vi.terms().map(str::to_string).collect();
    for extra in ["films", "movies", "character", "person", "cities", "country", "capital"] {
        if !words.iter().any(|w| w == extra) {
            words.push(extra.to_string());
        }
    }
    words.sort();
    words
}
