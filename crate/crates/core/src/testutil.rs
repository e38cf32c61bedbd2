//! Shared fixtures for unit tests: the bundled toy datasets and taxonomy.

use std::path::PathBuf;

use crate::catalog::{load_dataset_dir, DatabaseInstance};
use crate::similarity::{load_taxonomy, Taxonomy};

pub fn datasets_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../datasets")
}

pub fn imdb() -> DatabaseInstance {
    load_dataset_dir(&datasets_dir().join("imdb_toy")).expect("imdb_toy fixture loads")
}

pub fn mondial() -> DatabaseInstance {
    load_dataset_dir(&datasets_dir().join("mondial_toy")).expect("mondial_toy fixture loads")
}

pub fn taxonomy() -> Taxonomy {
    load_taxonomy(&datasets_dir().join("mini_wordnet.json")).expect("taxonomy loads")
}
