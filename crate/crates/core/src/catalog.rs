//! Relational data model: schemas, foreign keys, loaded instances, value
//! tokenization, and the schema graph used for join-network generation.
//!
//! Datasets live on disk as a `schema.json` file plus one CSV per relation
//! (UTF-8, comma separated, first row names the attributes). Everything is
//! loaded into an immutable [`DatabaseInstance`]; all later phases only read.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a tuple within one relation.
///
/// Comes from the `id` column when a relation declares one, otherwise the
/// 1-based row ordinal of the CSV file.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
pub struct TupleId(pub u64);

impl fmt::Display for TupleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed {path}: {detail}")]
    Malformed { path: String, detail: String },
    #[error("{context} references unknown relation {relation}")]
    UnknownRelation { relation: String, context: String },
    #[error("relation {relation} declares duplicate attribute {attribute}")]
    DuplicateAttribute { relation: String, attribute: String },
    #[error("relation {relation}: primary key {attribute} is not a declared attribute")]
    BadPrimaryKey { relation: String, attribute: String },
    #[error("self-referencing foreign key on relation {relation} is not allowed")]
    SelfReferencingForeignKey { relation: String },
    #[error("foreign key attribute {relation}.{attribute} is not a declared attribute")]
    BadForeignKeyAttribute { relation: String, attribute: String },
    #[error("relation {relation}: duplicate tuple id {id}")]
    DuplicateTupleId { relation: String, id: TupleId },
    #[error("relation {relation}: duplicate primary key value {value:?}")]
    DuplicatePrimaryKey { relation: String, value: String },
    #[error("relation {relation}: empty primary key value in tuple {id}")]
    EmptyPrimaryKey { relation: String, id: TupleId },
    #[error(
        "relation {relation} tuple {id}: foreign key {attribute}={value:?} \
         matches no {target} primary key"
    )]
    DanglingForeignKey {
        relation: String,
        id: TupleId,
        attribute: String,
        value: String,
        target: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A relation schema: name, ordered attributes, and a single-attribute
/// primary key (composite keys are out of scope for this engine).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSchema {
    pub name: String,
    pub attributes: Vec<String>,
    pub primary_key: String,
}

impl RelationSchema {
    pub fn attribute_position(&self, attribute: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a == attribute)
    }

    pub fn has_attribute(&self, attribute: &str) -> bool {
        self.attribute_position(attribute).is_some()
    }
}

/// A referential integrity constraint. The referenced attribute is always
/// the target relation's primary key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ForeignKey {
    pub from_relation: String,
    pub from_attribute: String,
    pub to_relation: String,
}

/// One stored tuple: its id and the attribute values in schema order.
/// Empty strings are nulls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tuple {
    pub id: TupleId,
    pub values: Vec<String>,
}

/// A relation schema together with its loaded tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub schema: RelationSchema,
    pub tuples: Vec<Tuple>,
}

impl Relation {
    /// Value of `attribute` in `tuple`, or `None` for unknown attributes.
    pub fn value<'t>(&self, tuple: &'t Tuple, attribute: &str) -> Option<&'t str> {
        self.schema
            .attribute_position(attribute)
            .map(|i| tuple.values[i].as_str())
    }

    pub fn tuple_by_id(&self, id: TupleId) -> Option<&Tuple> {
        self.tuples.iter().find(|t| t.id == id)
    }

    fn pk_value<'t>(&self, tuple: &'t Tuple) -> &'t str {
        let pos = self
            .schema
            .attribute_position(&self.schema.primary_key)
            .expect("validated at load");
        tuple.values[pos].as_str()
    }
}

/// A fully validated, immutable database instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatabaseInstance {
    relations: BTreeMap<String, Relation>,
    foreign_keys: Vec<ForeignKey>,
}

impl DatabaseInstance {
    /// Assembles and validates an instance from already-parsed parts.
    pub fn new(
        schemas: Vec<RelationSchema>,
        foreign_keys: Vec<ForeignKey>,
        mut tuples: BTreeMap<String, Vec<Tuple>>,
    ) -> Result<Self, DataError> {
        let mut relations = BTreeMap::new();
        for schema in schemas {
            let mut seen = BTreeSet::new();
            for attribute in &schema.attributes {
                if !seen.insert(attribute.clone()) {
                    return Err(DataError::DuplicateAttribute {
                        relation: schema.name.clone(),
                        attribute: attribute.clone(),
                    });
                }
            }
            if !schema.has_attribute(&schema.primary_key) {
                return Err(DataError::BadPrimaryKey {
                    relation: schema.name.clone(),
                    attribute: schema.primary_key.clone(),
                });
            }
            let rows = tuples.remove(&schema.name).unwrap_or_default();
            if relations
                .insert(schema.name.clone(), Relation { schema, tuples: rows })
                .is_some()
            {
                return Err(DataError::Malformed {
                    path: "schema".into(),
                    detail: "duplicate relation name".into(),
                });
            }
        }
        if let Some(extra) = tuples.keys().next() {
            return Err(DataError::UnknownRelation {
                relation: extra.clone(),
                context: "data file".into(),
            });
        }

        for fk in &foreign_keys {
            if fk.from_relation == fk.to_relation {
                return Err(DataError::SelfReferencingForeignKey {
                    relation: fk.from_relation.clone(),
                });
            }
            let from = relations.get(&fk.from_relation).ok_or_else(|| {
                DataError::UnknownRelation {
                    relation: fk.from_relation.clone(),
                    context: "foreign key".into(),
                }
            })?;
            if !from.schema.has_attribute(&fk.from_attribute) {
                return Err(DataError::BadForeignKeyAttribute {
                    relation: fk.from_relation.clone(),
                    attribute: fk.from_attribute.clone(),
                });
            }
            if !relations.contains_key(&fk.to_relation) {
                return Err(DataError::UnknownRelation {
                    relation: fk.to_relation.clone(),
                    context: "foreign key".into(),
                });
            }
        }

        let db = DatabaseInstance { relations, foreign_keys };
        db.validate_tuples()?;
        Ok(db)
    }

    fn validate_tuples(&self) -> Result<(), DataError> {
        let mut pk_values: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (name, relation) in &self.relations {
            let mut ids = BTreeSet::new();
            let mut pks = BTreeSet::new();
            for tuple in &relation.tuples {
                if !ids.insert(tuple.id) {
                    return Err(DataError::DuplicateTupleId {
                        relation: name.clone(),
                        id: tuple.id,
                    });
                }
                let pk = relation.pk_value(tuple);
                if pk.is_empty() {
                    return Err(DataError::EmptyPrimaryKey {
                        relation: name.clone(),
                        id: tuple.id,
                    });
                }
                if !pks.insert(pk) {
                    return Err(DataError::DuplicatePrimaryKey {
                        relation: name.clone(),
                        value: pk.to_string(),
                    });
                }
            }
            pk_values.insert(name.as_str(), pks);
        }

        for fk in &self.foreign_keys {
            let from = &self.relations[&fk.from_relation];
            let targets = &pk_values[fk.to_relation.as_str()];
            for tuple in &from.tuples {
                let value = from.value(tuple, &fk.from_attribute).expect("validated");
                if !value.is_empty() && !targets.contains(value) {
                    return Err(DataError::DanglingForeignKey {
                        relation: fk.from_relation.clone(),
                        id: tuple.id,
                        attribute: fk.from_attribute.clone(),
                        value: value.to_string(),
                        target: fk.to_relation.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    /// Relations in deterministic (name) order.
    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn foreign_keys(&self) -> &[ForeignKey] {
        &self.foreign_keys
    }

    /// Total attribute count across all relations (the ranking model's N_A).
    pub fn attribute_count(&self) -> usize {
        self.relations.values().map(|r| r.schema.attributes.len()).sum()
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(|r| r.tuples.len()).sum()
    }
}

/// Splits a value into lowercase alphanumeric terms.
///
/// Unicode lowercase, split on any non-alphanumeric character, empty tokens
/// dropped. No stemming, no stopwords. `""` tokenizes to an empty list.
pub fn tokenize(value: &str) -> Vec<String> {
    value
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

/// The set of distinct terms of a value (the tokenizer applied setwise).
pub fn token_set(value: &str) -> BTreeSet<String> {
    tokenize(value).into_iter().collect()
}

#[derive(Debug, Deserialize)]
struct SchemaFile {
    relations: Vec<RelationSchema>,
    foreign_keys: Vec<ForeignKey>,
}

/// Loads a dataset from an explicit schema file and a set of CSV files.
///
/// Each data file is associated with the relation whose name matches its
/// file stem case-insensitively. Relations without a data file get zero
/// tuples.
pub fn load_dataset(schema_file: &Path, data_files: &[PathBuf]) -> Result<DatabaseInstance, DataError> {
    let text = fs::read_to_string(schema_file).map_err(|source| DataError::Io {
        path: schema_file.display().to_string(),
        source,
    })?;
    let schema: SchemaFile =
        serde_json::from_str(&text).map_err(|e| DataError::Malformed {
            path: schema_file.display().to_string(),
            detail: e.to_string(),
        })?;

    let names: BTreeMap<String, String> = schema
        .relations
        .iter()
        .map(|r| (r.name.to_lowercase(), r.name.clone()))
        .collect();

    let mut tuples: BTreeMap<String, Vec<Tuple>> = BTreeMap::new();
    for file in data_files {
        let stem = file
            .file_stem()
            .map(|s| s.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        let relation = names.get(&stem).ok_or_else(|| DataError::UnknownRelation {
            relation: stem.clone(),
            context: format!("data file {}", file.display()),
        })?;
        let schema = schema
            .relations
            .iter()
            .find(|r| &r.name == relation)
            .expect("relation resolved from stem");
        tuples.insert(relation.clone(), read_csv(file, schema)?);
    }

    DatabaseInstance::new(schema.relations, schema.foreign_keys, tuples)
}

/// Loads `dir/schema.json` plus every `*.csv` in `dir`.
pub fn load_dataset_dir(dir: &Path) -> Result<DatabaseInstance, DataError> {
    let schema_file = dir.join("schema.json");
    let mut data_files = Vec::new();
    let entries = fs::read_dir(dir).map_err(|source| DataError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| DataError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let path = entry.path();
        if path.extension().map(|e| e == "csv").unwrap_or(false) {
            data_files.push(path);
        }
    }
    data_files.sort();
    load_dataset(&schema_file, &data_files)
}

fn read_csv(path: &Path, schema: &RelationSchema) -> Result<Vec<Tuple>, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }

    let malformed = |detail: String| DataError::Malformed {
        path: path.display().to_string(),
        detail,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| malformed(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();

    let declared: BTreeSet<&str> = schema.attributes.iter().map(String::as_str).collect();
    let present: BTreeSet<&str> = headers.iter().map(String::as_str).collect();
    if declared != present {
        return Err(malformed(format!(
            "header columns {:?} do not match declared attributes {:?}",
            headers, schema.attributes
        )));
    }

    // Column position of each declared attribute in this file.
    let positions: Vec<usize> = schema
        .attributes
        .iter()
        .map(|a| headers.iter().position(|h| h == a).expect("checked above"))
        .collect();
    let id_column = schema.attribute_position("id");

    let mut tuples = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        if record.len() != headers.len() {
            return Err(malformed(format!(
                "row {} has {} fields, expected {}",
                row + 1,
                record.len(),
                headers.len()
            )));
        }
        let values: Vec<String> = positions
            .iter()
            .map(|&p| record.get(p).unwrap_or("").to_string())
            .collect();
        let id = match id_column {
            Some(i) => TupleId(values[i].parse::<u64>().map_err(|_| {
                malformed(format!("row {}: id {:?} is not an integer", row + 1, values[i]))
            })?),
            None => TupleId(row as u64 + 1),
        };
        tuples.push(Tuple { id, values });
    }
    Ok(tuples)
}

/// The schema graph: one node per relation, one directed edge per ordered
/// relation pair connected by at least one foreign key. An edge carries all
/// its foreign keys in declaration order, so edge multiplicity is the number
/// of referential integrity constraints between the pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaGraph {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), Vec<ForeignKey>>,
}

impl SchemaGraph {
    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(String::as_str)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, &[ForeignKey])> {
        self.edges
            .iter()
            .map(|((a, b), fks)| (a.as_str(), b.as_str(), fks.as_slice()))
    }

    /// Foreign keys realizing the directed edge `from → to`, declaration order.
    pub fn edge_fks(&self, from: &str, to: &str) -> &[ForeignKey] {
        self.edges
            .get(&(from.to_string(), to.to_string()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// The number of referential integrity constraints from `a` to `b`.
    pub fn multiplicity(&self, from: &str, to: &str) -> usize {
        self.edge_fks(from, to).len()
    }

    /// Neighbors over the undirected view of the graph, sorted.
    pub fn undirected_neighbors(&self, relation: &str) -> Vec<&str> {
        let mut out = BTreeSet::new();
        for (a, b) in self.edges.keys() {
            if a == relation {
                out.insert(b.as_str());
            }
            if b == relation {
                out.insert(a.as_str());
            }
        }
        out.into_iter().collect()
    }
}

/// Builds the schema graph of a validated instance.
pub fn build_schema_graph(db: &DatabaseInstance) -> SchemaGraph {
    let nodes = db.relation_names().map(str::to_string).collect();
    let mut edges: BTreeMap<(String, String), Vec<ForeignKey>> = BTreeMap::new();
    for fk in db.foreign_keys() {
        edges
            .entry((fk.from_relation.clone(), fk.to_relation.clone()))
            .or_default()
            .push(fk.clone());
    }
    SchemaGraph { nodes, edges }
}
