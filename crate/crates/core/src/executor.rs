//! Evaluates candidate joining networks: in memory for probing and answer
//! listing, and as emitted SQL text for an external DBMS.
//!
//! A value-match node admits the tuples whose attribute token sets contain
//! its mapped keywords (containment — the exact-label partition was a
//! matching-time concept, and the SQL side uses containment predicates
//! too). Schema-match and keyword-free nodes admit every tuple. Joins
//! follow each edge's assigned foreign key, and distinct value-match nodes
//! over the same relation must bind distinct tuples, mirroring the
//! inequality predicates of the emitted SQL.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::catalog::{token_set, DatabaseInstance, Relation, TupleId};
use crate::cjn::{JoiningNetwork, NetworkProbe, ProbeError};
use crate::matching::SchemaElement;

/// One concrete answer: a tuple per network node plus the projected values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Jnt {
    /// node index → bound tuple, in node order.
    pub bindings: Vec<(usize, TupleId)>,
    /// (node index, attribute, value) in projection order.
    pub projected: Vec<(usize, String, String)>,
}

/// Evaluates a network over an instance, producing every answer (or up to
/// `limit`). Deterministic: candidates are tried in stored tuple order.
pub fn evaluate(network: &JoiningNetwork, db: &DatabaseInstance, limit: Option<usize>) -> Vec<Jnt> {
    evaluate_with_options(network, db, limit, true)
}

/// As [`evaluate`], with the same-relation distinctness predicates
/// optionally disabled (test oracles for the soundness condition need the
/// raw join semantics).
pub fn evaluate_with_options(
    network: &JoiningNetwork,
    db: &DatabaseInstance,
    limit: Option<usize>,
    distinct_value_nodes: bool,
) -> Vec<Jnt> {
    let limit = limit.unwrap_or(usize::MAX);
    if limit == 0 || network.size() == 0 {
        return Vec::new();
    }
    let nodes = network.nodes();
    let relations: Vec<&Relation> = match nodes
        .iter()
        .map(|km| db.relation(km.relation()))
        .collect::<Option<Vec<_>>>()
    {
        Some(rels) => rels,
        None => return Vec::new(),
    };

    // Tuples admissible per node before joins.
    let candidates: Vec<Vec<usize>> = nodes
        .iter()
        .zip(&relations)
        .map(|(km, relation)| {
            (0..relation.tuples.len())
                .filter(|&t| admits(km, relation, t))
                .collect()
        })
        .collect();

    let order = visit_order(network);
    let mut assignment: Vec<Option<usize>> = vec![None; nodes.len()];
    let mut results = Vec::new();
    search(
        network,
        &relations,
        &candidates,
        &order,
        0,
        &mut assignment,
        distinct_value_nodes,
        limit,
        &mut results,
    );
    results
}

fn admits(km: &crate::matching::KeywordMatch, relation: &Relation, tuple_index: usize) -> bool {
    let tuple = &relation.tuples[tuple_index];
    for (attribute, keywords) in km.value_map() {
        let Some(value) = relation.value(tuple, attribute) else {
            return false;
        };
        let tokens = token_set(value);
        if !keywords.iter().all(|k| tokens.contains(k)) {
            return false;
        }
    }
    true
}

/// Nodes in breadth-first order from node zero, so each visited node joins
/// an already-bound neighbor. Generated networks are already in such an
/// order; parsed ones may not be.
fn visit_order(network: &JoiningNetwork) -> Vec<usize> {
    let n = network.size();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(node) = queue.pop_front() {
        order.push(node);
        for edge in network.edges() {
            for (a, b) in [(edge.from, edge.to), (edge.to, edge.from)] {
                if a == node && !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
    }
    order
}

#[allow(clippy::too_many_arguments)]
fn search(
    network: &JoiningNetwork,
    relations: &[&Relation],
    candidates: &[Vec<usize>],
    order: &[usize],
    depth: usize,
    assignment: &mut Vec<Option<usize>>,
    distinct_value_nodes: bool,
    limit: usize,
    results: &mut Vec<Jnt>,
) {
    if results.len() >= limit {
        return;
    }
    if depth == order.len() {
        results.push(materialize(network, relations, assignment));
        return;
    }
    let node = order[depth];
    'candidates: for &tuple_index in &candidates[node] {
        // Join conditions against already-bound neighbors.
        for edge in network.edges() {
            let (bound, constrained_ok) = if edge.from == node {
                match assignment[edge.to] {
                    Some(target) => {
                        let fk_value = relations[node]
                            .value(&relations[node].tuples[tuple_index], &edge.fk.from_attribute)
                            .unwrap_or("");
                        let pk = pk_value(relations[edge.to], target);
                        (true, !fk_value.is_empty() && fk_value == pk)
                    }
                    None => (false, true),
                }
            } else if edge.to == node {
                match assignment[edge.from] {
                    Some(source) => {
                        let fk_value = relations[edge.from]
                            .value(&relations[edge.from].tuples[source], &edge.fk.from_attribute)
                            .unwrap_or("");
                        let pk = pk_value(relations[node], tuple_index);
                        (true, !fk_value.is_empty() && fk_value == pk)
                    }
                    None => (false, true),
                }
            } else {
                (false, true)
            };
            if bound && !constrained_ok {
                continue 'candidates;
            }
        }
        // Distinctness between same-relation value-match nodes.
        if distinct_value_nodes && network.nodes()[node].has_value_keywords() {
            let clash = assignment.iter().enumerate().any(|(other, bound)| {
                other != node
                    && network.nodes()[other].has_value_keywords()
                    && network.nodes()[other].relation() == network.nodes()[node].relation()
                    && *bound == Some(tuple_index)
            });
            if clash {
                continue 'candidates;
            }
        }
        assignment[node] = Some(tuple_index);
        search(
            network,
            relations,
            candidates,
            order,
            depth + 1,
            assignment,
            distinct_value_nodes,
            limit,
            results,
        );
        assignment[node] = None;
        if results.len() >= limit {
            return;
        }
    }
}

fn pk_value(relation: &Relation, tuple_index: usize) -> &str {
    relation
        .value(&relation.tuples[tuple_index], &relation.schema.primary_key)
        .unwrap_or("")
}

fn materialize(
    network: &JoiningNetwork,
    relations: &[&Relation],
    assignment: &[Option<usize>],
) -> Jnt {
    let bindings: Vec<(usize, TupleId)> = assignment
        .iter()
        .enumerate()
        .map(|(node, t)| (node, relations[node].tuples[t.expect("complete")].id))
        .collect();
    let mut projected = Vec::new();
    for (node, t) in assignment.iter().enumerate() {
        let relation = relations[node];
        let tuple = &relation.tuples[t.expect("complete")];
        for attribute in projected_attributes(network, node, relation) {
            let value = relation.value(tuple, &attribute).unwrap_or("").to_string();
            projected.push((node, attribute, value));
        }
    }
    Jnt { bindings, projected }
}

/// Attributes a node contributes to answers, in schema order: everything
/// for a relation-name match, otherwise the attributes its keywords map to.
fn projected_attributes(
    network: &JoiningNetwork,
    node: usize,
    relation: &Relation,
) -> Vec<String> {
    let km = &network.nodes()[node];
    if km.schema_map().contains_key(&SchemaElement::Relation) {
        return relation.schema.attributes.clone();
    }
    let mut named: BTreeSet<&str> = km.value_map().keys().map(String::as_str).collect();
    for element in km.schema_map().keys() {
        if let SchemaElement::Attribute(a) = element {
            named.insert(a.as_str());
        }
    }
    relation
        .schema
        .attributes
        .iter()
        .filter(|a| named.contains(a.as_str()))
        .cloned()
        .collect()
}

/// True when the network produces at least one answer; stops at the first.
pub fn probe_nonvoid(network: &JoiningNetwork, db: &DatabaseInstance) -> bool {
    !evaluate(network, db, Some(1)).is_empty()
}

/// Probe backed by the in-memory evaluator.
pub struct InstanceProbe<'a>(pub &'a DatabaseInstance);

impl NetworkProbe for InstanceProbe<'_> {
    fn is_nonvoid(&self, network: &JoiningNetwork) -> Result<bool, ProbeError> {
        Ok(probe_nonvoid(network, self.0))
    }
}

/// SQL dialect for the containment predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SqlDialect {
    /// `LOWER(col) LIKE '%kw%'`
    #[default]
    Ansi,
    /// `col ILIKE '%kw%'`
    Postgres,
}

impl std::str::FromStr for SqlDialect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ansi" => Ok(SqlDialect::Ansi),
            "postgres" => Ok(SqlDialect::Postgres),
            other => Err(format!("unknown dialect {other:?}, expected ansi or postgres")),
        }
    }
}

/// An emitted SQL query plus the node → table alias mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqlQuery {
    pub text: String,
    pub aliases: Vec<(usize, String)>,
}

/// Renders a network as a conservative SQL join query: one FROM/JOIN per
/// node, one join condition per edge over its assigned foreign key, one
/// containment predicate per value keyword, and inequality predicates
/// between distinct same-relation value-match nodes.
pub fn emit_sql(network: &JoiningNetwork, db: &DatabaseInstance) -> SqlQuery {
    emit_sql_with_dialect(network, db, SqlDialect::Ansi)
}

pub fn emit_sql_with_dialect(
    network: &JoiningNetwork,
    db: &DatabaseInstance,
    dialect: SqlDialect,
) -> SqlQuery {
    let nodes = network.nodes();
    let aliases = aliases(network);
    let order = visit_order(network);

    // The SELECT list mirrors the in-memory projection order exactly.
    let mut select = Vec::new();
    for (node, km) in nodes.iter().enumerate() {
        let alias = &aliases[node].1;
        if km.schema_map().contains_key(&SchemaElement::Relation) {
            select.push(format!("{alias}.*"));
            continue;
        }
        if let Some(relation) = db.relation(km.relation()) {
            for attribute in projected_attributes(network, node, relation) {
                select.push(format!("{alias}.{}", attribute.to_lowercase()));
            }
        }
    }
    let select = if select.is_empty() { "*".to_string() } else { select.join(", ") };

    let mut text = format!(
        "SELECT {select}\nFROM {} {}",
        nodes[order[0]].relation().to_lowercase(),
        aliases[order[0]].1
    );
    let mut placed: BTreeSet<usize> = [order[0]].into();
    for &node in &order[1..] {
        let edge = network
            .edges()
            .iter()
            .find(|e| {
                (e.from == node && placed.contains(&e.to))
                    || (e.to == node && placed.contains(&e.from))
            })
            .expect("tree order");
        let condition = join_condition(network, edge, &aliases, db);
        text.push_str(&format!(
            "\nJOIN {} {} ON {condition}",
            nodes[node].relation().to_lowercase(),
            aliases[node].1
        ));
        placed.insert(node);
    }

    let mut predicates = Vec::new();
    for (node, km) in nodes.iter().enumerate() {
        let alias = &aliases[node].1;
        for (attribute, keywords) in km.value_map() {
            let column = attribute.to_lowercase();
            for keyword in keywords {
                let predicate = match dialect {
                    SqlDialect::Ansi => {
                        format!("LOWER({alias}.{column}) LIKE '%{keyword}%'")
                    }
                    SqlDialect::Postgres => format!("{alias}.{column} ILIKE '%{keyword}%'"),
                };
                predicates.push(predicate);
            }
        }
    }
    for a in 0..nodes.len() {
        for b in a + 1..nodes.len() {
            if nodes[a].has_value_keywords()
                && nodes[b].has_value_keywords()
                && nodes[a].relation() == nodes[b].relation()
            {
                let pk = primary_key(db, nodes[a].relation());
                predicates.push(format!(
                    "{}.{pk} <> {}.{pk}",
                    aliases[a].1, aliases[b].1
                ));
            }
        }
    }
    if !predicates.is_empty() {
        text.push_str("\nWHERE ");
        text.push_str(&predicates.join("\n  AND "));
    }

    SqlQuery { text, aliases }
}

fn primary_key(db: &DatabaseInstance, relation: &str) -> String {
    db.relation(relation)
        .map(|r| r.schema.primary_key.to_lowercase())
        .unwrap_or_else(|| "id".to_string())
}

fn join_condition(
    network: &JoiningNetwork,
    edge: &crate::cjn::NetworkEdge,
    aliases: &[(usize, String)],
    db: &DatabaseInstance,
) -> String {
    let from_alias = &aliases[edge.from].1;
    let to_alias = &aliases[edge.to].1;
    format!(
        "{from_alias}.{} = {to_alias}.{}",
        edge.fk.from_attribute.to_lowercase(),
        primary_key(db, network.nodes()[edge.to].relation())
    )
}

/// Table aliases: the relation's lowercase initial (full name when two
/// distinct relations share an initial), numbered in node order when a
/// relation occurs more than once.
pub fn node_aliases(network: &JoiningNetwork) -> Vec<(usize, String)> {
    aliases(network)
}

fn aliases(network: &JoiningNetwork) -> Vec<(usize, String)> {
    let nodes = network.nodes();
    let mut initials: BTreeMap<char, BTreeSet<&str>> = BTreeMap::new();
    let mut occurrences: BTreeMap<&str, usize> = BTreeMap::new();
    for km in nodes {
        let relation = km.relation();
        let initial = relation.to_lowercase().chars().next().unwrap_or('r');
        initials.entry(initial).or_default().insert(relation);
        *occurrences.entry(relation).or_default() += 1;
    }
    let mut counters: BTreeMap<&str, usize> = BTreeMap::new();
    nodes
        .iter()
        .enumerate()
        .map(|(node, km)| {
            let relation = km.relation();
            let lower = relation.to_lowercase();
            let initial = lower.chars().next().unwrap_or('r');
            let base = if initials[&initial].len() > 1 { lower.clone() } else { initial.to_string() };
            let alias = if occurrences[relation] > 1 {
                let counter = counters.entry(relation).or_insert(0);
                *counter += 1;
                format!("{base}{counter}")
            } else {
                base
            };
            (node, alias)
        })
        .collect()
}
