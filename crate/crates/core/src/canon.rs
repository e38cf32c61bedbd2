//! Canonical text forms for keyword matches and joining networks, plus the
//! parser for reading them back (query-set golden standards are stored in
//! this form).
//!
//! A network prints as a rooted tree: `NODE(edge-child,edge-child,...)`
//! with children sorted, an edge being `-[fk_attr]->` when the parent
//! references the child and `<-[fk_attr]-` when the child references the
//! parent. The canonical form of the whole (unrooted) network is the least
//! string over all root choices, so equal strings mean isomorphic networks.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::catalog::{DatabaseInstance, ForeignKey, SchemaGraph};
use crate::cjn::NetworkEdge;
use crate::matching::{KeywordMatch, SchemaElement};

/// Root-independent canonical serialization of a network.
pub fn canonical_string(nodes: &[KeywordMatch], edges: &[NetworkEdge]) -> String {
    if nodes.is_empty() {
        return String::new();
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (index, edge) in edges.iter().enumerate() {
        adjacency[edge.from].push(index);
        adjacency[edge.to].push(index);
    }
    (0..nodes.len())
        .map(|root| rooted_string(nodes, edges, &adjacency, root, usize::MAX))
        .min()
        .expect("at least one node")
}

fn rooted_string(
    nodes: &[KeywordMatch],
    edges: &[NetworkEdge],
    adjacency: &[Vec<usize>],
    node: usize,
    via_edge: usize,
) -> String {
    let mut children: Vec<String> = Vec::new();
    for &edge_index in &adjacency[node] {
        if edge_index == via_edge {
            continue;
        }
        let edge = &edges[edge_index];
        let (child, arrow) = if edge.from == node {
            (edge.to, format!("-[{}]->", edge.fk.from_attribute))
        } else {
            (edge.from, format!("<-[{}]-", edge.fk.from_attribute))
        };
        children.push(format!(
            "{arrow}{}",
            rooted_string(nodes, edges, adjacency, child, edge_index)
        ));
    }
    children.sort();
    if children.is_empty() {
        nodes[node].to_string()
    } else {
        format!("{}({})", nodes[node], children.join(","))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CanonError {
    #[error("unexpected end of input at byte {at}")]
    UnexpectedEnd { at: usize },
    #[error("expected {expected} at byte {at}")]
    Expected { expected: String, at: usize },
    #[error("trailing input at byte {at}")]
    Trailing { at: usize },
    #[error("unknown relation {relation}")]
    UnknownRelation { relation: String },
    #[error("relation {relation} has no attribute {attribute}")]
    UnknownAttribute { relation: String, attribute: String },
    #[error("no foreign key {attribute} between {from} and {to}")]
    UnknownForeignKey { from: String, to: String, attribute: String },
}

struct Parser<'a> {
    text: &'a [u8],
    at: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text: text.as_bytes(), at: 0 }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.at).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        if self.text[self.at..].starts_with(token.as_bytes()) {
            self.at += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), CanonError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(CanonError::Expected { expected: format!("{token:?}"), at: self.at })
        }
    }

    fn identifier(&mut self) -> Result<String, CanonError> {
        let start = self.at;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.at += 1;
        }
        if self.at == start {
            return Err(CanonError::Expected { expected: "identifier".into(), at: self.at });
        }
        Ok(String::from_utf8_lossy(&self.text[start..self.at]).into_owned())
    }

    fn keyword_set(&mut self) -> Result<Vec<String>, CanonError> {
        self.expect("^{")?;
        let mut keywords = vec![self.identifier()?];
        while self.eat(",") {
            keywords.push(self.identifier()?);
        }
        self.expect("}")?;
        Ok(keywords)
    }

    fn keyword_match(&mut self) -> Result<KeywordMatch, CanonError> {
        let relation = self.identifier()?;
        let mut km = KeywordMatch::free(relation);
        if self.eat("^S[") {
            loop {
                let element = self.identifier()?;
                let element = if element == "self" {
                    SchemaElement::Relation
                } else {
                    SchemaElement::Attribute(element)
                };
                km.add_schema_keywords(element, self.keyword_set()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("]")?;
        }
        if self.eat("^V[") {
            loop {
                let attribute = self.identifier()?;
                km.add_value_keywords(attribute, self.keyword_set()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("]")?;
        }
        Ok(km)
    }

    /// Parses one node and its subtree, appending into `nodes`/`edges`.
    fn node(
        &mut self,
        nodes: &mut Vec<KeywordMatch>,
        edges: &mut Vec<NetworkEdge>,
    ) -> Result<usize, CanonError> {
        let km = self.keyword_match()?;
        let index = nodes.len();
        nodes.push(km);
        if self.eat("(") {
            loop {
                // Child references parent: <-[attr]- ; parent references child: -[attr]->
                let child_refs_parent = if self.eat("<-[") {
                    true
                } else if self.eat("-[") {
                    false
                } else {
                    return Err(CanonError::Expected {
                        expected: "edge arrow".into(),
                        at: self.at,
                    });
                };
                let attribute = self.identifier()?;
                if child_refs_parent {
                    self.expect("]-")?;
                } else {
                    self.expect("]->")?;
                }
                let child = self.node(nodes, edges)?;
                let (from, to) = if child_refs_parent { (child, index) } else { (index, child) };
                edges.push(NetworkEdge {
                    from,
                    to,
                    fk: ForeignKey {
                        from_relation: nodes[from].relation().to_string(),
                        from_attribute: attribute,
                        to_relation: nodes[to].relation().to_string(),
                    },
                });
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        Ok(index)
    }

    fn finish(self) -> Result<(), CanonError> {
        if self.at == self.text.len() {
            Ok(())
        } else {
            Err(CanonError::Trailing { at: self.at })
        }
    }
}

/// Parses a single keyword match in canonical text form.
pub fn parse_keyword_match(text: &str) -> Result<KeywordMatch, CanonError> {
    let mut parser = Parser::new(text);
    let km = parser.keyword_match()?;
    parser.finish()?;
    Ok(km)
}

/// Parses the `{KM,KM,...}` form used for golden query matches.
pub fn parse_query_match_text(text: &str) -> Result<Vec<KeywordMatch>, CanonError> {
    let mut parser = Parser::new(text);
    parser.expect("{")?;
    let mut matches = vec![parser.keyword_match()?];
    while parser.eat(",") {
        matches.push(parser.keyword_match()?);
    }
    parser.expect("}")?;
    parser.finish()?;
    Ok(matches)
}

/// Parses a network in canonical rooted-tree text form.
pub fn parse_network(text: &str) -> Result<(Vec<KeywordMatch>, Vec<NetworkEdge>), CanonError> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut parser = Parser::new(text);
    parser.node(&mut nodes, &mut edges)?;
    parser.finish()?;
    Ok((nodes, edges))
}

/// Checks a parsed network against a concrete schema: relations and
/// attributes must exist and every edge must name a declared foreign key in
/// the direction it claims.
pub fn validate_network(
    nodes: &[KeywordMatch],
    edges: &[NetworkEdge],
    db: &DatabaseInstance,
    graph: &SchemaGraph,
) -> Result<(), CanonError> {
    for km in nodes {
        if db.relation(km.relation()).is_none() {
            return Err(CanonError::UnknownRelation { relation: km.relation().to_string() });
        }
        if !km.conforms_to(db) {
            let attribute = km
                .schema_map()
                .keys()
                .filter_map(|e| match e {
                    SchemaElement::Attribute(a) => Some(a.clone()),
                    SchemaElement::Relation => None,
                })
                .chain(km.value_map().keys().cloned())
                .find(|a| {
                    !db.relation(km.relation())
                        .map(|r| r.schema.has_attribute(a))
                        .unwrap_or(false)
                })
                .unwrap_or_default();
            return Err(CanonError::UnknownAttribute {
                relation: km.relation().to_string(),
                attribute,
            });
        }
    }
    for edge in edges {
        let from = nodes[edge.from].relation();
        let to = nodes[edge.to].relation();
        let known = graph
            .edge_fks(from, to)
            .iter()
            .any(|fk| fk.from_attribute == edge.fk.from_attribute);
        if !known {
            return Err(CanonError::UnknownForeignKey {
                from: from.to_string(),
                to: to.to_string(),
                attribute: edge.fk.from_attribute.clone(),
            });
        }
    }
    Ok(())
}

/// Keywords mentioned anywhere in a parsed structure; golden validation
/// checks them against the query.
pub fn mentioned_keywords(nodes: &[KeywordMatch]) -> BTreeSet<String> {
    nodes.iter().flat_map(|km| km.covered_keywords()).collect()
}
