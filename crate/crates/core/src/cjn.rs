//! Candidate joining networks (phase 3): connecting the matches of a query
//! match over the schema graph into minimal, sound join trees, pruning void
//! ones eagerly, and ranking the survivors.
//!
//! A joining network is a tree of keyword matches whose edges follow schema
//! graph edges, each realized by a concrete foreign key. It is minimal when
//! no leaf is a keyword-free connector and sound when no node references
//! more same-relation neighbors than it has distinct foreign keys toward
//! that relation — the condition under which no answer can repeat a tuple.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::canonical_string;
use crate::catalog::{ForeignKey, SchemaGraph};
use crate::indexes::{SchemaIndex, ValueIndex};
use crate::matching::KeywordMatch;
use crate::query_matching::{value_contribution, QueryMatch};

/// Knob triple plus size cap for the generation phase. `probes_per_match`
/// of zero disables eager evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupConfig {
    /// Top-ranked query matches considered (N_QM).
    pub top_query_matches: usize,
    /// Networks kept per query match (N_CJN).
    pub networks_per_match: usize,
    /// Networks probed per query match during eager evaluation (P_CJN).
    pub probes_per_match: usize,
    /// Maximum network size in nodes (T_max).
    pub max_network_size: usize,
}

impl Default for SetupConfig {
    /// The 5/1/9 default with networks capped at five nodes.
    fn default() -> Self {
        SetupConfig {
            top_query_matches: 5,
            networks_per_match: 1,
            probes_per_match: 9,
            max_network_size: 5,
        }
    }
}

impl SetupConfig {
    pub fn eager(&self) -> bool {
        self.probes_per_match > 0
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_network_size == 0 {
            return Err("maximum network size must be at least 1".into());
        }
        if self.probes_per_match > 0 && self.networks_per_match > self.probes_per_match {
            return Err(format!(
                "networks per match ({}) cannot exceed probes per match ({})",
                self.networks_per_match, self.probes_per_match
            ));
        }
        Ok(())
    }
}

/// A directed tree edge: `from` holds the foreign key and references the
/// primary key of `to`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub from: usize,
    pub to: usize,
    pub fk: ForeignKey,
}

/// A joining network of keyword matches. Nodes are stored in discovery
/// order; the same keyword match may appear at several nodes only when it
/// is keyword-free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JoiningNetwork {
    nodes: Vec<KeywordMatch>,
    edges: Vec<NetworkEdge>,
    origin: QueryMatch,
    score: f64,
}

impl JoiningNetwork {
    pub fn new(nodes: Vec<KeywordMatch>, edges: Vec<NetworkEdge>, origin: QueryMatch) -> Self {
        JoiningNetwork { nodes, edges, origin, score: 0.0 }
    }

    pub fn nodes(&self) -> &[KeywordMatch] {
        &self.nodes
    }

    pub fn edges(&self) -> &[NetworkEdge] {
        &self.edges
    }

    pub fn origin(&self) -> &QueryMatch {
        &self.origin
    }

    /// Rank score, origin score over size; zero until ranked.
    pub fn score(&self) -> f64 {
        self.score
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.from == node || e.to == node)
            .count()
    }

    pub fn free_node_count(&self) -> usize {
        self.nodes.iter().filter(|km| km.is_free()).count()
    }

    /// Root-independent canonical serialization; equal strings mean
    /// isomorphic networks.
    pub fn canonical(&self) -> String {
        canonical_string(&self.nodes, &self.edges)
    }

    /// Connected and acyclic: edge count one less than node count with every
    /// node reachable from node zero.
    pub fn is_tree(&self) -> bool {
        if self.nodes.is_empty() || self.edges.len() + 1 != self.nodes.len() {
            return self.nodes.len() == 1 && self.edges.is_empty();
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for e in &self.edges {
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == n && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// No keyword-free match may sit at a leaf (a degree-one node).
pub fn is_minimal(network: &JoiningNetwork) -> bool {
    (0..network.size())
        .all(|i| !(network.degree(i) == 1 && network.nodes()[i].is_free()))
}

/// Soundness per the referential-constraint counting condition: every node
/// may reference at most as many same-relation neighbors as there are
/// distinct foreign keys toward that relation, each edge using its own key.
pub fn is_sound(network: &JoiningNetwork, graph: &SchemaGraph) -> bool {
    for node in 0..network.size() {
        let relation = network.nodes()[node].relation();
        let outgoing: Vec<&NetworkEdge> =
            network.edges().iter().filter(|e| e.from == node).collect();
        let targets: BTreeSet<&str> = outgoing
            .iter()
            .map(|e| network.nodes()[e.to].relation())
            .collect();
        for target in targets {
            let used: Vec<&ForeignKey> = outgoing
                .iter()
                .filter(|e| network.nodes()[e.to].relation() == target)
                .map(|e| &e.fk)
                .collect();
            if used.len() > graph.multiplicity(relation, target) {
                return false;
            }
            let distinct: BTreeSet<&ForeignKey> = used.iter().copied().collect();
            if distinct.len() != used.len() {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone)]
struct Partial {
    nodes: Vec<KeywordMatch>,
    edges: Vec<NetworkEdge>,
    member_mask: u64,
    free_count: usize,
}

impl Partial {
    fn complete(&self, member_count: usize) -> bool {
        self.member_mask.count_ones() as usize == member_count
    }
}

/// Generates the candidate joining networks of one query match in
/// breadth-first discovery order, up to `limit` networks.
///
/// Expansion starts from the member with the strongest value contribution
/// (canonically least on ties), walks the undirected schema graph, adds
/// each member at most once and free connectors as needed, and assigns each
/// new edge a foreign key not yet used by the referencing node toward that
/// relation — every available key spawns its own branch. Candidates that
/// exceed the size cap, the free-connector budget, or a node degree of
/// |match| are pruned, as are duplicates under the canonical form.
pub fn cjn_interleave(
    qm: &QueryMatch,
    graph: &SchemaGraph,
    cfg: &SetupConfig,
    limit: usize,
    vi: &ValueIndex,
    si: &SchemaIndex,
) -> Vec<JoiningNetwork> {
    if qm.is_empty() || limit == 0 {
        return Vec::new();
    }
    let members = qm.matches();
    let start = start_member(qm, vi, si);
    let initial = Partial {
        nodes: vec![members[start].clone()],
        edges: Vec::new(),
        member_mask: 1 << start,
        free_count: 0,
    };
    if members.len() == 1 {
        return vec![JoiningNetwork::new(initial.nodes, initial.edges, qm.clone())];
    }

    let free_budget = cfg.max_network_size.saturating_sub(members.len());
    let mut seen: BTreeSet<String> = BTreeSet::new();
    seen.insert(canonical_string(&initial.nodes, &initial.edges));
    let mut complete: Vec<JoiningNetwork> = Vec::new();
    let mut queue: VecDeque<Partial> = VecDeque::from([initial]);

    'search: while let Some(current) = queue.pop_front() {
        for node in 0..current.nodes.len() {
            let relation = current.nodes[node].relation().to_string();
            for adjacent in graph.undirected_neighbors(&relation) {
                // Unused query-match members over the adjacent relation.
                for (index, member) in members.iter().enumerate() {
                    if current.member_mask & (1 << index) != 0 || member.relation() != adjacent {
                        continue;
                    }
                    for (new_references_node, fk) in
                        edge_assignments(&current, node, adjacent, graph)
                    {
                        let candidate =
                            expand(&current, node, member.clone(), Some(index), new_references_node, fk);
                        if admit(candidate, qm, members.len(), cfg, free_budget, &mut seen, &mut complete, &mut queue, limit) {
                            break 'search;
                        }
                    }
                }
                // A keyword-free connector over the adjacent relation.
                if current.free_count < free_budget {
                    for (new_references_node, fk) in
                        edge_assignments(&current, node, adjacent, graph)
                    {
                        let candidate = expand(
                            &current,
                            node,
                            KeywordMatch::free(adjacent),
                            None,
                            new_references_node,
                            fk,
                        );
                        if admit(candidate, qm, members.len(), cfg, free_budget, &mut seen, &mut complete, &mut queue, limit) {
                            break 'search;
                        }
                    }
                }
            }
        }
    }
    complete
}

/// Foreign keys available to join a new node over `adjacent` to `node`:
/// first the node's own unused keys toward that relation, then (the new
/// node being fresh) every key of the reverse direction.
fn edge_assignments(
    current: &Partial,
    node: usize,
    adjacent: &str,
    graph: &SchemaGraph,
) -> Vec<(bool, ForeignKey)> {
    let relation = current.nodes[node].relation();
    let mut out = Vec::new();
    let used: BTreeSet<&ForeignKey> = current
        .edges
        .iter()
        .filter(|e| e.from == node && current.nodes[e.to].relation() == adjacent)
        .map(|e| &e.fk)
        .collect();
    for fk in graph.edge_fks(relation, adjacent) {
        if !used.contains(fk) {
            out.push((false, fk.clone()));
        }
    }
    for fk in graph.edge_fks(adjacent, relation) {
        out.push((true, fk.clone()));
    }
    out
}

fn expand(
    current: &Partial,
    node: usize,
    km: KeywordMatch,
    member_index: Option<usize>,
    new_references_node: bool,
    fk: ForeignKey,
) -> Partial {
    let mut next = current.clone();
    let new_index = next.nodes.len();
    next.nodes.push(km);
    let edge = if new_references_node {
        NetworkEdge { from: new_index, to: node, fk }
    } else {
        NetworkEdge { from: node, to: new_index, fk }
    };
    next.edges.push(edge);
    if let Some(index) = member_index {
        next.member_mask |= 1 << index;
    } else {
        next.free_count += 1;
    }
    next
}

/// Applies the structural pruning rules and routes the candidate to the
/// output (complete), the queue (growable), or the floor. Returns true when
/// the emission limit is reached.
#[allow(clippy::too_many_arguments)]
fn admit(
    candidate: Partial,
    qm: &QueryMatch,
    member_count: usize,
    cfg: &SetupConfig,
    free_budget: usize,
    seen: &mut BTreeSet<String>,
    complete: &mut Vec<JoiningNetwork>,
    queue: &mut VecDeque<Partial>,
    limit: usize,
) -> bool {
    if candidate.nodes.len() > cfg.max_network_size || candidate.free_count > free_budget {
        return false;
    }
    let max_degree = (0..candidate.nodes.len())
        .map(|n| {
            candidate
                .edges
                .iter()
                .filter(|e| e.from == n || e.to == n)
                .count()
        })
        .max()
        .unwrap_or(0);
    if max_degree > member_count {
        return false;
    }
    let canonical = canonical_string(&candidate.nodes, &candidate.edges);
    if !seen.insert(canonical) {
        return false;
    }
    if candidate.complete(member_count) {
        let network = JoiningNetwork::new(candidate.nodes, candidate.edges, qm.clone());
        if is_minimal(&network) {
            complete.push(network);
            return complete.len() >= limit;
        }
        return false;
    }
    if candidate.nodes.len() < cfg.max_network_size {
        queue.push_back(candidate);
    }
    false
}

/// The expansion seed: the member with the highest value contribution,
/// members without value keywords last, canonical order breaking ties.
fn start_member(qm: &QueryMatch, vi: &ValueIndex, si: &SchemaIndex) -> usize {
    let mut best = 0usize;
    let mut best_contribution = f64::NEG_INFINITY;
    for (index, km) in qm.matches().iter().enumerate() {
        let contribution = value_contribution(km, vi, si)
            .ok()
            .flatten()
            .unwrap_or(f64::NEG_INFINITY);
        if contribution > best_contribution {
            best = index;
            best_contribution = contribution;
        }
    }
    best
}

#[derive(Debug, Error)]
#[error("probe failed: {0}")]
pub struct ProbeError(pub String);

/// Existence check used by eager evaluation; implemented by the executor.
pub trait NetworkProbe {
    fn is_nonvoid(&self, network: &JoiningNetwork) -> Result<bool, ProbeError>;
}

/// What the generation phase produced: the ranked survivors, the networks
/// probed void and pruned, and any probe diagnostics (those networks stay,
/// unproven).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GenerationReport {
    pub ranked: Vec<JoiningNetwork>,
    pub pruned_void: Vec<JoiningNetwork>,
    pub probe_failures: Vec<(String, String)>,
}

impl GenerationReport {
    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }
}

/// Generates networks for the top-ranked query matches and ranks the union.
///
/// Per query match: up to `probes_per_match` networks are generated when
/// eager evaluation is on (otherwise `networks_per_match`); with a probe,
/// the first `networks_per_match` non-void ones survive. A failing probe is
/// reported and the network kept rather than silently dropped.
pub fn cjn_generate(
    ranked_qms: &[QueryMatch],
    graph: &SchemaGraph,
    cfg: &SetupConfig,
    probe: Option<&dyn NetworkProbe>,
    vi: &ValueIndex,
    si: &SchemaIndex,
) -> GenerationReport {
    let mut report = GenerationReport::default();
    let mut kept = Vec::new();
    let eager = cfg.eager() && probe.is_some();
    for qm in ranked_qms.iter().take(cfg.top_query_matches) {
        let generation_cap = if eager { cfg.probes_per_match } else { cfg.networks_per_match };
        let networks = cjn_interleave(qm, graph, cfg, generation_cap, vi, si);
        if !eager {
            kept.extend(networks.into_iter().take(cfg.networks_per_match));
            continue;
        }
        let probe = probe.expect("eager implies probe");
        let mut survivors = 0usize;
        for network in networks {
            if survivors == cfg.networks_per_match {
                break;
            }
            match probe.is_nonvoid(&network) {
                Ok(true) => {
                    kept.push(network);
                    survivors += 1;
                }
                Ok(false) => report.pruned_void.push(network),
                Err(error) => {
                    report
                        .probe_failures
                        .push((network.canonical(), error.to_string()));
                    kept.push(network);
                    survivors += 1;
                }
            }
        }
    }
    report.ranked = cjn_rank(kept);
    report
}

/// Scores each network as its origin score over its node count and sorts
/// descending. The sort is stable: equal scores keep generation order.
pub fn cjn_rank(mut networks: Vec<JoiningNetwork>) -> Vec<JoiningNetwork> {
    for network in &mut networks {
        network.score = network.origin.score() / network.size() as f64;
    }
    networks.sort_by(|a, b| b.score.total_cmp(&a.score));
    networks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::build_schema_graph;
    use crate::indexes::{SchemaIndex, ValueIndex};
    use crate::matching::{skm_generate, vkm_generate, KeywordQuery, SchemaElement};
    use crate::query_matching::{qm_generate, qm_rank};
    use crate::similarity::SimilarityConfig;
    use crate::testutil::{imdb, mondial, taxonomy};

    fn fk(from: &str, attr: &str, to: &str) -> ForeignKey {
        ForeignKey {
            from_relation: from.into(),
            from_attribute: attr.into(),
            to_relation: to.into(),
        }
    }

    fn network(nodes: Vec<KeywordMatch>, edges: Vec<NetworkEdge>) -> JoiningNetwork {
        let qm = QueryMatch::from_matches(nodes.iter().filter(|n| !n.is_free()).cloned());
        JoiningNetwork::new(nodes, edges, qm)
    }

    fn j1() -> JoiningNetwork {
        network(
            vec![
                KeywordMatch::value("PERSON", "name", ["will", "smith"]),
                KeywordMatch::free("CASTING"),
                KeywordMatch::schema("MOVIE", SchemaElement::Relation, ["films"]),
            ],
            vec![
                NetworkEdge { from: 1, to: 0, fk: fk("CASTING", "pid", "PERSON") },
                NetworkEdge { from: 1, to: 2, fk: fk("CASTING", "mid", "MOVIE") },
            ],
        )
    }

    #[test]
    fn j1_is_minimal_with_internal_connector() {
        assert!(is_minimal(&j1()));
        assert!(j1().is_tree());
    }

    #[test]
    fn free_leaf_breaks_minimality() {
        // J1 plus a dangling free CHARACTER leaf.
        let mut base = j1();
        let mut nodes = base.nodes().to_vec();
        let mut edges = base.edges().to_vec();
        nodes.push(KeywordMatch::free("CHARACTER"));
        edges.push(NetworkEdge { from: 1, to: 3, fk: fk("CASTING", "chid", "CHARACTER") });
        base = network(nodes, edges);
        assert!(!is_minimal(&base));
    }

    #[test]
    fn single_nonfree_node_is_minimal() {
        let single = network(vec![KeywordMatch::value("PERSON", "name", ["will"])], vec![]);
        assert!(is_minimal(&single));
    }

    #[test]
    fn double_reference_through_one_fk_is_unsound() {
        // One casting cannot point at two different persons.
        let graph = build_schema_graph(&imdb());
        let j3 = network(
            vec![
                KeywordMatch::free("CASTING"),
                KeywordMatch::value("PERSON", "name", ["will"]),
                KeywordMatch::value("PERSON", "name", ["smith"]),
                KeywordMatch::schema("MOVIE", SchemaElement::Relation, ["films"]),
            ],
            vec![
                NetworkEdge { from: 0, to: 1, fk: fk("CASTING", "pid", "PERSON") },
                NetworkEdge { from: 0, to: 2, fk: fk("CASTING", "pid", "PERSON") },
                NetworkEdge { from: 0, to: 3, fk: fk("CASTING", "mid", "MOVIE") },
            ],
        );
        assert!(!is_sound(&j3, &graph));
    }

    #[test]
    fn two_references_over_two_fks_are_sound() {
        // A border row may join two distinct countries.
        let graph = build_schema_graph(&mondial());
        let j4 = network(
            vec![
                KeywordMatch::free("BORDER"),
                KeywordMatch::value("COUNTRY", "name", ["colombia"]),
                KeywordMatch::value("COUNTRY", "name", ["brazil"]),
            ],
            vec![
                NetworkEdge { from: 0, to: 1, fk: fk("BORDER", "ctry1_code", "COUNTRY") },
                NetworkEdge { from: 0, to: 2, fk: fk("BORDER", "ctry2_code", "COUNTRY") },
            ],
        );
        assert!(is_sound(&j4, &graph));
    }

    #[test]
    fn path_over_distinct_relations_is_sound() {
        let graph = build_schema_graph(&imdb());
        assert!(is_sound(&j1(), &graph));
    }

    fn ranked_qms(query: &str) -> (Vec<QueryMatch>, SchemaGraph, ValueIndex, SchemaIndex) {
        let db = imdb();
        let graph = build_schema_graph(&db);
        let vi = ValueIndex::build(&db);
        let si = SchemaIndex::build(&db, &vi);
        let tax = taxonomy();
        let q = KeywordQuery::parse(query).unwrap();
        let vkms = vkm_generate(&q, &vi);
        let skms = skm_generate(&q, &db, &SimilarityConfig::default(), &tax);
        let qms = qm_generate(&q, &vkms, &skms, 3);
        let ranked = qm_rank(qms, &vi, &si, &tax, &SimilarityConfig::default()).unwrap();
        (ranked, graph, vi, si)
    }

    #[test]
    fn top_query_match_interleaves_to_j1_first() {
        let (ranked, graph, vi, si) = ranked_qms("will smith films");
        let cfg = SetupConfig::default();
        let networks = cjn_interleave(&ranked[0], &graph, &cfg, 9, &vi, &si);
        assert!(!networks.is_empty());
        assert_eq!(
            networks[0].canonical(),
            "CASTING(-[mid]->MOVIE^S[self^{films}],-[pid]->PERSON^V[name^{smith,will}])"
        );
        for n in &networks {
            assert!(is_minimal(n) && is_sound(n, &graph) && n.is_tree());
        }
    }

    #[test]
    fn two_person_match_yields_the_movie_hub_network() {
        let (ranked, graph, vi, si) = ranked_qms("will smith films");
        let m2 = ranked
            .iter()
            .find(|qm| {
                qm.canonical()
                    == "{MOVIE^S[self^{films}],PERSON^V[name^{smith}],PERSON^V[name^{will}]}"
            })
            .unwrap();
        let cfg = SetupConfig::default();
        let networks = cjn_interleave(m2, &graph, &cfg, 9, &vi, &si);
        // The movie hub with two casting-person arms, canonically rooted at
        // one of the castings.
        let hub = "CASTING(-[mid]->MOVIE^S[self^{films}](<-[mid]-CASTING(-[pid]->PERSON^V[name^{smith}])),-[pid]->PERSON^V[name^{will}])";
        assert!(
            networks.iter().any(|n| n.canonical() == hub),
            "{:?}",
            networks.iter().map(|n| n.canonical()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn singleton_query_match_returns_single_node_network() {
        let (ranked, graph, vi, si) = ranked_qms("angelina jolie");
        let cfg = SetupConfig::default();
        let networks = cjn_interleave(&ranked[0], &graph, &cfg, 9, &vi, &si);
        assert_eq!(networks.len(), 1);
        assert_eq!(networks[0].canonical(), "PERSON^V[name^{angelina,jolie}]");
    }

    #[test]
    fn generated_networks_cover_their_query_match_exactly() {
        let (ranked, graph, vi, si) = ranked_qms("will smith films");
        let cfg = SetupConfig::default();
        for qm in &ranked {
            for network in cjn_interleave(qm, &graph, &cfg, 9, &vi, &si) {
                let mut non_free: Vec<&KeywordMatch> =
                    network.nodes().iter().filter(|n| !n.is_free()).collect();
                non_free.sort();
                let mut members: Vec<&KeywordMatch> = qm.matches().iter().collect();
                members.sort();
                assert_eq!(non_free, members);
                assert_eq!(network.edges().len() + 1, network.size());
                assert!(network.size() <= cfg.max_network_size);
            }
        }
    }

    #[test]
    fn rank_divides_by_size_and_is_stable() {
        let mut a = j1();
        a.origin = a.origin.clone().with_score(0.5);
        let mut b = network(vec![KeywordMatch::value("PERSON", "name", ["will"])], vec![]);
        b.origin = b.origin.clone().with_score(0.5);
        let ranked = cjn_rank(vec![a.clone(), b.clone()]);
        // 0.5/1 beats 0.5/3.
        assert_eq!(ranked[0].size(), 1);
        assert!((ranked[0].score() - 0.5).abs() < 1e-12);
        assert!((ranked[1].score() - 0.5 / 3.0).abs() < 1e-12);

        // Equal scores preserve input order: two same-size networks from
        // equal-score origins keep their generation order.
        let mut c = j1();
        c.origin = c.origin.clone().with_score(0.9);
        let mut d = network(
            vec![
                KeywordMatch::value("PERSON", "name", ["will"]),
                KeywordMatch::free("CASTING"),
                KeywordMatch::value("MOVIE", "title", ["legend"]),
            ],
            vec![
                NetworkEdge { from: 1, to: 0, fk: fk("CASTING", "pid", "PERSON") },
                NetworkEdge { from: 1, to: 2, fk: fk("CASTING", "mid", "MOVIE") },
            ],
        );
        d.origin = d.origin.clone().with_score(0.9);
        let ranked = cjn_rank(vec![c.clone(), d.clone()]);
        assert_eq!(ranked[0].canonical(), c.canonical());
        assert_eq!(ranked[1].canonical(), d.canonical());
    }

    #[test]
    fn setup_validation() {
        assert!(SetupConfig::default().validate().is_ok());
        let bad = SetupConfig { networks_per_match: 5, probes_per_match: 2, ..Default::default() };
        assert!(bad.validate().is_err());
        let off = SetupConfig { networks_per_match: 5, probes_per_match: 0, ..Default::default() };
        assert!(off.validate().is_ok());
    }

    struct AlwaysVoid;
    impl NetworkProbe for AlwaysVoid {
        fn is_nonvoid(&self, _: &JoiningNetwork) -> Result<bool, ProbeError> {
            Ok(false)
        }
    }

    struct Failing;
    impl NetworkProbe for Failing {
        fn is_nonvoid(&self, _: &JoiningNetwork) -> Result<bool, ProbeError> {
            Err(ProbeError("connection reset".into()))
        }
    }

    #[test]
    fn all_void_probes_leave_nothing_ranked() {
        let (ranked, graph, vi, si) = ranked_qms("will smith films");
        let cfg = SetupConfig::default();
        let report = cjn_generate(&ranked, &graph, &cfg, Some(&AlwaysVoid), &vi, &si);
        assert!(report.ranked.is_empty());
        assert!(!report.pruned_void.is_empty());
        assert!(report.probe_failures.is_empty());
    }

    #[test]
    fn probe_failure_keeps_the_network_and_reports_it() {
        let (ranked, graph, vi, si) = ranked_qms("will smith films");
        let cfg = SetupConfig::default();
        let report = cjn_generate(&ranked, &graph, &cfg, Some(&Failing), &vi, &si);
        assert!(!report.ranked.is_empty());
        assert_eq!(report.probe_failures.len(), report.ranked.len());
        assert!(report.probe_failures[0].1.contains("connection reset"));
        assert!(report.pruned_void.is_empty());
    }

    #[test]
    fn probing_disabled_keeps_first_networks_unprobed() {
        let (ranked, graph, vi, si) = ranked_qms("will smith films");
        let cfg = SetupConfig { probes_per_match: 0, ..SetupConfig::default() };
        // A probe is supplied but must never run with probing off.
        let report = cjn_generate(&ranked, &graph, &cfg, Some(&Failing), &vi, &si);
        assert!(!report.ranked.is_empty());
        assert!(report.probe_failures.is_empty());
        assert!(report.pruned_void.is_empty());
    }
}
