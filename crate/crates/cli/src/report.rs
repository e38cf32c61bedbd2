//! Rendering of query outcomes, metric reports, and statistics tables —
//! human tables by default, JSON on demand. Output is byte-deterministic
//! for a fixed dataset, configuration, and query.

use std::collections::BTreeMap;

use serde::Serialize;

use kwsql_core::executor::node_aliases;
use kwsql_core::{emit_sql_with_dialect, evaluate, DatabaseInstance, QueryOutcome, SqlDialect};

use crate::metrics::{MetricsReport, MAX_K};
use crate::stats::StatsRow;

/// Extra rendering knobs for the `query` verb.
#[derive(Debug, Clone, Copy, Default)]
pub struct RenderOptions {
    pub emit_sql: bool,
    pub dialect: SqlDialect,
    /// Answer cap for evaluating the top-ranked network.
    pub limit: usize,
}

#[derive(Debug, Serialize)]
struct JsonNetwork {
    rank: usize,
    score: f64,
    size: usize,
    canonical: String,
    query_match: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sql: Option<String>,
}

#[derive(Debug, Serialize)]
struct JsonAnswer {
    bindings: BTreeMap<String, String>,
    values: BTreeMap<String, String>,
}

#[derive(Debug, Serialize)]
struct JsonOutcome {
    query: String,
    keywords: Vec<String>,
    value_matches: Vec<String>,
    schema_matches: Vec<String>,
    query_matches: Vec<JsonQueryMatch>,
    networks: Vec<JsonNetwork>,
    pruned_void: Vec<String>,
    probe_failures: Vec<(String, String)>,
    answers: Vec<JsonAnswer>,
}

#[derive(Debug, Serialize)]
struct JsonQueryMatch {
    rank: usize,
    score: f64,
    canonical: String,
}

fn answers_of(
    outcome: &QueryOutcome,
    db: &DatabaseInstance,
    opts: &RenderOptions,
) -> Vec<JsonAnswer> {
    let Some(top) = outcome.report.ranked.first() else {
        return Vec::new();
    };
    let aliases = node_aliases(top);
    evaluate(top, db, Some(opts.limit))
        .into_iter()
        .map(|jnt| {
            let bindings = jnt
                .bindings
                .iter()
                .map(|(node, tuple)| (aliases[*node].1.clone(), tuple.to_string()))
                .collect();
            let values = jnt
                .projected
                .iter()
                .map(|(node, attr, value)| {
                    (format!("{}.{attr}", aliases[*node].1), value.clone())
                })
                .collect();
            JsonAnswer { bindings, values }
        })
        .collect()
}

/// Human-readable rendering of one query run.
pub fn render_outcome(
    outcome: &QueryOutcome,
    db: &DatabaseInstance,
    opts: &RenderOptions,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("Query: {}\n", outcome.query.raw));
    out.push_str(&format!("Keywords: {}\n", outcome.query.keywords.join(", ")));
    out.push_str(&format!(
        "Matches: {} value, {} schema\n",
        outcome.value_matches.len(),
        outcome.schema_matches.len()
    ));

    if outcome.query_matches.is_empty() {
        out.push_str("No query matches.\n");
        return out;
    }
    out.push_str(&format!("Query matches ({}):\n", outcome.query_matches.len()));
    for (i, qm) in outcome.query_matches.iter().enumerate() {
        out.push_str(&format!("  {:>2}. {:<12.6} {}\n", i + 1, qm.score(), qm.canonical()));
    }

    if outcome.report.ranked.is_empty() {
        out.push_str("No candidate joining networks.\n");
        return out;
    }
    out.push_str(&format!(
        "Candidate joining networks ({}):\n",
        outcome.report.ranked.len()
    ));
    for (i, network) in outcome.report.ranked.iter().enumerate() {
        out.push_str(&format!(
            "  {:>2}. {:<12.6} {}\n",
            i + 1,
            network.score(),
            network.canonical()
        ));
        if opts.emit_sql {
            let sql = emit_sql_with_dialect(network, db, opts.dialect);
            for line in sql.text.lines() {
                out.push_str(&format!("      | {line}\n"));
            }
        }
    }
    if !outcome.report.pruned_void.is_empty() {
        out.push_str(&format!(
            "Pruned void networks ({}):\n",
            outcome.report.pruned_void.len()
        ));
        for network in &outcome.report.pruned_void {
            out.push_str(&format!("   - {}\n", network.canonical()));
        }
    }
    for (canonical, error) in &outcome.report.probe_failures {
        out.push_str(&format!("Probe failure on {canonical}: {error}\n"));
    }

    let answers = answers_of(outcome, db, opts);
    out.push_str(&format!("Answers for rank 1 ({}):\n", answers.len()));
    for (i, answer) in answers.iter().enumerate() {
        let bindings: Vec<String> = answer
            .bindings
            .iter()
            .map(|(alias, tuple)| format!("{alias}={tuple}"))
            .collect();
        let values: Vec<String> = answer
            .values
            .iter()
            .map(|(column, value)| format!("{column}={value}"))
            .collect();
        out.push_str(&format!(
            "  {:>2}. [{}] {}\n",
            i + 1,
            bindings.join(" "),
            values.join(" | ")
        ));
    }
    out
}

/// JSON rendering of one query run.
pub fn render_outcome_json(
    outcome: &QueryOutcome,
    db: &DatabaseInstance,
    opts: &RenderOptions,
) -> String {
    let json = JsonOutcome {
        query: outcome.query.raw.clone(),
        keywords: outcome.query.keywords.clone(),
        value_matches: outcome.value_matches.iter().map(|km| km.to_string()).collect(),
        schema_matches: outcome.schema_matches.iter().map(|km| km.to_string()).collect(),
        query_matches: outcome
            .query_matches
            .iter()
            .enumerate()
            .map(|(i, qm)| JsonQueryMatch {
                rank: i + 1,
                score: qm.score(),
                canonical: qm.canonical(),
            })
            .collect(),
        networks: outcome
            .report
            .ranked
            .iter()
            .enumerate()
            .map(|(i, network)| JsonNetwork {
                rank: i + 1,
                score: network.score(),
                size: network.size(),
                canonical: network.canonical(),
                query_match: network.origin().canonical(),
                sql: opts
                    .emit_sql
                    .then(|| emit_sql_with_dialect(network, db, opts.dialect).text),
            })
            .collect(),
        pruned_void: outcome
            .report
            .pruned_void
            .iter()
            .map(|n| n.canonical())
            .collect(),
        probe_failures: outcome.report.probe_failures.clone(),
        answers: answers_of(outcome, db, opts),
    };
    serde_json::to_string_pretty(&json).expect("serializable")
}

pub fn render_metrics(report: &MetricsReport) -> String {
    let mut out = String::new();
    out.push_str("K   P@K\n");
    for k in 1..=MAX_K {
        out.push_str(&format!("{k:<3} {:.4}\n", report.p_at(k)));
    }
    out.push_str(&format!("MRR {:.4}\n", report.mrr));
    out.push_str("Per-query reciprocal rank:\n");
    for (id, rr) in &report.per_query_rr {
        out.push_str(&format!("  {id:<12} {rr:.4}\n"));
    }
    out
}

pub fn render_stats(rows: &[StatsRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>6} {:>6} {:>6}\n",
        "query", "KMs", "QMs", "CJNs"
    ));
    for row in rows {
        out.push_str(&format!(
            "{:<12} {:>6} {:>6} {:>6}\n",
            row.id, row.keyword_matches, row.query_matches, row.networks
        ));
    }
    if rows.is_empty() {
        return out;
    }
    let max = |f: fn(&StatsRow) -> usize| rows.iter().map(f).max().unwrap_or(0);
    let avg = |f: fn(&StatsRow) -> usize| {
        rows.iter().map(f).sum::<usize>() as f64 / rows.len() as f64
    };
    out.push_str(&format!(
        "{:<12} {:>6} {:>6} {:>6}\n",
        "max",
        max(|r| r.keyword_matches),
        max(|r| r.query_matches),
        max(|r| r.networks)
    ));
    out.push_str(&format!(
        "{:<12} {:>6.2} {:>6.2} {:>6.2}\n",
        "avg",
        avg(|r| r.keyword_matches),
        avg(|r| r.query_matches),
        avg(|r| r.networks)
    ));
    out
}
