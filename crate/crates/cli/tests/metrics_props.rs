//! Property tests for the metric definitions over random rank positions.

use std::collections::BTreeMap;

use proptest::prelude::*;

use kwsql_cli::metrics::{compute_metrics, MAX_K};
use kwsql_cli::queryset::QuerySetEntry;

fn entry(id: usize, golden: &str) -> QuerySetEntry {
    QuerySetEntry {
        id: format!("q{id}"),
        keywords: golden.to_string(),
        golden_cjn: golden.to_string(),
        golden_qm: format!("{{{golden}}}"),
    }
}

proptest! {
    /// Plant each golden item at a random position (or leave it out) and
    /// check the definitions directly.
    #[test]
    fn metrics_match_their_definitions(
        positions in prop::collection::vec(prop::option::of(0usize..15), 1..8)
    ) {
        let mut golden = Vec::new();
        let mut results: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (i, position) in positions.iter().enumerate() {
            let name = format!("G{i}");
            golden.push(entry(i, &name));
            let mut ranked: Vec<String> = (0..20).map(|j| format!("filler-{i}-{j}")).collect();
            if let Some(p) = position {
                ranked.insert(*p, name.clone());
            }
            results.insert(format!("q{i}"), ranked);
        }
        let report = compute_metrics(&results, &golden).unwrap();

        let mut rr_sum = 0.0;
        for (i, position) in positions.iter().enumerate() {
            let expected_rr = position.map(|p| 1.0 / (p as f64 + 1.0)).unwrap_or(0.0);
            prop_assert_eq!(report.per_query_rr[&format!("q{i}")], expected_rr);
            rr_sum += expected_rr;
        }
        prop_assert!((report.mrr - rr_sum / positions.len() as f64).abs() < 1e-12);

        for k in 1..=MAX_K {
            let hits = positions.iter().filter(|p| matches!(p, Some(p) if *p < k)).count();
            prop_assert!((report.p_at(k) - hits as f64 / positions.len() as f64).abs() < 1e-12);
            if k > 1 {
                prop_assert!(report.p_at(k) >= report.p_at(k - 1));
            }
        }
    }
}
