use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kwsql_cli::metrics::compute_metrics;
use kwsql_cli::queryset::{load_query_set, validate_query_set};
use kwsql_cli::report::{
    render_metrics, render_outcome, render_outcome_json, render_stats, RenderOptions,
};
use kwsql_cli::stats::stats_for_query;
use kwsql_cli::run_query_set;
use kwsql_core::{
    CacheMode, EngineError, EngineOptions, SearchEngine, SetupConfig, SimilarityConfig,
    SimilarityMetric, SqlDialect,
};

/// Keyword search over relational datasets: turns free keyword queries into
/// ranked, executable join queries.
#[derive(Debug, Parser)]
#[command(name = "kwsql", version, about)]
struct Cli {
    /// Directory holding the datasets (each a subdirectory with schema.json
    /// and CSV files).
    #[arg(long, default_value = "datasets", global = true)]
    data_dir: PathBuf,

    /// Word taxonomy file for schema-keyword similarity.
    #[arg(long, global = true)]
    taxonomy: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the value and schema indexes and write the on-disk cache.
    Index { dataset: String },
    /// Run one keyword query end to end.
    Query {
        dataset: String,
        /// The keyword query, e.g. "will smith films".
        query: String,
        #[command(flatten)]
        knobs: Knobs,
        /// Print the SQL translation of each ranked network.
        #[arg(long)]
        emit_sql: bool,
        /// SQL dialect for emitted queries.
        #[arg(long, default_value = "ansi")]
        dialect: SqlDialect,
        /// Cap on answers listed for the top-ranked network.
        #[arg(long, default_value_t = 1000)]
        limit: usize,
        /// Machine-readable output.
        #[arg(long)]
        json: bool,
    },
    /// Run a query set against its golden standard and report P@K and MRR.
    Eval {
        dataset: String,
        #[arg(long)]
        queryset: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
        #[arg(long)]
        json: bool,
    },
    /// Per-query generation statistics (keyword matches, query matches,
    /// networks) without pruning.
    Stats {
        dataset: String,
        #[arg(long)]
        queryset: PathBuf,
        #[command(flatten)]
        knobs: Knobs,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct Knobs {
    /// Top query matches carried into network generation (N_QM).
    #[arg(long, default_value_t = 5)]
    top_qm: usize,
    /// Networks kept per query match (N_CJN).
    #[arg(long, default_value_t = 1)]
    cjn_per_qm: usize,
    /// Networks probed per query match under eager evaluation (P_CJN).
    #[arg(long, default_value_t = 9)]
    probe: usize,
    /// Maximum query-match size.
    #[arg(long, default_value_t = 3)]
    max_qm_size: usize,
    /// Maximum network size in nodes.
    #[arg(long, default_value_t = 5)]
    max_cjn_size: usize,
    /// Similarity threshold for schema-keyword matches.
    #[arg(long, default_value_t = 0.6)]
    epsilon: f64,
    /// Similarity metric: path or wup.
    #[arg(long, default_value = "path")]
    metric: SimilarityMetric,
    /// Disable eager evaluation (no probing, void networks kept).
    #[arg(long, conflicts_with = "probe")]
    no_eager: bool,
}

impl Knobs {
    fn options(&self) -> EngineOptions {
        EngineOptions {
            similarity: SimilarityConfig { metric: self.metric, epsilon: self.epsilon },
            setup: SetupConfig {
                top_query_matches: self.top_qm,
                networks_per_match: self.cjn_per_qm,
                probes_per_match: if self.no_eager { 0 } else { self.probe },
                max_network_size: self.max_cjn_size,
            },
            max_match_size: self.max_qm_size,
        }
    }
}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    QuerySet(#[from] kwsql_cli::queryset::QuerySetError),
    #[error(transparent)]
    Metrics(#[from] kwsql_cli::metrics::MetricsError),
}

fn exit_code_for(error: &CliError) -> u8 {
    match error {
        CliError::Engine(EngineError::EmptyQuery) => EXIT_USAGE,
        CliError::Engine(EngineError::Config(_)) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let taxonomy = cli
        .taxonomy
        .clone()
        .unwrap_or_else(|| cli.data_dir.join("mini_wordnet.json"));
    let dataset_dir = |name: &str| cli.data_dir.join(name);

    match &cli.command {
        Command::Index { dataset } => {
            let engine =
                SearchEngine::from_dir(&dataset_dir(dataset), &taxonomy, CacheMode::Refresh)?;
            println!(
                "indexed {dataset}: {} relations, {} tuples, {} attributes, {} terms",
                engine.db.relations().count(),
                engine.db.tuple_count(),
                engine.value_index.attribute_count(),
                engine.value_index.terms().count()
            );
            println!(
                "cache written to {}",
                kwsql_core::engine::index_cache_path(&dataset_dir(dataset)).display()
            );
        }
        Command::Query { dataset, query, knobs, emit_sql, dialect, limit, json } => {
            let engine = SearchEngine::from_dir(&dataset_dir(dataset), &taxonomy, CacheMode::Use)?;
            let outcome = engine.run(query, &knobs.options())?;
            let render = RenderOptions { emit_sql: *emit_sql, dialect: *dialect, limit: *limit };
            if *json {
                println!("{}", render_outcome_json(&outcome, &engine.db, &render));
            } else {
                print!("{}", render_outcome(&outcome, &engine.db, &render));
            }
        }
        Command::Eval { dataset, queryset, knobs, json } => {
            let engine = SearchEngine::from_dir(&dataset_dir(dataset), &taxonomy, CacheMode::Use)?;
            let entries = load_query_set(queryset)?;
            validate_query_set(&entries, &engine.db, &engine.graph)?;
            let results = run_query_set(&engine, &entries, &knobs.options())?;
            let report = compute_metrics(&results, &entries)?;
            if *json {
                println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
            } else {
                print!("{}", render_metrics(&report));
            }
        }
        Command::Stats { dataset, queryset, knobs, json } => {
            let engine = SearchEngine::from_dir(&dataset_dir(dataset), &taxonomy, CacheMode::Use)?;
            let entries = load_query_set(queryset)?;
            validate_query_set(&entries, &engine.db, &engine.graph)?;
            let mut rows = Vec::new();
            for entry in &entries {
                rows.push(stats_for_query(&engine, &entry.id, &entry.keywords, &knobs.options())?);
            }
            if *json {
                println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
            } else {
                print!("{}", render_stats(&rows));
            }
        }
    }
    Ok(())
}
