//! Command-line front end: snapshot ingestion, single-payment planning,
//! payment-set simulation, wall-clock benchmarks, and the property suites.
//! All primary output is JSON on stdout; progress lines go to stderr.
//!
//! Exit codes: 0 success, 1 property failure, 2 usage or input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pcnpath::fee::FeeMap;
use pcnpath::graph::ChannelGraph;
use pcnpath::search::{
    brute_force_lowest_fee, plan_partial_bidirectional, plan_unidirectional,
    plan_unidirectional_barrier, PlanOutcome, Query,
};
use pcnpath::sim::{benchmark, run_experiment, sample_payments, write_results, VertexFilter};
use pcnpath::snapshot::load_snapshot_file;
use pcnpath::verify::{run_all, VerifyBudget};
use pcnpath::TabulatedFees;

/// Default RNG seed when neither --seed nor PCN_SEED is given.
const DEFAULT_SEED: u64 = 42;
/// Sampling attempt budget per requested payment.
const ATTEMPTS_PER_PAYMENT: u64 = 1000;
const MIN_ATTEMPT_CAP: u64 = 100_000;

#[derive(Parser)]
#[command(
    name = "pcnpath",
    about = "Lowest-fee path planning and payment simulation for payment channel networks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SeedArg {
    /// RNG seed; PCN_SEED in the environment overrides the default.
    #[arg(long, env = "PCN_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Load a snapshot, apply filtering, and print the ingest report.
    Ingest {
        /// Snapshot JSON file (lnd describegraph schema).
        #[arg(long)]
        snapshot: PathBuf,
    },
    /// Plan a single payment and print the route (or a no-path record).
    Plan {
        #[arg(long)]
        snapshot: PathBuf,
        /// Source vertex key (node pub_key in the snapshot).
        #[arg(long)]
        source: String,
        /// Destination vertex key.
        #[arg(long)]
        destination: String,
        /// Amount to deliver, in satoshis.
        #[arg(long)]
        amount: f64,
        #[arg(long, value_enum, default_value_t = Planner::Uni)]
        planner: Planner,
        /// Optional tabulated fee map JSON
        /// (list of {"arc": [src, dst], "amount": n, "fee": n}).
        #[arg(long)]
        fee_table: Option<PathBuf>,
        /// Hop limit for the exhaustive oracle planner.
        #[arg(long, default_value_t = 14)]
        max_hops: usize,
    },
    /// Sample feasible payments, run both planners, write CSV/JSON results.
    Simulate {
        #[arg(long)]
        snapshot: PathBuf,
        /// Number of feasible payments to sample.
        #[arg(long = "payments", short = 'n')]
        n_payments: usize,
        #[command(flatten)]
        seed: SeedArg,
        /// Restrict endpoints to vertices with out-degree below this cap.
        #[arg(long)]
        degree_cap: Option<usize>,
        /// Directory for payments.csv, summary.json, histogram.csv.
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Measure single-threaded wall-clock time of both planners.
    Bench {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long = "payments", short = 'n')]
        n_payments: usize,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        degree_cap: Option<usize>,
        #[arg(long, default_value_t = 10)]
        repetitions: usize,
    },
    /// Run the seeded property suites and report pass/fail per suite.
    Verify {
        #[command(flatten)]
        seed: SeedArg,
        /// Case budget per suite (graphs and recurrence paths; consistency
        /// samples 10x this).
        #[arg(long, default_value_t = 200)]
        cases: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Planner {
    /// Unidirectional search from the destination.
    Uni,
    /// Partial bidirectional with source-fee-zero early exit.
    Bi,
    /// Unidirectional with the balance barrier folded into the fee.
    Barrier,
    /// Exhaustive enumeration (small graphs only).
    Oracle,
}

enum CliError {
    /// Bad input or usage: exit 2.
    Input(String),
    /// A property suite failed: exit 1.
    Failure,
}

impl From<pcnpath::snapshot::IngestError> for CliError {
    fn from(e: pcnpath::snapshot::IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<pcnpath::search::SearchError> for CliError {
    fn from(e: pcnpath::search::SearchError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<pcnpath::sim::SimError> for CliError {
    fn from(e: pcnpath::sim::SimError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<pcnpath::fee::FeeError> for CliError {
    fn from(e: pcnpath::fee::FeeError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Failure) => ExitCode::from(1),
        Err(CliError::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { snapshot } => {
            let (_, report) = load_snapshot_file(&snapshot)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("serialize")
            );
            Ok(())
        }
        Command::Plan {
            snapshot,
            source,
            destination,
            amount,
            planner,
            fee_table,
            max_hops,
        } => cmd_plan(
            snapshot,
            source,
            destination,
            amount,
            planner,
            fee_table,
            max_hops,
        ),
        Command::Simulate {
            snapshot,
            n_payments,
            seed,
            degree_cap,
            output_dir,
        } => {
            let (graph, _) = load_snapshot_file(&snapshot)?;
            let payments = sample(&graph, n_payments, seed.seed, degree_cap)?;
            let (metrics, summary) = run_experiment(&graph, &payments)?;
            write_results(&metrics, &summary, &output_dir)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&summary).expect("serialize")
            );
            Ok(())
        }
        Command::Bench {
            snapshot,
            n_payments,
            seed,
            degree_cap,
            repetitions,
        } => {
            let (graph, _) = load_snapshot_file(&snapshot)?;
            let payments = sample(&graph, n_payments, seed.seed, degree_cap)?;
            let report = benchmark(&graph, &payments, repetitions)?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("serialize")
            );
            Ok(())
        }
        Command::Verify { seed, cases } => cmd_verify(seed.seed, cases),
    }
}

fn sample(
    graph: &ChannelGraph,
    n: usize,
    seed: u64,
    degree_cap: Option<usize>,
) -> Result<Vec<pcnpath::sim::Payment>, CliError> {
    let filter = match degree_cap {
        Some(cap) => VertexFilter::OutDegreeBelow(cap),
        None => VertexFilter::All,
    };
    let cap = (n as u64)
        .saturating_mul(ATTEMPTS_PER_PAYMENT)
        .max(MIN_ATTEMPT_CAP);
    Ok(sample_payments(graph, n, seed, filter, cap)?)
}

#[derive(Serialize)]
struct ArcOut {
    id: u32,
    source: String,
    target: String,
}

#[derive(Serialize)]
struct PlanOut {
    found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    arcs: Option<Vec<ArcOut>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hop_amounts: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_fee: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fee_semantics: Option<pcnpath::FeeSemantics>,
    stats: pcnpath::SearchStats,
}

fn cmd_plan(
    snapshot: PathBuf,
    source: String,
    destination: String,
    amount: f64,
    planner: Planner,
    fee_table: Option<PathBuf>,
    max_hops: usize,
) -> Result<(), CliError> {
    let (graph, _) = load_snapshot_file(&snapshot)?;
    let s = graph
        .vertex_by_key(&source)
        .ok_or_else(|| CliError::Input(format!("unknown source vertex key {source:?}")))?;
    let t = graph.vertex_by_key(&destination).ok_or_else(|| {
        CliError::Input(format!("unknown destination vertex key {destination:?}"))
    })?;
    let query = Query::new(s, t, amount)?;

    let fee = match fee_table {
        None => FeeMap::Linear,
        Some(path) => {
            let json = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Input(format!("cannot read fee table: {e}")))?;
            FeeMap::Tabulated(TabulatedFees::from_json_str(&graph, &json)?)
        }
    };

    let outcome = match planner {
        Planner::Uni => plan_unidirectional(&graph, &query, &fee)?,
        Planner::Bi => plan_partial_bidirectional(&graph, &query, &fee)?,
        Planner::Barrier => plan_unidirectional_barrier(&graph, &query)?,
        Planner::Oracle => brute_force_lowest_fee(&graph, &query, &fee, max_hops)?,
    };

    let out = match outcome {
        PlanOutcome::Route(route) => PlanOut {
            found: true,
            arcs: Some(
                route
                    .arcs
                    .iter()
                    .map(|&a| {
                        let arc = graph.arc(a);
                        ArcOut {
                            id: a.0,
                            source: graph.vertex_key(arc.source).to_owned(),
                            target: graph.vertex_key(arc.target).to_owned(),
                        }
                    })
                    .collect(),
            ),
            hop_amounts: Some(route.hop_amounts.as_slice().to_vec()),
            total_fee: Some(route.total_fee),
            fee_semantics: Some(route.semantics),
            stats: route.stats,
        },
        PlanOutcome::NoPath(stats) => PlanOut {
            found: false,
            arcs: None,
            hop_amounts: None,
            total_fee: None,
            fee_semantics: None,
            stats,
        },
    };
    println!("{}", serde_json::to_string_pretty(&out).expect("serialize"));
    Ok(())
}

fn cmd_verify(seed: u64, cases: u64) -> Result<(), CliError> {
    let reports = run_all(seed, VerifyBudget::from_cases(cases));
    for report in &reports {
        let status = if report.passed() { "PASS" } else { "FAIL" };
        eprintln!("{status} {} (cases={})", report.name, report.cases);
        if let Some(warning) = &report.warning {
            eprintln!("  warning: {warning}");
        }
        for failure in &report.failures {
            eprintln!("  {failure}");
        }
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&reports).expect("serialize")
    );
    if reports.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(CliError::Failure)
    }
}
