//! Payment simulation: rejection-sampled payment sets, per-payment explored-
//! vertex metrics for the unidirectional and partial-bidirectional planners,
//! summary statistics with a reduction histogram, and wall-clock benchmarks.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fee::FeeMap;
use crate::graph::{ChannelGraph, VertexId};
use crate::search::{
    plan_partial_bidirectional, plan_unidirectional, PlanOutcome, Query, SearchError,
};

/// Largest sampled payment amount, in satoshis.
pub const PAYMENT_AMOUNT_MAX: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("need at least 2 eligible vertices to sample payments, got {0}")]
    TooFewEligible(usize),
    #[error("no feasible payment found within {attempts} attempts ({accepted} accepted so far)")]
    SamplingStalled { attempts: u64, accepted: usize },
    #[error("payment {index} ({} -> {}, {} sat) is not feasible", payment.source, payment.destination, payment.amount)]
    InfeasiblePayment { index: usize, payment: Payment },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("cannot write results: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A sampled payment. Amounts are whole satoshis in `1..=PAYMENT_AMOUNT_MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Payment {
    pub source: VertexId,
    pub destination: VertexId,
    pub amount: u64,
}

impl Payment {
    pub fn query(&self) -> Query {
        Query {
            source: self.source,
            destination: self.destination,
            amount: self.amount as f64,
        }
    }
}

/// Which vertices may appear as payment endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexFilter {
    All,
    /// Only vertices with out-degree strictly below the cap — the
    /// low-degree population that looks like customers and merchants
    /// rather than routing hubs.
    OutDegreeBelow(usize),
}

impl VertexFilter {
    fn eligible(&self, g: &ChannelGraph) -> Vec<VertexId> {
        match *self {
            VertexFilter::All => g.vertices().collect(),
            VertexFilter::OutDegreeBelow(cap) => g
                .vertices()
                .filter(|&v| g.out_arcs(v).len() < cap)
                .collect(),
        }
    }
}

/// Draw `n` feasible payments by rejection sampling: a distinct
/// (source, destination) pair uniformly from the eligible set, an amount
/// uniformly from `1..=PAYMENT_AMOUNT_MAX`, kept only when
/// [`plan_unidirectional`] finds a route. Deterministic in `(g, n, seed)`.
/// Fails once `attempt_cap` candidate draws pass without reaching `n`.
pub fn sample_payments(
    g: &ChannelGraph,
    n: usize,
    seed: u64,
    filter: VertexFilter,
    attempt_cap: u64,
) -> Result<Vec<Payment>, SimError> {
    let eligible = filter.eligible(g);
    if eligible.len() < 2 {
        return Err(SimError::TooFewEligible(eligible.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut payments = Vec::with_capacity(n);
    let mut attempts: u64 = 0;
    while payments.len() < n {
        if attempts >= attempt_cap {
            return Err(SimError::SamplingStalled {
                attempts,
                accepted: payments.len(),
            });
        }
        attempts += 1;
        let si = rng.random_range(0..eligible.len());
        let mut di = rng.random_range(0..eligible.len() - 1);
        if di >= si {
            di += 1;
        }
        let amount = rng.random_range(1..=PAYMENT_AMOUNT_MAX);
        let payment = Payment {
            source: eligible[si],
            destination: eligible[di],
            amount,
        };
        let outcome = plan_unidirectional(g, &payment.query(), &FeeMap::Linear)?;
        if outcome.is_route() {
            payments.push(payment);
        }
    }
    Ok(payments)
}

/// Per-payment comparison of the two planners.
#[derive(Debug, Clone, Serialize)]
pub struct PaymentMetrics {
    pub payment: Payment,
    pub uni_relaxations: u64,
    pub bi_relaxations: u64,
    /// `100 * (uni - bi) / uni`; can go below zero when the early exit
    /// never fires and tie-breaking diverges.
    pub reduction_pct: f64,
    pub uni_fee: f64,
    /// Quoted under source-fee-zero semantics.
    pub bi_fee: f64,
    pub path_len: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub n_payments: usize,
    pub uni_relaxations_mean: f64,
    pub uni_relaxations_std: f64,
    pub bi_relaxations_mean: f64,
    pub bi_relaxations_std: f64,
    pub reduction_pct_mean: f64,
    pub reduction_pct_std: f64,
    pub histogram: Vec<HistogramBin>,
    pub uni_total_wall_s: f64,
    pub bi_total_wall_s: f64,
    pub uni_per_payment_wall_s: f64,
    pub bi_per_payment_wall_s: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

/// Width of the regular histogram bins, in percentage points.
const BIN_WIDTH: f64 = 5.0;
/// Lower edge of the single underflow bin that catches negative reductions.
const UNDERFLOW_LO: f64 = -1e9;

/// Bins over `[0, 100]` at 5-point width plus one underflow bin for
/// negatives; 100% lands in the last regular bin.
pub fn reduction_histogram(values: &[f64]) -> Vec<HistogramBin> {
    let n_regular = (100.0 / BIN_WIDTH) as usize;
    let mut bins: Vec<HistogramBin> = Vec::with_capacity(n_regular + 1);
    bins.push(HistogramBin {
        lo: UNDERFLOW_LO,
        hi: 0.0,
        count: 0,
    });
    for i in 0..n_regular {
        bins.push(HistogramBin {
            lo: i as f64 * BIN_WIDTH,
            hi: (i + 1) as f64 * BIN_WIDTH,
            count: 0,
        });
    }
    for &v in values {
        let idx = if v < 0.0 {
            0
        } else {
            ((v / BIN_WIDTH) as usize).min(n_regular - 1) + 1
        };
        bins[idx].count += 1;
    }
    bins
}

/// Run both planners over every payment and aggregate. Payments are spread
/// across worker threads; metrics keep payment order, so every counter is
/// deterministic (wall times are not).
pub fn run_experiment(
    g: &ChannelGraph,
    payments: &[Payment],
) -> Result<(Vec<PaymentMetrics>, ExperimentSummary), SimError> {
    let per_payment: Vec<Result<(PaymentMetrics, Duration, Duration), SimError>> = payments
        .par_iter()
        .enumerate()
        .map(|(index, payment)| {
            let q = payment.query();
            let uni = plan_unidirectional(g, &q, &FeeMap::Linear)?;
            let bi = plan_partial_bidirectional(g, &q, &FeeMap::Linear)?;
            let (uni, bi) = match (uni, bi) {
                (PlanOutcome::Route(u), PlanOutcome::Route(b)) => (u, b),
                _ => {
                    return Err(SimError::InfeasiblePayment {
                        index,
                        payment: *payment,
                    })
                }
            };
            let uni_relaxations = uni.stats.relaxations;
            let bi_relaxations = bi.stats.relaxations;
            let reduction_pct =
                100.0 * (uni_relaxations as f64 - bi_relaxations as f64) / uni_relaxations as f64;
            let metrics = PaymentMetrics {
                payment: *payment,
                uni_relaxations,
                bi_relaxations,
                reduction_pct,
                uni_fee: uni.total_fee,
                bi_fee: bi.total_fee,
                path_len: uni.arcs.len(),
            };
            Ok((metrics, uni.stats.wall_time, bi.stats.wall_time))
        })
        .collect();

    let mut metrics = Vec::with_capacity(payments.len());
    let mut uni_wall = Duration::ZERO;
    let mut bi_wall = Duration::ZERO;
    for row in per_payment {
        let (m, u, b) = row?;
        metrics.push(m);
        uni_wall += u;
        bi_wall += b;
    }
    let summary = summarize(&metrics, uni_wall, bi_wall);
    Ok((metrics, summary))
}

fn summarize(
    metrics: &[PaymentMetrics],
    uni_wall: Duration,
    bi_wall: Duration,
) -> ExperimentSummary {
    let n = metrics.len();
    let (uni_mean, uni_std) = mean_std(metrics.iter().map(|m| m.uni_relaxations as f64));
    let (bi_mean, bi_std) = mean_std(metrics.iter().map(|m| m.bi_relaxations as f64));
    let reductions: Vec<f64> = metrics.iter().map(|m| m.reduction_pct).collect();
    let (red_mean, red_std) = mean_std(reductions.iter().copied());
    ExperimentSummary {
        n_payments: n,
        uni_relaxations_mean: uni_mean,
        uni_relaxations_std: uni_std,
        bi_relaxations_mean: bi_mean,
        bi_relaxations_std: bi_std,
        reduction_pct_mean: red_mean,
        reduction_pct_std: red_std,
        histogram: reduction_histogram(&reductions),
        uni_total_wall_s: uni_wall.as_secs_f64(),
        bi_total_wall_s: bi_wall.as_secs_f64(),
        uni_per_payment_wall_s: if n > 0 {
            uni_wall.as_secs_f64() / n as f64
        } else {
            0.0
        },
        bi_per_payment_wall_s: if n > 0 {
            bi_wall.as_secs_f64() / n as f64
        } else {
            0.0
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub n_payments: usize,
    pub repetitions: usize,
    pub uni_mean_total_s: f64,
    pub bi_mean_total_s: f64,
    pub uni_per_payment_s: f64,
    pub bi_per_payment_s: f64,
    /// False when there were no payments; per-payment figures are then 0.
    pub per_payment_defined: bool,
}

/// Mean wall-clock time to plan the full payment set with each planner,
/// strictly single-threaded, averaged over `repetitions` runs.
pub fn benchmark(
    g: &ChannelGraph,
    payments: &[Payment],
    repetitions: usize,
) -> Result<BenchReport, SimError> {
    let repetitions = repetitions.max(1);
    let mut uni_total = Duration::ZERO;
    let mut bi_total = Duration::ZERO;
    for _ in 0..repetitions {
        let start = Instant::now();
        for payment in payments {
            plan_unidirectional(g, &payment.query(), &FeeMap::Linear)?;
        }
        uni_total += start.elapsed();
        let start = Instant::now();
        for payment in payments {
            plan_partial_bidirectional(g, &payment.query(), &FeeMap::Linear)?;
        }
        bi_total += start.elapsed();
    }
    let n = payments.len();
    let uni_mean = uni_total.as_secs_f64() / repetitions as f64;
    let bi_mean = bi_total.as_secs_f64() / repetitions as f64;
    Ok(BenchReport {
        n_payments: n,
        repetitions,
        uni_mean_total_s: uni_mean,
        bi_mean_total_s: bi_mean,
        uni_per_payment_s: if n > 0 { uni_mean / n as f64 } else { 0.0 },
        bi_per_payment_s: if n > 0 { bi_mean / n as f64 } else { 0.0 },
        per_payment_defined: n > 0,
    })
}

/// Files produced by [`write_results`].
#[derive(Debug, Clone, Serialize)]
pub struct WrittenPaths {
    pub payments_csv: PathBuf,
    pub summary_json: PathBuf,
    pub histogram_csv: PathBuf,
}

/// Write the per-payment CSV, the summary JSON, and a gnuplot-friendly
/// histogram CSV into `dir` (created if missing).
pub fn write_results(
    metrics: &[PaymentMetrics],
    summary: &ExperimentSummary,
    dir: impl AsRef<Path>,
) -> Result<WrittenPaths, SimError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;

    let payments_csv = dir.join("payments.csv");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&payments_csv)?);
    writeln!(
        out,
        "payment_id,source,destination,amount,uni_relaxations,bi_relaxations,reduction_pct,uni_fee,bi_fee,path_len"
    )?;
    for (i, m) in metrics.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            i,
            m.payment.source.0,
            m.payment.destination.0,
            m.payment.amount,
            m.uni_relaxations,
            m.bi_relaxations,
            m.reduction_pct,
            m.uni_fee,
            m.bi_fee,
            m.path_len
        )?;
    }
    out.flush()?;

    let summary_json = dir.join("summary.json");
    std::fs::write(&summary_json, serde_json::to_string_pretty(summary)?)?;

    let histogram_csv = dir.join("histogram.csv");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&histogram_csv)?);
    writeln!(out, "bin_lo,bin_hi,count")?;
    for bin in &summary.histogram {
        writeln!(out, "{},{},{}", bin.lo, bin.hi, bin.count)?;
    }
    out.flush()?;

    Ok(WrittenPaths {
        payments_csv,
        summary_json,
        histogram_csv,
    })
}
