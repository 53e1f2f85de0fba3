//! Lowest-fee path search.
//!
//! All planners search the transpose of the payment graph outward from the
//! destination, because hop fees depend on the amount that must *arrive* at
//! each vertex and only the destination amount is known up front. Relaxing
//! a transpose arc `(v, v')` (payment arc `(v', v)`) therefore evaluates the
//! fee at the accumulated amount `a + c(v)` and admits the arc only while
//! that amount fits the arc balance.
//!
//! Three planners share one engine:
//!
//! * [`plan_unidirectional`] — balance check in the relaxation condition;
//! * [`plan_unidirectional_barrier`] — no explicit balance check, the fee
//!   itself turns infinite past the balance (both return identical results
//!   on every query, which the test suites assert);
//! * [`plan_partial_bidirectional`] — stops as soon as any popped vertex has
//!   an arc from the source with sufficient balance, treating first-hop fees
//!   as refunded-to-self and therefore zero. Its fee is quoted under those
//!   source-fee-zero semantics.
//!
//! [`brute_force_lowest_fee`] enumerates simple paths as an independent
//! check. It folds each candidate's cost with the exact expression sequence
//! the relaxation uses, so agreement with the planners is exact, not just
//! within tolerance.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::fee::{amounts_recursive, fee_barrier, nearly_equal, FeeError, FeeMap, HopAmounts};
use crate::graph::{ArcId, ArcPolicy, ChannelGraph, GraphError, VertexId};
use crate::heap::IndexedMinHeap;

/// A payment to route: deliver `amount` from `source` to `destination`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query {
    pub source: VertexId,
    pub destination: VertexId,
    pub amount: f64,
}

impl Query {
    pub fn new(source: VertexId, destination: VertexId, amount: f64) -> Result<Self, SearchError> {
        if source == destination {
            return Err(SearchError::SameEndpoints(source));
        }
        if !(amount.is_finite() && amount > 0.0) {
            return Err(SearchError::InvalidAmount(amount));
        }
        Ok(Query {
            source,
            destination,
            amount,
        })
    }
}

/// Instrumentation for one search. `relaxations` counts iterations of the
/// inner arc loop (the "vertices explored" metric); `pops` counts queue
/// removals.
#[derive(Debug, Clone, Copy, Default, serde::Serialize)]
pub struct SearchStats {
    pub relaxations: u64,
    pub pops: u64,
    #[serde(serialize_with = "ser_duration_ns")]
    pub wall_time: Duration,
}

fn ser_duration_ns<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u128(d.as_nanos())
}

/// Which fee convention a result's `total_fee` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeeSemantics {
    /// Every hop charged, including the first.
    FullFees,
    /// Fees on arcs leaving the payment source counted as zero (they are
    /// paid back to the source itself).
    SourceFeesZero,
}

/// A feasible route in payment direction with its hop amounts.
#[derive(Debug, Clone)]
pub struct PathResult {
    pub arcs: Vec<ArcId>,
    pub hop_amounts: HopAmounts,
    pub total_fee: f64,
    pub semantics: FeeSemantics,
    pub stats: SearchStats,
}

/// Search outcome. Infeasibility is data, not an error: rejection sampling
/// consumes it, and the barrier planner equates it with an infinite fee.
#[derive(Debug, Clone)]
pub enum PlanOutcome {
    Route(PathResult),
    NoPath(SearchStats),
}

impl PlanOutcome {
    pub fn route(&self) -> Option<&PathResult> {
        match self {
            PlanOutcome::Route(r) => Some(r),
            PlanOutcome::NoPath(_) => None,
        }
    }

    pub fn is_route(&self) -> bool {
        self.route().is_some()
    }

    /// Total fee of the route, or `+inf` when there is none.
    pub fn fee_or_infinity(&self) -> f64 {
        match self {
            PlanOutcome::Route(r) => r.total_fee,
            PlanOutcome::NoPath(_) => f64::INFINITY,
        }
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            PlanOutcome::Route(r) => &r.stats,
            PlanOutcome::NoPath(s) => s,
        }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("source and destination are the same vertex {0}")]
    SameEndpoints(VertexId),
    #[error("payment amount must be finite and positive, got {0}")]
    InvalidAmount(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Fee(#[from] FeeError),
    #[error("cost of the source vertex is not finite; no route to reconstruct")]
    InfiniteCost,
    #[error("predecessor chain is broken at {0}")]
    BrokenPredecessor(VertexId),
    #[error("predecessor chain does not terminate (cycle)")]
    PredecessorCycle,
    #[error("reconstructed amounts disagree with search cost: {candidate} vs {expected}")]
    ReconstructionMismatch { candidate: f64, expected: f64 },
    #[error(
        "graph too large for exhaustive search: {vertices} vertices with max_hops {max_hops} \
         (either must be at most {limit})"
    )]
    OracleGuard {
        vertices: usize,
        max_hops: usize,
        limit: usize,
    },
}

/// Cost and predecessor labels of a finished search over the transpose
/// orientation. `costs[v]` is the fee from `v` to the destination;
/// `preds[v]` is the payment-direction arc leaving `v` on that route.
#[derive(Debug, Clone)]
pub struct SearchState {
    pub costs: Vec<f64>,
    pub preds: Vec<Option<ArcId>>,
}

enum Mode {
    Unidirectional,
    Barrier,
    PartialBidirectional,
}

/// Arcs leaving the payment source, grouped by their head vertex.
type ExitArcs = HashMap<u32, Vec<ArcId>>;

fn check_endpoints(g: &ChannelGraph, q: &Query) -> Result<(), SearchError> {
    for v in [q.source, q.destination] {
        if !g.contains_vertex(v) {
            return Err(SearchError::Graph(GraphError::UnknownVertex(v)));
        }
    }
    Ok(())
}

/// Lowest-fee search with the balance check in the relaxation condition.
/// With a consistent fee map the returned route is a lowest-fee feasible
/// route; the tabulated counterexample network shows how that guarantee
/// falls apart for inconsistent maps.
pub fn plan_unidirectional(
    g: &ChannelGraph,
    q: &Query,
    fee: &FeeMap,
) -> Result<PlanOutcome, SearchError> {
    dijkstra(g, q, fee, Mode::Unidirectional)
}

/// Variant that drops the explicit balance check and instead prices
/// over-balance arcs at `+inf` via the barrier map. Equivalent to
/// [`plan_unidirectional`] on every query when infinite fee is equated
/// with no-path.
pub fn plan_unidirectional_barrier(
    g: &ChannelGraph,
    q: &Query,
) -> Result<PlanOutcome, SearchError> {
    dijkstra(g, q, &FeeMap::Barrier, Mode::Barrier)
}

/// Unidirectional search with an early exit: when a popped vertex `v` has an
/// arc `(source, v)` with balance at least `a + c(v)`, the route is complete
/// because first-hop fees are refunded to the source. The fee is reported
/// under [`FeeSemantics::SourceFeesZero`] and equals what
/// [`plan_unidirectional`] reports on [`apply_source_fee_zero`]`(g, source)`.
pub fn plan_partial_bidirectional(
    g: &ChannelGraph,
    q: &Query,
    fee: &FeeMap,
) -> Result<PlanOutcome, SearchError> {
    dijkstra(g, q, fee, Mode::PartialBidirectional)
}

fn dijkstra(
    g: &ChannelGraph,
    q: &Query,
    fee: &FeeMap,
    mode: Mode,
) -> Result<PlanOutcome, SearchError> {
    check_endpoints(g, q)?;
    let start = Instant::now();
    let n = g.vertex_count();
    let mut costs = vec![f64::INFINITY; n];
    let mut preds: Vec<Option<ArcId>> = vec![None; n];
    let mut heap = IndexedMinHeap::new(n);
    let mut relaxations: u64 = 0;
    let mut pops: u64 = 0;

    let s = q.source;
    let t = q.destination;
    costs[t.index()] = 0.0;
    heap.insert_or_decrease(t.0, 0.0);

    // For the early exit: arcs leaving the source, grouped by their head.
    let exit_arcs: Option<ExitArcs> = match mode {
        Mode::PartialBidirectional => {
            let mut m: HashMap<u32, Vec<ArcId>> = HashMap::new();
            for &aid in g.out_arcs(s) {
                m.entry(g.arc(aid).target.0).or_default().push(aid);
            }
            Some(m)
        }
        _ => None,
    };

    let mut settled_source = false;
    let mut semantics = FeeSemantics::FullFees;
    let mut last_popped = f64::NEG_INFINITY;

    'search: while let Some((cost_v, v)) = heap.pop() {
        pops += 1;
        // non-negative fees keep settled costs non-decreasing
        debug_assert!(cost_v >= last_popped);
        last_popped = cost_v;
        if v == s.0 {
            settled_source = true;
            break;
        }
        if let Some(exits) = &exit_arcs {
            if let Some(candidates) = exits.get(&v) {
                for &aid in candidates {
                    // ascending ArcId; first hop must carry a + c(v)
                    if cost_v + q.amount <= g.arc(aid).policy.balance {
                        costs[s.index()] = cost_v;
                        preds[s.index()] = Some(aid);
                        settled_source = true;
                        semantics = FeeSemantics::SourceFeesZero;
                        break 'search;
                    }
                }
            }
        }
        // Relax transpose arcs out of v: payment arcs (w, v).
        for &aid in g.in_arcs(VertexId(v)) {
            relaxations += 1;
            let arc = g.arc(aid);
            let w = arc.source.index();
            let amount_at_v = q.amount + cost_v;
            let candidate = match mode {
                Mode::Barrier => cost_v + fee_barrier(&arc.policy, amount_at_v)?,
                Mode::Unidirectional | Mode::PartialBidirectional => {
                    if cost_v + q.amount > arc.policy.balance {
                        continue;
                    }
                    cost_v + fee.fee(aid, &arc.policy, amount_at_v)?
                }
            };
            // strict improvement only: equal-cost candidates never replace
            if candidate < costs[w] {
                costs[w] = candidate;
                preds[w] = Some(aid);
                heap.insert_or_decrease(w as u32, candidate);
            }
        }
    }

    let stats = SearchStats {
        relaxations,
        pops,
        wall_time: start.elapsed(),
    };
    if !settled_source || !costs[s.index()].is_finite() {
        return Ok(PlanOutcome::NoPath(stats));
    }
    let state = SearchState { costs, preds };
    let (arcs, hop_amounts) = reconstruct_path(g, fee, &state, q, semantics)?;
    let total_fee = state.costs[s.index()];
    Ok(PlanOutcome::Route(PathResult {
        arcs,
        hop_amounts,
        total_fee,
        semantics,
        stats,
    }))
}

/// Copy of `g` with zero fees on every arc leaving `source`; balances are
/// untouched. Applying it twice equals applying it once.
pub fn apply_source_fee_zero(
    g: &ChannelGraph,
    source: VertexId,
) -> Result<ChannelGraph, SearchError> {
    if !g.contains_vertex(source) {
        return Err(SearchError::Graph(GraphError::UnknownVertex(source)));
    }
    Ok(g.map_policies(|_, arc| {
        if arc.source == source {
            arc.policy.with_zero_fees()
        } else {
            arc.policy
        }
    }))
}

/// Follow the predecessor labels from the query source back to the
/// destination, returning the payment-direction arc sequence and its hop
/// amounts. The recomputed source amount must match `a + c(source)` within
/// tolerance; under [`FeeSemantics::SourceFeesZero`] the first hop is
/// re-priced at zero before that comparison.
pub fn reconstruct_path(
    g: &ChannelGraph,
    fee: &FeeMap,
    state: &SearchState,
    q: &Query,
    semantics: FeeSemantics,
) -> Result<(Vec<ArcId>, HopAmounts), SearchError> {
    let source_cost = state.costs[q.source.index()];
    if !source_cost.is_finite() {
        return Err(SearchError::InfiniteCost);
    }
    let mut arcs = Vec::new();
    let mut v = q.source;
    while v != q.destination {
        let aid = state.preds[v.index()].ok_or(SearchError::BrokenPredecessor(v))?;
        let arc = g.arc(aid);
        if arc.source != v {
            return Err(SearchError::BrokenPredecessor(v));
        }
        arcs.push(aid);
        if arcs.len() > g.vertex_count() {
            return Err(SearchError::PredecessorCycle);
        }
        v = arc.target;
    }
    let hop_amounts = path_amounts(g, fee, &arcs, q, semantics)?;
    let expected = q.amount + source_cost;
    let candidate = hop_amounts.required_at_source();
    if !nearly_equal(candidate, expected) {
        return Err(SearchError::ReconstructionMismatch {
            candidate,
            expected,
        });
    }
    Ok((arcs, hop_amounts))
}

fn path_amounts(
    g: &ChannelGraph,
    fee: &FeeMap,
    arcs: &[ArcId],
    q: &Query,
    semantics: FeeSemantics,
) -> Result<HopAmounts, FeeError> {
    let path: Vec<(ArcId, ArcPolicy)> = arcs
        .iter()
        .map(|&aid| {
            let arc = g.arc(aid);
            let policy = match semantics {
                FeeSemantics::SourceFeesZero if arc.source == q.source => {
                    arc.policy.with_zero_fees()
                }
                _ => arc.policy,
            };
            (aid, policy)
        })
        .collect();
    // Tabulated maps ignore policies, so zero the first hop explicitly by
    // pricing the tail and passing its head amount through the first arc.
    if semantics == FeeSemantics::SourceFeesZero && !path.is_empty() {
        if let FeeMap::Tabulated(_) = fee {
            let tail = amounts_recursive(fee, &path[1..], q.amount)?;
            let mut seq = Vec::with_capacity(tail.len() + 1);
            seq.push(tail.required_at_source());
            seq.extend_from_slice(tail.as_slice());
            return Ok(HopAmounts::from_vec(seq));
        }
    }
    amounts_recursive(fee, &path, q.amount)
}

/// Exhaustive enumeration of simple routes, used as an independent check on
/// the planners. Paths are enumerated in ascending-arc-id (lexicographic)
/// order and ties keep the first minimum found, so results are
/// deterministic. Costs fold with the planner's exact expression sequence.
pub fn brute_force_lowest_fee(
    g: &ChannelGraph,
    q: &Query,
    fee: &FeeMap,
    max_hops: usize,
) -> Result<PlanOutcome, SearchError> {
    const LIMIT: usize = 14;
    check_endpoints(g, q)?;
    if g.vertex_count() > LIMIT && max_hops > LIMIT {
        return Err(SearchError::OracleGuard {
            vertices: g.vertex_count(),
            max_hops,
            limit: LIMIT,
        });
    }
    let start = Instant::now();
    let mut visited = vec![false; g.vertex_count()];
    visited[q.source.index()] = true;
    let mut current: Vec<ArcId> = Vec::new();
    let mut best: Option<(f64, Vec<ArcId>)> = None;
    dfs(
        g,
        q,
        fee,
        max_hops,
        q.source,
        &mut visited,
        &mut current,
        &mut best,
    )?;
    let stats = SearchStats {
        relaxations: 0,
        pops: 0,
        wall_time: start.elapsed(),
    };
    match best {
        None => Ok(PlanOutcome::NoPath(stats)),
        Some((total_fee, arcs)) => {
            let hop_amounts = path_amounts(g, fee, &arcs, q, FeeSemantics::FullFees)?;
            Ok(PlanOutcome::Route(PathResult {
                arcs,
                hop_amounts,
                total_fee,
                semantics: FeeSemantics::FullFees,
                stats,
            }))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    g: &ChannelGraph,
    q: &Query,
    fee: &FeeMap,
    max_hops: usize,
    at: VertexId,
    visited: &mut Vec<bool>,
    current: &mut Vec<ArcId>,
    best: &mut Option<(f64, Vec<ArcId>)>,
) -> Result<(), SearchError> {
    if current.len() >= max_hops {
        return Ok(());
    }
    for &aid in g.out_arcs(at) {
        let arc = g.arc(aid);
        let next = arc.target;
        if visited[next.index()] {
            continue;
        }
        current.push(aid);
        if next == q.destination {
            if let Some(cost) = feasible_path_cost(g, fee, current, q.amount)? {
                let better = match best {
                    None => true,
                    Some((incumbent, _)) => cost < *incumbent,
                };
                if better {
                    *best = Some((cost, current.clone()));
                }
            }
        } else {
            visited[next.index()] = true;
            dfs(g, q, fee, max_hops, next, visited, current, best)?;
            visited[next.index()] = false;
        }
        current.pop();
    }
    Ok(())
}

/// Cost of one payment-direction path folded destination-first with the
/// same expressions the relaxation uses (`a + c` for the fee argument and
/// the balance test, `c + fee` for the accumulation). Returns `None` when a
/// balance is exceeded or a fee is infinite.
fn feasible_path_cost(
    g: &ChannelGraph,
    fee: &FeeMap,
    arcs: &[ArcId],
    amount: f64,
) -> Result<Option<f64>, SearchError> {
    let mut cost = 0.0f64;
    for &aid in arcs.iter().rev() {
        let arc = g.arc(aid);
        if cost + amount > arc.policy.balance {
            return Ok(None);
        }
        let f = fee.fee(aid, &arc.policy, amount + cost)?;
        cost += f;
        if !cost.is_finite() {
            return Ok(None);
        }
    }
    Ok(Some(cost))
}
