//! Fee maps and the per-path amount recurrence.
//!
//! An arc forwarding an amount `a` to its head charges
//! `base_fee + fee_rate * a`. Walking a path backwards from the destination,
//! the amount that must reach each vertex follows
//! `a[i] = a[i+1] + fee(e[i], a[i+1])`; [`amounts_recursive`] evaluates that
//! recurrence and [`amounts_closed_form`] evaluates its direct solution.
//!
//! Three fee map variants are supported: the linear map above, a barrier map
//! returning `+inf` once the amount exceeds the arc balance, and a finite
//! tabulated map used to build deliberately inconsistent networks in tests.

use std::collections::HashMap;

use serde::Deserialize;
use thiserror::Error;

use crate::graph::{ArcId, ArcPolicy, ChannelGraph};

/// Comparison tolerance for amounts and fees, scaled by magnitude for
/// values above 1 (binary64 cannot hold a fixed absolute 1e-9 once amounts
/// reach the satoshi billions).
pub const TOLERANCE: f64 = 1e-9;

/// `|a - b| <= TOLERANCE * max(1, |a|, |b|)`.
pub fn nearly_equal(a: f64, b: f64) -> bool {
    if a == b {
        return true; // covers both infinite with same sign
    }
    (a - b).abs() <= TOLERANCE * 1f64.max(a.abs().max(b.abs()))
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeeError {
    #[error("amount must be finite and non-negative, got {0}")]
    InvalidAmount(f64),
    #[error("tabulated fee map has no entry for arc {arc} at amount {amount}")]
    UndefinedTabulated { arc: ArcId, amount: f64 },
    #[error("tabulated fee entry references unknown vertex key {0:?}")]
    UnknownVertexKey(String),
    #[error("tabulated fee entry references missing arc {src:?} -> {dst:?}")]
    MissingArc { src: String, dst: String },
    #[error("tabulated fee entry for {src:?} -> {dst:?} is ambiguous: parallel arcs")]
    AmbiguousArc { src: String, dst: String },
    #[error(
        "tabulated fee entry must have finite non-negative amount and fee, got ({amount}, {fee})"
    )]
    InvalidTableEntry { amount: f64, fee: f64 },
    #[error("consistency pair ({low}, {high}) is not ordered low <= high")]
    UnorderedPair { low: f64, high: f64 },
    #[error("invalid fee table JSON: {0}")]
    TableJson(String),
}

fn check_amount(amount: f64) -> Result<(), FeeError> {
    if amount.is_finite() && amount >= 0.0 {
        Ok(())
    } else {
        Err(FeeError::InvalidAmount(amount))
    }
}

/// `base_fee + fee_rate * amount`.
pub fn fee_linear(policy: &ArcPolicy, amount: f64) -> Result<f64, FeeError> {
    check_amount(amount)?;
    Ok(policy.base_fee + policy.fee_rate * amount)
}

/// Linear fee while `amount <= balance`, `+inf` beyond it.
pub fn fee_barrier(policy: &ArcPolicy, amount: f64) -> Result<f64, FeeError> {
    check_amount(amount)?;
    if amount <= policy.balance {
        Ok(policy.base_fee + policy.fee_rate * amount)
    } else {
        Ok(f64::INFINITY)
    }
}

/// Finite lookup table `(arc, amount) -> fee`. Lookups match amounts within
/// [`TOLERANCE`]; anything outside the table is a hard error so that test
/// networks must enumerate every pair a search can reach.
#[derive(Debug, Clone, Default)]
pub struct TabulatedFees {
    entries: HashMap<ArcId, Vec<(f64, f64)>>,
}

#[derive(Deserialize)]
struct TableEntry {
    arc: [String; 2],
    amount: f64,
    fee: f64,
}

impl TabulatedFees {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, arc: ArcId, amount: f64, fee: f64) -> Result<(), FeeError> {
        if !(amount.is_finite() && amount >= 0.0 && fee.is_finite() && fee >= 0.0) {
            return Err(FeeError::InvalidTableEntry { amount, fee });
        }
        self.entries.entry(arc).or_default().push((amount, fee));
        Ok(())
    }

    pub fn lookup(&self, arc: ArcId, amount: f64) -> Result<f64, FeeError> {
        self.entries
            .get(&arc)
            .and_then(|rows| {
                rows.iter()
                    .find(|(a, _)| nearly_equal(*a, amount))
                    .map(|&(_, fee)| fee)
            })
            .ok_or(FeeError::UndefinedTabulated { arc, amount })
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Load from a JSON list of `{"arc": [source_key, target_key],
    /// "amount": n, "fee": n}`, resolving each key pair against `graph`.
    /// Arcs are named in payment direction.
    pub fn from_json_str(graph: &ChannelGraph, json: &str) -> Result<Self, FeeError> {
        let rows: Vec<TableEntry> =
            serde_json::from_str(json).map_err(|e| FeeError::TableJson(e.to_string()))?;
        let mut table = TabulatedFees::new();
        for row in rows {
            let [src_key, dst_key] = row.arc;
            let src = graph
                .vertex_by_key(&src_key)
                .ok_or_else(|| FeeError::UnknownVertexKey(src_key.clone()))?;
            let dst = graph
                .vertex_by_key(&dst_key)
                .ok_or_else(|| FeeError::UnknownVertexKey(dst_key.clone()))?;
            let mut matching = graph
                .out_arcs(src)
                .iter()
                .copied()
                .filter(|&a| graph.arc(a).target == dst);
            let arc = matching.next().ok_or_else(|| FeeError::MissingArc {
                src: src_key.clone(),
                dst: dst_key.clone(),
            })?;
            if matching.next().is_some() {
                return Err(FeeError::AmbiguousArc {
                    src: src_key,
                    dst: dst_key,
                });
            }
            table.insert(arc, row.amount, row.fee)?;
        }
        Ok(table)
    }
}

/// Pluggable fee function used by the planners.
#[derive(Debug, Clone, Default)]
pub enum FeeMap {
    /// `base_fee + fee_rate * amount` from each arc's policy.
    #[default]
    Linear,
    /// Linear wrapped with the balance barrier (`+inf` when over balance).
    Barrier,
    /// Exact finite lookups, independent of arc policies.
    Tabulated(TabulatedFees),
}

impl FeeMap {
    pub fn fee(&self, arc: ArcId, policy: &ArcPolicy, amount: f64) -> Result<f64, FeeError> {
        match self {
            FeeMap::Linear => fee_linear(policy, amount),
            FeeMap::Barrier => fee_barrier(policy, amount),
            FeeMap::Tabulated(table) => {
                check_amount(amount)?;
                table.lookup(arc, amount)
            }
        }
    }
}

/// Amounts `a[0] ..= a[n]` along a path of `n` arcs, in payment direction:
/// `a[0]` must be sent from the source for `a[n]` to reach the destination.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct HopAmounts(Vec<f64>);

impl HopAmounts {
    pub(crate) fn from_vec(seq: Vec<f64>) -> Self {
        debug_assert!(!seq.is_empty());
        HopAmounts(seq)
    }

    /// Amount that must leave the source (`a_1` over `n` arcs).
    pub fn required_at_source(&self) -> f64 {
        self.0[0]
    }

    /// Amount delivered to the destination (`a_{n+1}`).
    pub fn delivered(&self) -> f64 {
        *self.0.last().expect("non-empty")
    }

    pub fn total_fee(&self) -> f64 {
        self.required_at_source() - self.delivered()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn amounts_with<F>(n_arcs: usize, amount: f64, mut fee_of: F) -> Result<HopAmounts, FeeError>
where
    F: FnMut(usize, f64) -> Result<f64, FeeError>,
{
    check_amount(amount)?;
    let mut seq = vec![0.0; n_arcs + 1];
    seq[n_arcs] = amount;
    for i in (0..n_arcs).rev() {
        let fee = fee_of(i, seq[i + 1])?;
        seq[i] = seq[i + 1] + fee;
    }
    Ok(HopAmounts(seq))
}

/// Evaluate the amount recurrence over `path` (payment direction) so that
/// `amount` arrives at the destination.
pub fn amounts_recursive(
    fee: &FeeMap,
    path: &[(ArcId, ArcPolicy)],
    amount: f64,
) -> Result<HopAmounts, FeeError> {
    amounts_with(path.len(), amount, |i, a| {
        let (arc, policy) = path[i];
        fee.fee(arc, &policy, a)
    })
}

/// [`amounts_recursive`] specialised to the linear map over bare policies.
pub fn amounts_recursive_linear(path: &[ArcPolicy], amount: f64) -> Result<HopAmounts, FeeError> {
    amounts_with(path.len(), amount, |i, a| fee_linear(&path[i], a))
}

/// Direct (non-iterative) solution of the amount recurrence for the linear
/// map:
///
/// ```text
/// a[i] = prod_{k=i..n-1} (1 + r[k]) * ( a + sum_{m=i..n-1} b[m] / prod_{k=m..n-1} (1 + r[k]) )
/// ```
pub fn amounts_closed_form(path: &[ArcPolicy], amount: f64) -> Result<HopAmounts, FeeError> {
    check_amount(amount)?;
    let n = path.len();
    let prod = |from: usize| -> f64 {
        let mut p = 1.0;
        for policy in &path[from..n] {
            p *= 1.0 + policy.fee_rate;
        }
        p
    };
    let mut seq = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut sum = 0.0;
        for (m, policy) in path.iter().enumerate().skip(i) {
            sum += policy.base_fee / prod(m);
        }
        seq.push(prod(i) * (amount + sum));
    }
    Ok(HopAmounts(seq))
}

/// Outcome of a consistency check: either every sampled pair satisfied
/// `a + f(e,a) <= a' + f(e,a')`, or the first violating pair.
#[derive(Debug, Clone, PartialEq)]
pub enum ConsistencyVerdict {
    Consistent,
    Violated(ConsistencyViolation),
}

impl ConsistencyVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, ConsistencyVerdict::Consistent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyViolation {
    pub arc: ArcId,
    pub low: f64,
    pub high: f64,
    /// `low + f(arc, low)`
    pub lhs: f64,
    /// `high + f(arc, high)`
    pub rhs: f64,
}

/// Check `a + f(e,a) <= a' + f(e,a')` on every sampled pair (`a <= a'`
/// required). Linear and barrier maps additionally pass the analytic test
/// that the fee derivative `fee_rate` is at least -1, which the policy
/// invariant `fee_rate >= 0` already guarantees.
pub fn check_consistency(
    fee: &FeeMap,
    arc: ArcId,
    policy: &ArcPolicy,
    pairs: &[(f64, f64)],
) -> Result<ConsistencyVerdict, FeeError> {
    if let FeeMap::Linear | FeeMap::Barrier = fee {
        debug_assert!(policy.fee_rate >= -1.0);
        if policy.fee_rate < -1.0 {
            return Ok(ConsistencyVerdict::Violated(ConsistencyViolation {
                arc,
                low: 0.0,
                high: 0.0,
                lhs: policy.fee_rate,
                rhs: -1.0,
            }));
        }
    }
    for &(low, high) in pairs {
        if low > high {
            return Err(FeeError::UnorderedPair { low, high });
        }
        let lhs = low + fee.fee(arc, policy, low)?;
        let rhs = high + fee.fee(arc, policy, high)?;
        // +inf on both sides compares as consistent
        if lhs > rhs + TOLERANCE {
            return Ok(ConsistencyVerdict::Violated(ConsistencyViolation {
                arc,
                low,
                high,
                lhs,
                rhs,
            }));
        }
    }
    Ok(ConsistencyVerdict::Consistent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ArcPolicy;

    fn policy(base: f64, rate: f64, balance: f64) -> ArcPolicy {
        ArcPolicy::new(base, rate, balance).unwrap()
    }

    #[test]
    fn linear_fee_values() {
        assert_eq!(fee_linear(&policy(2.0, 0.1, 20.0), 10.0).unwrap(), 3.0);
        assert_eq!(fee_linear(&policy(0.0, 0.0, 1.0), 12345.0).unwrap(), 0.0);
        assert_eq!(fee_linear(&policy(15.0, 0.5, 1e6), 10.0).unwrap(), 20.0);
        assert!(fee_linear(&policy(1.0, 0.1, 1.0), -1.0).is_err());
    }

    #[test]
    fn barrier_fee_values() {
        let p = policy(2.0, 0.1, 20.0);
        assert_eq!(fee_barrier(&p, 10.0).unwrap(), 3.0);
        assert_eq!(fee_barrier(&p, 21.0).unwrap(), f64::INFINITY);
        // boundary amount == balance stays finite
        assert!(fee_barrier(&p, 20.0).unwrap().is_finite());
    }

    #[test]
    fn worked_two_hop_amounts() {
        // s -> i (2, 0.2), i -> t (2, 0.1), deliver 10
        let path = [policy(2.0, 0.2, 1e6), policy(2.0, 0.1, 1e6)];
        let hops = amounts_recursive_linear(&path, 10.0).unwrap();
        assert_eq!(hops.as_slice(), &[17.6, 13.0, 10.0]);
        assert!((hops.total_fee() - 7.6).abs() < 1e-12);
        let closed = amounts_closed_form(&path, 10.0).unwrap();
        assert!(nearly_equal(closed.required_at_source(), 17.6));
    }

    #[test]
    fn zero_fee_path_passes_amount_through() {
        let path = [policy(0.0, 0.0, 1e6); 4];
        let hops = amounts_recursive_linear(&path, 7.0).unwrap();
        assert_eq!(hops.as_slice(), &[7.0; 5]);
        let closed = amounts_closed_form(&path, 7.0).unwrap();
        assert_eq!(closed.as_slice(), &[7.0; 5]);
    }

    #[test]
    fn empty_path_is_identity() {
        let hops = amounts_recursive_linear(&[], 42.0).unwrap();
        assert_eq!(hops.as_slice(), &[42.0]);
        assert_eq!(hops.total_fee(), 0.0);
    }

    // Expected values frozen from evaluating the recurrence itself on the
    // reference inputs (five hops, delivered amount 102).
    const REFERENCE_BASES: [f64; 5] = [10.0, 5.0, 3.4, 11.0, 7.0];
    const REFERENCE_RATES: [f64; 5] = [0.1, 0.211, 0.15, 0.12, 0.11];
    const REFERENCE_AMOUNTS: [f64; 6] = [
        243.147044856,
        211.95185896,
        170.89336,
        145.6464,
        120.22,
        102.0,
    ];

    fn reference_path() -> Vec<ArcPolicy> {
        REFERENCE_BASES
            .iter()
            .zip(REFERENCE_RATES.iter())
            .map(|(&b, &r)| policy(b, r, 1e9))
            .collect()
    }

    #[test]
    fn recursive_matches_reference_sequence() {
        let hops = amounts_recursive_linear(&reference_path(), 102.0).unwrap();
        assert_eq!(hops.as_slice(), &REFERENCE_AMOUNTS);
    }

    #[test]
    fn closed_form_matches_reference_sequence() {
        let hops = amounts_closed_form(&reference_path(), 102.0).unwrap();
        for (got, want) in hops.as_slice().iter().zip(REFERENCE_AMOUNTS.iter()) {
            assert!(nearly_equal(*got, *want), "{got} vs {want}");
        }
    }

    #[test]
    fn tabulated_lookup_and_misses() {
        let mut t = TabulatedFees::new();
        t.insert(ArcId(3), 100.0, 10.0).unwrap();
        assert_eq!(t.lookup(ArcId(3), 100.0).unwrap(), 10.0);
        assert!(matches!(
            t.lookup(ArcId(3), 101.0),
            Err(FeeError::UndefinedTabulated { .. })
        ));
        assert!(matches!(
            t.lookup(ArcId(4), 100.0),
            Err(FeeError::UndefinedTabulated { .. })
        ));
        assert!(t.insert(ArcId(0), -1.0, 0.0).is_err());
    }

    #[test]
    fn tabulated_json_resolution_errors() {
        let p = policy(0.0, 0.0, 1e6);
        let g = crate::graph::ChannelGraph::from_arcs(&[
            ("a", "b", p),
            ("a", "b", p), // parallel
            ("b", "c", p),
        ])
        .unwrap();
        let ok =
            TabulatedFees::from_json_str(&g, r#"[{"arc": ["b", "c"], "amount": 5, "fee": 1}]"#)
                .unwrap();
        assert_eq!(ok.len(), 1);
        assert!(matches!(
            TabulatedFees::from_json_str(&g, r#"[{"arc": ["x", "c"], "amount": 5, "fee": 1}]"#),
            Err(FeeError::UnknownVertexKey(k)) if k == "x"
        ));
        assert!(matches!(
            TabulatedFees::from_json_str(&g, r#"[{"arc": ["c", "a"], "amount": 5, "fee": 1}]"#),
            Err(FeeError::MissingArc { .. })
        ));
        assert!(matches!(
            TabulatedFees::from_json_str(&g, r#"[{"arc": ["a", "b"], "amount": 5, "fee": 1}]"#),
            Err(FeeError::AmbiguousArc { .. })
        ));
        assert!(matches!(
            TabulatedFees::from_json_str(&g, "not json"),
            Err(FeeError::TableJson(_))
        ));
    }

    #[test]
    fn consistency_linear_and_constant() {
        let p = policy(5.0, 0.25, 100.0);
        let pairs: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, i as f64 * 3.0)).collect();
        let verdict = check_consistency(&FeeMap::Linear, ArcId(0), &p, &pairs).unwrap();
        assert!(verdict.is_consistent());

        // constant map: rate 0
        let c = policy(9.0, 0.0, 100.0);
        let verdict = check_consistency(&FeeMap::Linear, ArcId(0), &c, &pairs).unwrap();
        assert!(verdict.is_consistent());
    }

    #[test]
    fn consistency_barrier_across_the_balance() {
        let p = policy(1.0, 0.1, 50.0);
        // pairs straddling the barrier: finite lhs vs infinite rhs is fine,
        // infinite on both sides is fine
        let pairs = [(10.0, 40.0), (10.0, 60.0), (55.0, 60.0)];
        let verdict = check_consistency(&FeeMap::Barrier, ArcId(0), &p, &pairs).unwrap();
        assert!(verdict.is_consistent());
    }

    #[test]
    fn consistency_detects_tabulated_violation() {
        let mut t = TabulatedFees::new();
        t.insert(ArcId(7), 110.0, 20.0).unwrap();
        t.insert(ArcId(7), 120.0, 5.0).unwrap();
        let fee = FeeMap::Tabulated(t);
        let verdict =
            check_consistency(&fee, ArcId(7), &policy(0.0, 0.0, 1e6), &[(110.0, 120.0)]).unwrap();
        match verdict {
            ConsistencyVerdict::Violated(v) => {
                assert_eq!(v.lhs, 130.0);
                assert_eq!(v.rhs, 125.0);
                assert_eq!((v.low, v.high), (110.0, 120.0));
            }
            ConsistencyVerdict::Consistent => panic!("expected violation"),
        }
    }

    #[test]
    fn consistency_rejects_unordered_pairs() {
        let p = policy(0.0, 0.0, 1.0);
        assert!(matches!(
            check_consistency(&FeeMap::Linear, ArcId(0), &p, &[(5.0, 1.0)]),
            Err(FeeError::UnorderedPair { .. })
        ));
    }
}
