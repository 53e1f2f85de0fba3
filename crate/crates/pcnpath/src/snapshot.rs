//! Channel-graph snapshot ingestion (lnd `describegraph`-style JSON).
//!
//! Each channel yields up to two directed arcs: `node1_policy` governs
//! node1 -> node2 and `node2_policy` the reverse. Arcs without a policy, or
//! with `disabled: true`, carry no usable fee information and are dropped;
//! vertices left without any incident arc are dropped afterwards. Per-arc
//! balances are half the channel capacity, since real balances are private.
//!
//! Units: `fee_base_msat / 1000` satoshis, `fee_rate_milli_msat / 1e6` as a
//! proportion. Numeric fields accept both JSON numbers and decimal strings
//! (lnd emits strings).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::graph::{ArcPolicy, ChannelGraph, GraphBuilder};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read snapshot file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed snapshot JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("edge references pub_key {0:?} that is not in the node list")]
    DanglingKey(String),
    #[error("duplicate node pub_key {0:?}")]
    DuplicateKey(String),
    #[error("channel connects {0:?} to itself")]
    SelfChannel(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

fn de_u64_flexible<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
    struct V;
    impl serde::de::Visitor<'_> for V {
        type Value = u64;
        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a non-negative integer or a decimal string")
        }
        fn visit_u64<E>(self, v: u64) -> Result<u64, E> {
            Ok(v)
        }
        fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<u64, E> {
            u64::try_from(v).map_err(|_| E::custom(format!("negative value {v}")))
        }
        fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<u64, E> {
            v.parse::<u64>()
                .map_err(|_| E::custom(format!("not a non-negative integer: {v:?}")))
        }
    }
    d.deserialize_any(V)
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct RawNode {
    pub pub_key: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct RawPolicy {
    #[serde(deserialize_with = "de_u64_flexible")]
    pub fee_base_msat: u64,
    #[serde(deserialize_with = "de_u64_flexible")]
    pub fee_rate_milli_msat: u64,
    #[serde(default)]
    pub disabled: bool,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct RawEdge {
    pub node1_pub: String,
    pub node2_pub: String,
    #[serde(deserialize_with = "de_u64_flexible")]
    pub capacity: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node1_policy: Option<RawPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node2_policy: Option<RawPolicy>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
pub struct RawSnapshot {
    #[serde(default)]
    pub nodes: Vec<RawNode>,
    #[serde(default)]
    pub edges: Vec<RawEdge>,
}

/// What ingestion kept and dropped. `raw_arcs` counts two potential arcs
/// per channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub raw_vertices: usize,
    pub raw_arcs: usize,
    pub kept_vertices: usize,
    pub kept_arcs: usize,
    pub dropped_no_policy: usize,
    pub dropped_isolated: usize,
}

/// Half of the channel capacity, the balance assigned to each direction.
pub fn assign_balances(capacity_sat: u64) -> f64 {
    capacity_sat as f64 / 2.0
}

const MSAT_PER_SAT: f64 = 1000.0;
const FEE_RATE_DENOMINATOR: f64 = 1_000_000.0;

fn policy_from_raw(raw: &RawPolicy, balance: f64) -> Result<ArcPolicy, IngestError> {
    Ok(ArcPolicy::new(
        raw.fee_base_msat as f64 / MSAT_PER_SAT,
        raw.fee_rate_milli_msat as f64 / FEE_RATE_DENOMINATOR,
        balance,
    )?)
}

pub fn load_snapshot_str(json: &str) -> Result<(ChannelGraph, IngestReport), IngestError> {
    let raw: RawSnapshot = serde_json::from_str(json)?;
    load_snapshot(&raw)
}

pub fn load_snapshot_file(
    path: impl AsRef<Path>,
) -> Result<(ChannelGraph, IngestReport), IngestError> {
    let contents = std::fs::read_to_string(path)?;
    load_snapshot_str(&contents)
}

pub fn load_snapshot(raw: &RawSnapshot) -> Result<(ChannelGraph, IngestReport), IngestError> {
    let mut known = HashSet::with_capacity(raw.nodes.len());
    for node in &raw.nodes {
        if !known.insert(node.pub_key.as_str()) {
            return Err(IngestError::DuplicateKey(node.pub_key.clone()));
        }
    }

    let raw_vertices = raw.nodes.len();
    let raw_arcs = raw.edges.len() * 2;
    let mut dropped_no_policy = 0usize;
    let mut arcs: Vec<(&str, &str, ArcPolicy)> = Vec::new();

    for edge in &raw.edges {
        for key in [&edge.node1_pub, &edge.node2_pub] {
            if !known.contains(key.as_str()) {
                return Err(IngestError::DanglingKey(key.clone()));
            }
        }
        if edge.node1_pub == edge.node2_pub {
            return Err(IngestError::SelfChannel(edge.node1_pub.clone()));
        }
        let balance = assign_balances(edge.capacity);
        let directions = [
            (
                &edge.node1_policy,
                edge.node1_pub.as_str(),
                edge.node2_pub.as_str(),
            ),
            (
                &edge.node2_policy,
                edge.node2_pub.as_str(),
                edge.node1_pub.as_str(),
            ),
        ];
        for (policy, src, dst) in directions {
            match policy {
                Some(p) if !p.disabled => arcs.push((src, dst, policy_from_raw(p, balance)?)),
                _ => dropped_no_policy += 1,
            }
        }
    }

    // keep only vertices with at least one incident arc, in node-list order
    let mut incident: HashSet<&str> = HashSet::new();
    for (src, dst, _) in &arcs {
        incident.insert(src);
        incident.insert(dst);
    }
    let mut builder = GraphBuilder::new();
    for node in &raw.nodes {
        if incident.contains(node.pub_key.as_str()) {
            builder.add_vertex(&node.pub_key);
        }
    }
    for (src, dst, policy) in &arcs {
        builder.add_arc(src, dst, *policy)?;
    }
    let graph = builder.build();

    let report = IngestReport {
        raw_vertices,
        raw_arcs,
        kept_vertices: graph.vertex_count(),
        kept_arcs: graph.arc_count(),
        dropped_no_policy,
        dropped_isolated: raw_vertices - graph.vertex_count(),
    };
    Ok((graph, report))
}

fn raw_policy_from(policy: &ArcPolicy) -> RawPolicy {
    RawPolicy {
        fee_base_msat: (policy.base_fee * MSAT_PER_SAT).round() as u64,
        fee_rate_milli_msat: (policy.fee_rate * FEE_RATE_DENOMINATOR).round() as u64,
        disabled: false,
    }
}

/// Serialise a graph back into the snapshot schema. Consecutive arcs that
/// are exact reverses with equal balances are re-paired into one two-sided
/// channel — ingestion emits a channel's directions consecutively, so a
/// loaded graph round-trips with identical arc ids, and with zero drops
/// whenever both directions of every channel survived filtering. Fees are
/// re-quoted in msat/ppm, rounded to the nearest integer.
pub fn snapshot_from_graph(g: &ChannelGraph) -> RawSnapshot {
    let nodes = g
        .vertices()
        .map(|v| RawNode {
            pub_key: g.vertex_key(v).to_owned(),
        })
        .collect();
    let mut edges = Vec::new();
    let mut i = 0usize;
    let arcs: Vec<_> = g.arcs().map(|(_, a)| *a).collect();
    while i < arcs.len() {
        let arc = &arcs[i];
        let paired = arcs.get(i + 1).filter(|next| {
            next.source == arc.target
                && next.target == arc.source
                && next.policy.balance == arc.policy.balance
        });
        edges.push(RawEdge {
            node1_pub: g.vertex_key(arc.source).to_owned(),
            node2_pub: g.vertex_key(arc.target).to_owned(),
            capacity: (arc.policy.balance * 2.0).round() as u64,
            node1_policy: Some(raw_policy_from(&arc.policy)),
            node2_policy: paired.map(|next| raw_policy_from(&next.policy)),
        });
        i += if paired.is_some() { 2 } else { 1 };
    }
    RawSnapshot { nodes, edges }
}

pub fn write_snapshot_file(path: impl AsRef<Path>, g: &ChannelGraph) -> Result<(), IngestError> {
    let raw = snapshot_from_graph(g);
    let json = serde_json::to_string_pretty(&raw)?;
    std::fs::write(path, json)?;
    Ok(())
}

/// Equality of vertex keys, arc endpoints and policies, in id order.
pub fn graphs_identical(a: &ChannelGraph, b: &ChannelGraph) -> bool {
    if a.vertex_count() != b.vertex_count() || a.arc_count() != b.arc_count() {
        return false;
    }
    let keys_match = a.vertices().all(|v| a.vertex_key(v) == b.vertex_key(v));
    let arcs_match = a.arcs().zip(b.arcs()).all(|((ida, aa), (idb, ab))| {
        ida == idb && aa.source == ab.source && aa.target == ab.target && aa.policy == ab.policy
    });
    keys_match && arcs_match
}

// For callers that want a keyed lookup of the side table.
pub fn key_table(g: &ChannelGraph) -> HashMap<String, crate::graph::VertexId> {
    g.vertices()
        .map(|v| (g.vertex_key(v).to_owned(), v))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snapshot_json() -> &'static str {
        r#"{
          "nodes": [
            {"pub_key": "alice"}, {"pub_key": "bob"}, {"pub_key": "carol"}, {"pub_key": "mute"}
          ],
          "edges": [
            {"node1_pub": "alice", "node2_pub": "bob", "capacity": "4000000",
             "node1_policy": {"fee_base_msat": "1000", "fee_rate_milli_msat": "100"},
             "node2_policy": {"fee_base_msat": 2000, "fee_rate_milli_msat": 200}},
            {"node1_pub": "bob", "node2_pub": "carol", "capacity": 1000000,
             "node1_policy": {"fee_base_msat": 500, "fee_rate_milli_msat": 50}},
            {"node1_pub": "alice", "node2_pub": "carol", "capacity": 2000000,
             "node1_policy": {"fee_base_msat": 100, "fee_rate_milli_msat": 10, "disabled": true}}
          ]
        }"#
    }

    #[test]
    fn loads_and_filters() {
        let (g, report) = load_snapshot_str(snapshot_json()).unwrap();
        assert_eq!(report.raw_vertices, 4);
        assert_eq!(report.raw_arcs, 6);
        assert_eq!(report.kept_arcs, 3); // alice->bob, bob->alice, bob->carol
        assert_eq!(report.dropped_no_policy, 3); // missing, missing, disabled
        assert_eq!(report.kept_vertices, 3);
        assert_eq!(report.dropped_isolated, 1); // "mute"
        assert_eq!(g.arc_count(), 3);

        let alice = g.vertex_by_key("alice").unwrap();
        let bob = g.vertex_by_key("bob").unwrap();
        let ab = g
            .out_arcs(alice)
            .iter()
            .map(|&a| g.arc(a))
            .find(|a| a.target == bob)
            .expect("alice->bob arc");
        assert_eq!(ab.policy.base_fee, 1.0); // 1000 msat
        assert_eq!(ab.policy.fee_rate, 1e-4); // 100 ppm
        assert_eq!(ab.policy.balance, 2_000_000.0);
    }

    #[test]
    fn empty_snapshot() {
        let (g, report) = load_snapshot_str("{}").unwrap();
        assert_eq!(g.vertex_count(), 0);
        assert_eq!(g.arc_count(), 0);
        assert_eq!(report.raw_vertices, 0);
        assert_eq!(report.kept_arcs, 0);
    }

    #[test]
    fn one_sided_channel_yields_one_arc() {
        let json = r#"{
          "nodes": [{"pub_key": "a"}, {"pub_key": "b"}],
          "edges": [{"node1_pub": "a", "node2_pub": "b", "capacity": 100,
                     "node1_policy": {"fee_base_msat": 0, "fee_rate_milli_msat": 0}}]
        }"#;
        let (g, report) = load_snapshot_str(json).unwrap();
        assert_eq!(g.arc_count(), 1);
        assert_eq!(report.dropped_no_policy, 1);
        let a = g.vertex_by_key("a").unwrap();
        assert_eq!(g.out_degree(a).unwrap(), 1);
    }

    #[test]
    fn dangling_key_is_an_error() {
        let json = r#"{
          "nodes": [{"pub_key": "a"}],
          "edges": [{"node1_pub": "a", "node2_pub": "ghost", "capacity": 10,
                     "node1_policy": {"fee_base_msat": 0, "fee_rate_milli_msat": 0}}]
        }"#;
        assert!(matches!(
            load_snapshot_str(json),
            Err(IngestError::DanglingKey(k)) if k == "ghost"
        ));
    }

    #[test]
    fn negative_capacity_is_an_error() {
        let json = r#"{
          "nodes": [{"pub_key": "a"}, {"pub_key": "b"}],
          "edges": [{"node1_pub": "a", "node2_pub": "b", "capacity": -5,
                     "node1_policy": {"fee_base_msat": 0, "fee_rate_milli_msat": 0}}]
        }"#;
        assert!(matches!(load_snapshot_str(json), Err(IngestError::Json(_))));
    }

    #[test]
    fn balance_splitting() {
        assert_eq!(assign_balances(4_000_000), 2_000_000.0);
        assert_eq!(assign_balances(0), 0.0);
        assert_eq!(assign_balances(1), 0.5);
    }

    #[test]
    fn unit_conversions() {
        let p = policy_from_raw(
            &RawPolicy {
                fee_base_msat: 1000,
                fee_rate_milli_msat: 1,
                disabled: false,
            },
            1.0,
        )
        .unwrap();
        assert_eq!(p.base_fee, 1.0);
        assert_eq!(p.fee_rate, 1e-6);
    }

    #[test]
    fn export_reload_round_trip() {
        let (g, _) = load_snapshot_str(snapshot_json()).unwrap();
        let exported = snapshot_from_graph(&g);
        let json = serde_json::to_string(&exported).unwrap();
        let (again, report) = load_snapshot_str(&json).unwrap();
        assert!(graphs_identical(&g, &again));
        assert_eq!(report.dropped_isolated, 0);
        // alice<->bob re-pairs into one channel; bob->carol stays one-sided
        assert_eq!(report.dropped_no_policy, 1);
    }

    #[test]
    fn fully_two_sided_snapshot_round_trips_with_zero_drops() {
        let json = r#"{
          "nodes": [{"pub_key": "a"}, {"pub_key": "b"}, {"pub_key": "c"}],
          "edges": [
            {"node1_pub": "a", "node2_pub": "b", "capacity": 300,
             "node1_policy": {"fee_base_msat": 1000, "fee_rate_milli_msat": 10},
             "node2_policy": {"fee_base_msat": 3000, "fee_rate_milli_msat": 30}},
            {"node1_pub": "b", "node2_pub": "c", "capacity": 500,
             "node1_policy": {"fee_base_msat": 7000, "fee_rate_milli_msat": 70},
             "node2_policy": {"fee_base_msat": 9000, "fee_rate_milli_msat": 90}}
          ]
        }"#;
        let (g, first) = load_snapshot_str(json).unwrap();
        assert_eq!(first.dropped_no_policy, 0);
        let exported = serde_json::to_string(&snapshot_from_graph(&g)).unwrap();
        let (again, report) = load_snapshot_str(&exported).unwrap();
        assert!(graphs_identical(&g, &again));
        assert_eq!(report.dropped_no_policy, 0);
        assert_eq!(report.dropped_isolated, 0);
        assert_eq!(report.raw_arcs, report.kept_arcs);
    }
}
