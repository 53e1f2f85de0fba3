//! Directed multigraph model of a payment channel network snapshot.
//!
//! Every channel direction is a separate arc carrying its own [`ArcPolicy`]
//! (base fee, fee rate, balance). Graphs are immutable once built; searches
//! that need the reversed orientation use the zero-copy [`Transpose`] view.

use std::collections::HashMap;

use thiserror::Error;

/// Dense vertex index, assigned in first-seen order during construction.
///
/// The original identifier (e.g. a node public key) is kept in a side table
/// on the graph and can be looked up with [`ChannelGraph::vertex_key`].
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Identifier of one directed arc. Parallel arcs between the same vertex
/// pair get distinct ids, so predecessor tracking stores `ArcId` rather
/// than just the neighbouring vertex.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(transparent)]
pub struct ArcId(pub u32);

impl ArcId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for ArcId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// Forwarding policy of one arc direction: fixed base fee and proportional
/// fee rate (both charged on the amount delivered to the arc head), plus the
/// balance available in this direction. All in satoshis / proportions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ArcPolicy {
    pub base_fee: f64,
    pub fee_rate: f64,
    pub balance: f64,
}

impl ArcPolicy {
    pub fn new(base_fee: f64, fee_rate: f64, balance: f64) -> Result<Self, GraphError> {
        let p = ArcPolicy {
            base_fee,
            fee_rate,
            balance,
        };
        p.validate()?;
        Ok(p)
    }

    /// All fields must be finite and non-negative.
    pub fn validate(&self) -> Result<(), GraphError> {
        for (name, value) in [
            ("base_fee", self.base_fee),
            ("fee_rate", self.fee_rate),
            ("balance", self.balance),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(GraphError::InvalidPolicyField { field: name, value });
            }
        }
        Ok(())
    }

    /// Same balance, zero fees.
    pub fn with_zero_fees(self) -> Self {
        ArcPolicy {
            base_fee: 0.0,
            fee_rate: 0.0,
            balance: self.balance,
        }
    }
}

/// One directed arc: `source` charges the policy's fee for forwarding
/// towards `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelArc {
    pub source: VertexId,
    pub target: VertexId,
    pub policy: ArcPolicy,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("self-loop arc on vertex {0}")]
    SelfLoop(String),
    #[error("policy field {field} must be finite and non-negative, got {value}")]
    InvalidPolicyField { field: &'static str, value: f64 },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown vertex key {0:?}")]
    UnknownVertexKey(String),
    #[error("duplicate vertex key {0:?}")]
    DuplicateVertexKey(String),
}

/// Immutable directed multigraph with per-arc policies and both adjacency
/// directions indexed. Construct through [`GraphBuilder`].
#[derive(Debug, Clone)]
pub struct ChannelGraph {
    keys: Vec<String>,
    key_to_vertex: HashMap<String, VertexId>,
    arcs: Vec<ChannelArc>,
    out_adj: Vec<Vec<ArcId>>,
    in_adj: Vec<Vec<ArcId>>,
}

impl ChannelGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    /// Convenience constructor from `(source_key, target_key, policy)` triples.
    pub fn from_arcs<S: AsRef<str>>(arcs: &[(S, S, ArcPolicy)]) -> Result<Self, GraphError> {
        let mut b = GraphBuilder::new();
        for (src, dst, policy) in arcs {
            b.add_arc(src.as_ref(), dst.as_ref(), *policy)?;
        }
        Ok(b.build())
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.keys.len()
    }

    #[inline]
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    #[inline]
    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v.index() < self.keys.len()
    }

    pub fn vertex_key(&self, v: VertexId) -> &str {
        &self.keys[v.index()]
    }

    pub fn vertex_by_key(&self, key: &str) -> Option<VertexId> {
        self.key_to_vertex.get(key).copied()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.keys.len() as u32).map(VertexId)
    }

    #[inline]
    pub fn arc(&self, id: ArcId) -> &ChannelArc {
        &self.arcs[id.index()]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (ArcId, &ChannelArc)> {
        self.arcs
            .iter()
            .enumerate()
            .map(|(i, a)| (ArcId(i as u32), a))
    }

    /// Arc ids leaving `v`, ascending.
    #[inline]
    pub fn out_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.out_adj[v.index()]
    }

    /// Arc ids entering `v`, ascending. These are exactly the arcs leaving
    /// `v` in the transpose orientation.
    #[inline]
    pub fn in_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.in_adj[v.index()]
    }

    pub fn out_degree(&self, v: VertexId) -> Result<usize, GraphError> {
        if !self.contains_vertex(v) {
            return Err(GraphError::UnknownVertex(v));
        }
        Ok(self.out_adj[v.index()].len())
    }

    pub fn transpose(&self) -> Transpose<'_> {
        Transpose { graph: self }
    }

    /// Copy of the graph with every policy replaced by `f(id, arc)`.
    /// Vertex and arc ids are preserved.
    pub(crate) fn map_policies<F>(&self, mut f: F) -> ChannelGraph
    where
        F: FnMut(ArcId, &ChannelArc) -> ArcPolicy,
    {
        let mut g = self.clone();
        for (i, arc) in g.arcs.iter_mut().enumerate() {
            arc.policy = f(ArcId(i as u32), arc);
        }
        g
    }
}

/// Reversed-orientation view: arc `(u, v)` is reported as `(v, u)` with the
/// same [`ArcId`] and policy. No copy is made.
#[derive(Clone, Copy)]
pub struct Transpose<'g> {
    graph: &'g ChannelGraph,
}

impl<'g> Transpose<'g> {
    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    #[inline]
    pub fn arc_count(&self) -> usize {
        self.graph.arc_count()
    }

    /// Arcs leaving `v` in the reversed orientation, ascending by id.
    #[inline]
    pub fn out_arcs(&self, v: VertexId) -> &[ArcId] {
        self.graph.in_arcs(v)
    }

    /// `(source, target)` of `id` in the reversed orientation.
    #[inline]
    pub fn arc_endpoints(&self, id: ArcId) -> (VertexId, VertexId) {
        let arc = self.graph.arc(id);
        (arc.target, arc.source)
    }

    #[inline]
    pub fn policy(&self, id: ArcId) -> &ArcPolicy {
        &self.graph.arc(id).policy
    }

    /// Transposing twice yields the original graph.
    #[inline]
    pub fn transpose(self) -> &'g ChannelGraph {
        self.graph
    }
}

/// Incremental construction of a [`ChannelGraph`]. Vertices are created on
/// first mention (or explicitly, to allow isolated vertices) and receive
/// dense ids in that order; arcs receive ids in insertion order.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    keys: Vec<String>,
    key_to_vertex: HashMap<String, VertexId>,
    arcs: Vec<ChannelArc>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the existing id when the key is already present.
    pub fn add_vertex(&mut self, key: &str) -> VertexId {
        if let Some(&v) = self.key_to_vertex.get(key) {
            return v;
        }
        let v = VertexId(self.keys.len() as u32);
        self.keys.push(key.to_owned());
        self.key_to_vertex.insert(key.to_owned(), v);
        v
    }

    pub fn add_arc(
        &mut self,
        source_key: &str,
        target_key: &str,
        policy: ArcPolicy,
    ) -> Result<ArcId, GraphError> {
        if source_key == target_key {
            return Err(GraphError::SelfLoop(source_key.to_owned()));
        }
        policy.validate()?;
        let source = self.add_vertex(source_key);
        let target = self.add_vertex(target_key);
        let id = ArcId(self.arcs.len() as u32);
        self.arcs.push(ChannelArc {
            source,
            target,
            policy,
        });
        Ok(id)
    }

    pub fn build(self) -> ChannelGraph {
        let n = self.keys.len();
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for (i, arc) in self.arcs.iter().enumerate() {
            out_adj[arc.source.index()].push(ArcId(i as u32));
            in_adj[arc.target.index()].push(ArcId(i as u32));
        }
        ChannelGraph {
            keys: self.keys,
            key_to_vertex: self.key_to_vertex,
            arcs: self.arcs,
            out_adj,
            in_adj,
        }
    }
}
