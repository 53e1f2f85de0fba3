//! Lowest-fee path planning for payment channel networks.
//!
//! A channel between two peers is modelled as a pair of directed arcs, each
//! with a base fee, a proportional fee rate, and a balance. Because the fee
//! of a hop depends on the amount that must arrive at it, the planners
//! search the transpose of the graph outward from the payment destination.
//!
//! The crate provides:
//!
//! * [`graph`] — the immutable channel graph with a transpose view;
//! * [`fee`] — linear/barrier/tabulated fee maps, the hop-amount recurrence
//!   (recursive and closed form), and the consistency check;
//! * [`search`] — the unidirectional planner, its barrier variant, the
//!   partial-bidirectional planner with its source-fee-zero transformation,
//!   and an exhaustive oracle for cross-checking;
//! * [`snapshot`] — lnd-style snapshot JSON ingestion and export;
//! * [`generate`] — hub-and-spoke, uniform-random, and scale-free synthetic
//!   topologies;
//! * [`sim`] — rejection-sampled payment sets, explored-vertex metrics, and
//!   wall-clock benchmarks;
//! * [`verify`] — seeded property suites tying the above together.
//!
//! The `pcnpath` binary exposes all of it behind `ingest`, `plan`,
//! `simulate`, `bench`, and `verify` subcommands.

pub mod fee;
pub mod generate;
pub mod graph;
mod heap;
pub mod search;
pub mod sim;
pub mod snapshot;
pub mod verify;

pub use fee::{FeeMap, HopAmounts, TabulatedFees, TOLERANCE};
pub use graph::{ArcId, ArcPolicy, ChannelArc, ChannelGraph, GraphBuilder, VertexId};
pub use search::{
    apply_source_fee_zero, brute_force_lowest_fee, plan_partial_bidirectional, plan_unidirectional,
    plan_unidirectional_barrier, FeeSemantics, PathResult, PlanOutcome, Query, SearchStats,
};
pub use snapshot::{load_snapshot_file, load_snapshot_str, IngestReport};
