//! Synthetic topologies for tests and simulations: hub-and-spoke, uniform
//! random digraphs, and preferential-attachment graphs with heavy-tailed
//! degrees. All generators are deterministic in their seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{ArcPolicy, ChannelGraph, GraphBuilder, GraphError};
use crate::snapshot::assign_balances;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("hub-and-spoke needs at least 2 spokes, got {0}")]
    TooFewSpokes(usize),
    #[error("cannot place {arcs} arcs on {vertices} vertices without self-loops or parallels")]
    TooManyArcs { arcs: usize, vertices: usize },
    #[error("preferential attachment needs at least 1 channel per vertex, got {0}")]
    NoAttachment(usize),
    #[error("preferential attachment needs more vertices than channels per vertex")]
    TooSmall,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Uniform sampling ranges for synthetic arc policies.
#[derive(Debug, Clone, Copy)]
pub struct FeeRanges {
    pub base_fee: (f64, f64),
    pub fee_rate: (f64, f64),
}

fn sample(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// One hub vertex `r` connected to `n_spokes` spoke vertices by arcs in both
/// directions, every arc carrying `policy`. Any spoke pair has exactly one
/// simple route between them, through the hub.
pub fn gen_hub_spoke(n_spokes: usize, policy: ArcPolicy) -> Result<ChannelGraph, GenError> {
    if n_spokes < 2 {
        return Err(GenError::TooFewSpokes(n_spokes));
    }
    let mut b = GraphBuilder::new();
    b.add_vertex("hub");
    for i in 0..n_spokes {
        let spoke = format!("spoke{i}");
        b.add_arc(&spoke, "hub", policy)?;
        b.add_arc("hub", &spoke, policy)?;
    }
    Ok(b.build())
}

/// Random digraph on `n_vertices` with `n_arcs` distinct ordered pairs (no
/// self-loops, no parallel arcs) and policies drawn uniformly from the given
/// ranges. Same seed, same graph.
pub fn gen_random_pcn(
    n_vertices: usize,
    n_arcs: usize,
    fees: FeeRanges,
    balance: (f64, f64),
    seed: u64,
) -> Result<ChannelGraph, GenError> {
    let possible = n_vertices.saturating_mul(n_vertices.saturating_sub(1));
    if n_arcs > possible {
        return Err(GenError::TooManyArcs {
            arcs: n_arcs,
            vertices: n_vertices,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new();
    for i in 0..n_vertices {
        b.add_vertex(&format!("v{i}"));
    }
    let mut used = std::collections::HashSet::with_capacity(n_arcs);
    while used.len() < n_arcs {
        let src = rng.random_range(0..n_vertices);
        let dst = rng.random_range(0..n_vertices);
        if src == dst || !used.insert((src, dst)) {
            continue;
        }
        let policy = ArcPolicy::new(
            sample(&mut rng, fees.base_fee),
            sample(&mut rng, fees.fee_rate),
            sample(&mut rng, balance),
        )?;
        b.add_arc(&format!("v{src}"), &format!("v{dst}"), policy)?;
    }
    Ok(b.build())
}

/// Preferential-attachment graph: every new vertex opens
/// `channels_per_vertex` channels to distinct existing vertices chosen
/// proportionally to degree, giving the heavy-tailed hub structure seen in
/// real channel networks. Each channel gets a capacity from
/// `capacity_range`, split evenly between the two directed arcs, with
/// per-direction fees drawn from `fees`.
pub fn gen_scale_free(
    n_vertices: usize,
    channels_per_vertex: usize,
    fees: FeeRanges,
    capacity_range: (f64, f64),
    seed: u64,
) -> Result<ChannelGraph, GenError> {
    let m = channels_per_vertex;
    if m == 0 {
        return Err(GenError::NoAttachment(m));
    }
    if n_vertices <= m {
        return Err(GenError::TooSmall);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::new();
    for i in 0..n_vertices {
        b.add_vertex(&format!("v{i}"));
    }

    let open_channel =
        |b: &mut GraphBuilder, rng: &mut ChaCha8Rng, u: usize, v: usize| -> Result<(), GenError> {
            let capacity = sample(rng, capacity_range).max(0.0).round() as u64;
            let balance = assign_balances(capacity);
            for (src, dst) in [(u, v), (v, u)] {
                let policy = ArcPolicy::new(
                    sample(rng, fees.base_fee),
                    sample(rng, fees.fee_rate),
                    balance,
                )?;
                b.add_arc(&format!("v{src}"), &format!("v{dst}"), policy)?;
            }
            Ok(())
        };

    // endpoint list sampled uniformly = degree-proportional vertex choice
    let mut endpoints: Vec<usize> = Vec::new();
    // seed clique over the first m+1 vertices
    for u in 0..=m {
        for v in (u + 1)..=m {
            open_channel(&mut b, &mut rng, u, v)?;
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    for new in (m + 1)..n_vertices {
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        while chosen.len() < m {
            let pick = endpoints[rng.random_range(0..endpoints.len())];
            if !chosen.contains(&pick) {
                chosen.push(pick);
            }
        }
        for &target in &chosen {
            open_channel(&mut b, &mut rng, new, target)?;
            endpoints.push(new);
            endpoints.push(target);
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexId;

    const FEES: FeeRanges = FeeRanges {
        base_fee: (0.0, 10.0),
        fee_rate: (0.0, 0.01),
    };

    #[test]
    fn hub_spoke_shape() {
        let policy = ArcPolicy::new(1.0, 0.001, 1e6).unwrap();
        let g = gen_hub_spoke(2, policy).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.arc_count(), 4);

        let g = gen_hub_spoke(1000, policy).unwrap();
        assert_eq!(g.vertex_count(), 1001);
        assert_eq!(g.arc_count(), 2000);
        let hub = g.vertex_by_key("hub").unwrap();
        assert_eq!(g.out_degree(hub).unwrap(), 1000);

        assert!(matches!(
            gen_hub_spoke(1, policy),
            Err(GenError::TooFewSpokes(1))
        ));
    }

    #[test]
    fn hub_spoke_unique_route_between_spokes() {
        let policy = ArcPolicy::new(1.0, 0.0, 1e6).unwrap();
        let g = gen_hub_spoke(5, policy).unwrap();
        let s = g.vertex_by_key("spoke0").unwrap();
        let hub = g.vertex_by_key("hub").unwrap();
        // every arc out of a spoke points at the hub
        assert!(g.out_arcs(s).iter().all(|&a| g.arc(a).target == hub));
    }

    #[test]
    fn random_pcn_isolated_when_no_arcs() {
        let g = gen_random_pcn(5, 0, FEES, (0.0, 1.0), 1).unwrap();
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.arc_count(), 0);
    }

    #[test]
    fn random_pcn_deterministic() {
        let a = gen_random_pcn(12, 30, FEES, (10.0, 1e6), 7).unwrap();
        let b = gen_random_pcn(12, 30, FEES, (10.0, 1e6), 7).unwrap();
        assert!(crate::snapshot::graphs_identical(&a, &b));
    }

    #[test]
    fn random_pcn_distinct_pairs_within_ranges() {
        let g = gen_random_pcn(12, 30, FEES, (10.0, 1e6), 7).unwrap();
        assert_eq!(g.arc_count(), 30);
        let mut seen = std::collections::HashSet::new();
        for (_, arc) in g.arcs() {
            assert!(arc.source != arc.target);
            assert!(seen.insert((arc.source, arc.target)), "parallel arc");
            assert!((0.0..10.0).contains(&arc.policy.base_fee));
            assert!((0.0..0.01).contains(&arc.policy.fee_rate));
            assert!((10.0..1e6).contains(&arc.policy.balance));
        }
    }

    #[test]
    fn random_pcn_guards_arc_count() {
        assert!(matches!(
            gen_random_pcn(3, 7, FEES, (0.0, 1.0), 0),
            Err(GenError::TooManyArcs { .. })
        ));
    }

    #[test]
    fn scale_free_is_heavy_tailed_and_deterministic() {
        let g = gen_scale_free(500, 3, FEES, (1e6, 2e7), 11).unwrap();
        let h = gen_scale_free(500, 3, FEES, (1e6, 2e7), 11).unwrap();
        assert!(crate::snapshot::graphs_identical(&g, &h));
        assert_eq!(g.vertex_count(), 500);
        // every vertex participates
        for v in 0..500 {
            assert!(g.out_degree(VertexId(v)).unwrap() > 0);
        }
        let mut degrees: Vec<usize> = g.vertices().map(|v| g.out_degree(v).unwrap()).collect();
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        let mean = degrees.iter().sum::<usize>() as f64 / degrees.len() as f64;
        // hubs far above the mean are the point of preferential attachment
        assert!(
            degrees[0] as f64 > 5.0 * mean,
            "max degree {} vs mean {mean}",
            degrees[0]
        );
    }
}
