use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Network, NetworkError};

/// Seed for the network generators. Same seed and arguments give the same
/// adjacency on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        Self(v)
    }
}

fn check_lattice_args(n: usize, mean_degree: usize) -> Result<(), NetworkError> {
    if mean_degree == 0 || !mean_degree.is_multiple_of(2) {
        return Err(NetworkError::InvalidParameter {
            name: "mean_degree",
            reason: format!("must be a positive even integer, got {mean_degree}"),
        });
    }
    if mean_degree >= n {
        return Err(NetworkError::InvalidParameter {
            name: "mean_degree",
            reason: format!("must be smaller than n = {n}, got {mean_degree}"),
        });
    }
    Ok(())
}

fn unit_edges(adj: &[BTreeSet<usize>]) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for (i, row) in adj.iter().enumerate() {
        for &j in row.range(i + 1..) {
            edges.push((i, j, 1.0));
        }
    }
    edges
}

fn lattice_adjacency(n: usize, mean_degree: usize) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); n];
    for i in 0..n {
        for offset in 1..=mean_degree / 2 {
            let j = (i + offset) % n;
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    adj
}

/// Ring where every agent links to the `mean_degree / 2` nearest agents on
/// each side.
pub fn generate_ring_lattice(n: usize, mean_degree: usize) -> Result<Network, NetworkError> {
    check_lattice_args(n, mean_degree)?;
    Network::from_edges(n, &unit_edges(&lattice_adjacency(n, mean_degree)))
}

/// Watts–Strogatz small world.
///
/// Starts from the ring lattice and visits lattice edges `(i, i + o)` for
/// `o = 1..=mean_degree/2`, `i = 0..n`; each is rewired with probability
/// `rewire_prob` to a uniformly drawn endpoint that is neither `i` nor an
/// existing neighbor of `i`. The edge count is preserved.
pub fn generate_small_world(
    n: usize,
    mean_degree: usize,
    rewire_prob: f64,
    seed: RngSeed,
) -> Result<Network, NetworkError> {
    check_lattice_args(n, mean_degree)?;
    if !(0.0..=1.0).contains(&rewire_prob) {
        return Err(NetworkError::InvalidParameter {
            name: "rewire_prob",
            reason: format!("must lie in [0, 1], got {rewire_prob}"),
        });
    }
    let mut adj = lattice_adjacency(n, mean_degree);
    let mut rng = seed.rng();
    for offset in 1..=mean_degree / 2 {
        for i in 0..n {
            let j = (i + offset) % n;
            if rng.gen::<f64>() >= rewire_prob {
                continue;
            }
            if !adj[i].contains(&j) || adj[i].len() >= n - 1 {
                continue;
            }
            let target = loop {
                let candidate = rng.gen_range(0..n);
                if candidate != i && !adj[i].contains(&candidate) {
                    break candidate;
                }
            };
            adj[i].remove(&j);
            adj[j].remove(&i);
            adj[i].insert(target);
            adj[target].insert(i);
        }
    }
    Network::from_edges(n, &unit_edges(&adj))
}

/// Erdős–Rényi G(n, m): `edge_count` distinct pairs drawn uniformly without
/// replacement.
pub fn generate_random(
    n: usize,
    edge_count: usize,
    seed: RngSeed,
) -> Result<Network, NetworkError> {
    let max_edges = n * n.saturating_sub(1) / 2;
    if edge_count > max_edges {
        return Err(NetworkError::InvalidParameter {
            name: "edge_count",
            reason: format!("at most {max_edges} edges fit on {n} agents, got {edge_count}"),
        });
    }
    let mut rng = seed.rng();
    let mut picks = index::sample(&mut rng, max_edges, edge_count).into_vec();
    picks.sort_unstable();
    let edges: Vec<_> = picks
        .into_iter()
        .map(|k| {
            let (i, j) = pair_from_index(n, k);
            (i, j, 1.0)
        })
        .collect();
    Network::from_edges(n, &edges)
}

/// Maps `k` in `0..n(n-1)/2` to the k-th pair `(i, j)`, `i < j`, in
/// row-major upper-triangle order.
fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

/// Barabási–Albert preferential attachment.
///
/// The first `attach_count + 1` agents form a clique; every later agent links
/// to `attach_count` distinct earlier agents drawn with probability
/// proportional to their current degree.
pub fn generate_scale_free(
    n: usize,
    attach_count: usize,
    seed: RngSeed,
) -> Result<Network, NetworkError> {
    if attach_count == 0 || attach_count >= n {
        return Err(NetworkError::InvalidParameter {
            name: "attach_count",
            reason: format!("must lie in [1, n) with n = {n}, got {attach_count}"),
        });
    }
    let mut rng = seed.rng();
    let mut edges = Vec::new();
    // each edge endpoint appears once, so uniform draws are degree-proportional
    let mut endpoints = Vec::new();
    let core = attach_count + 1;
    for i in 0..core {
        for j in i + 1..core {
            edges.push((i, j, 1.0));
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    for node in core..n {
        let mut chosen = BTreeSet::new();
        while chosen.len() < attach_count {
            let target = endpoints[rng.gen_range(0..endpoints.len())];
            chosen.insert(target);
        }
        for &target in &chosen {
            edges.push((target, node, 1.0));
            endpoints.push(target);
            endpoints.push(node);
        }
    }
    Network::from_edges(n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_lattice_small_cases() {
        let c4 = generate_ring_lattice(4, 2).unwrap();
        assert_eq!(c4.edge_count(), 4);
        assert!((0..4).all(|i| c4.degree(i) == 2));

        let k5 = generate_ring_lattice(5, 4).unwrap();
        assert_eq!(k5.edge_count(), 10);

        assert_eq!(generate_ring_lattice(1000, 2).unwrap().edge_count(), 1000);
    }

    #[test]
    fn lattice_argument_errors() {
        assert!(matches!(
            generate_ring_lattice(10, 3),
            Err(NetworkError::InvalidParameter {
                name: "mean_degree",
                ..
            })
        ));
        assert!(generate_ring_lattice(4, 4).is_err());
        assert!(generate_small_world(10, 2, 1.5, RngSeed(0)).is_err());
    }

    #[test]
    fn small_world_preserves_edges() {
        let net = generate_small_world(1000, 4, 0.1, RngSeed(7)).unwrap();
        assert_eq!(net.edge_count(), 2000);
        let again = generate_small_world(1000, 4, 0.1, RngSeed(7)).unwrap();
        assert_eq!(net, again);
        let lattice = generate_ring_lattice(1000, 4).unwrap();
        assert_ne!(net, lattice);
        assert_eq!(
            generate_small_world(1000, 4, 0.0, RngSeed(7)).unwrap(),
            lattice
        );
    }

    #[test]
    fn random_graph_cases() {
        assert_eq!(generate_random(3, 3, RngSeed(1)).unwrap().edge_count(), 3);
        let net = generate_random(1000, 1000, RngSeed(1)).unwrap();
        let mean: f64 = (0..1000).map(|i| net.degree(i) as f64).sum::<f64>() / 1000.0;
        assert_eq!(mean, 2.0);
        assert_eq!(generate_random(10, 0, RngSeed(1)).unwrap().edge_count(), 0);
        assert!(generate_random(3, 4, RngSeed(1)).is_err());
    }

    #[test]
    fn pair_indexing_covers_upper_triangle() {
        let n = 6;
        let pairs: Vec<_> = (0..n * (n - 1) / 2)
            .map(|k| pair_from_index(n, k))
            .collect();
        let mut expected = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                expected.push((i, j));
            }
        }
        assert_eq!(pairs, expected);
    }

    #[test]
    fn scale_free_cases() {
        let tree = generate_scale_free(3, 1, RngSeed(3)).unwrap();
        assert_eq!(tree.edge_count(), 2);
        let net = generate_scale_free(1000, 1, RngSeed(3)).unwrap();
        assert_eq!(net.edge_count(), 999);
        assert!(generate_scale_free(5, 5, RngSeed(3)).is_err());
        assert!(generate_scale_free(5, 0, RngSeed(3)).is_err());
    }
}
