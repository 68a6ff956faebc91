use std::collections::BTreeMap;

use super::NetworkError;

/// Symmetric, non-negative, zero-diagonal weighted contact network.
///
/// Stored as a compressed sparse row adjacency with both directions of every
/// undirected link present; neighbor lists are sorted so that construction is
/// deterministic for a given edge set.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    edge_count: usize,
}

impl Network {
    /// Builds a network from an undirected edge list.
    ///
    /// Every pair may appear once (in either orientation). Self-loops,
    /// out-of-range indices, non-positive or non-finite weights and duplicate
    /// pairs are rejected with the offending entry in the error.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, NetworkError> {
        if n == 0 {
            return Err(NetworkError::Empty);
        }
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (index, &(i, j, w)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(NetworkError::OutOfRange { index, i, j, n });
            }
            if i == j {
                return Err(NetworkError::SelfLoop { index, node: i });
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(NetworkError::BadWeight {
                    index,
                    i,
                    j,
                    weight: w,
                });
            }
            let key = (i.min(j), i.max(j));
            if pairs.insert(key, w).is_some() {
                return Err(NetworkError::DuplicateEdge { index, i, j });
            }
        }

        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(i, j), &w) in &pairs {
            rows[i].push((j, w));
            rows[j].push((i, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(2 * pairs.len());
        let mut weights = Vec::with_capacity(2 * pairs.len());
        offsets.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
            for &(j, w) in row.iter() {
                targets.push(j);
                weights.push(w);
            }
            offsets.push(targets.len());
        }
        Ok(Self {
            n,
            offsets,
            targets,
            weights,
            edge_count: pairs.len(),
        })
    }

    /// Network of `n` isolated agents.
    pub fn empty(n: usize) -> Result<Self, NetworkError> {
        Self::from_edges(n, &[])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of unordered pairs with a positive weight.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbor indices of agent `i`.
    pub fn neighbor_indices(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Weights aligned with [`Network::neighbor_indices`].
    pub fn neighbor_weights(&self, i: usize) -> &[f64] {
        &self.weights[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbor_indices(i)
            .iter()
            .copied()
            .zip(self.neighbor_weights(i).iter().copied())
    }

    /// Number of links of agent `i`, ignoring weights.
    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Σ_j A_ij.
    pub fn strength(&self, i: usize) -> f64 {
        self.neighbor_weights(i).iter().sum()
    }

    pub fn max_strength(&self) -> f64 {
        (0..self.n).map(|i| self.strength(i)).fold(0.0, f64::max)
    }

    /// A_ij, zero when the pair is not linked.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let idx = self.neighbor_indices(i);
        match idx.binary_search(&j) {
            Ok(pos) => self.neighbor_weights(i)[pos],
            Err(_) => 0.0,
        }
    }

    /// Undirected edges `(i, j, w)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&(j, _)| j > i)
                .map(move |(j, w)| (i, j, w))
        })
    }

    /// Row-major dense copy of the adjacency matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            for (j, w) in self.neighbors(i) {
                dense[i * self.n + j] = w;
            }
        }
        dense
    }

    pub fn is_unit_weight(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// y = A·v.
    pub fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let lo = self.offsets[i];
            let hi = self.offsets[i + 1];
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.weights[k] * v[self.targets[k]];
            }
            *o = acc;
        }
    }

    pub(crate) fn csr(&self) -> (&[usize], &[usize], &[f64]) {
        (&self.offsets, &self.targets, &self.weights)
    }
}

/// 2·|E| / (n(n−1)).
pub fn density(net: &Network) -> Result<f64, NetworkError> {
    let n = net.n();
    if n < 2 {
        return Err(NetworkError::TooSmall { n, needed: 2 });
    }
    Ok(2.0 * net.edge_count() as f64 / (n as f64 * (n as f64 - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_network() {
        let net = Network::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(net.edge_count(), 2);
        assert_eq!(net.degree(1), 2);
        assert_eq!(net.weight(2, 1), 1.0);
        assert_eq!(net.weight(0, 2), 0.0);
    }

    #[test]
    fn heavy_link_is_symmetric() {
        let net = Network::from_edges(2, &[(0, 1, 832.0)]).unwrap();
        assert_eq!(net.weight(0, 1), 832.0);
        assert_eq!(net.weight(1, 0), 832.0);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(matches!(
            Network::from_edges(3, &[(0, 0, 1.0)]),
            Err(NetworkError::SelfLoop { index: 0, node: 0 })
        ));
        assert!(matches!(
            Network::from_edges(3, &[(0, 3, 1.0)]),
            Err(NetworkError::OutOfRange { .. })
        ));
        assert!(matches!(
            Network::from_edges(3, &[(0, 1, 0.0)]),
            Err(NetworkError::BadWeight { .. })
        ));
        assert!(matches!(
            Network::from_edges(3, &[(0, 1, 1.0), (1, 0, 2.0)]),
            Err(NetworkError::DuplicateEdge { index: 1, .. })
        ));
    }

    #[test]
    fn density_cases() {
        let k3 = Network::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(density(&k3).unwrap(), 1.0);
        assert_eq!(density(&Network::empty(10).unwrap()).unwrap(), 0.0);
        assert!(density(&Network::empty(1).unwrap()).is_err());
    }
}
