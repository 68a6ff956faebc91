use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::spectral::power_iteration;
use super::{Network, NetworkError};

pub const EIGENVECTOR_TOL: f64 = 1e-10;
pub const EIGENVECTOR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentralityKind {
    Degree,
    Eigenvector,
    Betweenness,
    Closeness,
}

impl CentralityKind {
    pub const ALL: [CentralityKind; 4] = [
        CentralityKind::Degree,
        CentralityKind::Eigenvector,
        CentralityKind::Betweenness,
        CentralityKind::Closeness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CentralityKind::Degree => "degree",
            CentralityKind::Eigenvector => "eigenvector",
            CentralityKind::Betweenness => "betweenness",
            CentralityKind::Closeness => "closeness",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralityVector {
    pub kind: CentralityKind,
    pub values: Vec<f64>,
    /// Dominant eigenvalue for the eigenvector kind.
    pub eigenvalue: Option<f64>,
}

impl CentralityVector {
    fn plain(kind: CentralityKind, values: Vec<f64>) -> Self {
        Self {
            kind,
            values,
            eigenvalue: None,
        }
    }
}

pub fn centrality(net: &Network, kind: CentralityKind) -> Result<CentralityVector, NetworkError> {
    match kind {
        CentralityKind::Degree => Ok(degree_centrality(net)),
        CentralityKind::Eigenvector => eigenvector_centrality(net),
        CentralityKind::Betweenness => Ok(betweenness_centrality(net)),
        CentralityKind::Closeness => closeness_centrality(net),
    }
}

/// Node strength Σ_j A_ij (the plain degree on unit-weight networks).
pub fn degree_centrality(net: &Network) -> CentralityVector {
    CentralityVector::plain(
        CentralityKind::Degree,
        (0..net.n()).map(|i| net.strength(i)).collect(),
    )
}

/// Unit-norm, non-negative principal eigenvector of the weighted adjacency.
pub fn eigenvector_centrality(net: &Network) -> Result<CentralityVector, NetworkError> {
    if net.edge_count() == 0 {
        return Err(NetworkError::NoEdges);
    }
    let shift = 0.5 * net.max_strength();
    let pair = power_iteration(
        net.n(),
        |v, out| net.mul_vec(v, out),
        shift,
        EIGENVECTOR_TOL,
        EIGENVECTOR_MAX_ITER,
    );
    if !pair.converged {
        return Err(NetworkError::NotConverged {
            iterations: EIGENVECTOR_MAX_ITER,
        });
    }
    Ok(CentralityVector {
        kind: CentralityKind::Eigenvector,
        values: pair.vector,
        eigenvalue: Some(pair.value),
    })
}

/// Brandes accumulation on the hop-count topology over ordered pairs.
pub fn betweenness_centrality(net: &Network) -> CentralityVector {
    let n = net.n();
    let mut score = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();

    for source in 0..n {
        for v in 0..n {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
            preds[v].clear();
        }
        order.clear();
        sigma[source] = 1.0;
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in net.neighbor_indices(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != source {
                score[w] += delta[w];
            }
        }
    }
    CentralityVector::plain(CentralityKind::Betweenness, score)
}

/// Hop-count distances from `source`, `None` when unreachable.
pub fn bfs_distances(net: &Network, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; net.n()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        let dv = dist[v].expect("queued nodes have a distance");
        for &w in net.neighbor_indices(v) {
            if dist[w].is_none() {
                dist[w] = Some(dv + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// c_i = 1 / Σ_{j≠i} d(i, j), with d = n for unreachable pairs.
pub fn closeness_centrality(net: &Network) -> Result<CentralityVector, NetworkError> {
    let n = net.n();
    if n < 2 {
        return Err(NetworkError::TooSmall { n, needed: 2 });
    }
    let values = (0..n)
        .map(|i| {
            let total: usize = bfs_distances(net, i)
                .into_iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, d)| d.unwrap_or(n))
                .sum();
            1.0 / total as f64
        })
        .collect();
    Ok(CentralityVector::plain(CentralityKind::Closeness, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Network {
        Network::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap()
    }

    fn k3() -> Network {
        Network::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn degree_cases() {
        assert_eq!(degree_centrality(&path3()).values, vec![1.0, 2.0, 1.0]);
        let heavy = Network::from_edges(2, &[(0, 1, 832.0)]).unwrap();
        assert_eq!(degree_centrality(&heavy).values, vec![832.0, 832.0]);
        assert_eq!(
            degree_centrality(&Network::empty(4).unwrap()).values,
            vec![0.0; 4]
        );
    }

    #[test]
    fn eigenvector_cases() {
        let v = eigenvector_centrality(&k3()).unwrap();
        for x in &v.values {
            assert!((x - 1.0 / 3f64.sqrt()).abs() < 1e-10);
        }
        // star: quotient matrix [[0, 3], [1, 0]] gives center/leaf ratio √3
        let star = Network::from_edges(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        let v = eigenvector_centrality(&star).unwrap();
        assert!((v.values[0] - 1.0 / 2f64.sqrt()).abs() < 1e-9);
        for leaf in 1..4 {
            assert!((v.values[leaf] - 1.0 / 6f64.sqrt()).abs() < 1e-9);
        }
        assert!((v.eigenvalue.unwrap() - 3f64.sqrt()).abs() < 1e-9);
        assert!(matches!(
            eigenvector_centrality(&Network::empty(3).unwrap()),
            Err(NetworkError::NoEdges)
        ));
    }

    #[test]
    fn betweenness_cases() {
        assert_eq!(betweenness_centrality(&path3()).values, vec![0.0, 2.0, 0.0]);
        assert_eq!(betweenness_centrality(&k3()).values, vec![0.0; 3]);
    }

    #[test]
    fn closeness_cases() {
        let c = closeness_centrality(&path3()).unwrap().values;
        assert_eq!(c, vec![1.0 / 3.0, 0.5, 1.0 / 3.0]);
        assert_eq!(closeness_centrality(&k3()).unwrap().values, vec![0.5; 3]);
        let split = Network::from_edges(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(
            closeness_centrality(&split).unwrap().values,
            vec![1.0 / 9.0; 4]
        );
        assert!(closeness_centrality(&Network::empty(1).unwrap()).is_err());
    }
}
