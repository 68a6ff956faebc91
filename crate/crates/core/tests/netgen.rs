use netlock::netgen::{
    bfs_distances, closeness_centrality, degree_centrality, density, eigenvector_centrality,
    format_edge_list, generate_random, generate_ring_lattice, generate_scale_free,
    generate_small_world, header_agent_count, parse_edge_list, Network, RngSeed,
};
use proptest::prelude::*;

fn symmetric(net: &Network) -> bool {
    (0..net.n()).all(|i| {
        net.neighbors(i)
            .all(|(j, w)| i != j && net.weight(j, i) == w)
    })
}

/// All-pairs shortest paths by Floyd–Warshall on the dense adjacency.
fn floyd_warshall(net: &Network) -> Vec<Vec<Option<usize>>> {
    let n = net.n();
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for (j, _) in net.neighbors(i) {
            d[i][j] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn small_world_keeps_lattice_edge_count(n in 6usize..80, half in 1usize..3, p in 0.0f64..1.0, seed: u64) {
        let k = 2 * half;
        prop_assume!(k < n);
        let net = generate_small_world(n, k, p, RngSeed(seed)).unwrap();
        prop_assert_eq!(net.edge_count(), n * k / 2);
        prop_assert!(symmetric(&net));
        prop_assert_eq!(&net, &generate_small_world(n, k, p, RngSeed(seed)).unwrap());
    }

    #[test]
    fn ring_lattice_is_regular(n in 3usize..60, half in 1usize..4) {
        let k = 2 * half;
        prop_assume!(k < n);
        let net = generate_ring_lattice(n, k).unwrap();
        prop_assert!((0..n).all(|i| net.degree(i) == k));
        prop_assert!((density(&net).unwrap() - k as f64 / (n - 1) as f64).abs() < 1e-12);
    }

    #[test]
    fn random_graph_has_requested_edges(n in 2usize..50, frac in 0.0f64..1.0, seed: u64) {
        let m = ((n * (n - 1) / 2) as f64 * frac) as usize;
        let net = generate_random(n, m, RngSeed(seed)).unwrap();
        prop_assert_eq!(net.edge_count(), m);
        prop_assert!(symmetric(&net));
    }

    #[test]
    fn scale_free_edge_count(n in 3usize..80, attach in 1usize..3, seed: u64) {
        prop_assume!(attach < n);
        let net = generate_scale_free(n, attach, RngSeed(seed)).unwrap();
        prop_assert!(symmetric(&net));
        prop_assert!((0..n).all(|i| net.degree(i) >= 1));
    }

    #[test]
    fn edge_list_round_trip(n in 4usize..40, seed: u64) {
        let net = generate_small_world(n, 2, 0.3, RngSeed(seed)).unwrap();
        let text = format_edge_list(&net);
        prop_assert_eq!(parse_edge_list(&text, header_agent_count(&text)).unwrap(), net);
    }

    #[test]
    fn bfs_matches_floyd_warshall(n in 3usize..30, m in 0usize..40, seed: u64) {
        let m = m.min(n * (n - 1) / 2);
        let net = generate_random(n, m, RngSeed(seed)).unwrap();
        let all = floyd_warshall(&net);
        for s in 0..n {
            prop_assert_eq!(&bfs_distances(&net, s), &all[s]);
        }
        // Unreachable pairs count as distance n.
        let c = closeness_centrality(&net).unwrap();
        for i in 0..n {
            let total: usize = (0..n).filter(|&j| j != i).map(|j| all[i][j].unwrap_or(n)).sum();
            prop_assert!((c.values[i] - 1.0 / total as f64).abs() < 1e-15);
        }
    }
}

#[test]
fn full_scale_counts() {
    let sw = generate_small_world(1000, 4, 0.1, RngSeed(7)).unwrap();
    assert_eq!(sw.edge_count(), 2000);
    assert!((density(&sw).unwrap() - 4.0 / 999.0).abs() < 1e-15);
    assert_eq!(generate_ring_lattice(1000, 2).unwrap().edge_count(), 1000);
    let er = generate_random(1000, 1000, RngSeed(7)).unwrap();
    let mean = (0..1000).map(|i| er.degree(i)).sum::<usize>() as f64 / 1000.0;
    assert_eq!(mean, 2.0);
}

#[test]
fn complete_graph_centralities() {
    let net = generate_ring_lattice(5, 4).unwrap();
    assert_eq!(net.edge_count(), 10);
    let deg = degree_centrality(&net);
    assert!(deg.values.iter().all(|&v| v == 4.0));
    let eig = eigenvector_centrality(&net).unwrap();
    assert!((eig.eigenvalue.unwrap() - 4.0).abs() < 1e-8);
    assert!(closeness_centrality(&net)
        .unwrap()
        .values
        .iter()
        .all(|&v| (v - 0.25).abs() < 1e-15));
}

#[test]
fn eigenvector_matches_dense_symmetric_eigensolver() {
    let net = generate_small_world(40, 4, 0.3, RngSeed(9)).unwrap();
    let n = net.n();
    let m = nalgebra::DMatrix::from_row_slice(n, n, &net.to_dense());
    let eig = nalgebra::SymmetricEigen::new(m);
    let (idx, &lead) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let ours = eigenvector_centrality(&net).unwrap();
    assert!((ours.eigenvalue.unwrap() - lead).abs() < 1e-8);
    let norm = |u: &[f64]| u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (a, b) = (norm(&ours.values), norm(&v));
    for (x, y) in ours.values.iter().zip(&v) {
        assert!((x / a - y / b).abs() < 1e-6);
    }
}
