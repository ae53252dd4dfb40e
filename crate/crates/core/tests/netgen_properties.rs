use ngg::netgen::{
    compute_stats, gen_scale_free, gen_small_world, generate, Attachment, Network, NetworkSpec,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected graph on `n` nodes: a random spanning tree plus extra edges.
fn connected_graph(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..=max_nodes).prop_flat_map(|n| {
        let parents: Vec<BoxedStrategy<usize>> = (1..n).map(|v| (0..v).boxed()).collect();
        let extra = prop::collection::vec((0..n, 0..n), 0..n * 2);
        (Just(n), parents, extra).prop_map(|(n, parents, extra)| {
            let mut edges: Vec<(usize, usize)> = parents
                .into_iter()
                .enumerate()
                .map(|(k, p)| (p, k + 1))
                .collect();
            for (u, v) in extra {
                let e = (u.min(v), u.max(v));
                if u != v && !edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == e) {
                    edges.push(e);
                }
            }
            (n, edges)
        })
    })
}

/// Floyd-Warshall distances and clustering from an adjacency matrix,
/// accumulated in the same order as the library so results agree bit for bit.
fn oracle(n: usize, edges: &[(usize, usize)]) -> (f64, f64, f64) {
    const INF: u64 = u64::MAX / 4;
    let mut adj = vec![vec![false; n]; n];
    let mut dist = vec![vec![INF; n]; n];
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
        dist[u][v] = 1;
        dist[v][u] = 1;
    }
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let through = dist[i][k] + dist[k][j];
                if through < dist[i][j] {
                    dist[i][j] = through;
                }
            }
        }
    }
    let path_sum: u64 = dist.iter().flatten().sum();
    let mut cc = 0.0;
    for i in 0..n {
        let nb: Vec<usize> = (0..n).filter(|&j| adj[i][j]).collect();
        let d = nb.len();
        if d < 2 {
            continue;
        }
        let mut closed = 0usize;
        for a in 0..d {
            for b in a + 1..d {
                closed += usize::from(adj[nb[a]][nb[b]]);
            }
        }
        cc += closed as f64 / (d * (d - 1) / 2) as f64;
    }
    (
        2.0 * edges.len() as f64 / n as f64,
        path_sum as f64 / (n * (n - 1)) as f64,
        cc / n as f64,
    )
}

fn assert_well_formed(net: &Network) {
    assert!(net.is_connected());
    for i in 0..net.node_count() {
        assert!(!net.is_adjacent(i, i));
        for &j in net.neighbors(i) {
            assert!(net.is_adjacent(j, i));
        }
    }
    let degree_sum: usize = (0..net.node_count()).map(|i| net.degree(i)).sum();
    assert_eq!(degree_sum, 2 * net.edge_count());
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn stats_equal_floyd_warshall((n, edges) in connected_graph(8)) {
        let net = Network::from_edges(n, edges.iter().copied()).unwrap();
        let stats = compute_stats(&net).unwrap();
        let (d, pl, cc) = oracle(n, &edges);
        prop_assert_eq!(stats.avg_degree.to_bits(), d.to_bits());
        prop_assert_eq!(stats.avg_path_length.to_bits(), pl.to_bits());
        prop_assert_eq!(stats.clustering_coefficient.to_bits(), cc.to_bits());
    }

    #[test]
    fn unrewired_lattice_is_regular(k in 1usize..5, extra in 1usize..20, seed: u64) {
        let m = 2 * k + extra;
        let net = gen_small_world(m, k, 0.0, &mut rng(seed)).unwrap();
        prop_assert!((0..m).all(|i| net.degree(i) == 2 * k));
    }

    #[test]
    fn generated_networks_are_well_formed(kind in 0u8..3, seed: u64) {
        let spec = match kind {
            0 => NetworkSpec::RandomGraph { m: 40, p: 0.2 },
            1 => NetworkSpec::SmallWorld { m: 40, k: 3, rp: 0.3 },
            _ => NetworkSpec::ScaleFree { m: 40, n0: 4, e: 3, attachment: Attachment::Distinct },
        };
        let net = generate(&spec, &mut rng(seed)).unwrap();
        assert_well_formed(&net);
        let again = generate(&spec, &mut rng(seed)).unwrap();
        prop_assert_eq!(net.edges(), again.edges());
    }

    #[test]
    fn scale_free_edge_count(n0 in 1usize..8, e_frac in 0.0f64..1.0, grow in 1usize..30, seed: u64) {
        let e = 1 + ((n0 - 1) as f64 * e_frac) as usize;
        let m = n0 + grow;
        let seed_edges = n0 * (n0 - 1) / 2;
        let net = gen_scale_free(m, n0, e, Attachment::Distinct, &mut rng(seed)).unwrap();
        prop_assert_eq!(net.edge_count(), seed_edges + e * (m - n0));
        let merged = gen_scale_free(m, n0, e, Attachment::Merged, &mut rng(seed)).unwrap();
        prop_assert!(merged.edge_count() <= seed_edges + e * (m - n0));
        prop_assert!(merged.edge_count() >= seed_edges + (m - n0));
    }
}
