//! Random-graph, small-world and scale-free network generators.
//!
//! Every generator returns a connected, undirected graph without self-loops
//! on exactly `m` nodes. Disconnected draws are discarded and regenerated
//! with fresh randomness, up to [`MAX_ATTEMPTS`] times.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ATTEMPTS: usize = 100;

/// How a new scale-free node picks its `e` neighbors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attachment {
    /// `e` distinct targets, sampled one after another proportional to
    /// degree, never repeating a pick. Every new node adds exactly `e` edges.
    #[default]
    Distinct,
    /// `e` degree-proportional draws with replacement. Repeated picks
    /// collapse into one edge, so a new node may add fewer than `e` edges.
    Merged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSpec {
    /// Erdős–Rényi G(m, p).
    RandomGraph { m: usize, p: f64 },
    /// Watts–Strogatz ring of `2k` degree with rewiring probability `rp`.
    SmallWorld { m: usize, k: usize, rp: f64 },
    /// Barabási–Albert growth from a complete graph on `n0` nodes.
    ScaleFree {
        m: usize,
        n0: usize,
        e: usize,
        #[serde(default)]
        attachment: Attachment,
    },
}

impl NetworkSpec {
    pub fn node_count(&self) -> usize {
        match *self {
            NetworkSpec::RandomGraph { m, .. }
            | NetworkSpec::SmallWorld { m, .. }
            | NetworkSpec::ScaleFree { m, .. } => m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.node_count();
        if m < 2 {
            return Err(Error::invalid(
                "m",
                format!("need at least 2 nodes, got {m}"),
            ));
        }
        match *self {
            NetworkSpec::RandomGraph { p, .. } => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::invalid("p", format!("must lie in (0, 1), got {p}")));
                }
            }
            NetworkSpec::SmallWorld { k, rp, .. } => {
                if k < 1 {
                    return Err(Error::invalid("k", "must be at least 1"));
                }
                if 2 * k >= m {
                    return Err(Error::invalid(
                        "k",
                        format!("2k = {} must be below m = {m}", 2 * k),
                    ));
                }
                if !(0.0..=1.0).contains(&rp) {
                    return Err(Error::invalid(
                        "rp",
                        format!("must lie in [0, 1], got {rp}"),
                    ));
                }
            }
            NetworkSpec::ScaleFree { n0, e, .. } => {
                if n0 < 1 || n0 >= m {
                    return Err(Error::invalid(
                        "n0",
                        format!("need 1 <= n0 < m, got n0 = {n0}, m = {m}"),
                    ));
                }
                if e < 1 || e > n0 {
                    return Err(Error::invalid(
                        "e",
                        format!("need 1 <= e <= n0, got e = {e}, n0 = {n0}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Short label in the `RG-0.05` / `WS-20-0.2` / `BA-50` style.
    pub fn label(&self) -> String {
        match *self {
            NetworkSpec::RandomGraph { p, .. } => format!("RG-{p}"),
            NetworkSpec::SmallWorld { k, rp, .. } => format!("WS-{k}-{rp}"),
            NetworkSpec::ScaleFree { e, .. } => format!("BA-{e}"),
        }
    }

    /// Reference configurations at 1000 nodes, keyed by label.
    ///
    /// The scale-free presets use [`Attachment::Merged`], which reproduces
    /// the published degree, path length and clustering of these networks.
    pub fn presets() -> Vec<(&'static str, NetworkSpec)> {
        use NetworkSpec::*;
        let ba = |n0, e| ScaleFree {
            m: 1000,
            n0,
            e,
            attachment: Attachment::Merged,
        };
        vec![
            ("RG-0.03", RandomGraph { m: 1000, p: 0.03 }),
            ("RG-0.05", RandomGraph { m: 1000, p: 0.05 }),
            ("RG-0.1", RandomGraph { m: 1000, p: 0.1 }),
            (
                "WS-20-0.1",
                SmallWorld {
                    m: 1000,
                    k: 20,
                    rp: 0.1,
                },
            ),
            (
                "WS-20-0.2",
                SmallWorld {
                    m: 1000,
                    k: 20,
                    rp: 0.2,
                },
            ),
            (
                "WS-20-0.3",
                SmallWorld {
                    m: 1000,
                    k: 20,
                    rp: 0.3,
                },
            ),
            ("BA-25", ba(25, 25)),
            ("BA-50", ba(51, 50)),
            ("BA-75", ba(76, 75)),
        ]
    }

    pub fn preset(label: &str) -> Option<NetworkSpec> {
        Self::presets()
            .into_iter()
            .find(|(l, _)| l.eq_ignore_ascii_case(label))
            .map(|(_, s)| s)
    }
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Dense symmetric adjacency bits, one row of `u64` words per node.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, on: bool) {
        let idx = i * self.words + j / 64;
        let mask = 1u64 << (j % 64);
        if on {
            self.bits[idx] |= mask;
        } else {
            self.bits[idx] &= !mask;
        }
    }

    fn link(&mut self, i: usize, j: usize, on: bool) {
        self.set(i, j, on);
        self.set(j, i, on);
    }
}

/// An undirected simple graph on nodes `0..m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    matrix: BitMatrix,
    neighbors: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    spec: Option<NetworkSpec>,
}

impl Network {
    /// Builds a graph from an edge list. Duplicate edges are merged; self-loops
    /// and out-of-range endpoints are rejected. Connectivity is not required.
    pub fn from_edges(m: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut matrix = BitMatrix::new(m);
        for (u, v) in edges {
            if u >= m || v >= m {
                return Err(Error::invalid(
                    "edges",
                    format!("edge ({u}, {v}) outside 0..{m}"),
                ));
            }
            if u == v {
                return Err(Error::invalid("edges", format!("self-loop at node {u}")));
            }
            matrix.link(u, v, true);
        }
        Ok(Self::from_matrix(matrix, None))
    }

    fn from_matrix(matrix: BitMatrix, spec: Option<NetworkSpec>) -> Self {
        let n = matrix.n;
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| matrix.get(i, j)).collect())
            .collect();
        let edges = neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect();
        Network {
            matrix,
            neighbors,
            edges,
            spec,
        }
    }

    pub fn complete(m: usize) -> Self {
        Self::from_edges(m, (0..m).flat_map(|u| (u + 1..m).map(move |v| (u, v)))).unwrap()
    }

    pub fn node_count(&self) -> usize {
        self.matrix.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.matrix.get(i, j)
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn spec(&self) -> Option<&NetworkSpec> {
        self.spec.as_ref()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        n > 0 && bfs_distances(self, 0).iter().all(|d| d.is_some())
    }

    /// Writes one `u v` line per edge, `u < v`, ascending.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_edge_list(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

/// Generates a network for `spec`.
pub fn generate<R: Rng + ?Sized>(spec: &NetworkSpec, rng: &mut R) -> Result<Network> {
    match *spec {
        NetworkSpec::RandomGraph { m, p } => gen_random_graph(m, p, rng),
        NetworkSpec::SmallWorld { m, k, rp } => gen_small_world(m, k, rp, rng),
        NetworkSpec::ScaleFree {
            m,
            n0,
            e,
            attachment,
        } => gen_scale_free(m, n0, e, attachment, rng),
    }
}

fn retry_connected<R, F>(spec: NetworkSpec, rng: &mut R, mut build: F) -> Result<Network>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> BitMatrix,
{
    spec.validate()?;
    for _ in 0..MAX_ATTEMPTS {
        let net = Network::from_matrix(build(rng), Some(spec.clone()));
        if net.is_connected() {
            return Ok(net);
        }
    }
    Err(Error::ConnectivityFailure {
        attempts: MAX_ATTEMPTS,
    })
}

pub fn gen_random_graph<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> Result<Network> {
    retry_connected(NetworkSpec::RandomGraph { m, p }, rng, |rng| {
        let mut matrix = BitMatrix::new(m);
        for u in 0..m {
            for v in u + 1..m {
                if rng.random::<f64>() < p {
                    matrix.link(u, v, true);
                }
            }
        }
        matrix
    })
}

pub fn gen_small_world<R: Rng + ?Sized>(
    m: usize,
    k: usize,
    rp: f64,
    rng: &mut R,
) -> Result<Network> {
    retry_connected(NetworkSpec::SmallWorld { m, k, rp }, rng, |rng| {
        let mut matrix = BitMatrix::new(m);
        let mut degree = vec![2 * k; m];
        for u in 0..m {
            for j in 1..=k {
                matrix.link(u, (u + j) % m, true);
            }
        }
        // Rewire lattice edge (u, u+j) by moving its far end to a uniform
        // node that is neither u nor already adjacent to u.
        for j in 1..=k {
            for u in 0..m {
                if rp == 0.0 || rng.random::<f64>() >= rp {
                    continue;
                }
                let v = (u + j) % m;
                if degree[u] >= m - 1 || !matrix.get(u, v) {
                    continue;
                }
                let w = loop {
                    let w = rng.random_range(0..m);
                    if w != u && !matrix.get(u, w) {
                        break w;
                    }
                };
                matrix.link(u, v, false);
                matrix.link(u, w, true);
                degree[v] -= 1;
                degree[w] += 1;
            }
        }
        matrix
    })
}

pub fn gen_scale_free<R: Rng + ?Sized>(
    m: usize,
    n0: usize,
    e: usize,
    attachment: Attachment,
    rng: &mut R,
) -> Result<Network> {
    let spec = NetworkSpec::ScaleFree {
        m,
        n0,
        e,
        attachment,
    };
    retry_connected(spec, rng, |rng| {
        let mut matrix = BitMatrix::new(m);
        // Each node appears once per incident edge end, so a uniform pick
        // from `ends` is a degree-proportional pick.
        let mut ends: Vec<usize> = Vec::with_capacity(2 * (n0 * n0 + e * m));
        for u in 0..n0 {
            for v in u + 1..n0 {
                matrix.link(u, v, true);
                ends.extend([u, v]);
            }
        }
        let mut targets: Vec<usize> = Vec::with_capacity(e);
        for new in n0..m {
            targets.clear();
            let pick = |rng: &mut R| {
                if ends.is_empty() {
                    rng.random_range(0..new)
                } else {
                    ends[rng.random_range(0..ends.len())]
                }
            };
            match attachment {
                Attachment::Distinct => {
                    while targets.len() < e {
                        let t = pick(rng);
                        if !targets.contains(&t) {
                            targets.push(t);
                        }
                    }
                }
                Attachment::Merged => {
                    for _ in 0..e {
                        let t = pick(rng);
                        if !targets.contains(&t) {
                            targets.push(t);
                        }
                    }
                }
            }
            for &t in &targets {
                matrix.link(new, t, true);
                ends.extend([new, t]);
            }
        }
        matrix
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub avg_degree: f64,
    pub avg_path_length: f64,
    pub clustering_coefficient: f64,
}

fn bfs_distances(net: &Network, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; net.node_count()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in net.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Local clustering of node `i`; nodes with fewer than two neighbors get 0.
pub fn local_clustering(net: &Network, i: usize) -> f64 {
    let ns = net.neighbors(i);
    let d = ns.len();
    if d < 2 {
        return 0.0;
    }
    let mut closed = 0usize;
    for (a, &u) in ns.iter().enumerate() {
        closed += ns[a + 1..]
            .iter()
            .filter(|&&v| net.is_adjacent(u, v))
            .count();
    }
    closed as f64 / (d * (d - 1) / 2) as f64
}

/// Mean degree, mean shortest-path length over unordered node pairs, and
/// mean local clustering coefficient.
pub fn compute_stats(net: &Network) -> Result<NetworkStats> {
    let m = net.node_count();
    if m < 2 {
        return Err(Error::invalid("m", "statistics need at least 2 nodes"));
    }
    let mut path_sum: u64 = 0;
    for s in 0..m {
        for d in bfs_distances(net, s) {
            path_sum += d.ok_or(Error::Disconnected)? as u64;
        }
    }
    let pairs = (m * (m - 1)) as f64;
    let cc: f64 = (0..m).map(|i| local_clustering(net, i)).sum::<f64>() / m as f64;
    Ok(NetworkStats {
        avg_degree: 2.0 * net.edge_count() as f64 / m as f64,
        avg_path_length: path_sum as f64 / pairs,
        clustering_coefficient: cc,
    })
}

/// The JSON record written next to an edge list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StatsRecord {
    pub model: String,
    pub params: serde_json::Value,
    #[serde(rename = "M")]
    pub m: usize,
    pub avg_degree: f64,
    pub avg_path_length: f64,
    pub clustering_coefficient: f64,
    pub seed: u64,
}

impl StatsRecord {
    pub fn new(spec: &NetworkSpec, stats: &NetworkStats, seed: u64) -> Self {
        let mut params = serde_json::to_value(spec).expect("spec serializes");
        let model = params["model"].as_str().unwrap_or_default().to_owned();
        if let Some(obj) = params.as_object_mut() {
            obj.remove("model");
            obj.remove("m");
        }
        StatsRecord {
            model,
            params,
            m: spec.node_count(),
            avg_degree: stats.avg_degree,
            avg_path_length: stats.avg_path_length,
            clustering_coefficient: stats.clustering_coefficient,
            seed,
        }
    }
}
