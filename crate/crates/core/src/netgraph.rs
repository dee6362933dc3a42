//! Directed access networks: the [`Network`] type, synthetic generators and
//! the edge-list text format.
//!
//! Undirected generator output is stored as a symmetric directed graph, so an
//! undirected edge `{i, j}` contributes to both `w_i` and `w_j`. Every network
//! keeps sorted out- and in-neighbour lists; the dense adjacency matrix is only
//! materialised on request.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Directed access network. `out[i]` lists every `j` with `a_ij = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    edges: usize,
}

impl Network {
    /// Builds a network on `n` nodes from directed edges. Duplicates collapse;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "network needs at least one node".into(),
            ));
        }
        let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge {i}->{j} out of range for {n} nodes"
                )));
            }
            if i == j {
                return Err(Error::Validation(format!("self-loop on node {i}")));
            }
            out[i].insert(j);
        }
        Ok(Self::from_sets(out))
    }

    /// Stores each undirected edge `{i, j}` as the pair `i->j`, `j->i`.
    pub fn from_undirected_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges(n, edges.into_iter().flat_map(|(i, j)| [(i, j), (j, i)]))
    }

    fn from_sets(out: Vec<BTreeSet<usize>>) -> Self {
        let n = out.len();
        let mut inc = vec![Vec::new(); n];
        let mut edges = 0;
        for (i, targets) in out.iter().enumerate() {
            for &j in targets {
                inc[j].push(i);
                edges += 1;
            }
        }
        let out = out.into_iter().map(|s| s.into_iter().collect()).collect();
        Self { out, inc, edges }
    }

    /// Node count `N`.
    pub fn n(&self) -> usize {
        self.out.len()
    }

    /// Number of directed edges.
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Nodes `j` with `a_ij = 1`, ascending.
    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    /// Nodes `j` with `a_ji = 1`, ascending.
    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.inc[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.out[i].binary_search(&j).is_ok()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out[i].len()
    }

    /// Loss weights `w_i`, the out-degrees.
    pub fn weights(&self) -> Vec<u32> {
        self.out.iter().map(|o| o.len() as u32).collect()
    }

    /// Dense `N × N` 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.n();
        let mut a = vec![vec![0u8; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            for &j in &self.out[i] {
                row[j] = 1;
            }
        }
        a
    }

    /// Directed edges in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(i, o)| o.iter().map(move |&j| (i, j)))
    }

    /// Symmetric neighbourhood (in ∪ out) of node `i`.
    fn undirected_neighbors(&self, i: usize) -> BTreeSet<usize> {
        self.out[i].iter().chain(&self.inc[i]).copied().collect()
    }

    /// Whether the underlying undirected graph is connected.
    pub fn is_weakly_connected(&self) -> bool {
        components(self).len() == 1
    }

    /// Mean local clustering coefficient of the undirected view; nodes of
    /// degree < 2 contribute zero.
    pub fn mean_clustering(&self) -> f64 {
        let n = self.n();
        let nbrs: Vec<BTreeSet<usize>> = (0..n).map(|i| self.undirected_neighbors(i)).collect();
        let total: f64 = nbrs
            .iter()
            .map(|ni| {
                let d = ni.len();
                if d < 2 {
                    return 0.0;
                }
                let v: Vec<usize> = ni.iter().copied().collect();
                let mut links = 0usize;
                for a in 0..d {
                    for b in a + 1..d {
                        if nbrs[v[a]].contains(&v[b]) {
                            links += 1;
                        }
                    }
                }
                2.0 * links as f64 / (d * (d - 1)) as f64
            })
            .sum();
        total / n as f64
    }
}

fn components(net: &Network) -> Vec<Vec<usize>> {
    let n = net.n();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &u in net.out[v].iter().chain(&net.inc[v]) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        comps.push(comp);
    }
    comps
}

fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size of the fully connected seed used by [`generate_scale_free`].
fn seed_clique_size(n: usize, m: usize) -> usize {
    m.max(2).min(n)
}

/// Undirected edge count produced by [`generate_scale_free`] for `(n, m)`.
pub fn scale_free_edge_count(n: usize, m: usize) -> usize {
    let m0 = seed_clique_size(n, m);
    m0 * (m0 - 1) / 2 + m * (n - m0)
}

/// Preferential attachment (Barabási–Albert).
///
/// Seeding: a clique on `max(m, 2)` nodes; each later node attaches to `m`
/// distinct existing nodes chosen with probability proportional to degree.
/// For `m = 2` this yields `1 + 2·(n − 2)` undirected edges.
pub fn generate_scale_free(n: usize, m: usize, seed: u64) -> Result<Network> {
    if m < 1 {
        return Err(Error::InvalidParameter(
            "edges per new node must be >= 1".into(),
        ));
    }
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "node count {n} smaller than edges per new node {m}"
        )));
    }
    let mut rng = rng_from(seed);
    let m0 = seed_clique_size(n, m);
    let mut edges = Vec::with_capacity(scale_free_edge_count(n, m));
    // Each edge contributes both endpoints, so uniform draws are degree-proportional.
    let mut endpoints: Vec<usize> = Vec::new();
    for i in 0..m0 {
        for j in i + 1..m0 {
            edges.push((i, j));
            endpoints.extend([i, j]);
        }
    }
    for v in m0..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            let t = if endpoints.is_empty() {
                rng.gen_range(0..v)
            } else {
                endpoints[rng.gen_range(0..endpoints.len())]
            };
            targets.insert(t);
        }
        for t in targets {
            edges.push((v, t));
            endpoints.extend([v, t]);
        }
    }
    Network::from_undirected_edges(n, edges)
}

/// Scale-free network with a tunable degree exponent `gamma` (static
/// fitness model).
///
/// Node `i` gets fitness `(i + 1)^(-1/(gamma - 1))`; endpoints of each new
/// undirected edge are drawn proportionally to fitness, rejecting self-loops
/// and duplicates, until the edge count matches [`scale_free_edge_count`]`(n, m)`.
/// Disconnected pieces are then joined to the largest component by one edge
/// each, attached by fitness, so the result is connected like the
/// preferential-attachment output.
pub fn generate_scale_free_exponent(n: usize, m: usize, gamma: f64, seed: u64) -> Result<Network> {
    if !(gamma > 2.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "power-law exponent must exceed 2, got {gamma}"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidParameter(
            "edges per new node must be >= 1".into(),
        ));
    }
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "node count {n} smaller than edges per new node {m}"
        )));
    }
    let target = scale_free_edge_count(n, m);
    let mut rng = rng_from(seed);
    let alpha = 1.0 / (gamma - 1.0);
    let fitness: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).powf(-alpha)).collect();
    let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    if n > 1 {
        let pick = WeightedIndex::new(&fitness)
            .map_err(|e| Error::InvalidParameter(format!("fitness weights: {e}")))?;
        let mut placed = 0;
        let mut attempts = 0usize;
        let max_attempts = 1000 * target.max(1);
        while placed < target {
            attempts += 1;
            if attempts > max_attempts {
                return Err(Error::InvalidParameter(format!(
                    "could not place {target} edges on {n} nodes"
                )));
            }
            let i = pick.sample(&mut rng);
            let j = pick.sample(&mut rng);
            if i == j || sets[i].contains(&j) {
                continue;
            }
            sets[i].insert(j);
            sets[j].insert(i);
            placed += 1;
        }
    }
    let mut net = Network::from_sets(sets.clone());
    let mut comps = components(&net);
    if comps.len() > 1 {
        comps.sort_by_key(|c| std::cmp::Reverse(c.len()));
        let giant = comps[0].clone();
        let giant_pick = WeightedIndex::new(giant.iter().map(|&v| fitness[v]))
            .map_err(|e| Error::InvalidParameter(format!("fitness weights: {e}")))?;
        for comp in &comps[1..] {
            // Lowest index = highest fitness inside the piece.
            let v = comp[0];
            let u = giant[giant_pick.sample(&mut rng)];
            sets[v].insert(u);
            sets[u].insert(v);
        }
        net = Network::from_sets(sets);
    }
    Ok(net)
}

/// Small-world network (Watts–Strogatz): ring lattice where each node links
/// to its `k` nearest neighbours, then every lattice edge `(i, i+j)` is
/// rewired with probability `p` to a uniformly chosen new endpoint, avoiding
/// self-loops and duplicates. Edge count is preserved.
pub fn generate_small_world(n: usize, k: usize, p: f64, seed: u64) -> Result<Network> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "base degree must be even and >= 2, got {k}"
        )));
    }
    if k >= n {
        return Err(Error::InvalidParameter(format!(
            "base degree {k} must be smaller than node count {n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "rewiring probability must lie in [0, 1], got {p}"
        )));
    }
    let mut rng = rng_from(seed);
    let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for i in 0..n {
        for j in 1..=k / 2 {
            let v = (i + j) % n;
            sets[i].insert(v);
            sets[v].insert(i);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.gen::<f64>() >= p || !sets[u].contains(&v) {
                continue;
            }
            if sets[u].len() >= n - 1 {
                continue;
            }
            let mut w = rng.gen_range(0..n);
            while w == u || sets[u].contains(&w) {
                w = rng.gen_range(0..n);
            }
            sets[u].remove(&v);
            sets[v].remove(&u);
            sets[u].insert(w);
            sets[w].insert(u);
        }
    }
    Ok(Network::from_sets(sets))
}

const NODES_DIRECTIVE: &str = "nodes:";

/// Parses edge-list text: one `i j` pair of 0-based ids per line, meaning the
/// directed edge `i -> j`. Blank lines and lines starting with `#` are
/// skipped; a `# nodes: N` comment raises the node count to at least `N`.
/// Otherwise the network has `max id + 1` nodes.
pub fn load_edge_list(text: &str) -> Result<Network> {
    let (edges, hint) = parse_pairs(text)?;
    let max_id = edges.iter().map(|&(i, j, _)| i.max(j)).max();
    let n = match (max_id, hint) {
        (Some(m), h) => (m as usize + 1).max(h.unwrap_or(0)),
        (None, Some(h)) => h,
        (None, None) => return Err(Error::Validation("edge list contains no edges".into())),
    };
    Network::from_edges(
        n,
        edges.into_iter().map(|(i, j, _)| (i as usize, j as usize)),
    )
}

/// Like [`load_edge_list`] but compacts arbitrary ids onto `0..N` in ascending
/// id order. Returns the network and `original[new_id]`.
pub fn load_edge_list_remapped(text: &str) -> Result<(Network, Vec<u64>)> {
    let (edges, _) = parse_pairs(text)?;
    if edges.is_empty() {
        return Err(Error::Validation("edge list contains no edges".into()));
    }
    let ids: BTreeSet<u64> = edges.iter().flat_map(|&(i, j, _)| [i, j]).collect();
    let index: BTreeMap<u64, usize> = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let net = Network::from_edges(
        ids.len(),
        edges.iter().map(|(i, j, _)| (index[i], index[j])),
    )?;
    Ok((net, ids.into_iter().collect()))
}

type Pairs = (Vec<(u64, u64, usize)>, Option<usize>);

fn parse_pairs(text: &str) -> Result<Pairs> {
    let mut edges = Vec::new();
    let mut hint = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix(NODES_DIRECTIVE) {
                let n = rest.trim().parse::<usize>().map_err(|e| Error::Parse {
                    line: line_no,
                    message: format!("bad node count: {e}"),
                })?;
                hint = Some(n);
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected two node ids, got {line:?}"),
            });
        };
        let parse = |tok: &str| {
            tok.parse::<u64>().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad node id {tok:?}: {e}"),
            })
        };
        let (i, j) = (parse(a)?, parse(b)?);
        if i == j {
            return Err(Error::SelfLoop {
                line: line_no,
                node: i as usize,
            });
        }
        edges.push((i, j, line_no));
    }
    Ok((edges, hint))
}

/// Serialises a network in the edge-list format read by [`load_edge_list`].
pub fn write_edge_list(net: &Network) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {NODES_DIRECTIVE} {}", net.n());
    let _ = writeln!(s, "# edges: {}", net.edge_count());
    for (i, j) in net.edges() {
        let _ = writeln!(s, "{i} {j}");
    }
    s
}
