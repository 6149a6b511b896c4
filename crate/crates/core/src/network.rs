//! Network data model and generator families.
//!
//! A network is a weighted directed influence graph: node `j` feels the
//! external rate `p_j` at all times and gains `q_{k,j}` once `k` has
//! adopted. Edges are stored adjacency-by-target (incoming lists) because
//! every solver consumes incoming influence sums. Node ids are dense
//! 0-based integers.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// Hard cap beyond which edge probabilities and parameters stop making
/// sense for the random families (not a solver cap).
const REDRAW_ATTEMPTS: usize = 100;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("node count must be at least 1")]
    NoNodes,
    #[error("external rate vector has length {got}, expected {expected}")]
    RateLenMismatch { got: usize, expected: usize },
    #[error("edge ({src}, {dst}) references a node out of range (M = {m})")]
    IndexOutOfRange { src: usize, dst: usize, m: usize },
    #[error("duplicate edge ({src}, {dst})")]
    DuplicateEdge { src: usize, dst: usize },
    #[error("non-finite weight on edge ({src}, {dst})")]
    NonFiniteWeight { src: usize, dst: usize },
    #[error("non-finite external rate at node {node}")]
    NonFiniteRate { node: usize },
    #[error("invalid node id {node} (M = {m})")]
    InvalidNode { node: usize, m: usize },
    #[error("cannot homogenize: node {node} has zero in-weight")]
    ZeroInWeight { node: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("generator failed: {0}")]
    GeneratorFailed(String),
}

/// One failed model assumption, reported as data by [`NetworkSpec::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `q_{j,j}` must be identically zero.
    SelfLoop { node: usize },
    /// Stored weights must be strictly positive.
    NonPositiveWeight { source: usize, target: usize, weight: f64 },
    /// Every node must be influenceable: `q_j > 0` (unless `allow_isolated`).
    ZeroInWeight { node: usize },
    /// External rates must be strictly positive.
    NonPositiveRate { node: usize, rate: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Violation::NonPositiveWeight { source, target, weight } => {
                write!(f, "non-positive weight {weight} on edge ({source}, {target})")
            }
            Violation::ZeroInWeight { node } => write!(f, "q_j = 0 at node {node}"),
            Violation::NonPositiveRate { node, rate } => {
                write!(f, "non-positive external rate {rate} at node {node}")
            }
        }
    }
}

/// Min/max summary of the per-node rates, with homogeneity flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneityCheck {
    pub is_p_homogeneous: bool,
    pub is_q_homogeneous: bool,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub tolerance: f64,
}

/// Circle orientation for [`Family::Circle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sided {
    /// Each node is influenced by its left neighbour with weight `q`.
    One,
    /// Each node is influenced by both neighbours with weight `q/2`.
    Two,
}

/// The named network families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// All off-diagonal edges with weight `q/(M-1)`.
    Complete { m: usize },
    Circle { m: usize, sided: Sided },
    /// `dim`-dimensional Cartesian torus with `side^dim` nodes; each node is
    /// influenced by its `2*dim` nearest neighbours with weight `q/(2*dim)`.
    Grid { dim: usize, side: usize },
    /// `m/2` disjoint two-node components with mutual weight `q`.
    Pairs { m: usize },
    /// Undirected `G(m, mean_degree/m)` skeleton, incoming weights `q/indegree`.
    ErdosRenyi { m: usize, mean_degree: f64 },
    /// Preferential-attachment skeleton, incoming weights `q/indegree`.
    ScaleFree { m: usize, m_attach: usize },
    /// Ring lattice with rewiring, incoming weights `q/indegree`.
    SmallWorld { m: usize, k: usize, rewire_prob: f64 },
}

/// A weighted directed influence network, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    node_count: usize,
    external_rates: Vec<f64>,
    /// Per target node: `(source, weight)` sorted by source.
    incoming: Vec<Vec<(usize, f64)>>,
    metadata: String,
}

impl NetworkSpec {
    /// Builds a network from an edge list `(source, target, weight)`.
    ///
    /// Structural junk (out-of-range ids, duplicate pairs, non-finite
    /// numbers) is rejected here; model assumptions (no self-loops,
    /// positive weights, `q_j > 0`) are reported by [`validate`] instead so
    /// that deliberately broken instances can be constructed in tests.
    ///
    /// [`validate`]: NetworkSpec::validate
    pub fn new(
        node_count: usize,
        external_rates: Vec<f64>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
        metadata: impl Into<String>,
    ) -> Result<Self, NetworkError> {
        if node_count == 0 {
            return Err(NetworkError::NoNodes);
        }
        if external_rates.len() != node_count {
            return Err(NetworkError::RateLenMismatch {
                got: external_rates.len(),
                expected: node_count,
            });
        }
        if let Some(node) = external_rates.iter().position(|r| !r.is_finite()) {
            return Err(NetworkError::NonFiniteRate { node });
        }
        let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); node_count];
        for (source, target, weight) in edges {
            if source >= node_count || target >= node_count {
                return Err(NetworkError::IndexOutOfRange { src: source, dst: target, m: node_count });
            }
            if !weight.is_finite() {
                return Err(NetworkError::NonFiniteWeight { src: source, dst: target });
            }
            if incoming[target].iter().any(|&(k, _)| k == source) {
                return Err(NetworkError::DuplicateEdge { src: source, dst: target });
            }
            incoming[target].push((source, weight));
        }
        for list in &mut incoming {
            list.sort_unstable_by_key(|&(k, _)| k);
        }
        Ok(Self { node_count, external_rates, incoming, metadata: metadata.into() })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn external_rates(&self) -> &[f64] {
        &self.external_rates
    }

    pub fn metadata(&self) -> &str {
        &self.metadata
    }

    /// Incoming `(source, weight)` list of node `j`, sorted by source.
    pub fn incoming(&self, j: usize) -> &[(usize, f64)] {
        &self.incoming[j]
    }

    pub fn edge_count(&self) -> usize {
        self.incoming.iter().map(Vec::len).sum()
    }

    /// All edges as `(source, target, weight)`, ordered by target then source.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.incoming
            .iter()
            .enumerate()
            .flat_map(|(j, list)| list.iter().map(move |&(k, w)| (k, j, w)))
    }

    /// Maximal rate of internal influence on node `j`: `q_j = sum_k q_{k,j}`.
    pub fn in_weight(&self, j: usize) -> Result<f64, NetworkError> {
        if j >= self.node_count {
            return Err(NetworkError::InvalidNode { node: j, m: self.node_count });
        }
        Ok(self.incoming[j].iter().map(|&(_, w)| w).sum())
    }

    /// Checks the model assumptions and returns one violation per failure.
    /// With `allow_isolated` the `q_j > 0` requirement is waived.
    pub fn validate(&self, allow_isolated: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        for (node, &rate) in self.external_rates.iter().enumerate() {
            if rate <= 0.0 {
                out.push(Violation::NonPositiveRate { node, rate });
            }
        }
        for (target, list) in self.incoming.iter().enumerate() {
            for &(source, weight) in list {
                if source == target {
                    out.push(Violation::SelfLoop { node: target });
                } else if weight <= 0.0 {
                    out.push(Violation::NonPositiveWeight { source, target, weight });
                }
            }
        }
        if !allow_isolated {
            for j in 0..self.node_count {
                if self.incoming[j].iter().map(|&(_, w)| w).sum::<f64>() <= 0.0 {
                    out.push(Violation::ZeroInWeight { node: j });
                }
            }
        }
        out
    }

    /// Reports min/max of `{p_j}` and `{q_j}` with homogeneity flags at the
    /// given absolute tolerance.
    pub fn check_homogeneity(&self, tolerance: f64) -> HomogeneityCheck {
        let mut p_min = f64::INFINITY;
        let mut p_max = f64::NEG_INFINITY;
        for &p in &self.external_rates {
            p_min = p_min.min(p);
            p_max = p_max.max(p);
        }
        let mut q_min = f64::INFINITY;
        let mut q_max = f64::NEG_INFINITY;
        for j in 0..self.node_count {
            let q: f64 = self.incoming[j].iter().map(|&(_, w)| w).sum();
            q_min = q_min.min(q);
            q_max = q_max.max(q);
        }
        HomogeneityCheck {
            is_p_homogeneous: p_max - p_min <= tolerance,
            is_q_homogeneous: q_max - q_min <= tolerance,
            p_min,
            p_max,
            q_min,
            q_max,
            tolerance,
        }
    }

    /// Homogeneous parameters `(p, q)` if the network is homogeneous at the
    /// given tolerance.
    pub fn homogeneous_params(&self, tolerance: f64) -> Option<(f64, f64)> {
        let check = self.check_homogeneity(tolerance);
        (check.is_p_homogeneous && check.is_q_homogeneous).then_some((check.p_max, check.q_max))
    }

    /// Rescales to `p_j = p` and `q_{k,j} = q_{k,j} * q / q_j`, preserving
    /// the edge pattern so that every in-weight becomes `q`.
    pub fn homogenize(&self, p: f64, q: f64) -> Result<NetworkSpec, NetworkError> {
        let mut incoming = Vec::with_capacity(self.node_count);
        for j in 0..self.node_count {
            let q_j: f64 = self.incoming[j].iter().map(|&(_, w)| w).sum();
            if q_j <= 0.0 {
                return Err(NetworkError::ZeroInWeight { node: j });
            }
            let scale = q / q_j;
            incoming.push(
                self.incoming[j].iter().map(|&(k, w)| (k, w * scale)).collect::<Vec<_>>(),
            );
        }
        Ok(NetworkSpec {
            node_count: self.node_count,
            external_rates: vec![p; self.node_count],
            incoming,
            metadata: format!("homogenized(p={p},q={q}) {}", self.metadata),
        })
    }
}

/// Merges duplicate `(source, target)` pairs by summing their weights.
fn merge_edges(edges: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (k, j, w) in edges {
        *map.entry((k, j)).or_insert(0.0) += w;
    }
    map.into_iter().map(|((k, j), w)| (k, j, w)).collect()
}

/// Generates a named family. Deterministic given `(family, p, q, seed)`;
/// the structured families ignore the seed. Every generated network is
/// homogeneous with `q_j = q` by construction.
pub fn generate(family: &Family, p: f64, q: f64, seed: u64) -> Result<NetworkSpec, NetworkError> {
    if !(p.is_finite() && p > 0.0) {
        return Err(NetworkError::InvalidParams(format!("p must be positive, got {p}")));
    }
    if !(q.is_finite() && q > 0.0) {
        return Err(NetworkError::InvalidParams(format!("q must be positive, got {q}")));
    }
    match *family {
        Family::Complete { m } => {
            require(m >= 2, "complete requires M >= 2")?;
            let w = q / (m - 1) as f64;
            let mut edges = Vec::with_capacity(m * (m - 1));
            for k in 0..m {
                for j in 0..m {
                    if k != j {
                        edges.push((k, j, w));
                    }
                }
            }
            NetworkSpec::new(m, vec![p; m], edges, format!("complete(M={m},p={p},q={q})"))
        }
        Family::Circle { m, sided } => {
            require(m >= 2, "circle requires M >= 2")?;
            let mut edges = Vec::new();
            for j in 0..m {
                let left = (j + m - 1) % m;
                match sided {
                    Sided::One => edges.push((left, j, q)),
                    Sided::Two => {
                        let right = (j + 1) % m;
                        edges.push((left, j, q / 2.0));
                        edges.push((right, j, q / 2.0));
                    }
                }
            }
            let label = match sided {
                Sided::One => "one",
                Sided::Two => "two",
            };
            NetworkSpec::new(
                m,
                vec![p; m],
                merge_edges(edges),
                format!("circle(M={m},sided={label},p={p},q={q})"),
            )
        }
        Family::Grid { dim, side } => {
            require(dim >= 1, "grid requires D >= 1")?;
            require(side >= 2, "grid requires side >= 2")?;
            let m = side.checked_pow(dim as u32).ok_or_else(|| {
                NetworkError::InvalidParams("grid size overflows".to_string())
            })?;
            let w = q / (2 * dim) as f64;
            let mut edges = Vec::with_capacity(m * 2 * dim);
            let mut strides = vec![1usize; dim];
            for d in 1..dim {
                strides[d] = strides[d - 1] * side;
            }
            for j in 0..m {
                for d in 0..dim {
                    let coord = (j / strides[d]) % side;
                    let base = j - coord * strides[d];
                    let up = base + ((coord + 1) % side) * strides[d];
                    let down = base + ((coord + side - 1) % side) * strides[d];
                    edges.push((up, j, w));
                    edges.push((down, j, w));
                }
            }
            NetworkSpec::new(
                m,
                vec![p; m],
                merge_edges(edges),
                format!("grid(D={dim},side={side},p={p},q={q})"),
            )
        }
        Family::Pairs { m } => {
            require(m >= 2, "pairs requires M >= 2")?;
            require(m % 2 == 0, "pairs requires an even M")?;
            let mut edges = Vec::with_capacity(m);
            for pair in 0..m / 2 {
                let (a, b) = (2 * pair, 2 * pair + 1);
                edges.push((a, b, q));
                edges.push((b, a, q));
            }
            NetworkSpec::new(m, vec![p; m], edges, format!("pairs(M={m},p={p},q={q})"))
        }
        Family::ErdosRenyi { m, mean_degree } => {
            require(m >= 2, "erdos_renyi requires M >= 2")?;
            let prob = mean_degree / m as f64;
            require(
                (0.0..=1.0).contains(&prob) && mean_degree > 0.0,
                "erdos_renyi requires 0 < lambda <= M",
            )?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut adj = vec![Vec::<usize>::new(); m];
            for i in 0..m {
                for j in (i + 1)..m {
                    if rng.random::<f64>() < prob {
                        adj[i].push(j);
                        adj[j].push(i);
                    }
                }
            }
            // Redraw the edges of isolated nodes so that q_j > 0 holds.
            for v in 0..m {
                let mut attempts = 0;
                while adj[v].is_empty() {
                    attempts += 1;
                    if attempts > REDRAW_ATTEMPTS {
                        return Err(NetworkError::GeneratorFailed(format!(
                            "node {v} still isolated after {REDRAW_ATTEMPTS} redraws"
                        )));
                    }
                    for u in 0..m {
                        if u != v && rng.random::<f64>() < prob {
                            adj[v].push(u);
                            adj[u].push(v);
                        }
                    }
                }
            }
            let net = skeleton_to_network(&adj, p, q)?;
            Ok(with_metadata(net, format!("erdos_renyi(M={m},lambda={mean_degree},p={p},q={q},seed={seed})")))
        }
        Family::ScaleFree { m, m_attach } => {
            require(m_attach >= 1, "scale_free requires m_attach >= 1")?;
            require(m > m_attach, "scale_free requires M > m_attach")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut adj = vec![Vec::<usize>::new(); m];
            // endpoint multiset for preferential attachment
            let mut endpoints: Vec<usize> = Vec::new();
            let core = m_attach + 1;
            for i in 0..core {
                for j in (i + 1)..core {
                    adj[i].push(j);
                    adj[j].push(i);
                    endpoints.push(i);
                    endpoints.push(j);
                }
            }
            for v in core..m {
                let mut targets = Vec::with_capacity(m_attach);
                while targets.len() < m_attach {
                    let pick = endpoints[rng.random_range(0..endpoints.len())];
                    if !targets.contains(&pick) {
                        targets.push(pick);
                    }
                }
                for &u in &targets {
                    adj[v].push(u);
                    adj[u].push(v);
                    endpoints.push(v);
                    endpoints.push(u);
                }
            }
            let net = skeleton_to_network(&adj, p, q)?;
            Ok(with_metadata(net, format!("scale_free(M={m},m_attach={m_attach},p={p},q={q},seed={seed})")))
        }
        Family::SmallWorld { m, k, rewire_prob } => {
            require(k >= 2 && k % 2 == 0, "small_world requires an even k >= 2")?;
            require(k < m, "small_world requires k < M")?;
            require((0.0..=1.0).contains(&rewire_prob), "rewire probability must be in [0, 1]")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
            let connect = |adj: &mut Vec<Vec<usize>>, a: usize, b: usize| {
                adj[a].push(b);
                adj[b].push(a);
            };
            for i in 0..m {
                for step in 1..=k / 2 {
                    connect(&mut adj, i, (i + step) % m);
                }
            }
            for i in 0..m {
                for step in 1..=k / 2 {
                    if rng.random::<f64>() >= rewire_prob {
                        continue;
                    }
                    let old = (i + step) % m;
                    // draw a fresh endpoint avoiding self and duplicates
                    let mut fresh = None;
                    for _ in 0..REDRAW_ATTEMPTS {
                        let u = rng.random_range(0..m);
                        if u != i && u != old && !adj[i].contains(&u) {
                            fresh = Some(u);
                            break;
                        }
                    }
                    let Some(u) = fresh else { continue };
                    adj[i].retain(|&x| x != old);
                    adj[old].retain(|&x| x != i);
                    connect(&mut adj, i, u);
                }
            }
            let net = skeleton_to_network(&adj, p, q)?;
            Ok(with_metadata(net, format!("small_world(M={m},k={k},rewire_prob={rewire_prob},p={p},q={q},seed={seed})")))
        }
    }
}

fn require(cond: bool, msg: &str) -> Result<(), NetworkError> {
    if cond {
        Ok(())
    } else {
        Err(NetworkError::InvalidParams(msg.to_string()))
    }
}

fn with_metadata(net: NetworkSpec, metadata: String) -> NetworkSpec {
    NetworkSpec { metadata, ..net }
}

/// Expands an undirected skeleton into directed edges with each node's
/// incoming weights set to `q/indegree`.
fn skeleton_to_network(adj: &[Vec<usize>], p: f64, q: f64) -> Result<NetworkSpec, NetworkError> {
    let m = adj.len();
    let mut edges = Vec::new();
    for (j, neighbours) in adj.iter().enumerate() {
        if neighbours.is_empty() {
            return Err(NetworkError::GeneratorFailed(format!("node {j} has no neighbours")));
        }
        let w = q / neighbours.len() as f64;
        for &k in neighbours {
            edges.push((k, j, w));
        }
    }
    NetworkSpec::new(m, vec![p; m], merge_edges(edges), "skeleton")
}
