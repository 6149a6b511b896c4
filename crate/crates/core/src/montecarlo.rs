//! Event-driven stochastic simulation of the Bass model.
//!
//! Trajectories are sampled exactly in continuous time by the direct
//! Gillespie method: the total hazard over nonadopters gives the waiting
//! time, a Fenwick tree over per-node hazards picks the adopter in
//! `O(log M)`, and the adopter's out-neighbourhood gets its hazards bumped.
//!
//! Ensembles are reproducible regardless of thread count: trajectory `i`
//! draws from a ChaCha8 generator keyed by `mix_seed(base_seed, i)`, and
//! aggregation uses integer counts, whose addition is exactly associative.

use crate::analytic::BassParams;
use crate::curve::{CurveSource, CurveView};
use crate::network::{NetworkSpec, Violation};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum McError {
    #[error("network fails validation: {0:?}")]
    InvalidNetwork(Vec<Violation>),
    #[error("t_max must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("ensemble requires at least 2 runs, got {0}")]
    TooFewRuns(usize),
    #[error("time grid must be strictly increasing and non-negative")]
    BadGrid,
}

/// Per-node adoption times of one realisation; `None` marks a node still
/// unadopted at the horizon (censored, not dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub adoption_times: Vec<Option<f64>>,
}

impl TrajectoryRecord {
    /// Number of nodes adopted by time `t`.
    pub fn adopted_by(&self, t: f64) -> usize {
        self.adoption_times.iter().filter(|x| matches!(x, Some(v) if *v <= t)).count()
    }
}

/// Monte Carlo estimate of the adoption curve with standard errors.
#[derive(Debug, Clone)]
pub struct EnsembleEstimate {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    /// Standard error of `f` from the across-trajectory variance of the
    /// per-trajectory adoption fraction.
    pub se: Vec<f64>,
    /// `per_node[node][time]`, when requested.
    pub per_node: Option<Vec<Vec<f64>>>,
    pub runs: usize,
    pub node_count: usize,
    pub homogeneous_params: Option<BassParams>,
}

impl EnsembleEstimate {
    pub fn view(&self) -> CurveView<'_> {
        CurveView {
            t: &self.t,
            f: &self.f,
            se: Some(&self.se),
            per_node: self.per_node.as_deref(),
            params: self.homogeneous_params,
            runs: Some(self.runs),
            source: CurveSource::MonteCarlo,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EnsembleOptions {
    /// Also estimate every per-node adoption probability.
    pub per_node: bool,
}

/// SplitMix64-style mix of a base seed and a trajectory index. Fixed for
/// reproducibility: published curves depend on these exact constants.
pub fn mix_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fenwick tree over per-node hazards: prefix sums, point updates, and
/// inverse-CDF selection, all `O(log n)`.
struct HazardTree {
    tree: Vec<f64>,
    n: usize,
    top_bit: usize,
}

impl HazardTree {
    fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut tree = vec![0.0; n + 1];
        tree[1..].copy_from_slice(values);
        for i in 1..=n {
            let j = i + (i & i.wrapping_neg());
            if j <= n {
                tree[j] += tree[i];
            }
        }
        let mut top_bit = 1;
        while top_bit * 2 <= n {
            top_bit *= 2;
        }
        Self { tree, n, top_bit }
    }

    fn add(&mut self, index: usize, delta: f64) {
        let mut i = index + 1;
        while i <= self.n {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut i = self.n;
        let mut sum = 0.0;
        while i > 0 {
            sum += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        sum
    }

    /// Index of the item whose cumulative hazard interval contains `target`.
    fn select(&self, target: f64) -> usize {
        let mut pos = 0;
        let mut rem = target;
        let mut bit = self.top_bit;
        while bit != 0 {
            let next = pos + bit;
            if next <= self.n && self.tree[next] <= rem {
                pos = next;
                rem -= self.tree[next];
            }
            bit >>= 1;
        }
        pos.min(self.n - 1)
    }
}

/// Outgoing adjacency derived once per network; shared read-only across
/// trajectories.
struct Outgoing {
    edges: Vec<Vec<(usize, f64)>>,
}

impl Outgoing {
    fn build(net: &NetworkSpec) -> Self {
        let mut edges = vec![Vec::new(); net.node_count()];
        for (k, j, w) in net.edges() {
            edges[k].push((j, w));
        }
        Self { edges }
    }
}

struct SimOutput {
    record: TrajectoryRecord,
    /// Event times in increasing order.
    ordered: Vec<f64>,
}

fn simulate_inner(out: &Outgoing, rates: &[f64], t_max: f64, seed: u64) -> SimOutput {
    let m = rates.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hazard = rates.to_vec();
    let mut tree = HazardTree::new(&hazard);
    let mut adopted = vec![false; m];
    let mut adoption_times = vec![None; m];
    let mut ordered = Vec::new();
    let mut remaining = m;
    let mut t = 0.0_f64;
    while remaining > 0 {
        let total = tree.total();
        debug_assert!(total > 0.0, "positive rates guarantee a positive total hazard");
        let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
        t += wait;
        if t > t_max {
            break;
        }
        let target: f64 = rng.random::<f64>() * total;
        let mut j = tree.select(target);
        while adopted[j] {
            // float boundary landed on a removed leaf
            j = (j + 1) % m;
        }
        debug_assert!(ordered.last().is_none_or(|&last| t >= last));
        adopted[j] = true;
        adoption_times[j] = Some(t);
        ordered.push(t);
        remaining -= 1;
        tree.add(j, -hazard[j]);
        hazard[j] = 0.0;
        for &(k, w) in &out.edges[j] {
            if !adopted[k] {
                tree.add(k, w);
                hazard[k] += w;
            }
        }
    }
    SimOutput { record: TrajectoryRecord { seed, adoption_times }, ordered }
}

fn validated(net: &NetworkSpec) -> Result<(), McError> {
    let violations = net.validate(true);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(McError::InvalidNetwork(violations))
    }
}

/// Samples one exact trajectory of the continuous-time process on
/// `[0, t_max]`. Deterministic given the seed.
pub fn simulate_trajectory(
    net: &NetworkSpec,
    t_max: f64,
    seed: u64,
) -> Result<TrajectoryRecord, McError> {
    validated(net)?;
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(McError::InvalidHorizon(t_max));
    }
    let out = Outgoing::build(net);
    Ok(simulate_inner(&out, net.external_rates(), t_max, seed).record)
}

/// Integer accumulators; addition order cannot change the result.
struct Accum {
    count_sum: Vec<u64>,
    count_sq_sum: Vec<u128>,
    /// Suffix-encoded per-node adoption counts (difference form).
    node_diff: Option<Vec<Vec<u64>>>,
}

impl Accum {
    fn zero(grid_len: usize, m: usize, per_node: bool) -> Self {
        Self {
            count_sum: vec![0; grid_len],
            count_sq_sum: vec![0; grid_len],
            node_diff: per_node.then(|| vec![vec![0; grid_len]; m]),
        }
    }

    fn absorb(&mut self, sim: &SimOutput, t_grid: &[f64]) {
        let mut ev = 0usize;
        for (ti, &tg) in t_grid.iter().enumerate() {
            while ev < sim.ordered.len() && sim.ordered[ev] <= tg {
                ev += 1;
            }
            let count = ev as u64;
            self.count_sum[ti] += count;
            self.count_sq_sum[ti] += u128::from(count) * u128::from(count);
        }
        if let Some(diff) = &mut self.node_diff {
            for (j, time) in sim.record.adoption_times.iter().enumerate() {
                if let Some(tj) = time {
                    let idx = t_grid.partition_point(|&g| g < *tj);
                    if idx < t_grid.len() {
                        diff[j][idx] += 1;
                    }
                }
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.count_sum.iter_mut().zip(&other.count_sum) {
            *a += b;
        }
        for (a, b) in self.count_sq_sum.iter_mut().zip(&other.count_sq_sum) {
            *a += b;
        }
        match (&mut self.node_diff, other.node_diff) {
            (Some(mine), Some(theirs)) => {
                for (row_a, row_b) in mine.iter_mut().zip(theirs) {
                    for (a, b) in row_a.iter_mut().zip(row_b) {
                        *a += b;
                    }
                }
            }
            (None, None) => {}
            _ => unreachable!("per-node setting is uniform across accumulators"),
        }
        self
    }
}

/// Runs `runs` independent trajectories (seed `mix_seed(base_seed, i)` for
/// trajectory `i`) and estimates the adoption curve on `t_grid`. The result
/// is identical for any thread count.
pub fn estimate_ensemble(
    net: &NetworkSpec,
    t_grid: &[f64],
    runs: usize,
    base_seed: u64,
    options: &EnsembleOptions,
) -> Result<EnsembleEstimate, McError> {
    validated(net)?;
    if runs < 2 {
        return Err(McError::TooFewRuns(runs));
    }
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(McError::BadGrid);
    }
    let t_max = *t_grid.last().expect("non-empty grid");
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(McError::InvalidHorizon(t_max));
    }

    let m = net.node_count();
    let out = Outgoing::build(net);
    let rates = net.external_rates();
    let grid_len = t_grid.len();
    let per_node = options.per_node;

    let accum = (0..runs)
        .into_par_iter()
        .fold(
            || Accum::zero(grid_len, m, per_node),
            |mut acc, i| {
                let sim = simulate_inner(&out, rates, t_max, mix_seed(base_seed, i as u64));
                acc.absorb(&sim, t_grid);
                acc
            },
        )
        .reduce(|| Accum::zero(grid_len, m, per_node), Accum::merge);

    let r = runs as f64;
    let m_f = m as f64;
    let mut f = Vec::with_capacity(grid_len);
    let mut se = Vec::with_capacity(grid_len);
    for ti in 0..grid_len {
        let s1 = accum.count_sum[ti];
        let s2 = accum.count_sq_sum[ti];
        f.push(s1 as f64 / (r * m_f));
        // across-trajectory sample variance of the adoption fraction
        let numerator = (runs as u128 * s2) as f64 - (s1 as f64) * (s1 as f64);
        let variance = (numerator / (r * (r - 1.0))).max(0.0) / (m_f * m_f);
        se.push((variance / r).sqrt());
    }

    let per_node_curves = accum.node_diff.map(|diff| {
        diff.into_iter()
            .map(|row| {
                let mut running = 0u64;
                row.into_iter()
                    .map(|d| {
                        running += d;
                        running as f64 / r
                    })
                    .collect()
            })
            .collect()
    });

    let homogeneous_params =
        net.homogeneous_params(1e-12).map(|(p, q)| BassParams::new(p, q));
    Ok(EnsembleEstimate {
        t: t_grid.to_vec(),
        f,
        se,
        per_node: per_node_curves,
        runs,
        node_count: m,
        homogeneous_params,
    })
}
