//! Exact transient solutions of the stochastic Bass model.
//!
//! [`solve_master`] integrates the Kolmogorov forward equations over all
//! `2^M` adopter subsets (bit `j` set means node `j` has adopted), which is
//! exact for any network up to the node cap. [`solve_complete`] exploits
//! exchangeability on homogeneous complete networks: the adopter count is a
//! pure birth chain on `M+1` states, so arbitrarily large `M` stays cheap.

use crate::analytic::BassParams;
use crate::curve::{CurveSource, CurveView};
use crate::network::{NetworkSpec, Violation};
use crate::ode::{integrate_to_grid_with, OdeError, OdeOptions};
use thiserror::Error;

/// Exact state spaces beyond `2^20` are not desk-scale.
pub const MASTER_NODE_CAP: usize = 20;

/// Tolerance at which solver output is considered homogeneous, used to
/// attach `(p, q)` metadata to curves.
const HOMOGENEITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("master solver caps at M <= {cap}, got M = {m}")]
    NodeCapExceeded { m: usize, cap: usize },
    #[error("time grid must start at 0")]
    GridMustStartAtZero,
    #[error("time grid must be strictly increasing")]
    GridNotMonotone,
    #[error("time grid is empty")]
    EmptyGrid,
    #[error("network fails validation: {0:?}")]
    InvalidNetwork(Vec<Violation>),
    #[error("pair sandwich requires homogeneous external rates, got p in [{p_min}, {p_max}]")]
    InhomogeneousExternalRates { p_min: f64, p_max: f64 },
    #[error("probability mass not conserved: |sum - 1| = {drift:e} at t = {t}")]
    ConservationViolated { t: f64, drift: f64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("invalid node count {0}")]
    InvalidNodeCount(usize),
}

/// Probabilities over adopter-subset bitmasks at one instant.
#[derive(Debug, Clone)]
pub struct StateDistribution {
    pub time: f64,
    /// Dense vector of length `2^M`; index bit `j` set means `j` adopted.
    pub probabilities: Vec<f64>,
}

impl StateDistribution {
    /// Clamps round-off negatives (at most `-1e-12`) to zero and returns the
    /// most negative entry seen.
    pub fn clamp_negatives(&mut self) -> f64 {
        let mut worst = 0.0_f64;
        for p in &mut self.probabilities {
            if *p < 0.0 {
                worst = worst.min(*p);
                *p = 0.0;
            }
        }
        worst
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// Joint nonadoption probabilities `[S_i, S_j](t)` for selected pairs.
#[derive(Debug, Clone)]
pub struct PairNonadoption {
    pub pairs: Vec<(usize, usize)>,
    /// `values[pair][time]`.
    pub values: Vec<Vec<f64>>,
}

/// Which pair probabilities [`solve_master`] should record.
#[derive(Debug, Clone, Default)]
pub enum PairSelection {
    #[default]
    None,
    All,
    Pairs(Vec<(usize, usize)>),
}

#[derive(Debug, Clone)]
pub struct MasterOptions {
    pub rtol: f64,
    pub atol: f64,
    pub pairs: PairSelection,
}

impl Default for MasterOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10, pairs: PairSelection::None }
    }
}

/// Exact adoption curve: aggregate `f(t)`, per-node marginals, and optional
/// pair nonadoption probabilities.
#[derive(Debug, Clone)]
pub struct ExactCurve {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    /// `per_node[node][time]`; `None` when node symmetry makes it redundant.
    pub per_node: Option<Vec<Vec<f64>>>,
    pub pair_nonadoption: Option<PairNonadoption>,
    pub node_count: usize,
    /// `(p, q)` when the source network is homogeneous.
    pub homogeneous_params: Option<BassParams>,
}

impl ExactCurve {
    pub fn view(&self) -> CurveView<'_> {
        CurveView {
            t: &self.t,
            f: &self.f,
            se: None,
            per_node: self.per_node.as_deref(),
            params: self.homogeneous_params,
            runs: None,
            source: CurveSource::Exact,
        }
    }
}

fn check_grid(t_grid: &[f64]) -> Result<(), ExactError> {
    if t_grid.is_empty() {
        return Err(ExactError::EmptyGrid);
    }
    if t_grid[0] != 0.0 {
        return Err(ExactError::GridMustStartAtZero);
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ExactError::GridNotMonotone);
    }
    Ok(())
}

/// Integrates the full master equation from the all-nonadopter state.
///
/// Transitions add nonadopter `j` to subset `S` at rate
/// `lambda_j(S) = p_j + sum_{k in S} q_{k,j}`.
pub fn solve_master(
    net: &NetworkSpec,
    t_grid: &[f64],
    options: &MasterOptions,
) -> Result<ExactCurve, ExactError> {
    let m = net.node_count();
    if m > MASTER_NODE_CAP {
        return Err(ExactError::NodeCapExceeded { m, cap: MASTER_NODE_CAP });
    }
    check_grid(t_grid)?;
    let violations = net.validate(true);
    if !violations.is_empty() {
        return Err(ExactError::InvalidNetwork(violations));
    }

    let n_states = 1usize << m;
    let p: Vec<f64> = net.external_rates().to_vec();
    // incoming lists as (source bitmask, weight)
    let incoming: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|j| net.incoming(j).iter().map(|&(k, w)| (1usize << k, w)).collect())
        .collect();

    let pairs: Vec<(usize, usize)> = match &options.pairs {
        PairSelection::None => Vec::new(),
        PairSelection::All => {
            let mut v = Vec::new();
            for i in 0..m {
                for j in (i + 1)..m {
                    v.push((i, j));
                }
            }
            v
        }
        PairSelection::Pairs(list) => list.clone(),
    };

    let mut y0 = vec![0.0; n_states];
    y0[0] = 1.0;

    let mut per_node: Vec<Vec<f64>> = vec![vec![0.0; t_grid.len()]; m];
    let mut f = vec![0.0; t_grid.len()];
    let mut pair_values: Vec<Vec<f64>> = vec![vec![0.0; t_grid.len()]; pairs.len()];
    let mut conservation_failure: Option<(f64, f64)> = None;

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        dy.fill(0.0);
        for (s, &ps) in y.iter().enumerate() {
            if ps == 0.0 {
                continue;
            }
            let mut outflow = 0.0;
            for j in 0..m {
                let bit = 1usize << j;
                if s & bit != 0 {
                    continue;
                }
                let mut lam = p[j];
                for &(mask, w) in &incoming[j] {
                    if s & mask != 0 {
                        lam += w;
                    }
                }
                let flow = lam * ps;
                outflow += flow;
                dy[s | bit] += flow;
            }
            dy[s] -= outflow;
        }
    };

    let ode_opts = OdeOptions { rtol: options.rtol, atol: options.atol, ..OdeOptions::default() };
    // total mass is conserved by the generator; project out summation
    // round-off after every accepted step
    let renormalize = |y: &mut [f64]| {
        let total: f64 = y.iter().sum();
        if (total - 1.0).abs() <= 1e-6 {
            for v in y.iter_mut() {
                *v /= total;
            }
        }
    };
    integrate_to_grid_with(rhs, &y0, t_grid, &ode_opts, renormalize, |ti, t, y| {
        let mut dist = StateDistribution { time: t, probabilities: y.to_vec() };
        dist.clamp_negatives();
        let total = dist.total();
        if (total - 1.0).abs() > 1e-9 && conservation_failure.is_none() {
            conservation_failure = Some((t, (total - 1.0).abs()));
        }
        let probs = &dist.probabilities;
        let mut agg = 0.0;
        for j in 0..m {
            let bit = 1usize << j;
            let mut fj = 0.0;
            for (s, &ps) in probs.iter().enumerate() {
                if s & bit != 0 {
                    fj += ps;
                }
            }
            let fj = fj.clamp(0.0, 1.0);
            per_node[j][ti] = fj;
            agg += fj;
        }
        f[ti] = (agg / m as f64).clamp(0.0, 1.0);
        for (pi, &(a, b)) in pairs.iter().enumerate() {
            let mask = (1usize << a) | (1usize << b);
            let mut joint = 0.0;
            for (s, &ps) in probs.iter().enumerate() {
                if s & mask == 0 {
                    joint += ps;
                }
            }
            pair_values[pi][ti] = joint.clamp(0.0, 1.0);
        }
    })?;

    if let Some((t, drift)) = conservation_failure {
        return Err(ExactError::ConservationViolated { t, drift });
    }

    let homogeneous_params =
        net.homogeneous_params(HOMOGENEITY_TOL).map(|(p, q)| BassParams::new(p, q));
    Ok(ExactCurve {
        t: t_grid.to_vec(),
        f,
        per_node: Some(per_node),
        pair_nonadoption: (!pairs.is_empty())
            .then_some(PairNonadoption { pairs, values: pair_values }),
        node_count: m,
        homogeneous_params,
    })
}

/// Solves the adopter-count birth chain of the homogeneous complete network
/// with `M` nodes: `n -> n+1` at rate `(M-n) (p + q n / (M-1))`.
pub fn solve_complete(
    m: usize,
    params: &BassParams,
    t_grid: &[f64],
) -> Result<ExactCurve, ExactError> {
    if m == 0 {
        return Err(ExactError::InvalidNodeCount(m));
    }
    check_grid(t_grid)?;
    let (p, q) = (params.p(), params.q());
    let rate: Vec<f64> = (0..=m)
        .map(|n| {
            let peers = if m >= 2 { q * n as f64 / (m - 1) as f64 } else { 0.0 };
            (m - n) as f64 * (p + peers)
        })
        .collect();

    let mut y0 = vec![0.0; m + 1];
    y0[0] = 1.0;
    let mut f = vec![0.0; t_grid.len()];
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        for n in 0..=m {
            let inflow = if n > 0 { rate[n - 1] * y[n - 1] } else { 0.0 };
            dy[n] = inflow - rate[n] * y[n];
        }
    };
    let opts = OdeOptions { rtol: 1e-12, atol: 1e-12, ..OdeOptions::default() };
    let renormalize = |y: &mut [f64]| {
        let total: f64 = y.iter().sum();
        if (total - 1.0).abs() <= 1e-6 {
            for v in y.iter_mut() {
                *v /= total;
            }
        }
    };
    integrate_to_grid_with(rhs, &y0, t_grid, &opts, renormalize, |ti, _t, y| {
        let mean: f64 = y.iter().enumerate().map(|(n, &pn)| n as f64 * pn.max(0.0)).sum();
        f[ti] = (mean / m as f64).clamp(0.0, 1.0);
    })?;

    Ok(ExactCurve {
        t: t_grid.to_vec(),
        f,
        per_node: None,
        pair_nonadoption: None,
        node_count: m,
        homogeneous_params: Some(*params),
    })
}

/// Per-time outcome of the sandwich check
/// `[S_i][S_j] <= [S_i,S_j] <= e^{-2pt}` over all node pairs.
#[derive(Debug, Clone)]
pub struct PairSandwichReport {
    pub t: Vec<f64>,
    /// Whether all pairs satisfy both inequalities (with slack) at each time.
    pub ok: Vec<bool>,
    /// Worst `[S_i,S_j] - [S_i][S_j]` per time over pairs.
    pub lower_margin: Vec<f64>,
    /// Worst `e^{-2pt} - [S_i,S_j]` per time over pairs.
    pub upper_margin: Vec<f64>,
    pub worst_lower: f64,
    pub worst_upper: f64,
    pub slack: f64,
}

impl PairSandwichReport {
    pub fn all_ok(&self) -> bool {
        self.ok.iter().all(|&b| b)
    }
}

/// Exact-solves `net` and checks the pair sandwich inequality at every grid
/// time with slack `1e-9`. Requires homogeneous external rates (the
/// `e^{-2pt}` ceiling is stated for a common `p`).
pub fn pair_sandwich_check(
    net: &NetworkSpec,
    t_grid: &[f64],
) -> Result<PairSandwichReport, ExactError> {
    const SLACK: f64 = 1e-9;
    let rates = net.external_rates();
    let p_min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let p_max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if p_max - p_min > HOMOGENEITY_TOL {
        return Err(ExactError::InhomogeneousExternalRates { p_min, p_max });
    }
    let p = p_max;

    let options = MasterOptions { pairs: PairSelection::All, ..MasterOptions::default() };
    let curve = solve_master(net, t_grid, &options)?;
    let per_node = curve.per_node.as_ref().expect("master curve always carries marginals");
    let joint = curve.pair_nonadoption.as_ref();

    let mut ok = vec![true; t_grid.len()];
    let mut lower_margin = vec![f64::INFINITY; t_grid.len()];
    let mut upper_margin = vec![f64::INFINITY; t_grid.len()];
    if let Some(joint) = joint {
        for (pi, &(a, b)) in joint.pairs.iter().enumerate() {
            for (ti, &t) in t_grid.iter().enumerate() {
                let sa = 1.0 - per_node[a][ti];
                let sb = 1.0 - per_node[b][ti];
                let sab = joint.values[pi][ti];
                let ceiling = (-2.0 * p * t).exp();
                let low = sab - sa * sb;
                let high = ceiling - sab;
                lower_margin[ti] = lower_margin[ti].min(low);
                upper_margin[ti] = upper_margin[ti].min(high);
                if low < -SLACK || high < -SLACK {
                    ok[ti] = false;
                }
            }
        }
    } else {
        // single-node network: nothing to check
        lower_margin.fill(0.0);
        upper_margin.fill(0.0);
    }
    let worst_lower = lower_margin.iter().cloned().fold(f64::INFINITY, f64::min);
    let worst_upper = upper_margin.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PairSandwichReport {
        t: t_grid.to_vec(),
        ok,
        lower_margin,
        upper_margin,
        worst_lower,
        worst_upper,
        slack: SLACK,
    })
}

/// Evenly spaced grid `0, span/intervals, ..., span`.
pub fn linspace(span: f64, intervals: usize) -> Vec<f64> {
    assert!(span > 0.0 && intervals > 0);
    (0..=intervals).map(|i| span * i as f64 / intervals as f64).collect()
}
