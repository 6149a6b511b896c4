//! Verification of the universal adoption bounds.
//!
//! For a network homogeneous in `{p_j}` and `{q_j}`, every adoption
//! probability and the aggregate level sit between the two-node curve and
//! the Bass curve. This module checks curves against those bounds, measures
//! strictness margins, quantifies the gap between the bounds through
//! half-lives, and hosts the fixed-size-supremum experiment harness.

use crate::analytic::{
    f_bass, f_two_node, half_life, half_life_ratio_asymptotic, AnalyticError, BassParams,
};
use crate::curve::{CurveSource, CurveView};
use crate::exact::{linspace, solve_complete, solve_master, ExactError, MasterOptions};
use crate::montecarlo::mix_seed;
use crate::network::{NetworkError, NetworkSpec};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Slack for exact curves; Monte Carlo curves use `3 * se` instead.
pub const EXACT_SLACK: f64 = 1e-9;

/// Standard-error multiplier for Monte Carlo slack.
pub const SE_MULTIPLIER: f64 = 3.0;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("curve metadata params {found:?} do not match the given (p, q) = {given:?}")]
    ParamMismatch { found: Option<(f64, f64)>, given: (f64, f64) },
    #[error("Monte Carlo curve carries no standard errors")]
    MissingSe,
    #[error("probe time {t_probe} outside the curve grid [{t_min}, {t_max}]")]
    ProbeOutsideGrid { t_probe: f64, t_min: f64, t_max: f64 },
    #[error("strictness margins require an exact curve")]
    NotExact,
    #[error("curve grid is empty")]
    EmptyCurve,
    #[error("invalid experiment parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    HalfLife(#[from] AnalyticError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Slack applied before flagging a violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlackPolicy {
    /// Absolute slack (exact curves).
    Fixed(f64),
    /// Multiple of the per-point standard error (Monte Carlo curves).
    SeMultiple(f64),
}

/// One grid point of the aggregate-level check.
#[derive(Debug, Clone, Copy)]
pub struct BoundsPoint {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    pub observed: f64,
    pub margin_low: f64,
    pub margin_high: f64,
    pub violation_low: bool,
    pub violation_high: bool,
}

/// Outcome of a bound check: per-point rows for the aggregate level plus a
/// summary covering the per-node probabilities when they were available.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub points: Vec<BoundsPoint>,
    /// Flagged aggregate points.
    pub violation_count: usize,
    /// Per-node checks performed / flagged.
    pub node_checked: usize,
    pub node_violations: usize,
    /// Most negative margins over all checks (aggregate and per-node).
    pub worst_margin_low: f64,
    pub worst_margin_high: f64,
    pub source: CurveSource,
    pub slack: SlackPolicy,
}

impl BoundsReport {
    pub fn has_violations(&self) -> bool {
        self.violation_count > 0 || self.node_violations > 0
    }

    /// Fraction of aggregate grid points flagged.
    pub fn violation_fraction(&self) -> f64 {
        self.violation_count as f64 / self.points.len() as f64
    }
}

/// Half-lives of the two bound curves and their ratio against the
/// large-`q/p` asymptote.
#[derive(Debug, Clone, Copy)]
pub struct GapMetrics {
    pub lambda: f64,
    /// Half-life of the lower bound (two-node curve).
    pub t_half_lower: f64,
    /// Half-life of the upper bound (Bass curve).
    pub t_half_upper: f64,
    /// `t_half_upper / t_half_lower`, in `(0, 1]`.
    pub ratio: f64,
    /// Asymptotic estimate, defined for `lambda > 1`.
    pub asymptotic: Option<f64>,
    pub relative_deviation: Option<f64>,
}

fn slack_for(policy: SlackPolicy, se: Option<&[f64]>, ti: usize) -> f64 {
    match policy {
        SlackPolicy::Fixed(s) => s,
        // floored at the exact slack: a zero sample variance (all runs
        // saturated) must not flag sub-rounding excursions past the bound
        SlackPolicy::SeMultiple(k) => {
            (k * se.expect("se presence checked upfront")[ti]).max(EXACT_SLACK)
        }
    }
}

fn check_curve(
    curve: &CurveView<'_>,
    lower_params: &BassParams,
    upper_params: &BassParams,
) -> Result<BoundsReport, BoundsError> {
    if curve.t.is_empty() {
        return Err(BoundsError::EmptyCurve);
    }
    let policy = match curve.source {
        CurveSource::MonteCarlo => {
            if curve.se.is_none() {
                return Err(BoundsError::MissingSe);
            }
            SlackPolicy::SeMultiple(SE_MULTIPLIER)
        }
        _ => SlackPolicy::Fixed(EXACT_SLACK),
    };

    let mut points = Vec::with_capacity(curve.t.len());
    let mut violation_count = 0;
    let mut worst_low = f64::INFINITY;
    let mut worst_high = f64::INFINITY;
    for (ti, (&t, &observed)) in curve.t.iter().zip(curve.f).enumerate() {
        let lower = f_two_node(t, lower_params);
        let upper = f_bass(t, upper_params);
        let margin_low = observed - lower;
        let margin_high = upper - observed;
        let slack = slack_for(policy, curve.se, ti);
        let violation_low = margin_low < -slack;
        let violation_high = margin_high < -slack;
        if violation_low || violation_high {
            violation_count += 1;
        }
        worst_low = worst_low.min(margin_low);
        worst_high = worst_high.min(margin_high);
        points.push(BoundsPoint {
            t,
            lower,
            upper,
            observed,
            margin_low,
            margin_high,
            violation_low,
            violation_high,
        });
    }

    let mut node_checked = 0;
    let mut node_violations = 0;
    if let Some(per_node) = curve.per_node {
        for row in per_node {
            for (&t, &fj) in curve.t.iter().zip(row) {
                let lower = f_two_node(t, lower_params);
                let upper = f_bass(t, upper_params);
                let slack = match policy {
                    SlackPolicy::Fixed(s) => s,
                    SlackPolicy::SeMultiple(k) => {
                        // per-node estimates are plain binomial means
                        let runs = curve.runs.ok_or(BoundsError::MissingSe)? as f64;
                        (k * (fj * (1.0 - fj) / runs).sqrt()).max(EXACT_SLACK)
                    }
                };
                let margin_low = fj - lower;
                let margin_high = upper - fj;
                node_checked += 1;
                if margin_low < -slack || margin_high < -slack {
                    node_violations += 1;
                }
                worst_low = worst_low.min(margin_low);
                worst_high = worst_high.min(margin_high);
            }
        }
    }

    Ok(BoundsReport {
        points,
        violation_count,
        node_checked,
        node_violations,
        worst_margin_low: worst_low,
        worst_margin_high: worst_high,
        source: curve.source,
        slack: policy,
    })
}

/// Checks `f_two_node <= f <= f_bass` (and the same for every available
/// `f_j`) at the curve's homogeneous `(p, q)`, which must match `params`.
pub fn verify_bounds(
    curve: &CurveView<'_>,
    params: &BassParams,
) -> Result<BoundsReport, BoundsError> {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    match curve.params {
        Some(found) if close(found.p(), params.p()) && close(found.q(), params.q()) => {}
        other => {
            return Err(BoundsError::ParamMismatch {
                found: other.map(|b| (b.p(), b.q())),
                given: (params.p(), params.q()),
            })
        }
    }
    check_curve(curve, params, params)
}

/// Bound check for networks inhomogeneous in `{p_j}` or `{q_j}`: the upper
/// bound uses `(max p_j, max q_j)`, the lower bound `(min p_j, min q_j)`.
/// Validity only; strictness is not asserted here.
pub fn verify_bounds_inhomogeneous(
    curve: &CurveView<'_>,
    net: &NetworkSpec,
) -> Result<BoundsReport, BoundsError> {
    let check = net.check_homogeneity(0.0);
    let lower = BassParams::new(check.p_min, check.q_min);
    let upper = BassParams::new(check.p_max, check.q_max);
    check_curve(curve, &lower, &upper)
}

/// Margins `(f - lower, upper - f)` at `t_probe`, linearly interpolated on
/// the curve grid. Exact curves only; no extrapolation.
pub fn strictness_margin(
    curve: &CurveView<'_>,
    params: &BassParams,
    t_probe: f64,
) -> Result<(f64, f64), BoundsError> {
    if curve.source != CurveSource::Exact {
        return Err(BoundsError::NotExact);
    }
    if curve.t.is_empty() {
        return Err(BoundsError::EmptyCurve);
    }
    let (t_min, t_max) = (curve.t[0], curve.t[curve.t.len() - 1]);
    if !(t_min..=t_max).contains(&t_probe) {
        return Err(BoundsError::ProbeOutsideGrid { t_probe, t_min, t_max });
    }
    let idx = curve.t.partition_point(|&g| g < t_probe);
    let observed = if curve.t[idx] == t_probe {
        curve.f[idx]
    } else {
        let (t0, t1) = (curve.t[idx - 1], curve.t[idx]);
        let w = (t_probe - t0) / (t1 - t0);
        curve.f[idx - 1] * (1.0 - w) + curve.f[idx] * w
    };
    Ok((observed - f_two_node(t_probe, params), f_bass(t_probe, params) - observed))
}

/// Half-lives of both analytic bounds and the asymptotic comparison.
pub fn gap_metrics(params: &BassParams) -> Result<GapMetrics, BoundsError> {
    assert!(params.q() > 0.0, "gap metrics need q > 0");
    let hint = 1.0 / (params.p() + params.q());
    let t_half_upper = half_life(|t| f_bass(t, params), hint)?.t_half;
    let t_half_lower = half_life(|t| f_two_node(t, params), hint)?.t_half;
    let ratio = t_half_upper / t_half_lower;
    let lambda = params.lambda();
    let asymptotic = (lambda > 1.0).then(|| half_life_ratio_asymptotic(lambda));
    let relative_deviation = asymptotic.map(|a| (ratio - a).abs() / a);
    Ok(GapMetrics { lambda, t_half_lower, t_half_upper, ratio, asymptotic, relative_deviation })
}

/// One sampled network of the fixed-size-supremum experiment.
#[derive(Debug, Clone)]
pub struct ConjectureRow {
    pub sample: usize,
    pub label: String,
    pub edge_count: usize,
    /// `max_t (f_sample(t) - f_complete(t; M))` over the grid.
    pub max_excess: f64,
    /// Excess beyond the numerical threshold; a candidate only, never a
    /// refutation claim.
    pub counterexample: bool,
}

/// Result table: does any homogeneous network of size `M` beat the complete
/// network's adoption level?
#[derive(Debug, Clone)]
pub struct ConjectureTable {
    pub m: usize,
    pub rows: Vec<ConjectureRow>,
    pub threshold: f64,
}

impl ConjectureTable {
    pub fn max_excess(&self) -> f64 {
        self.rows.iter().map(|r| r.max_excess).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn counterexample_candidates(&self) -> usize {
        self.rows.iter().filter(|r| r.counterexample).count()
    }
}

/// Draws a connected undirected skeleton on `m` nodes (edge probability
/// 1/2, redrawn until connected), expands it to a directed graph, and
/// homogenizes to `(p, q)`.
fn random_connected_homogeneous(
    m: usize,
    params: &BassParams,
    seed: u64,
) -> Result<(NetworkSpec, usize), BoundsError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let mut edges = Vec::new();
        let mut adj = vec![Vec::new(); m];
        for i in 0..m {
            for j in (i + 1)..m {
                if rng.random::<f64>() < 0.5 {
                    edges.push((i, j, 1.0));
                    edges.push((j, i, 1.0));
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        // BFS connectivity over the undirected skeleton
        let mut seen = vec![false; m];
        let mut queue = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    queue.push(u);
                }
            }
        }
        if reached < m {
            continue;
        }
        let raw = NetworkSpec::new(m, vec![params.p(); m], edges, "conjecture sample")?;
        let edge_count = raw.edge_count();
        return Ok((raw.homogenize(params.p(), params.q())?, edge_count));
    }
    Err(BoundsError::InvalidParams(format!(
        "no connected skeleton on {m} nodes after 1000 attempts"
    )))
}

/// Samples random connected homogeneous networks of size `m`, exact-solves
/// each, and records the worst excess of `f` over `f_complete(.; M)` on a
/// grid spanning ten relaxation times. Row 0 is the complete network
/// compared to itself.
pub fn conjecture_experiment(
    m: usize,
    params: &BassParams,
    sample_count: usize,
    seed: u64,
) -> Result<ConjectureTable, BoundsError> {
    const THRESHOLD: f64 = 1e-9;
    if sample_count == 0 {
        return Err(BoundsError::InvalidParams("sample_count must be at least 1".into()));
    }
    if m < 2 {
        return Err(BoundsError::InvalidParams("experiment needs M >= 2".into()));
    }
    let t_grid = linspace(10.0 / (params.p() + params.q()), 100);
    let reference = solve_complete(m, params, &t_grid)?;

    let mut rows = vec![ConjectureRow {
        sample: 0,
        label: format!("complete(M={m})"),
        edge_count: m * (m - 1),
        max_excess: 0.0,
        counterexample: false,
    }];
    let sampled: Result<Vec<ConjectureRow>, BoundsError> = (1..=sample_count)
        .into_par_iter()
        .map(|sample| {
            let (net, edge_count) =
                random_connected_homogeneous(m, params, mix_seed(seed, sample as u64))?;
            let curve = solve_master(&net, &t_grid, &MasterOptions::default())?;
            let max_excess = curve
                .f
                .iter()
                .zip(&reference.f)
                .map(|(f, r)| f - r)
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(ConjectureRow {
                sample,
                label: "connected-er(0.5)".to_string(),
                edge_count,
                max_excess,
                counterexample: max_excess > THRESHOLD,
            })
        })
        .collect();
    rows.extend(sampled?);
    Ok(ConjectureTable { m, rows, threshold: THRESHOLD })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{generate, Family, Sided};

    fn exact_view_params(p: f64, q: f64, span: f64) -> (crate::exact::ExactCurve, BassParams) {
        let net = generate(&Family::Pairs { m: 10 }, p, q, 0).unwrap();
        let grid = linspace(span, 50);
        (solve_master(&net, &grid, &MasterOptions::default()).unwrap(), BassParams::new(p, q))
    }

    #[test]
    fn pairs_network_attains_the_lower_bound() {
        let (curve, params) = exact_view_params(0.01, 0.1, 80.0);
        let report = verify_bounds(&curve.view(), &params).unwrap();
        assert!(!report.has_violations());
        for point in &report.points {
            assert!(point.margin_low.abs() <= 1e-9, "t={}: {}", point.t, point.margin_low);
        }
    }

    #[test]
    fn small_circle_sits_strictly_inside() {
        let net = generate(&Family::Circle { m: 3, sided: Sided::One }, 0.01, 0.1, 0).unwrap();
        let grid = linspace(80.0, 40);
        let curve = solve_master(&net, &grid, &MasterOptions::default()).unwrap();
        let params = BassParams::new(0.01, 0.1);
        let report = verify_bounds(&curve.view(), &params).unwrap();
        assert!(!report.has_violations());
        let (low, high) = strictness_margin(&curve.view(), &params, 1.0 / 0.11).unwrap();
        assert!(low > 1e-6 && high > 1e-6, "margins ({low}, {high})");
    }

    #[test]
    fn constructed_violation_is_flagged_everywhere() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let f = vec![1.0; 11];
        let params = BassParams::new(0.01, 0.1);
        let view = CurveView {
            t: &t,
            f: &f,
            se: None,
            per_node: None,
            params: Some(params),
            runs: None,
            source: CurveSource::Exact,
        };
        let report = verify_bounds(&view, &params).unwrap();
        assert_eq!(report.violation_count, t.len());
        assert!(report.points.iter().all(|p| p.violation_high));
    }

    #[test]
    fn param_mismatch_is_an_error() {
        let (curve, _) = exact_view_params(0.01, 0.1, 50.0);
        let err = verify_bounds(&curve.view(), &BassParams::new(0.01, 0.2));
        assert!(matches!(err, Err(BoundsError::ParamMismatch { .. })));
    }

    #[test]
    fn inhomogeneous_report_reduces_to_homogeneous() {
        let net = generate(&Family::Pairs { m: 6 }, 0.02, 0.3, 0).unwrap();
        let grid = linspace(40.0, 25);
        let curve = solve_master(&net, &grid, &MasterOptions::default()).unwrap();
        let params = BassParams::new(0.02, 0.3);
        let a = verify_bounds(&curve.view(), &params).unwrap();
        let b = verify_bounds_inhomogeneous(&curve.view(), &net).unwrap();
        for (pa, pb) in a.points.iter().zip(&b.points) {
            assert_eq!(pa.lower, pb.lower);
            assert_eq!(pa.upper, pb.upper);
        }
    }

    #[test]
    fn mixed_rate_star_respects_minmax_envelope() {
        // undirected 6-node star, homogenized in q, two distinct p values
        let mut edges = Vec::new();
        for leaf in 1..6usize {
            edges.push((0, leaf, 0.1));
            edges.push((leaf, 0, 0.02));
        }
        let raw = NetworkSpec::new(6, vec![0.01; 6], edges, "star").unwrap();
        let hom_q = raw.homogenize(0.01, 0.1).unwrap();
        let mut rates = vec![0.01; 6];
        rates[0] = 0.02;
        let net = NetworkSpec::new(
            6,
            rates,
            hom_q.edges().collect::<Vec<_>>(),
            "star, mixed p",
        )
        .unwrap();
        let grid = linspace(60.0, 30);
        let curve = solve_master(&net, &grid, &MasterOptions::default()).unwrap();
        let report = verify_bounds_inhomogeneous(&curve.view(), &net).unwrap();
        assert!(!report.has_violations(), "worst margins {:?}", (
            report.worst_margin_low,
            report.worst_margin_high
        ));
    }

    #[test]
    fn strictness_probe_edge_cases() {
        let (curve, params) = exact_view_params(0.05, 0.4, 30.0);
        let (low, high) = strictness_margin(&curve.view(), &params, 0.0).unwrap();
        assert_eq!((low, high), (0.0, 0.0));
        assert!(matches!(
            strictness_margin(&curve.view(), &params, 31.0),
            Err(BoundsError::ProbeOutsideGrid { .. })
        ));
        // pairs attain the lower bound: low margin stays ~0 (probe on a
        // grid point; interpolated probes carry O(h^2) error)
        let probe = 30.0 * 20.0 / 50.0;
        let (low, _) = strictness_margin(&curve.view(), &params, probe).unwrap();
        assert!(low.abs() <= 1e-9, "low margin {low}");
    }

    #[test]
    fn gap_metrics_frozen_and_monotone() {
        let metrics = gap_metrics(&BassParams::new(0.01, 1.0)).unwrap();
        assert!((metrics.ratio - 0.1302).abs() <= 5e-4, "ratio {}", metrics.ratio);
        let asym = metrics.asymptotic.unwrap();
        assert!((asym - 0.1328771).abs() < 1e-6);
        assert!(metrics.relative_deviation.unwrap() < 0.05);

        let tiny = gap_metrics(&BassParams::new(0.01, 0.01 * 1e-6)).unwrap();
        assert!(tiny.ratio > 0.9999 && tiny.ratio <= 1.0 + 1e-12, "ratio {}", tiny.ratio);
        assert!(tiny.asymptotic.is_none());

        let lambdas = [0.1, 1.0, 10.0, 100.0, 1000.0];
        let ratios: Vec<f64> = lambdas
            .iter()
            .map(|&l| gap_metrics(&BassParams::new(0.01, 0.01 * l)).unwrap().ratio)
            .collect();
        for pair in ratios.windows(2) {
            assert!(pair[1] < pair[0], "ratios not decreasing: {ratios:?}");
        }
        assert!(ratios.iter().all(|r| (0.0..=1.0).contains(r)));
    }

    #[test]
    fn dimensionless_collapse() {
        let params = BassParams::new(0.01, 0.1);
        for c in [0.1, 10.0] {
            let scaled = BassParams::new(0.01 / c, 0.1 / c);
            for i in 0..=100 {
                let t = i as f64;
                assert!((f_bass(t, &params) - f_bass(c * t, &scaled)).abs() <= 1e-12);
                assert!((f_two_node(t, &params) - f_two_node(c * t, &scaled)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn upper_margin_shrinks_with_system_size() {
        let params = BassParams::new(0.01, 0.1);
        let grid = linspace(10.0 / 0.11, 40);
        let mut last_gap = f64::INFINITY;
        for m in [2usize, 5, 10, 30] {
            let curve = solve_complete(m, &params, &grid).unwrap();
            let report = verify_bounds(&curve.view(), &params).unwrap();
            assert!(!report.has_violations());
            let max_gap =
                report.points.iter().map(|p| p.margin_high).fold(f64::NEG_INFINITY, f64::max);
            assert!(max_gap < last_gap, "M={m}: {max_gap} >= {last_gap}");
            last_gap = max_gap;
        }
    }

    #[test]
    fn monte_carlo_slack_uses_standard_errors() {
        let net = generate(&Family::Pairs { m: 4 }, 0.02, 0.2, 0).unwrap();
        let grid = linspace(40.0, 15);
        let est = crate::montecarlo::estimate_ensemble(
            &net,
            &grid,
            4_000,
            42,
            &crate::montecarlo::EnsembleOptions { per_node: true },
        )
        .unwrap();
        let report = verify_bounds(&est.view(), &BassParams::new(0.02, 0.2)).unwrap();
        assert_eq!(report.slack, SlackPolicy::SeMultiple(SE_MULTIPLIER));
        assert!(!report.has_violations(), "violations: {}", report.violation_count);
        assert!(report.node_checked > 0);
    }

    #[test]
    fn conjecture_experiment_small_sizes() {
        let params = BassParams::new(0.01, 0.1);
        let table = conjecture_experiment(2, &params, 5, 7).unwrap();
        assert_eq!(table.rows.len(), 6);
        assert!(table.max_excess() <= 1e-9, "excess {}", table.max_excess());
        assert_eq!(table.counterexample_candidates(), 0);
        assert_eq!(table.rows[0].max_excess, 0.0);

        let table = conjecture_experiment(4, &params, 200, 11).unwrap();
        assert!(table.max_excess() <= 1e-9, "excess {}", table.max_excess());
        assert_eq!(table.counterexample_candidates(), 0);
    }

    #[test]
    fn remaining_families_stay_inside_the_bounds() {
        let params = BassParams::new(0.01, 0.1);
        let grid = linspace(10.0 / 0.11, 40);
        for family in [
            Family::ScaleFree { m: 12, m_attach: 2 },
            Family::SmallWorld { m: 12, k: 4, rewire_prob: 0.2 },
        ] {
            let net = generate(&family, 0.01, 0.1, 8).unwrap();
            let curve = solve_master(&net, &grid, &MasterOptions::default()).unwrap();
            let report = verify_bounds(&curve.view(), &params).unwrap();
            assert!(!report.has_violations(), "{family:?}");
        }
        // Monte Carlo regime for the same families
        let mc_grid = linspace(50.0, 50);
        for family in [
            Family::ScaleFree { m: 2_000, m_attach: 2 },
            Family::SmallWorld { m: 2_000, k: 4, rewire_prob: 0.2 },
        ] {
            let net = generate(&family, 0.01, 0.1, 8).unwrap();
            let est = crate::montecarlo::estimate_ensemble(
                &net,
                &mc_grid,
                300,
                9,
                &crate::montecarlo::EnsembleOptions::default(),
            )
            .unwrap();
            let report = verify_bounds(&est.view(), &params).unwrap();
            assert!(report.violation_fraction() <= 0.01, "{family:?}");
        }
    }

    #[test]
    fn pair_sandwich_on_random_instances() {
        // random homogeneous-p instances, M <= 6
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for instance in 0..10 {
            let m = 2 + (instance % 5);
            let p = 0.005 + 0.05 * rng.random::<f64>();
            let mut edges = Vec::new();
            for i in 0..m {
                for j in 0..m {
                    if i != j && rng.random::<f64>() < 0.6 {
                        edges.push((i, j, 0.02 + 0.3 * rng.random::<f64>()));
                    }
                }
            }
            // ensure every node hears someone
            for j in 0..m {
                if !edges.iter().any(|&(_, t, _)| t == j) {
                    edges.push(((j + 1) % m, j, 0.1));
                }
            }
            let net = NetworkSpec::new(m, vec![p; m], edges, "random").unwrap();
            let grid = linspace(5.0 / p, 25);
            let report = crate::exact::pair_sandwich_check(&net, &grid).unwrap();
            assert!(
                report.all_ok(),
                "instance {instance}: worst margins ({}, {})",
                report.worst_lower,
                report.worst_upper
            );
        }
    }
}
