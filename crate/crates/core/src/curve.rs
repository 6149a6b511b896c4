//! A borrowed, source-agnostic view of an adoption curve.
//!
//! Bound verification and file export consume curves from three producers
//! (exact solver, Monte Carlo ensemble, files); this view is the common
//! denominator.

use crate::analytic::BassParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSource {
    Exact,
    MonteCarlo,
    Formula,
}

impl CurveSource {
    pub fn label(&self) -> &'static str {
        match self {
            CurveSource::Exact => "exact",
            CurveSource::MonteCarlo => "mc",
            CurveSource::Formula => "formula",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        match label {
            "exact" => Some(CurveSource::Exact),
            "mc" => Some(CurveSource::MonteCarlo),
            "formula" => Some(CurveSource::Formula),
            _ => None,
        }
    }
}

/// Borrowed curve data: time grid, aggregate adoption level, and optional
/// standard errors / per-node levels / homogeneous parameters.
#[derive(Debug, Clone, Copy)]
pub struct CurveView<'a> {
    pub t: &'a [f64],
    pub f: &'a [f64],
    pub se: Option<&'a [f64]>,
    /// Per-node adoption probabilities, `[node][time]`.
    pub per_node: Option<&'a [Vec<f64>]>,
    /// `(p, q)` when the generating network was homogeneous.
    pub params: Option<BassParams>,
    /// Trajectory count for Monte Carlo curves.
    pub runs: Option<usize>,
    pub source: CurveSource,
}
