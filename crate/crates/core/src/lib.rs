//! Stochastic Bass diffusion on weighted directed networks.
//!
//! The crate provides:
//!
//! - [`network`]: the network data model, validation, and the named
//!   generator families (complete, circles, tori, pairs, Erdős–Rényi,
//!   preferential attachment, ring-rewire).
//! - [`analytic`]: closed-form adoption curves (`f_bass`, the two-node
//!   curve, the infinite-circle curve), trivial bounds, half-life solvers,
//!   and the asymptotic half-life ratio.
//! - [`exact`]: transient solutions of the full `2^M`-state master
//!   equation and the `O(M)`-state birth chain for homogeneous complete
//!   networks, including pairwise joint nonadoption probabilities.
//! - [`montecarlo`]: event-driven Gillespie simulation with reproducible
//!   parallel ensembles.
//! - [`bounds`]: verification of the universal lower/upper adoption
//!   bounds, strictness margins, gap metrics, and the fixed-size-supremum
//!   experiment harness.
//! - [`io`]: stable JSON/CSV file formats for networks, curves, and
//!   bound reports.

pub mod analytic;
pub mod bounds;
pub mod curve;
pub mod exact;
pub mod io;
pub mod montecarlo;
pub mod network;
pub mod ode;

pub use analytic::{BassParams, HalfLifeResult};
pub use bounds::{BoundsReport, ConjectureTable, GapMetrics};
pub use curve::{CurveSource, CurveView};
pub use exact::{ExactCurve, PairSandwichReport, StateDistribution};
pub use io::{Curve, CurveMeta};
pub use montecarlo::{EnsembleEstimate, TrajectoryRecord};
pub use network::{Family, HomogeneityCheck, NetworkSpec, Sided, Violation};
