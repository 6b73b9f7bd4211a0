//! Per-user degrees of freedom (DoF) of clustered cooperative beamforming.
//!
//! Each BS holds a set of files and each MS requests one. A group of MSs can
//! be served interference-free by zero-forcing when at least as many BSs
//! hold every file the group asks for. The minimal groups that fail this
//! test are the hyperedges of a hypergraph on the MSs; a proper coloring
//! partitions the MSs into orthogonally scheduled groups, and the per-MS DoF
//! is one over the number of colors, capped by the backhaul when files must
//! be downloaded.
//!
//! On top of the slot model the crate provides cache placement policies,
//! the Greedy Download backhaul policy and a Monte Carlo harness driven by
//! Zipf-distributed requests.
//!
//! DoF arithmetic is exact and generic over the integer type of
//! [`num_rational::Ratio`]; [`Rational`] fixes it to `i128` for everyday use.

pub mod cli;
pub mod coloring;
pub mod dof;
pub mod experiments;
pub mod hypergraph;
pub mod model;
pub mod policies;
pub mod popularity;
pub mod scalar;

pub use num_rational::Ratio;

/// Exact DoF / backhaul value used by the CLI and the experiments.
pub type Rational = Ratio<i128>;
/// Arbitrary-precision alternative.
pub type BigRational = num_rational::BigRational;
/// Double-precision popularity distribution.
pub type Pmf = popularity::Pmf<f64>;

pub type SystemConfig = model::SystemConfig<i128>;
pub type Instance = model::Instance<i128>;
pub type SlotResult = dof::SlotResult<i128>;
pub type TrialRecord = experiments::TrialRecord<i128>;
pub type SweepRow = experiments::SweepRow<i128>;

pub use coloring::{exact_chromatic, greedy_color, validate_coloring, Coloring, ColoringMethod, GreedyOrder};
pub use dof::{downlink_dof, slot_dof};
pub use experiments::{monte_carlo, region_boundary, run_slot, sweep_ncmp, SimOptions};
pub use hypergraph::{is_independent, minimal_hyperedges, requested_files, serving_set, Hypergraph};
pub use model::{validate_instance, Availability, FileId, InstanceFile, RequestProfile};
pub use policies::{cache_cd, cache_cmp, cache_hc, gd_allocate, BackhaulPolicy, CachePolicy, DownloadPlan};
pub use popularity::{sample_requests, trial_rng, zipf_pmf};
pub use scalar::{parse_rational, DofInt};
