//! Robust transmit-power minimization for a downlink pinching-antenna system
//! whose user positions are only known up to a disk of uncertainty.
//!
//! The pipeline, bottom-up:
//!
//! - [`geometry`]: area of the part of a user's uncertainty disk left outside
//!   the ground trace of the antenna's equal-rate sphere.
//! - [`allocator`]: bisection for the smallest coverage radius meeting the
//!   outage cap, its conversion to transmit power, and the per-user
//!   decomposition of the sum-power problem.
//! - [`optimizer`]: antenna position by particle swarm, exhaustive grid, or
//!   the fixed-antenna baseline.
//! - [`experiments`]: seeded sweeps over target rate, uncertainty radius and
//!   outage cap.
//! - [`oracle`]: Monte Carlo estimates used to check all of the above.

// Negated float comparisons below are how inputs reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocator;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod optimizer;
pub mod oracle;
pub mod scenario;

pub use allocator::{
    center_distance, min_power, optimal_position_single, solve_coverage_radius, solve_user, sum_min_power,
    Allocation, UserSolution, DEFAULT_TOLERANCE,
};
pub use error::{Error, Result};
pub use experiments::{run_sweep, run_sweep_detailed, summarize, Scheme, SweepRecord, SweepSpec, SweepVariable};
pub use geometry::{ground_radius, outage_area, outage_fraction, sphere_radius, CoverageProblem, OutageGeometry};
pub use optimizer::{fixed_baseline, grid_search, objective, pso_optimize, OptimizationResult, PsoConfig};
pub use oracle::{empirical_outage, mc_outage_area, McEstimate};
pub use scenario::{
    derive_channel_params, generate_users, sample_true_location, ChannelParams, RadioConfig, ScenarioConfig,
    ScenarioFile, UserSpec,
};
