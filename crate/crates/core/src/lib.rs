//! Age-of-Information analysis and optimization of age-threshold slotted
//! ALOHA (TSA) in Poisson bipolar networks under the high-mobility model.
//!
//! The crate is split along the same lines as the workflow it supports:
//!
//! - [`network`]: physical-layer parameters, spatial contention, protocol knobs.
//! - [`fixed_point`]: the success-probability fixed point, its roots and
//!   stability regions.
//! - [`aoi`]: closed-form mean peak / time-average AoI and bounds.
//! - [`optimize`]: update-rate / age-threshold optimizers, including the
//!   alternating algorithm and the bistable-safe variants.
//! - [`sim`]: a slot-level Monte Carlo simulator used to validate the analysis.
//! - [`harness`]: parameter sweeps and CSV tables consumed by the CLI.

// `!(x > 0.0)` is how argument checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aoi;
pub mod error;
pub mod fixed_point;
pub mod harness;
pub mod lambert;
pub mod network;
pub mod numeric;
pub mod optimize;
pub mod sim;

pub use aoi::{
    aoi_bounds, aoi_report, aoi_report_on_branch, mean_peak_aoi, sa_baseline, time_average_aoi, tsa_beats_sa_average,
    tsa_beats_sa_peak, AoiBounds, AoiReport,
};
pub use error::{Error, Result};
pub use fixed_point::{
    bistable_ratio_bound, classify_region, fixed_point_iterate, fixed_point_residual, operating_point, solve_branch,
    stability_thresholds, Branch, FixedPointProblem, Iteration, Region, RegionClassification, StabilityThresholds,
};
pub use lambert::lambert_w0;
pub use network::{db_to_linear, linear_to_db, spatial_contention, NetworkConfig, ProtocolParams, SpatialContention};
pub use optimize::{
    alternating_optimize_avg, opt_a_avg, opt_a_peak, opt_eta_avg, opt_eta_peak, opt_joint_avg, opt_joint_peak,
    peak_safe_load_limit, safe_avg_params, safe_peak_params, scaling_limits, subopt_a_avg_closed, AlternatingRun,
    ClosedFormThreshold, OptResult, Protocol, Regime, ScalingPoint, Target,
};
pub use sim::{run_simulation, InitialAges, SimConfig, SimResult};
