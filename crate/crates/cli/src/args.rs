use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tsa_aoi::harness::SweepParam;
use tsa_aoi::optimize::DEFAULT_ALTERNATING_SEED;

/// Age-of-Information analysis, optimization and simulation of age-threshold
/// slotted ALOHA in Poisson bipolar networks. Every command writes CSV.
#[derive(Debug, Parser)]
#[command(name = "tsa-aoi", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Success probability on every branch, optionally simulated.
    PsSweep(SweepCmd),
    /// Peak and time-average AoI with bounds and the slotted-ALOHA baseline.
    AoiSweep(SweepCmd),
    /// Optimal update rate and/or age threshold.
    Optimize(OptimizeCmd),
    /// Optimal AoI relative to the spatial load as the network densifies.
    Scaling(ScalingCmd),
    /// Monte Carlo runs with analytic reference columns and agreement flags.
    Simulate(SimulateCmd),
    /// Stability region, thresholds and roots per point.
    Regions(RegionsCmd),
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    /// Link density per unit area.
    #[arg(long, default_value_t = 0.01, conflicts_with = "spatial_load")]
    pub lambda: f64,
    /// Set the density through the spatial load λcr² instead.
    #[arg(long)]
    pub spatial_load: Option<f64>,
    /// Link distance.
    #[arg(long, default_value_t = 3.0)]
    pub r: f64,
    /// Path-loss exponent.
    #[arg(long, default_value_t = 3.8)]
    pub alpha: f64,
    /// SINR decoding threshold, linear [default: 1, i.e. 0 dB].
    #[arg(long, conflicts_with = "theta_db")]
    pub theta: Option<f64>,
    #[arg(long)]
    pub theta_db: Option<f64>,
    /// Mean received SNR, linear; `inf` for no noise [default: 100, i.e. 20 dB].
    #[arg(long, conflicts_with = "snr_db")]
    pub rho: Option<f64>,
    #[arg(long)]
    pub snr_db: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Update rate η in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Age threshold A ≥ 0; zero is plain slotted ALOHA.
    #[arg(long, default_value_t = 0.0)]
    pub age_threshold: f64,
}

#[derive(Debug, Args)]
pub struct PointsArgs {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Named parameter set; replaces the network and protocol flags.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Parameter to sweep: age-threshold, lambda or eta.
    #[arg(long, value_name = "PARAM")]
    pub sweep: Option<SweepParam>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', conflicts_with = "range")]
    pub values: Option<Vec<f64>>,
    /// Inclusive sweep range START:STOP:STEP.
    #[arg(long, value_name = "START:STOP:STEP")]
    pub range: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Total slots per replication, warmup included [default: 100000].
    #[arg(long)]
    pub slots: Option<u64>,
    /// Slots discarded before measuring [default: 10000].
    #[arg(long)]
    pub warmup: Option<u64>,
    /// Independent replications [default: 8].
    #[arg(long)]
    pub replications: Option<usize>,
    /// Side of the square simulation window [default: 50].
    #[arg(long)]
    pub window: Option<f64>,
    /// 100×100 window and 10⁶ slots unless overridden.
    #[arg(long)]
    pub paper_scale: bool,
    /// Wrap distances around the window edges.
    #[arg(long)]
    pub torus: bool,
    /// Fixed number of interfering links instead of a Poisson draw.
    #[arg(long)]
    pub interferers: Option<usize>,
    /// Steady state the initial ages are drawn around.
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Write CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepCmd {
    #[command(flatten)]
    pub points: PointsArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Analytic)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RegionsCmd {
    #[command(flatten)]
    pub points: PointsArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateCmd {
    #[command(flatten)]
    pub points: PointsArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Write the typical link's slot trace (first point, first replication).
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct OptimizeCmd {
    #[command(flatten)]
    pub network: NetworkArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Named parameter set; its first point supplies the network.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    #[arg(long, value_enum, default_value_t = TargetArg::Avg)]
    pub target: TargetArg,
    /// fixed-a optimizes η at --age-threshold, fixed-eta optimizes A at --eta.
    #[arg(long, value_enum, default_value_t = OptModeArg::Joint)]
    pub mode: OptModeArg,
    /// Stopping tolerance of the alternating algorithm.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Round budget of the alternating algorithm.
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Seed for the alternating algorithm's starting rate.
    #[arg(long, default_value_t = DEFAULT_ALTERNATING_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct ScalingCmd {
    #[command(flatten)]
    pub network: NetworkArgs,
    /// Named parameter set supplying the base network and loads.
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Comma-separated spatial loads λcr².
    #[arg(long, value_delimiter = ',', conflicts_with = "range")]
    pub loads: Option<Vec<f64>>,
    /// Inclusive load range START:STOP:STEP.
    #[arg(long, value_name = "START:STOP:STEP")]
    pub range: Option<String>,
    #[arg(long, value_enum, default_value_t = ProtocolArg::Both)]
    pub protocol: ProtocolArg,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    High,
    Low,
    Middle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Analytic,
    Simulated,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Peak,
    Avg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptModeArg {
    FixedA,
    FixedEta,
    Joint,
    Safe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Sa,
    Tsa,
    Both,
}
