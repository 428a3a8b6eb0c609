//! Slot-level Monte Carlo simulation of TSA in a Poisson bipolar network
//! under high mobility.
//!
//! Each replication draws a Poisson number of links in a square window and
//! keeps that node set for the whole run. Every slot, links whose age exceeds
//! the threshold transmit with probability `η`; transmitters are re-dropped
//! uniformly in the window with their receiver at distance `r` in a random
//! direction. The typical link's receiver is fixed at the window centre. All
//! paths see independent unit-mean Rayleigh fading, and a packet decodes when
//! its SINR exceeds `θ`. Ages reset to one in the slot after a delivery.
//!
//! Statistics are collected for the typical link after warmup. Replications run
//! in parallel on independent ChaCha streams derived from `(seed, index)`, so
//! results are reproducible regardless of thread count.

mod stats;
mod world;

pub use stats::{estimate_variance_of_aoi, update_interval_moments, write_trace, IntervalMoments, TraceRow};
pub use world::{LinkState, SlotOutcome, World};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fixed_point::{classify_region, Branch};
use crate::network::{NetworkConfig, ProtocolParams};
use stats::{ci_halfwidth, Accumulator};

/// Batches used for confidence intervals when there is a single replication.
const BATCHES: usize = 20;

/// How ages are initialised at slot zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialAges {
    /// Uniform on `[1, ⌈A + 1/(ηp₀)⌉]`, with `p₀` the analytic root on the
    /// given branch. Starts close to stationarity.
    Stationary(Branch),
    /// Every gate open at slot zero (`A + 1`). Steers bistable networks low.
    AllExpired,
    /// Every age at one.
    AllFresh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub window_side: f64,
    pub slots: u64,
    pub warmup_slots: u64,
    pub seed: u64,
    pub replications: usize,
    pub initial_ages: InitialAges,
    /// Wrap distances around the window edges.
    pub torus: bool,
    /// Fixed number of non-typical links instead of a Poisson draw.
    pub interferers: Option<usize>,
    /// Keep the post-warmup trace of the first replication.
    pub record_trace: bool,
}

impl Default for SimConfig {
    /// Desk scale: 50×50 window, 10⁵ slots, 8 replications.
    fn default() -> Self {
        Self {
            window_side: 50.0,
            slots: 100_000,
            warmup_slots: 10_000,
            seed: 1,
            replications: 8,
            initial_ages: InitialAges::Stationary(Branch::High),
            torus: false,
            interferers: None,
            record_trace: false,
        }
    }
}

impl SimConfig {
    /// 100×100 window and 10⁶ slots.
    pub fn paper_scale() -> Self {
        Self {
            window_side: 100.0,
            slots: 1_000_000,
            ..Self::default()
        }
    }

    pub fn validate(&self, cfg: &NetworkConfig) -> Result<()> {
        if !(self.window_side > 2.0 * cfg.r()) || !self.window_side.is_finite() {
            return Err(Error::Config(format!(
                "window side {} must exceed twice the link distance {}",
                self.window_side,
                cfg.r()
            )));
        }
        if self.slots <= self.warmup_slots {
            return Err(Error::Config(format!(
                "slots ({}) must exceed warmup slots ({})",
                self.slots, self.warmup_slots
            )));
        }
        if self.replications == 0 {
            return Err(Error::Config("at least one replication is required".into()));
        }
        Ok(())
    }
}

/// Empirical estimates for the typical link. Half-widths are 95% normal
/// intervals: across replications when there are at least two, otherwise
/// from batch means.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub p_s_hat: f64,
    pub p_s_ci: f64,
    pub peak_aoi_hat: f64,
    pub peak_ci: f64,
    pub avg_aoi_hat: f64,
    pub avg_ci: f64,
    pub var_aoi_hat: f64,
    pub var_ci: f64,
    pub attempts: u64,
    pub successes: u64,
    pub slots_measured: u64,
    pub replications: usize,
    /// Links per replication, typical included.
    pub link_counts: Vec<usize>,
    /// In a bistable configuration, the analytic steady state closest to `p̂_s`.
    pub nearest_branch: Option<Branch>,
    pub trace: Option<Vec<TraceRow>>,
}

struct Replication {
    batches: Vec<Accumulator>,
    links: usize,
    trace: Option<Vec<TraceRow>>,
}

fn replicate(cfg: &NetworkConfig, params: &ProtocolParams, sim: &SimConfig, index: usize) -> Result<Replication> {
    let mut world = World::new(cfg, params, sim, index as u64)?;
    let measured = sim.slots - sim.warmup_slots;
    let mut batches = vec![Accumulator::default(); BATCHES];
    let mut trace = (sim.record_trace && index == 0).then(|| Vec::with_capacity(measured as usize));
    for _ in 0..sim.warmup_slots {
        world.step();
    }
    for k in 0..measured {
        let out = world.step();
        let batch = (k as u128 * BATCHES as u128 / measured as u128) as usize;
        batches[batch].record(out.age, out.attempted, out.success);
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow {
                slot: out.slot,
                age: out.age,
                attempted: out.attempted,
                success: out.success,
                sinr: out.sinr,
            });
        }
    }
    Ok(Replication {
        batches,
        links: world.links().len(),
        trace,
    })
}

pub fn run_simulation(cfg: &NetworkConfig, params: &ProtocolParams, sim: &SimConfig) -> Result<SimResult> {
    sim.validate(cfg)?;
    let reps: Vec<Replication> = (0..sim.replications)
        .into_par_iter()
        .map(|i| replicate(cfg, params, sim, i))
        .collect::<Result<_>>()?;

    let totals: Vec<Accumulator> = reps
        .iter()
        .map(|r| {
            let mut acc = Accumulator::default();
            r.batches.iter().for_each(|b| acc.merge(b));
            acc
        })
        .collect();
    let mut pooled = Accumulator::default();
    totals.iter().for_each(|t| pooled.merge(t));

    let blocks: &[Accumulator] = if reps.len() >= 2 { &totals } else { &reps[0].batches };
    let ci = |f: fn(&Accumulator) -> f64| ci_halfwidth(blocks.iter().map(f));
    let (p_s_ci, peak_ci, avg_ci, var_ci) = (
        ci(Accumulator::p_s),
        ci(Accumulator::peak),
        ci(Accumulator::average),
        ci(Accumulator::variance),
    );
    let p_s_hat = pooled.p_s();

    let nearest_branch = match classify_region(cfg, params) {
        Ok(class) => match (class.low, class.high) {
            (Some(lo), Some(hi)) if p_s_hat > 0.0 => {
                let ln = p_s_hat.ln();
                Some(if (ln - lo.ln()).abs() < (ln - hi.ln()).abs() {
                    Branch::Low
                } else {
                    Branch::High
                })
            }
            _ => None,
        },
        Err(_) => None,
    };

    let mut reps = reps;
    Ok(SimResult {
        p_s_hat,
        p_s_ci,
        peak_aoi_hat: pooled.peak(),
        peak_ci,
        avg_aoi_hat: pooled.average(),
        avg_ci,
        var_aoi_hat: pooled.variance(),
        var_ci,
        attempts: pooled.attempts,
        successes: pooled.successes,
        slots_measured: pooled.slots,
        replications: reps.len(),
        link_counts: reps.iter().map(|r| r.links).collect(),
        nearest_branch,
        trace: reps[0].trace.take(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_window() {
        let cfg = NetworkConfig::from_db(0.01, 3.0, 0.0, 20.0, 3.8).unwrap();
        let params = ProtocolParams::slotted_aloha(1.0).unwrap();
        let sim = SimConfig {
            window_side: 6.0,
            ..SimConfig::default()
        };
        assert!(matches!(run_simulation(&cfg, &params, &sim), Err(Error::Config(_))));
        let sim = SimConfig {
            slots: 10,
            warmup_slots: 10,
            ..SimConfig::default()
        };
        assert!(matches!(run_simulation(&cfg, &params, &sim), Err(Error::Config(_))));
    }

    #[test]
    fn noise_only_link_matches_rayleigh() {
        // P(h r^-α ρ > θ) = exp(−θ r^α / ρ) with θ = 1, r = 1, ρ = 10.
        let cfg = NetworkConfig::new(0.0, 1.0, 1.0, 10.0, 3.8).unwrap();
        let params = ProtocolParams::slotted_aloha(1.0).unwrap();
        let sim = SimConfig {
            slots: 50_000,
            warmup_slots: 100,
            replications: 4,
            interferers: Some(0),
            ..SimConfig::default()
        };
        let res = run_simulation(&cfg, &params, &sim).unwrap();
        let exact = (-0.1f64).exp();
        assert!(
            (res.p_s_hat - exact).abs() < 3.0 * res.p_s_ci.max(1e-3),
            "{} ± {}",
            res.p_s_hat,
            res.p_s_ci
        );
        assert_eq!(res.link_counts, vec![1; 4]);
        assert!(res.successes <= res.attempts);
    }

    #[test]
    fn single_replication_uses_batches() {
        let cfg = NetworkConfig::new(0.0, 1.0, 1.0, 10.0, 3.8).unwrap();
        let params = ProtocolParams::new(0.5, 2.0).unwrap();
        let sim = SimConfig {
            slots: 20_000,
            warmup_slots: 0,
            replications: 1,
            interferers: Some(0),
            record_trace: true,
            ..SimConfig::default()
        };
        let res = run_simulation(&cfg, &params, &sim).unwrap();
        assert!(res.avg_ci.is_finite() && res.avg_ci > 0.0);
        let trace = res.trace.unwrap();
        assert_eq!(trace.len(), 20_000);
        for w in trace.windows(2) {
            assert!(w[1].age == w[0].age + 1 || (w[0].success && w[1].age == 1));
        }
    }
}
