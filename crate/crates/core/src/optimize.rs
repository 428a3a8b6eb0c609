//! Optimal update rate and age threshold for peak and time-average AoI.
//!
//! Notation used throughout: `L = λcr²`, `K = θr^α/ρ`, `x = Lη`.
//!
//! Closed forms are used wherever they exist. The time-average threshold for a
//! fixed rate has no closed form and is found by bisection in
//! `u = 1 + Aηp_s`; the joint time-average optimum is available both as the
//! alternating algorithm (exact) and as a closed-form approximation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aoi::{mean_peak_aoi, sa_baseline, time_average_aoi};
use crate::error::{Error, Result};
use crate::fixed_point::{classify_region, operating_point, Region};
use crate::lambert::lambert_w0;
use crate::network::{validate_eta, NetworkConfig, ProtocolParams};
use crate::numeric::{bisect, golden_section_min};

/// Which AoI metric is being minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Peak,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Plain slotted ALOHA (`A = 0`).
    Sa,
    /// Age-threshold slotted ALOHA.
    Tsa,
}

/// Which piece of a piecewise optimum applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// The rate is throttled below one.
    ThrottledRate,
    /// The rate stays at one.
    FullRate,
    /// A positive age threshold is optimal.
    ThresholdActive,
    /// No threshold: plain slotted ALOHA is optimal.
    NoThreshold,
    /// A whole family of (A, η) pairs is optimal; one representative is reported.
    OptimalFamily,
    /// Closed-form approximation of the time-average optimum.
    ClosedForm,
    /// Result of the alternating algorithm.
    Alternating,
    /// Best point on the non-bistable side of `A_h`.
    BistableSafe,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::ThrottledRate => "throttled-rate",
            Regime::FullRate => "full-rate",
            Regime::ThresholdActive => "threshold-active",
            Regime::NoThreshold => "no-threshold",
            Regime::OptimalFamily => "optimal-family",
            Regime::ClosedForm => "closed-form",
            Regime::Alternating => "alternating",
            Regime::BistableSafe => "bistable-safe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptResult {
    pub a_star: f64,
    pub eta_star: f64,
    pub objective: f64,
    pub regime: Regime,
    pub p_s_at_opt: f64,
}

impl OptResult {
    pub fn params(&self) -> ProtocolParams {
        ProtocolParams {
            eta: self.eta_star,
            age_threshold: self.a_star,
        }
    }
}

fn check_threshold(a: f64) -> Result<()> {
    if a >= 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "age threshold must be finite and >= 0 (got {a})"
        )))
    }
}

/// Metric value at `(A, η)`, evaluated on the steady state reached from `p = 1`.
pub fn objective_at(cfg: &NetworkConfig, target: Target, a: f64, eta: f64) -> Result<f64> {
    let p = operating_point(cfg, &ProtocolParams::new(eta, a)?)?;
    match target {
        Target::Peak => mean_peak_aoi(a, eta, p),
        Target::Average => time_average_aoi(a, eta, p),
    }
}

/// Success probability at full rate for threshold `A`; fixes the rate optimum.
fn full_rate_root(cfg: &NetworkConfig, a: f64) -> Result<f64> {
    operating_point(cfg, &ProtocolParams::new(1.0, a)?)
}

/// Optimal rate for a fixed threshold. Returns `Some(η*)` when throttling
/// helps, with `p_s = e^{−1−K}` at the optimum.
fn throttled_rate(cfg: &NetworkConfig, a: f64, p_full: f64) -> Option<f64> {
    let load = cfg.spatial_load();
    if load > 1.0 + a * p_full {
        let eta = 1.0 / (load - a * (-1.0 - cfg.noise_term()).exp());
        (eta > 0.0 && eta <= 1.0).then_some(eta)
    } else {
        None
    }
}

pub fn opt_eta_peak(cfg: &NetworkConfig, a: f64) -> Result<OptResult> {
    check_threshold(a)?;
    let p_full = full_rate_root(cfg, a)?;
    let k = cfg.noise_term();
    Ok(match throttled_rate(cfg, a, p_full) {
        Some(eta) => OptResult {
            a_star: a,
            eta_star: eta,
            objective: cfg.spatial_load() * (1.0 + k).exp(),
            regime: Regime::ThrottledRate,
            p_s_at_opt: (-1.0 - k).exp(),
        },
        None => OptResult {
            a_star: a,
            eta_star: 1.0,
            objective: a + 1.0 / p_full,
            regime: Regime::FullRate,
            p_s_at_opt: p_full,
        },
    })
}

pub fn opt_a_peak(cfg: &NetworkConfig, eta: f64) -> Result<OptResult> {
    validate_eta(eta)?;
    let load = cfg.spatial_load();
    let k = cfg.noise_term();
    Ok(if load > 1.0 / eta {
        OptResult {
            a_star: (load - 1.0 / eta) * (1.0 + k).exp(),
            eta_star: eta,
            objective: load * (1.0 + k).exp(),
            regime: Regime::ThresholdActive,
            p_s_at_opt: (-1.0 - k).exp(),
        }
    } else {
        OptResult {
            a_star: 0.0,
            eta_star: eta,
            objective: sa_baseline(cfg, eta)?,
            regime: Regime::NoThreshold,
            p_s_at_opt: (-load * eta - k).exp(),
        }
    })
}

/// Threshold paired with rate `η₁` on the peak-optimal family.
pub fn peak_family_threshold(cfg: &NetworkConfig, eta1: f64) -> f64 {
    (cfg.spatial_load() - 1.0 / eta1) * (1.0 + cfg.noise_term()).exp()
}

/// Joint peak optimum. In the dense regime (`λcr² > 1`) every
/// `η₁ ∈ [1/λcr², 1]` with `A₁ = (λcr² − 1/η₁)e^{1+K}` is optimal; the range is
/// returned alongside the `η₁ = 1` representative.
pub fn opt_joint_peak(cfg: &NetworkConfig) -> Result<(OptResult, Option<(f64, f64)>)> {
    let load = cfg.spatial_load();
    if load > 1.0 {
        let mut best = opt_a_peak(cfg, 1.0)?;
        best.regime = Regime::OptimalFamily;
        Ok((best, Some((1.0 / load, 1.0))))
    } else {
        Ok((opt_a_peak(cfg, 1.0)?, None))
    }
}

pub fn opt_eta_avg(cfg: &NetworkConfig, a: f64) -> Result<OptResult> {
    check_threshold(a)?;
    let p_full = full_rate_root(cfg, a)?;
    let k = cfg.noise_term();
    Ok(match throttled_rate(cfg, a, p_full) {
        Some(eta) => {
            let b = cfg.spatial_load() * (1.0 + k).exp();
            OptResult {
                a_star: a,
                eta_star: eta,
                objective: (2.0 * b * b + a * (a + 1.0)) / (2.0 * b) - a,
                regime: Regime::ThrottledRate,
                p_s_at_opt: (-1.0 - k).exp(),
            }
        }
        None => OptResult {
            a_star: a,
            eta_star: 1.0,
            objective: time_average_aoi(a, 1.0, p_full)?,
            regime: Regime::FullRate,
            p_s_at_opt: p_full,
        },
    })
}

/// Load above which a positive threshold improves the time-average AoI at rate `η`.
pub fn avg_threshold_load(cfg: &NetworkConfig, eta: f64) -> Result<f64> {
    validate_eta(eta)?;
    Ok(lambert_w0(eta / 2.0 * (-cfg.noise_term()).exp())? / eta)
}

pub fn opt_a_avg(cfg: &NetworkConfig, eta: f64) -> Result<OptResult> {
    let load = cfg.spatial_load();
    let k = cfg.noise_term();
    if !(load > avg_threshold_load(cfg, eta)?) {
        return Ok(OptResult {
            a_star: 0.0,
            eta_star: eta,
            objective: sa_baseline(cfg, eta)?,
            regime: Regime::NoThreshold,
            p_s_at_opt: (-load * eta - k).exp(),
        });
    }
    let x = load * eta;
    // Stationarity of the time-average AoI in u = 1 + Aηp_s.
    let f = |u: f64| u * u * u - x * u * u + (eta * (-x / u - k).exp() - 1.0) * u - x;
    let mut hi = (2.0 * std::f64::consts::E * load).max(2.0);
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::Bracket {
                what: "time-average threshold",
                lo: 1.0,
                hi,
            });
        }
    }
    let u = bisect("time-average threshold", f, 1.0, hi, 0.0)?;
    let p = (-x / u - k).exp();
    let a = (u - 1.0) / (eta * p);
    Ok(OptResult {
        a_star: a,
        eta_star: eta,
        objective: time_average_aoi(a, eta, p)?,
        regime: Regime::ThresholdActive,
        p_s_at_opt: p,
    })
}

/// `Ω = x³ + 18x + 3√3·√(x⁴ + 11x² − 1)`; `None` when the surd is not real.
pub fn omega_surd(x: f64) -> Option<f64> {
    let disc = x.powi(4) + 11.0 * x * x - 1.0;
    (disc >= 0.0).then(|| x.powi(3) + 18.0 * x + 3.0 * 3f64.sqrt() * disc.sqrt())
}

/// Closed-form near-optimal time-average threshold for a fixed rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormThreshold {
    pub a_tilde: f64,
    pub eta: f64,
    pub objective: f64,
    pub omega: f64,
    /// `1 + Ãηp_s`, the real root of `u³ − xu² − u − x = 0`.
    pub u: f64,
    pub p_s: f64,
}

/// Closed-form threshold from the cubic `u³ − xu² − u − x = 0`. Its AoI is
/// within half a slot of the exact optimum. Errors in the sparse regime where
/// `Ω` is not real; use [`opt_a_avg`] there.
pub fn subopt_a_avg_closed(cfg: &NetworkConfig, eta: f64) -> Result<ClosedFormThreshold> {
    validate_eta(eta)?;
    let x = cfg.spatial_load() * eta;
    let omega = omega_surd(x)
        .ok_or_else(|| Error::domain(format!("closed-form threshold needs x⁴ + 11x² ≥ 1 (x = λcr²η = {x})")))?;
    let cbrt = omega.cbrt();
    let u = (cbrt * cbrt + x * cbrt + x * x + 3.0) / (3.0 * cbrt);
    let p = (-x / u - cfg.noise_term()).exp();
    let q = eta * p;
    Ok(ClosedFormThreshold {
        a_tilde: (u - 1.0) / q,
        eta,
        objective: (u * u + 1.0) / (2.0 * q * u) + 0.5 - 1.0 / (2.0 * u),
        omega,
        u,
        p_s: p,
    })
}

/// Joint time-average optimum in closed form: full rate, threshold from the
/// cubic. Falls back to the exact full-rate optimizer when the closed form is
/// not real. [`alternating_optimize_avg`] gives the exact joint optimum.
pub fn opt_joint_avg(cfg: &NetworkConfig) -> Result<OptResult> {
    let load = cfg.spatial_load();
    if !(load > avg_threshold_load(cfg, 1.0)?) {
        return opt_a_avg(cfg, 1.0);
    }
    match subopt_a_avg_closed(cfg, 1.0) {
        Ok(c) => Ok(OptResult {
            a_star: c.a_tilde,
            eta_star: 1.0,
            objective: c.objective,
            regime: Regime::ClosedForm,
            p_s_at_opt: c.p_s,
        }),
        Err(Error::Domain(_)) => opt_a_avg(cfg, 1.0),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingRun {
    pub result: OptResult,
    pub start_eta: f64,
    pub rounds: usize,
    /// Objective after every half-step: threshold step, rate step, threshold step, ...
    pub history: Vec<f64>,
}

pub const DEFAULT_ALTERNATING_SEED: u64 = 0x7a5a;

/// Alternating minimization of the time-average AoI: start from a random
/// rate, then alternately optimize the threshold for the current rate and the
/// rate for the current threshold until one round changes the objective by
/// less than `tol`.
pub fn alternating_optimize_avg(cfg: &NetworkConfig, tol: f64, max_rounds: usize, seed: u64) -> Result<AlternatingRun> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0 (got {tol})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start_eta = 1.0 - rng.random::<f64>();
    alternating_from(cfg, start_eta, tol, max_rounds)
}

/// [`alternating_optimize_avg`] from a given starting rate.
pub fn alternating_from(cfg: &NetworkConfig, start_eta: f64, tol: f64, max_rounds: usize) -> Result<AlternatingRun> {
    validate_eta(start_eta)?;
    let mut eta = start_eta;
    let mut history = Vec::new();
    for round in 1..=max_rounds {
        let a_step = opt_a_avg(cfg, eta)?;
        let eta_step = opt_eta_avg(cfg, a_step.a_star)?;
        history.push(a_step.objective);
        history.push(eta_step.objective);
        eta = eta_step.eta_star;
        if (eta_step.objective - a_step.objective).abs() < tol {
            let best = if a_step.objective < eta_step.objective {
                a_step
            } else {
                eta_step
            };
            return Ok(AlternatingRun {
                result: OptResult {
                    regime: Regime::Alternating,
                    ..best
                },
                start_eta,
                rounds: round,
                history,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "alternating optimization",
        iterations: max_rounds,
        last: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// `λcr²η` where the peak-optimal family meets `A_h`. Independent of every
/// network parameter; about 4.35.
pub fn peak_safe_load_limit() -> Result<f64> {
    let gap = |x: f64| {
        let u = x * (0.5 - (0.25 - 1.0 / x).sqrt());
        (x - 1.0) * std::f64::consts::E - (u - 1.0) * (x / u).exp()
    };
    bisect("safe peak load limit", gap, 4.0 + 1e-9, 10.0, 0.0)
}

/// Peak optimum restricted to the part of the optimal family that cannot
/// fall into the bistable region: `η₁ ≤ min(1, x*/λcr²)`.
pub fn safe_peak_params(cfg: &NetworkConfig) -> Result<(OptResult, Option<(f64, f64)>)> {
    let load = cfg.spatial_load();
    if !(load > 1.0) {
        return opt_joint_peak(cfg);
    }
    let upper = (peak_safe_load_limit()? / load).min(1.0);
    let lower = 1.0 / load;
    if !(upper >= lower) {
        return Err(Error::Precondition("empty bistable-safe rate range".into()));
    }
    let k = cfg.noise_term();
    let mut eta = upper;
    for _ in 0..64 {
        let a = peak_family_threshold(cfg, eta);
        let class = classify_region(cfg, &ProtocolParams::new(eta, a)?)?;
        if class.region != Region::Bistable {
            return Ok((
                OptResult {
                    a_star: a,
                    eta_star: eta,
                    objective: load * (1.0 + k).exp(),
                    regime: Regime::BistableSafe,
                    p_s_at_opt: (-1.0 - k).exp(),
                },
                Some((lower, upper)),
            ));
        }
        // Rounding put the endpoint a hair inside the band.
        eta = lower + (eta - lower) * (1.0 - 1e-9);
    }
    Err(Error::Precondition(
        "no bistable-safe point on the peak-optimal family".into(),
    ))
}

/// `A_h(η)`, continued to the tangency value at `λcr²η = 4` and below.
pub fn upper_threshold_curve(cfg: &NetworkConfig, eta: f64) -> f64 {
    let load = cfg.spatial_load();
    let s = (0.25 - 1.0 / (load * eta)).max(0.0).sqrt();
    (load * (0.5 - s) - 1.0 / eta) * (cfg.noise_term() + 1.0 / (0.5 - s)).exp()
}

fn safe_avg_point(cfg: &NetworkConfig, eta: f64) -> Result<(f64, f64, f64)> {
    let a = upper_threshold_curve(cfg, eta);
    let p = operating_point(cfg, &ProtocolParams::new(eta, a.max(0.0))?)?;
    Ok((a, p, time_average_aoi(a.max(0.0), eta, p)?))
}

/// Derivative of the time-average AoI along `A = A_h(η)` on the high root,
/// from the implicit derivative of the fixed point. Used to confirm that a
/// golden-section result is stationary.
pub fn safe_avg_gradient(cfg: &NetworkConfig, eta: f64) -> Result<f64> {
    let load = cfg.spatial_load();
    let x = load * eta;
    if !(x > 4.0) {
        return Err(Error::domain(format!("A_h needs λcr²η > 4 (got {x})")));
    }
    let s = (0.25 - 1.0 / x).sqrt();
    let (a, p, _) = safe_avg_point(cfg, eta)?;
    let da = (cfg.noise_term() + 1.0 / (0.5 - s)).exp() / (eta * eta);

    let u = 1.0 + a * eta * p;
    // F(p, η) = ln p + Lη/(1 + A(η)ηp) + K = 0
    let f_p = 1.0 / p - load * eta * a * eta / (u * u);
    let f_eta = load / u - load * eta * (da * eta + a) * p / (u * u);
    let dp = -f_eta / f_p;

    let q = eta * p;
    let d_avg_da = 0.5 - (1.0 - q) / (2.0 * u * u);
    let d_avg_dq = -1.0 / (q * q) + a * (a + 1.0) / (2.0 * u * u);
    Ok(d_avg_da * da + d_avg_dq * (p + eta * dp))
}

/// Time-average optimum constrained to `A = A_h(η)`, `η ∈ [4/λcr², 1]`, for
/// configurations whose unconstrained optimum is bistable and therefore at
/// risk of settling on the low steady state.
pub fn safe_avg_params(cfg: &NetworkConfig) -> Result<OptResult> {
    let unconstrained = opt_a_avg(cfg, 1.0)?;
    let region = classify_region(cfg, &unconstrained.params())?.region;
    if region != Region::Bistable {
        return Err(Error::Precondition(format!(
            "the unconstrained time-average optimum is {} (not bistable); use the joint optimizer",
            region.label()
        )));
    }
    let lo = 4.0 / cfg.spatial_load();
    let (eta, _) = golden_section_min(
        |eta| safe_avg_point(cfg, eta).map_or(f64::INFINITY, |v| v.2),
        lo,
        1.0,
        1e-10,
    );
    let (a, p, objective) = safe_avg_point(cfg, eta)?;
    Ok(OptResult {
        a_star: a,
        eta_star: eta,
        objective,
        regime: Regime::BistableSafe,
        p_s_at_opt: p,
    })
}

/// Pick the better of `⌊A⌋` and `⌈A⌉` for deployment.
pub fn round_threshold(cfg: &NetworkConfig, target: Target, a: f64, eta: f64) -> Result<(u64, f64)> {
    let (floor, ceil) = ProtocolParams::new(eta, a)?.rounded_threshold();
    let at_floor = objective_at(cfg, target, floor as f64, eta)?;
    let at_ceil = objective_at(cfg, target, ceil as f64, eta)?;
    Ok(if at_ceil < at_floor {
        (ceil, at_ceil)
    } else {
        (floor, at_floor)
    })
}

/// Exhaustive search over `A ∈ [0, a_max]` (`n_a` points) and
/// `η ∈ {1/n_eta, ..., 1}`, on the steady state reached from `p = 1`.
pub fn grid_search(cfg: &NetworkConfig, target: Target, a_max: f64, n_a: usize, n_eta: usize) -> Result<OptResult> {
    let rows: Result<Vec<OptResult>> = (0..n_a)
        .into_par_iter()
        .map(|i| {
            let a = if n_a > 1 {
                a_max * i as f64 / (n_a - 1) as f64
            } else {
                0.0
            };
            let mut best: Option<OptResult> = None;
            for j in 1..=n_eta {
                let eta = j as f64 / n_eta as f64;
                let params = ProtocolParams::new(eta, a)?;
                let p = operating_point(cfg, &params)?;
                let objective = match target {
                    Target::Peak => mean_peak_aoi(a, eta, p)?,
                    Target::Average => time_average_aoi(a, eta, p)?,
                };
                if best.is_none_or(|b| objective < b.objective) {
                    best = Some(OptResult {
                        a_star: a,
                        eta_star: eta,
                        objective,
                        regime: Regime::FullRate,
                        p_s_at_opt: p,
                    });
                }
            }
            Ok(best.expect("n_eta >= 1"))
        })
        .collect();
    rows?
        .into_iter()
        .min_by(|x, y| x.objective.total_cmp(&y.objective))
        .ok_or_else(|| Error::domain("empty grid"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub load: f64,
    pub avg_opt: f64,
    pub peak_opt: f64,
    pub a_star: f64,
    pub eta_star: f64,
}

impl ScalingPoint {
    pub fn avg_ratio(&self) -> f64 {
        self.avg_opt / self.load
    }

    pub fn peak_ratio(&self) -> f64 {
        self.peak_opt / self.load
    }

    pub fn a_ratio(&self) -> f64 {
        self.a_star / self.load
    }
}

/// Optimal AoI along a sweep of `λcr²` (noise-free only). The average ratio
/// tends to `e/2` under TSA and `e` under SA; the peak ratio tends to `e`.
pub fn scaling_limits(base: &NetworkConfig, loads: &[f64], protocol: Protocol) -> Result<Vec<ScalingPoint>> {
    if base.noise_term() != 0.0 {
        return Err(Error::Precondition(
            "scaling limits assume an interference-limited network (rho = inf)".into(),
        ));
    }
    loads
        .iter()
        .map(|&load| {
            let cfg = base.with_spatial_load(load)?;
            let peak_opt = opt_joint_peak(&cfg)?.0.objective;
            let avg = match protocol {
                Protocol::Tsa => opt_joint_avg(&cfg)?,
                Protocol::Sa => opt_eta_avg(&cfg, 0.0)?,
            };
            Ok(ScalingPoint {
                load,
                avg_opt: avg.objective,
                peak_opt,
                a_star: avg.a_star,
                eta_star: avg.eta_star,
            })
        })
        .collect()
}
