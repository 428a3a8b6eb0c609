//! Closed-form AoI of the typical link at a given operating point.
//!
//! With `q = ηp_s` and `u = 1 + Aq`:
//!
//! - mean peak AoI: `A + 1/q`
//! - time-average AoI: `(A+1)/2 + 1/q − (A+1)/(2u)`
//! - bounds: `LB = (Aq+1)/(2q) + 1/(2qu)`, `UB = LB + 1/2`
//!
//! The metric functions take `p_s` explicitly so the caller decides which
//! steady state to evaluate in the bistable region. [`aoi_report`] resolves it
//! for you and flags when that choice mattered.

use crate::error::{Error, Result};
use crate::fixed_point::{classify_region, Branch, Region};
use crate::network::{validate_eta, NetworkConfig, ProtocolParams};

fn check(a: f64, eta: f64, p_s: f64) -> Result<f64> {
    validate_eta(eta)?;
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::domain(format!(
            "age threshold must be finite and >= 0 (got {a})"
        )));
    }
    if p_s == 0.0 {
        return Err(Error::domain("success probability is zero: the age diverges"));
    }
    if !(p_s > 0.0 && p_s <= 1.0) {
        return Err(Error::domain(format!(
            "success probability must lie in (0, 1] (got {p_s})"
        )));
    }
    Ok(eta * p_s)
}

pub fn mean_peak_aoi(a: f64, eta: f64, p_s: f64) -> Result<f64> {
    let q = check(a, eta, p_s)?;
    Ok(a + 1.0 / q)
}

pub fn time_average_aoi(a: f64, eta: f64, p_s: f64) -> Result<f64> {
    let q = check(a, eta, p_s)?;
    let u = 1.0 + a * q;
    // (A+1)/2·(1 − 1/u) + 1/q, arranged so that A = 0 gives exactly 1/q.
    Ok((a + 1.0) * a * q / (2.0 * u) + 1.0 / q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoiBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds on the time-average AoI; `upper − lower = 1/2`.
pub fn aoi_bounds(a: f64, eta: f64, p_s: f64) -> Result<AoiBounds> {
    let q = check(a, eta, p_s)?;
    let u = 1.0 + a * q;
    let lower = (a * q + 1.0) / (2.0 * q) + 1.0 / (2.0 * q * u);
    Ok(AoiBounds {
        lower,
        upper: lower + 0.5,
    })
}

/// Slotted-ALOHA AoI, `exp(λcr²η + θr^α/ρ)/η`; peak and average coincide.
pub fn sa_baseline(cfg: &NetworkConfig, eta: f64) -> Result<f64> {
    validate_eta(eta)?;
    Ok((cfg.spatial_load() * eta + cfg.noise_term()).exp() / eta)
}

/// Sufficient condition `λcr² ≥ (1 + Aηp_s)/η` for TSA to match or beat SA
/// in mean peak AoI. `false` means no claim either way.
pub fn tsa_beats_sa_peak(cfg: &NetworkConfig, params: &ProtocolParams, p_s_tsa: f64) -> bool {
    let eta = params.eta;
    cfg.spatial_load() >= (1.0 + params.age_threshold * eta * p_s_tsa) / eta
}

/// Sufficient condition `λcr² ≥ (1+A)(1 + Aηp_s)/(2Aη)` for TSA to beat SA in
/// time-average AoI. One-sided like the peak version. Needs `A > 0`.
pub fn tsa_beats_sa_average(cfg: &NetworkConfig, params: &ProtocolParams, p_s_tsa: f64) -> Result<bool> {
    let (a, eta) = (params.age_threshold, params.eta);
    if !(a > 0.0) {
        return Err(Error::Precondition(
            "the time-average comparison needs an age threshold > 0".into(),
        ));
    }
    Ok(cfg.spatial_load() >= (1.0 + a) * (1.0 + a * eta * p_s_tsa) / (2.0 * a * eta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoiReport {
    pub peak: f64,
    pub average: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub p_s_used: f64,
    pub branch_used: Branch,
    pub region: Region,
    /// Set when another steady state exists, so the numbers depend on which
    /// one the network actually settles in.
    pub bistable: bool,
}

fn report(p_s: f64, branch: Branch, region: Region, params: &ProtocolParams) -> Result<AoiReport> {
    let (a, eta) = (params.age_threshold, params.eta);
    let bounds = aoi_bounds(a, eta, p_s)?;
    Ok(AoiReport {
        peak: mean_peak_aoi(a, eta, p_s)?,
        average: time_average_aoi(a, eta, p_s)?,
        lower_bound: bounds.lower,
        upper_bound: bounds.upper,
        p_s_used: p_s,
        branch_used: branch,
        region,
        bistable: matches!(region, Region::Bistable | Region::Boundary),
    })
}

/// Metrics at the steady state reached from `p = 1` (the high branch when
/// it exists).
pub fn aoi_report(cfg: &NetworkConfig, params: &ProtocolParams) -> Result<AoiReport> {
    let class = classify_region(cfg, params)?;
    report(class.attained(), class.attained_branch(), class.region, params)
}

pub fn aoi_report_on_branch(cfg: &NetworkConfig, params: &ProtocolParams, branch: Branch) -> Result<AoiReport> {
    let class = classify_region(cfg, params)?;
    let p = class.root(branch).ok_or(Error::BranchNotPresent {
        branch,
        region: class.region,
    })?;
    report(p, branch, class.region, params)
}
