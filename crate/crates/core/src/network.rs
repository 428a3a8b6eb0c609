//! Network geometry, physical-layer parameters and TSA protocol knobs.
//!
//! All quantities are stored in linear units; dB conversion happens at the
//! edges (CLI, presets) through [`db_to_linear`].

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Dimensionless spatial contention `c = π θ^{2/α} Γ(1 − 2/α) Γ(1 + 2/α)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SpatialContention(f64);

impl SpatialContention {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn spatial_contention(theta: f64, alpha: f64) -> Result<SpatialContention> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "path-loss exponent must be finite and > 2 (got {alpha})"
        )));
    }
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::domain(format!(
            "SINR threshold must be finite and >= 0 (got {theta})"
        )));
    }
    if theta == 0.0 {
        return Ok(SpatialContention(0.0));
    }
    let delta = 2.0 / alpha;
    Ok(SpatialContention(
        PI * theta.powf(delta) * gamma(1.0 - delta) * gamma(1.0 + delta),
    ))
}

/// Immutable description of the Poisson bipolar network.
///
/// `rho` may be `f64::INFINITY` for the interference-limited case, in which
/// case the noise term vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    lambda: f64,
    r: f64,
    theta: f64,
    rho: f64,
    alpha: f64,
    contention: f64,
}

impl NetworkConfig {
    pub fn new(lambda: f64, r: f64, theta: f64, rho: f64, alpha: f64) -> Result<Self> {
        // lambda = 0 is accepted as the degenerate interference-free network.
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("density must be finite and >= 0 (got {lambda})")));
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain(format!("link distance must be finite and > 0 (got {r})")));
        }
        if !(rho > 0.0) {
            return Err(Error::domain(format!("SNR must be > 0 (got {rho})")));
        }
        let contention = spatial_contention(theta, alpha)?.value();
        Ok(Self {
            lambda,
            r,
            theta,
            rho,
            alpha,
            contention,
        })
    }

    /// Same as [`NetworkConfig::new`] with the threshold and SNR given in dB.
    pub fn from_db(lambda: f64, r: f64, theta_db: f64, snr_db: f64, alpha: f64) -> Result<Self> {
        Self::new(lambda, r, db_to_linear(theta_db), db_to_linear(snr_db), alpha)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn contention(&self) -> SpatialContention {
        SpatialContention(self.contention)
    }

    /// The interference level `λ c r²` that drives every closed form.
    pub fn spatial_load(&self) -> f64 {
        self.lambda * self.contention * self.r * self.r
    }

    /// `θ r^α / ρ`; zero in the noise-free case.
    pub fn noise_term(&self) -> f64 {
        if self.rho.is_infinite() {
            0.0
        } else {
            self.theta * self.r.powf(self.alpha) / self.rho
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(lambda, self.r, self.theta, self.rho, self.alpha)
    }

    /// Rescales the density so that `λ c r²` equals `load`.
    pub fn with_spatial_load(&self, load: f64) -> Result<Self> {
        let per_density = self.contention * self.r * self.r;
        if per_density == 0.0 {
            return Err(Error::domain(
                "cannot set a spatial load when the contention is zero (theta = 0)",
            ));
        }
        self.with_lambda(load / per_density)
    }
}

/// TSA control knobs: update rate `eta` in (0, 1] and age threshold `A >= 0`.
///
/// The threshold is real-valued for analysis; [`ProtocolParams::rounded_threshold`]
/// gives the integer candidates used for deployment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub eta: f64,
    pub age_threshold: f64,
}

impl ProtocolParams {
    pub fn new(eta: f64, age_threshold: f64) -> Result<Self> {
        validate_eta(eta)?;
        if !(age_threshold >= 0.0) || !age_threshold.is_finite() {
            return Err(Error::domain(format!(
                "age threshold must be finite and >= 0 (got {age_threshold})"
            )));
        }
        Ok(Self { eta, age_threshold })
    }

    /// Plain slotted ALOHA: no threshold.
    pub fn slotted_aloha(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0)
    }

    /// Floor and ceiling of the threshold, for picking an integer deployment value.
    pub fn rounded_threshold(&self) -> (u64, u64) {
        (self.age_threshold.floor() as u64, self.age_threshold.ceil() as u64)
    }
}

pub(crate) fn validate_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("update rate must lie in (0, 1] (got {eta})")))
    }
}

pub(crate) fn validate_probability(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("probability must lie in (0, 1] (got {p})")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn contention_at_zero_threshold_is_zero() {
        assert_eq!(spatial_contention(0.0, 3.8).unwrap().value(), 0.0);
    }

    #[test]
    fn contention_alpha_four_is_half_pi_squared() {
        let c = spatial_contention(1.0, 4.0).unwrap().value();
        assert_relative_eq!(c, PI * PI / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn contention_matches_reflection_formula() {
        // Γ(1 − x)Γ(1 + x) = πx / sin(πx), no Gamma evaluation involved.
        for &alpha in &[2.5, 3.0, 3.8, 4.5, 6.0] {
            for &theta in &[0.1, 1.0, 3.0] {
                let x = 2.0 / alpha;
                let reference = PI * f64::powf(theta, x) * PI * x / (PI * x).sin();
                let c = spatial_contention(theta, alpha).unwrap().value();
                assert_relative_eq!(c, reference, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn contention_rejects_bad_inputs() {
        assert!(matches!(spatial_contention(1.0, 2.0), Err(Error::Domain(_))));
        assert!(matches!(spatial_contention(1.0, 1.5), Err(Error::Domain(_))));
        assert!(matches!(spatial_contention(-0.1, 3.8), Err(Error::Domain(_))));
    }

    #[test]
    fn infinite_snr_has_no_noise() {
        let cfg = NetworkConfig::new(0.1, 3.0, 1.0, f64::INFINITY, 3.8).unwrap();
        assert_eq!(cfg.noise_term(), 0.0);
    }

    #[test]
    fn db_conversion_roundtrip() {
        assert_relative_eq!(db_to_linear(20.0), 100.0, max_relative = 1e-14);
        assert_relative_eq!(linear_to_db(db_to_linear(-3.0)), -3.0, max_relative = 1e-12);
        assert_eq!(db_to_linear(0.0), 1.0);
    }

    #[test]
    fn with_spatial_load_hits_target() {
        let cfg = NetworkConfig::new(0.1, 3.0, 1.0, f64::INFINITY, 3.8).unwrap();
        let scaled = cfg.with_spatial_load(100.0).unwrap();
        assert_relative_eq!(scaled.spatial_load(), 100.0, max_relative = 1e-13);
    }

    #[test]
    fn protocol_validation() {
        assert!(ProtocolParams::new(0.0, 1.0).is_err());
        assert!(ProtocolParams::new(1.1, 1.0).is_err());
        assert!(ProtocolParams::new(0.5, -1.0).is_err());
        assert_eq!(ProtocolParams::new(1.0, 3.4).unwrap().rounded_threshold(), (3, 4));
    }
}
