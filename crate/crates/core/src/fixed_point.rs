//! The transmission-success fixed point
//!
//! ```text
//! p = exp(−λcηr² / (1 + Aηp) − θr^α/ρ)
//! ```
//!
//! and everything derived from it: bracketed root solving, plain fixed-point
//! iteration, the stability thresholds `A_l` / `A_h` and the region taxonomy
//! (bistable / monostable-high / monostable-low / boundary).
//!
//! Roots are found by bisection on the auxiliary function
//! `f(p) = −ln p − M/(N + p) − K` with `M = λcr²/A`, `N = 1/(Aη)` and
//! `K = θr^α/ρ`. Its derivative has the sign of a concave quadratic `φ(p)`, so
//! the zeros of `φ` cut `(0, 1]` into at most three monotone pieces, each
//! holding at most one root. Bisection runs in `ln p` so that very small
//! low-branch roots keep full relative precision.

use crate::error::{Error, Result};
use crate::network::{validate_eta, validate_probability, NetworkConfig, ProtocolParams};
use crate::numeric::bisect;

/// Relative tolerance used to decide that `A` sits on `A_l` or `A_h`.
pub const BOUNDARY_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Low,
    Middle,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Two attainable steady states, `p_L < p_H`, separated by `p_M`.
    Bistable,
    /// A single steady state reached from any start; the high-efficiency one.
    MonoHigh,
    /// A single steady state; the low-efficiency one (`λcr²η > 4`, `A < A_l`).
    MonoLow,
    /// `A` equals `A_l` or `A_h`: a simple root plus a double (tangent) root.
    Boundary,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::Bistable => "bistable",
            Region::MonoHigh => "mono-high",
            Region::MonoLow => "mono-low",
            Region::Boundary => "boundary",
        }
    }
}

/// Constants of the auxiliary function `f(p) = −ln p − M/(N + p) − K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointProblem {
    pub m: f64,
    pub n: f64,
    pub k: f64,
}

impl FixedPointProblem {
    /// `None` when `A = 0`, where the equation is explicit and `M`, `N` diverge.
    pub fn new(cfg: &NetworkConfig, params: &ProtocolParams) -> Option<Self> {
        let a = params.age_threshold;
        if a <= 0.0 {
            return None;
        }
        Some(Self {
            m: cfg.spatial_load() / a,
            n: 1.0 / (a * params.eta),
            k: cfg.noise_term(),
        })
    }

    pub fn aux(&self, p: f64) -> f64 {
        -p.ln() - self.m / (self.n + p) - self.k
    }

    fn aux_log(&self, q: f64) -> f64 {
        -q - self.m / (self.n + q.exp()) - self.k
    }

    /// Numerator of `f'(p)`; `f' = φ / (p (N + p)²)`.
    pub fn phi(&self, p: f64) -> f64 {
        let shifted = p + self.n - self.m / 2.0;
        -shifted * shifted + self.m * self.m / 4.0 - self.m * self.n
    }

    /// Zeros of `φ` strictly inside `(0, 1)`, ascending.
    pub fn stationary_points(&self) -> Vec<f64> {
        let disc = self.m * self.m / 4.0 - self.m * self.n;
        if disc <= 0.0 {
            return Vec::new();
        }
        let centre = self.m / 2.0 - self.n;
        let half = disc.sqrt();
        [centre - half, centre + half]
            .into_iter()
            .filter(|&p| p > 0.0 && p < 1.0)
            .collect()
    }

    /// All zeros of `f` in `(0, 1]`, ascending.
    fn roots(&self) -> Result<Vec<f64>> {
        // f(e^q) > 0 for q below -(M/N + K + 1) since M/(N + p) < M/N.
        let q_floor = -(self.m / self.n + self.k + 1.0);
        let mut cuts = vec![q_floor];
        cuts.extend(self.stationary_points().into_iter().map(f64::ln));
        cuts.push(0.0);

        let mut roots: Vec<f64> = Vec::with_capacity(3);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (flo, fhi) = (self.aux_log(lo), self.aux_log(hi));
            let q = if flo == 0.0 {
                Some(lo)
            } else if fhi == 0.0 {
                Some(hi)
            } else if flo.signum() != fhi.signum() {
                Some(bisect("success-probability root", |q| self.aux_log(q), lo, hi, 0.0)?)
            } else {
                None
            };
            if let Some(q) = q {
                let p = q.exp();
                if roots.last().is_none_or(|&last| p > last) {
                    roots.push(p);
                }
            }
        }
        Ok(roots)
    }
}

/// Right-hand side of the fixed-point equation.
pub fn fixed_point_map(cfg: &NetworkConfig, params: &ProtocolParams, p: f64) -> f64 {
    let load = cfg.spatial_load() * params.eta;
    (-load / (1.0 + params.age_threshold * params.eta * p) - cfg.noise_term()).exp()
}

/// `p − map(p)`; zero exactly at a solution.
pub fn fixed_point_residual(cfg: &NetworkConfig, params: &ProtocolParams, p: f64) -> Result<f64> {
    validate_probability(p)?;
    Ok(p - fixed_point_map(cfg, params, p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Iteration {
    pub p_s: f64,
    pub iterations: usize,
    /// `p0, p1, ...` when recording was requested.
    pub trajectory: Option<Vec<f64>>,
}

/// Plain fixed-point iteration `p_{n+1} = map(p_n)` from `p0`, stopping once
/// `|p_{n+1} − p_n| < tol`.
///
/// In the bistable region the limit depends on which side of the middle root
/// `p0` lies. Starting exactly on the middle root is not guaranteed to stay
/// there.
pub fn fixed_point_iterate(
    cfg: &NetworkConfig,
    params: &ProtocolParams,
    p0: f64,
    tol: f64,
    max_iter: usize,
    record: bool,
) -> Result<Iteration> {
    validate_probability(p0)?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be > 0 (got {tol})")));
    }
    let mut trajectory = record.then(|| vec![p0]);
    let mut p = p0;
    for n in 1..=max_iter {
        let next = fixed_point_map(cfg, params, p);
        if let Some(t) = trajectory.as_mut() {
            t.push(next);
        }
        if (next - p).abs() < tol {
            return Ok(Iteration {
                p_s: next,
                iterations: n,
                trajectory,
            });
        }
        p = next;
    }
    Err(Error::NonConvergence {
        what: "fixed-point iteration",
        iterations: max_iter,
        last: p,
    })
}

/// `A_l < A_h`, the thresholds delimiting the bistable band for a given `η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityThresholds {
    pub low: f64,
    pub high: f64,
    /// `√(1/4 − 1/(λcr²η))`.
    spread: f64,
    noise: f64,
}

impl StabilityThresholds {
    /// The double root at `A = A_l`; also a strict lower bound on `p_H`.
    pub fn tangent_p_at_low(&self) -> f64 {
        (-self.noise - 1.0 / (0.5 + self.spread)).exp()
    }

    /// The double root at `A = A_h`; also a strict upper bound on `p_L`.
    pub fn tangent_p_at_high(&self) -> f64 {
        (-self.noise - 1.0 / (0.5 - self.spread)).exp()
    }
}

/// `None` unless `λcr²η > 4`; otherwise the pair `(A_l, A_h)`.
pub fn stability_thresholds(cfg: &NetworkConfig, eta: f64) -> Option<StabilityThresholds> {
    let load = cfg.spatial_load();
    let x = load * eta;
    if !(x > 4.0) {
        return None;
    }
    let spread = (0.25 - 1.0 / x).sqrt();
    let noise = cfg.noise_term();
    let threshold = |half: f64| (load * half - 1.0 / eta) * (noise + 1.0 / half).exp();
    Some(StabilityThresholds {
        low: threshold(0.5 + spread),
        high: threshold(0.5 - spread),
        spread,
        noise,
    })
}

fn near(a: f64, target: f64) -> bool {
    (a - target).abs() < BOUNDARY_RTOL * a.max(1.0)
}

/// Region label, attached roots and thresholds for one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionClassification {
    pub region: Region,
    pub low: Option<f64>,
    /// Only present in [`Region::Bistable`]; not a steady state.
    pub middle: Option<f64>,
    pub high: Option<f64>,
    pub thresholds: Option<StabilityThresholds>,
}

impl RegionClassification {
    pub fn root(&self, branch: Branch) -> Option<f64> {
        match branch {
            Branch::Low => self.low,
            Branch::Middle => self.middle,
            Branch::High => self.high,
        }
    }

    /// Roots in ascending order.
    pub fn roots(&self) -> Vec<f64> {
        [self.low, self.middle, self.high].into_iter().flatten().collect()
    }

    /// The steady state that iteration from `p = 1` converges to.
    pub fn attained(&self) -> f64 {
        self.high
            .or(self.low)
            .expect("every classification carries at least one root")
    }

    pub fn attained_branch(&self) -> Branch {
        if self.high.is_some() {
            Branch::High
        } else {
            Branch::Low
        }
    }
}

fn all_roots(cfg: &NetworkConfig, params: &ProtocolParams) -> Result<Vec<f64>> {
    match FixedPointProblem::new(cfg, params) {
        Some(problem) => problem.roots(),
        None => Ok(vec![fixed_point_map(cfg, params, 1.0)]),
    }
}

pub fn classify_region(cfg: &NetworkConfig, params: &ProtocolParams) -> Result<RegionClassification> {
    validate_eta(params.eta)?;
    let thresholds = stability_thresholds(cfg, params.eta);
    let roots = all_roots(cfg, params)?;
    let smallest = roots[0];
    let largest = *roots.last().unwrap();
    let a = params.age_threshold;

    let mut out = RegionClassification {
        region: Region::MonoHigh,
        low: None,
        middle: None,
        high: None,
        thresholds,
    };
    let Some(t) = thresholds else {
        out.high = Some(largest);
        return Ok(out);
    };

    let problem = FixedPointProblem::new(cfg, params);
    let stationary = problem.map(|p| p.stationary_points()).unwrap_or_default();
    if near(a, t.low) {
        // High and middle roots merge at the upper stationary point of f.
        out.region = Region::Boundary;
        out.low = Some(smallest);
        out.high = Some(if roots.len() == 3 {
            largest
        } else {
            stationary.last().copied().unwrap_or_else(|| t.tangent_p_at_low())
        });
    } else if near(a, t.high) {
        // Low and middle roots merge at the lower stationary point.
        out.region = Region::Boundary;
        out.high = Some(largest);
        out.low = Some(if roots.len() == 3 {
            smallest
        } else {
            stationary.first().copied().unwrap_or_else(|| t.tangent_p_at_high())
        });
    } else if a < t.low {
        out.region = Region::MonoLow;
        out.low = Some(largest);
    } else if a > t.high {
        out.high = Some(largest);
    } else if roots.len() == 3 {
        out.region = Region::Bistable;
        out.low = Some(roots[0]);
        out.middle = Some(roots[1]);
        out.high = Some(roots[2]);
    } else {
        // Inside the band but the roots are numerically merged.
        out.region = Region::Boundary;
        out.low = Some(smallest);
        out.high = Some(largest);
    }
    Ok(out)
}

/// The root on the requested branch, or [`Error::BranchNotPresent`].
pub fn solve_branch(cfg: &NetworkConfig, params: &ProtocolParams, branch: Branch) -> Result<f64> {
    let class = classify_region(cfg, params)?;
    class.root(branch).ok_or(Error::BranchNotPresent {
        branch,
        region: class.region,
    })
}

/// The steady state reached by iteration from `p = 1`: the high root when it
/// exists, otherwise the unique low root.
pub fn operating_point(cfg: &NetworkConfig, params: &ProtocolParams) -> Result<f64> {
    validate_eta(params.eta)?;
    let roots = all_roots(cfg, params)?;
    Ok(*roots.last().unwrap())
}

/// `exp(√(x² − 4x))` with `x = λcr²η`: a strict lower bound on `p_H / p_L`
/// anywhere in the bistable region.
pub fn bistable_ratio_bound(cfg: &NetworkConfig, eta: f64) -> Result<f64> {
    validate_eta(eta)?;
    let x = cfg.spatial_load() * eta;
    if !(x > 4.0) {
        return Err(Error::domain(format!("bistability needs λcr²η > 4 (got {x})")));
    }
    Ok((x * x - 4.0 * x).sqrt().exp())
}
