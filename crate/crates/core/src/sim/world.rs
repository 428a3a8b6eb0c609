//! One replication's network state and its slot transition.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use super::{InitialAges, SimConfig};
use crate::error::{Error, Result};
use crate::fixed_point::{classify_region, Branch};
use crate::network::{NetworkConfig, ProtocolParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    /// Current AoI at the link's receiver, in slots (≥ 1).
    pub age: u64,
    pub tx: [f64; 2],
    pub rx: [f64; 2],
    pub is_typical: bool,
}

/// What happened to the typical link in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotOutcome {
    pub slot: u64,
    /// AoI during the slot, before any reset.
    pub age: u64,
    pub attempted: bool,
    pub success: bool,
    /// SINR at the typical receiver; NaN when the typical link was silent.
    pub sinr: f64,
    /// Number of links (typical included) that transmitted.
    pub active_links: usize,
}

pub struct World {
    links: Vec<LinkState>,
    eta: f64,
    threshold: f64,
    theta: f64,
    r: f64,
    alpha: f64,
    noise: f64,
    side: f64,
    torus: bool,
    slot: u64,
    rng: ChaCha8Rng,
    active: Vec<usize>,
    success: Vec<bool>,
}

fn initial_age(rng: &mut ChaCha8Rng, mode: InitialAges, threshold: f64, cycle: f64) -> u64 {
    match mode {
        InitialAges::AllFresh => 1,
        InitialAges::AllExpired => threshold.floor() as u64 + 1,
        InitialAges::Stationary(_) => rng.random_range(1..=cycle.ceil().max(1.0) as u64),
    }
}

impl World {
    /// Fresh state for replication `replication`; the link count is drawn here
    /// and stays fixed for the whole run.
    pub fn new(cfg: &NetworkConfig, params: &ProtocolParams, sim: &SimConfig, replication: u64) -> Result<Self> {
        sim.validate(cfg)?;
        let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
        rng.set_stream(replication);

        let interferers = match sim.interferers {
            Some(n) => n,
            None => {
                let mean = cfg.lambda() * sim.window_side * sim.window_side;
                if mean > 0.0 {
                    let poisson = Poisson::new(mean).map_err(|e| Error::Config(e.to_string()))?;
                    poisson.sample(&mut rng) as usize
                } else {
                    0
                }
            }
        };

        // Mean renewal cycle on the chosen branch, used to spread initial ages.
        let cycle = match sim.initial_ages {
            InitialAges::Stationary(branch) => {
                let class = classify_region(cfg, params)?;
                let p0 = match branch {
                    Branch::Low => class.low.unwrap_or_else(|| class.attained()),
                    Branch::Middle => class.middle.unwrap_or_else(|| class.attained()),
                    Branch::High => class.attained(),
                };
                params.age_threshold + 1.0 / (params.eta * p0)
            }
            _ => 1.0,
        };

        let centre = sim.window_side / 2.0;
        let links = (0..=interferers)
            .map(|i| LinkState {
                age: initial_age(&mut rng, sim.initial_ages, params.age_threshold, cycle),
                tx: [centre, centre],
                rx: [centre, centre],
                is_typical: i == 0,
            })
            .collect();

        Ok(Self {
            links,
            eta: params.eta,
            threshold: params.age_threshold,
            theta: cfg.theta(),
            r: cfg.r(),
            alpha: cfg.alpha(),
            noise: 1.0 / cfg.rho(),
            side: sim.window_side,
            torus: sim.torus,
            slot: 0,
            rng,
            active: Vec::new(),
            success: Vec::new(),
        })
    }

    pub fn links(&self) -> &[LinkState] {
        &self.links
    }

    pub fn typical(&self) -> &LinkState {
        &self.links[0]
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    fn wrap(&self, v: f64) -> f64 {
        if self.torus {
            v.rem_euclid(self.side)
        } else {
            v
        }
    }

    fn place(&mut self, i: usize) {
        let tx = if i == 0 {
            let c = self.side / 2.0;
            [c, c]
        } else {
            [
                self.rng.random::<f64>() * self.side,
                self.rng.random::<f64>() * self.side,
            ]
        };
        let (s, c) = (self.rng.random::<f64>() * TAU).sin_cos();
        let other = [self.wrap(tx[0] + self.r * c), self.wrap(tx[1] + self.r * s)];
        // The typical receiver sits at the centre; its transmitter moves.
        self.links[i] = if i == 0 {
            LinkState {
                tx: other,
                rx: tx,
                ..self.links[i]
            }
        } else {
            LinkState {
                tx,
                rx: other,
                ..self.links[i]
            }
        };
    }

    fn dist_sq(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mut dx = (a[0] - b[0]).abs();
        let mut dy = (a[1] - b[1]).abs();
        if self.torus {
            dx = dx.min(self.side - dx);
            dy = dy.min(self.side - dy);
        }
        dx * dx + dy * dy
    }

    /// Advance one slot and report the typical link's outcome.
    ///
    /// Every link whose age exceeds the threshold flips an `η`-coin. Only
    /// transmitting links get fresh positions: a silent link's position does
    /// not affect anything, and positions are independent across slots.
    pub fn step(&mut self) -> SlotOutcome {
        let slot = self.slot;
        self.active.clear();
        for i in 0..self.links.len() {
            let open = self.links[i].age as f64 > self.threshold;
            if open && (self.eta >= 1.0 || self.rng.random::<f64>() < self.eta) {
                self.active.push(i);
            }
        }
        for k in 0..self.active.len() {
            self.place(self.active[k]);
        }

        let signal_gain = self.r.powf(-self.alpha);
        let half_alpha = self.alpha / 2.0;
        self.success.clear();
        let mut typical_sinr = f64::NAN;
        for k in 0..self.active.len() {
            let i = self.active[k];
            let is_typical = i == 0;
            let signal: f64 = Exp1.sample(&mut self.rng);
            let signal = signal * signal_gain;
            // Past this level of interference the link cannot decode.
            let cutoff = signal / self.theta - self.noise;
            let mut interference = 0.0;
            for k2 in 0..self.active.len() {
                let j = self.active[k2];
                if j == i {
                    continue;
                }
                let fade: f64 = Exp1.sample(&mut self.rng);
                interference += fade * self.dist_sq(self.links[j].tx, self.links[i].rx).powf(-half_alpha);
                if !is_typical && interference >= cutoff {
                    break;
                }
            }
            let sinr = signal / (interference + self.noise);
            if is_typical {
                typical_sinr = sinr;
            }
            self.success.push(sinr > self.theta);
        }

        let typical = self.links[0];
        let mut outcome = SlotOutcome {
            slot,
            age: typical.age,
            attempted: false,
            success: false,
            sinr: typical_sinr,
            active_links: self.active.len(),
        };
        for link in &mut self.links {
            link.age += 1;
        }
        for (k, &i) in self.active.iter().enumerate() {
            if i == 0 {
                outcome.attempted = true;
                outcome.success = self.success[k];
            }
            if self.success[k] {
                self.links[i].age = 1;
            }
        }
        self.slot += 1;
        outcome
    }
}
