//! Estimators over the typical link's age trace.

use std::io::Write;

use crate::error::{Error, Result};

/// One post-warmup slot of the typical link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub slot: u64,
    pub age: u64,
    pub attempted: bool,
    pub success: bool,
    pub sinr: f64,
}

pub fn write_trace<W: Write>(out: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["slot", "age", "attempted", "success", "sinr"])?;
    for r in rows {
        w.write_record([
            r.slot.to_string(),
            r.age.to_string(),
            u8::from(r.attempted).to_string(),
            u8::from(r.success).to_string(),
            r.sinr.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Running sums for one block of slots.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Accumulator {
    pub slots: u64,
    pub age_sum: f64,
    pub age_sq_sum: f64,
    pub attempts: u64,
    pub successes: u64,
    pub peak_sum: f64,
}

impl Accumulator {
    pub fn record(&mut self, age: u64, attempted: bool, success: bool) {
        let a = age as f64;
        self.slots += 1;
        self.age_sum += a;
        self.age_sq_sum += a * a;
        if attempted {
            self.attempts += 1;
        }
        if success {
            self.successes += 1;
            self.peak_sum += a;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.slots += other.slots;
        self.age_sum += other.age_sum;
        self.age_sq_sum += other.age_sq_sum;
        self.attempts += other.attempts;
        self.successes += other.successes;
        self.peak_sum += other.peak_sum;
    }

    pub fn p_s(&self) -> f64 {
        self.successes as f64 / self.attempts as f64
    }

    pub fn peak(&self) -> f64 {
        self.peak_sum / self.successes as f64
    }

    pub fn average(&self) -> f64 {
        self.age_sum / self.slots as f64
    }

    pub fn variance(&self) -> f64 {
        let mean = self.average();
        (self.age_sq_sum / self.slots as f64 - mean * mean).max(0.0)
    }
}

/// 95% normal half-width of the mean of `samples`, ignoring non-finite
/// entries. NaN with fewer than two usable samples.
pub(crate) fn ci_halfwidth(samples: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = samples.into_iter().filter(|x| x.is_finite()).collect();
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    1.96 * (var / n as f64).sqrt()
}

/// Population variance of an age series.
pub fn estimate_variance_of_aoi(ages: &[f64]) -> Result<f64> {
    if ages.is_empty() {
        return Err(Error::InsufficientData("empty age trace".into()));
    }
    let n = ages.len() as f64;
    let mean = ages.iter().sum::<f64>() / n;
    Ok(ages.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalMoments {
    /// Mean slots between consecutive deliveries.
    pub mean_j: f64,
    pub second_moment_j: f64,
    /// Mean number of open-gate slots per attempt.
    pub mean_i: f64,
    pub second_moment_i: f64,
    pub deliveries: usize,
    pub attempts: usize,
}

impl IntervalMoments {
    /// Time-average AoI implied by the delivery intervals, `1/2 + E[J²]/(2E[J])`.
    pub fn renewal_average(&self) -> f64 {
        0.5 + self.second_moment_j / (2.0 * self.mean_j)
    }
}

/// Moments of the update interval `J` (slots between deliveries) and of `I`
/// (open-gate slots up to and including each attempt). Partial intervals at
/// the start of the trace are dropped.
pub fn update_interval_moments(trace: &[TraceRow], threshold: f64) -> Result<IntervalMoments> {
    let mut js = Vec::new();
    let mut is = Vec::new();
    let mut last_delivery: Option<u64> = None;
    let mut open_slots = 0u64;
    let mut counting = false;
    for row in trace {
        if row.age as f64 > threshold {
            open_slots += 1;
        }
        if row.attempted {
            if counting {
                is.push(open_slots as f64);
            }
            counting = true;
            open_slots = 0;
        }
        if row.success {
            if let Some(prev) = last_delivery {
                js.push((row.slot - prev) as f64);
            }
            last_delivery = Some(row.slot);
        }
    }
    if js.is_empty() {
        return Err(Error::InsufficientData(
            "need at least two deliveries to measure update intervals".into(),
        ));
    }
    if is.is_empty() {
        return Err(Error::InsufficientData("need at least two attempts".into()));
    }
    let moments = |v: &[f64]| {
        let n = v.len() as f64;
        (v.iter().sum::<f64>() / n, v.iter().map(|x| x * x).sum::<f64>() / n)
    };
    let (mean_j, second_moment_j) = moments(&js);
    let (mean_i, second_moment_i) = moments(&is);
    Ok(IntervalMoments {
        mean_j,
        second_moment_j,
        mean_i,
        second_moment_i,
        deliveries: js.len() + 1,
        attempts: is.len() + 1,
    })
}
