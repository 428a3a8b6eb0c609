//! Python module `tsa_aoi`: the analytic solvers, AoI metrics, optimizers
//! and the simulator, with results returned as read-only objects.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::tsa_aoi as core;
use core::{Branch, InitialAges, ProtocolParams, SimConfig};

create_exception!(tsa_aoi, NonConvergenceError, PyRuntimeError);

/// `(slot, age, attempted, success, sinr)`
type TraceTuple = (u64, u64, bool, bool, f64);
/// `(load, avg_opt, peak_opt, a_star, eta_star)`
type ScalingTuple = (f64, f64, f64, f64, f64);

fn py_err(e: core::Error) -> PyErr {
    match e {
        core::Error::NonConvergence { .. } => NonConvergenceError::new_err(e.to_string()),
        core::Error::Io(_) | core::Error::Csv(_) => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn branch(name: &str) -> PyResult<Branch> {
    match name {
        "high" => Ok(Branch::High),
        "middle" => Ok(Branch::Middle),
        "low" => Ok(Branch::Low),
        other => Err(PyValueError::new_err(format!(
            "branch must be 'high', 'middle' or 'low' (got '{other}')"
        ))),
    }
}

fn branch_label(b: Branch) -> &'static str {
    match b {
        Branch::High => "high",
        Branch::Middle => "middle",
        Branch::Low => "low",
    }
}

fn params(eta: f64, age_threshold: f64) -> PyResult<ProtocolParams> {
    ProtocolParams::new(eta, age_threshold).map_err(py_err)
}

/// Poisson bipolar network. `rho` may be `float('inf')`.
#[pyclass(frozen, name = "NetworkConfig")]
struct Network(core::NetworkConfig);

#[pymethods]
impl Network {
    #[new]
    #[pyo3(signature = (lam, r, theta, rho, alpha))]
    fn new(lam: f64, r: f64, theta: f64, rho: f64, alpha: f64) -> PyResult<Self> {
        core::NetworkConfig::new(lam, r, theta, rho, alpha)
            .map(Self)
            .map_err(py_err)
    }

    /// Same as the constructor with the SINR threshold and SNR in dB.
    #[staticmethod]
    fn from_db(lam: f64, r: f64, theta_db: f64, snr_db: f64, alpha: f64) -> PyResult<Self> {
        core::NetworkConfig::from_db(lam, r, theta_db, snr_db, alpha)
            .map(Self)
            .map_err(py_err)
    }

    /// Copy with the density rescaled to hit the given `λcr²`.
    fn with_spatial_load(&self, load: f64) -> PyResult<Self> {
        self.0.with_spatial_load(load).map(Self).map_err(py_err)
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.0.r()
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn contention(&self) -> f64 {
        self.0.contention().value()
    }

    #[getter]
    fn spatial_load(&self) -> f64 {
        self.0.spatial_load()
    }

    #[getter]
    fn noise_term(&self) -> f64 {
        self.0.noise_term()
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkConfig(lam={}, r={}, theta={}, rho={}, alpha={})",
            self.0.lambda(),
            self.0.r(),
            self.0.theta(),
            self.0.rho(),
            self.0.alpha()
        )
    }
}

#[pyclass(frozen, get_all)]
struct Classification {
    region: &'static str,
    low: Option<f64>,
    middle: Option<f64>,
    high: Option<f64>,
    a_low: Option<f64>,
    a_high: Option<f64>,
    attained: f64,
}

#[pymethods]
impl Classification {
    fn __repr__(&self) -> String {
        format!(
            "Classification(region='{}', low={:?}, middle={:?}, high={:?})",
            self.region, self.low, self.middle, self.high
        )
    }
}

#[pyclass(frozen, get_all)]
struct AoiReport {
    peak: f64,
    average: f64,
    lower_bound: f64,
    upper_bound: f64,
    p_s: f64,
    branch: &'static str,
    region: &'static str,
    bistable: bool,
}

#[pymethods]
impl AoiReport {
    fn __repr__(&self) -> String {
        format!(
            "AoiReport(peak={}, average={}, p_s={}, branch='{}', region='{}')",
            self.peak, self.average, self.p_s, self.branch, self.region
        )
    }
}

#[pyclass(frozen, get_all)]
struct OptResult {
    a_star: f64,
    eta_star: f64,
    objective: f64,
    regime: &'static str,
    p_s: f64,
    eta_range: Option<(f64, f64)>,
}

#[pymethods]
impl OptResult {
    fn __repr__(&self) -> String {
        format!(
            "OptResult(a_star={}, eta_star={}, objective={}, regime='{}')",
            self.a_star, self.eta_star, self.objective, self.regime
        )
    }
}

impl OptResult {
    fn from(r: core::OptResult, eta_range: Option<(f64, f64)>) -> Self {
        Self {
            a_star: r.a_star,
            eta_star: r.eta_star,
            objective: r.objective,
            regime: r.regime.label(),
            p_s: r.p_s_at_opt,
            eta_range,
        }
    }
}

#[pyclass(frozen, get_all)]
struct SimResult {
    p_s: f64,
    p_s_ci: f64,
    peak: f64,
    peak_ci: f64,
    average: f64,
    average_ci: f64,
    variance: f64,
    variance_ci: f64,
    attempts: u64,
    successes: u64,
    slots_measured: u64,
    link_counts: Vec<usize>,
    nearest_branch: Option<&'static str>,
    /// Present when a trace was requested.
    trace: Option<Vec<TraceTuple>>,
}

#[pymethods]
impl SimResult {
    fn __repr__(&self) -> String {
        format!(
            "SimResult(p_s={} ± {}, peak={} ± {}, average={} ± {})",
            self.p_s, self.p_s_ci, self.peak, self.peak_ci, self.average, self.average_ci
        )
    }
}

#[pyfunction]
fn spatial_contention(theta: f64, alpha: f64) -> PyResult<f64> {
    core::spatial_contention(theta, alpha)
        .map(|c| c.value())
        .map_err(py_err)
}

#[pyfunction]
fn lambert_w0(x: f64) -> PyResult<f64> {
    core::lambert_w0(x).map_err(py_err)
}

#[pyfunction]
fn classify_region(cfg: &Network, eta: f64, age_threshold: f64) -> PyResult<Classification> {
    let c = core::classify_region(&cfg.0, &params(eta, age_threshold)?).map_err(py_err)?;
    Ok(Classification {
        region: c.region.label(),
        low: c.low,
        middle: c.middle,
        high: c.high,
        a_low: c.thresholds.map(|t| t.low),
        a_high: c.thresholds.map(|t| t.high),
        attained: c.attained(),
    })
}

/// `(A_l, A_h)`, or `None` when the network is too sparse to be bistable.
#[pyfunction]
fn stability_thresholds(cfg: &Network, eta: f64) -> Option<(f64, f64)> {
    core::stability_thresholds(&cfg.0, eta).map(|t| (t.low, t.high))
}

#[pyfunction]
#[pyo3(signature = (cfg, eta, age_threshold, branch_name = "high"))]
fn solve_branch(cfg: &Network, eta: f64, age_threshold: f64, branch_name: &str) -> PyResult<f64> {
    core::solve_branch(&cfg.0, &params(eta, age_threshold)?, branch(branch_name)?).map_err(py_err)
}

#[pyfunction]
fn operating_point(cfg: &Network, eta: f64, age_threshold: f64) -> PyResult<f64> {
    core::operating_point(&cfg.0, &params(eta, age_threshold)?).map_err(py_err)
}

/// Plain fixed-point iteration; returns `(p_s, iterations)`.
#[pyfunction]
#[pyo3(signature = (cfg, eta, age_threshold, p0 = 1.0, tol = 1e-12, max_iter = 1_000_000))]
fn fixed_point_iterate(
    cfg: &Network,
    eta: f64,
    age_threshold: f64,
    p0: f64,
    tol: f64,
    max_iter: usize,
) -> PyResult<(f64, usize)> {
    let it =
        core::fixed_point_iterate(&cfg.0, &params(eta, age_threshold)?, p0, tol, max_iter, false).map_err(py_err)?;
    Ok((it.p_s, it.iterations))
}

#[pyfunction]
fn mean_peak_aoi(age_threshold: f64, eta: f64, p_s: f64) -> PyResult<f64> {
    core::mean_peak_aoi(age_threshold, eta, p_s).map_err(py_err)
}

#[pyfunction]
fn time_average_aoi(age_threshold: f64, eta: f64, p_s: f64) -> PyResult<f64> {
    core::time_average_aoi(age_threshold, eta, p_s).map_err(py_err)
}

/// `(lower, upper)` bounds on the time-average AoI.
#[pyfunction]
fn aoi_bounds(age_threshold: f64, eta: f64, p_s: f64) -> PyResult<(f64, f64)> {
    let b = core::aoi_bounds(age_threshold, eta, p_s).map_err(py_err)?;
    Ok((b.lower, b.upper))
}

#[pyfunction]
fn sa_baseline(cfg: &Network, eta: f64) -> PyResult<f64> {
    core::sa_baseline(&cfg.0, eta).map_err(py_err)
}

/// Metrics at the attained steady state, or on `branch_name` when given.
#[pyfunction]
#[pyo3(signature = (cfg, eta, age_threshold, branch_name = None))]
fn aoi_report(cfg: &Network, eta: f64, age_threshold: f64, branch_name: Option<&str>) -> PyResult<AoiReport> {
    let p = params(eta, age_threshold)?;
    let r = match branch_name {
        None => core::aoi_report(&cfg.0, &p),
        Some(b) => core::aoi_report_on_branch(&cfg.0, &p, branch(b)?),
    }
    .map_err(py_err)?;
    Ok(AoiReport {
        peak: r.peak,
        average: r.average,
        lower_bound: r.lower_bound,
        upper_bound: r.upper_bound,
        p_s: r.p_s_used,
        branch: branch_label(r.branch_used),
        region: r.region.label(),
        bistable: r.bistable,
    })
}

#[pyfunction]
fn opt_eta_peak(cfg: &Network, age_threshold: f64) -> PyResult<OptResult> {
    core::opt_eta_peak(&cfg.0, age_threshold)
        .map(|r| OptResult::from(r, None))
        .map_err(py_err)
}

#[pyfunction]
fn opt_a_peak(cfg: &Network, eta: f64) -> PyResult<OptResult> {
    core::opt_a_peak(&cfg.0, eta)
        .map(|r| OptResult::from(r, None))
        .map_err(py_err)
}

#[pyfunction]
fn opt_joint_peak(cfg: &Network) -> PyResult<OptResult> {
    core::opt_joint_peak(&cfg.0)
        .map(|(r, range)| OptResult::from(r, range))
        .map_err(py_err)
}

#[pyfunction]
fn opt_eta_avg(cfg: &Network, age_threshold: f64) -> PyResult<OptResult> {
    core::opt_eta_avg(&cfg.0, age_threshold)
        .map(|r| OptResult::from(r, None))
        .map_err(py_err)
}

#[pyfunction]
fn opt_a_avg(cfg: &Network, eta: f64) -> PyResult<OptResult> {
    core::opt_a_avg(&cfg.0, eta)
        .map(|r| OptResult::from(r, None))
        .map_err(py_err)
}

/// Closed-form joint average optimum at full rate.
#[pyfunction]
fn opt_joint_avg(cfg: &Network) -> PyResult<OptResult> {
    core::opt_joint_avg(&cfg.0)
        .map(|r| OptResult::from(r, None))
        .map_err(py_err)
}

/// Closed-form near-optimal threshold; returns `(A, objective)`.
#[pyfunction]
fn subopt_a_avg_closed(cfg: &Network, eta: f64) -> PyResult<(f64, f64)> {
    let c = core::subopt_a_avg_closed(&cfg.0, eta).map_err(py_err)?;
    Ok((c.a_tilde, c.objective))
}

/// Alternating joint optimization; returns the result and the number of rounds.
#[pyfunction]
#[pyo3(signature = (cfg, tol = 1e-9, max_rounds = 100_000, seed = core::optimize::DEFAULT_ALTERNATING_SEED))]
fn alternating_optimize_avg(cfg: &Network, tol: f64, max_rounds: usize, seed: u64) -> PyResult<(OptResult, usize)> {
    let run = core::alternating_optimize_avg(&cfg.0, tol, max_rounds, seed).map_err(py_err)?;
    Ok((OptResult::from(run.result, None), run.rounds))
}

#[pyfunction]
fn safe_peak_params(cfg: &Network) -> PyResult<OptResult> {
    core::safe_peak_params(&cfg.0)
        .map(|(r, range)| OptResult::from(r, range))
        .map_err(py_err)
}

#[pyfunction]
fn safe_avg_params(cfg: &Network) -> PyResult<OptResult> {
    core::safe_avg_params(&cfg.0)
        .map(|r| OptResult::from(r, None))
        .map_err(py_err)
}

#[pyfunction]
fn peak_safe_load_limit() -> PyResult<f64> {
    core::peak_safe_load_limit().map_err(py_err)
}

/// One [`ScalingTuple`] per load.
#[pyfunction]
#[pyo3(signature = (base, loads, protocol = "tsa"))]
fn scaling_limits(base: &Network, loads: Vec<f64>, protocol: &str) -> PyResult<Vec<ScalingTuple>> {
    let protocol = match protocol {
        "tsa" => core::Protocol::Tsa,
        "sa" => core::Protocol::Sa,
        other => {
            return Err(PyValueError::new_err(format!(
                "protocol must be 'tsa' or 'sa' (got '{other}')"
            )))
        }
    };
    let pts = core::scaling_limits(&base.0, &loads, protocol).map_err(py_err)?;
    Ok(pts
        .iter()
        .map(|p| (p.load, p.avg_opt, p.peak_opt, p.a_star, p.eta_star))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (
    cfg, eta, age_threshold, *, slots = 100_000, warmup = 10_000, replications = 8,
    seed = 1, window = 50.0, torus = false, interferers = None, branch_name = "high", trace = false
))]
#[allow(clippy::too_many_arguments)]
fn run_simulation(
    py: Python<'_>,
    cfg: &Network,
    eta: f64,
    age_threshold: f64,
    slots: u64,
    warmup: u64,
    replications: usize,
    seed: u64,
    window: f64,
    torus: bool,
    interferers: Option<usize>,
    branch_name: &str,
    trace: bool,
) -> PyResult<SimResult> {
    let p = params(eta, age_threshold)?;
    let sim = SimConfig {
        window_side: window,
        slots,
        warmup_slots: warmup,
        seed,
        replications,
        initial_ages: InitialAges::Stationary(branch(branch_name)?),
        torus,
        interferers,
        record_trace: trace,
    };
    let cfg = cfg.0;
    let r = py.detach(|| core::run_simulation(&cfg, &p, &sim)).map_err(py_err)?;
    Ok(SimResult {
        p_s: r.p_s_hat,
        p_s_ci: r.p_s_ci,
        peak: r.peak_aoi_hat,
        peak_ci: r.peak_ci,
        average: r.avg_aoi_hat,
        average_ci: r.avg_ci,
        variance: r.var_aoi_hat,
        variance_ci: r.var_ci,
        attempts: r.attempts,
        successes: r.successes,
        slots_measured: r.slots_measured,
        link_counts: r.link_counts,
        nearest_branch: r.nearest_branch.map(branch_label),
        trace: r.trace.map(|rows| {
            rows.iter()
                .map(|t| (t.slot, t.age, t.attempted, t.success, t.sinr))
                .collect()
        }),
    })
}

#[pymodule]
#[pyo3(name = "tsa_aoi")]
fn tsa_aoi_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    m.add_class::<Network>()?;
    m.add_class::<Classification>()?;
    m.add_class::<AoiReport>()?;
    m.add_class::<OptResult>()?;
    m.add_class::<SimResult>()?;
    m.add_function(wrap_pyfunction!(spatial_contention, m)?)?;
    m.add_function(wrap_pyfunction!(lambert_w0, m)?)?;
    m.add_function(wrap_pyfunction!(classify_region, m)?)?;
    m.add_function(wrap_pyfunction!(stability_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(solve_branch, m)?)?;
    m.add_function(wrap_pyfunction!(operating_point, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point_iterate, m)?)?;
    m.add_function(wrap_pyfunction!(mean_peak_aoi, m)?)?;
    m.add_function(wrap_pyfunction!(time_average_aoi, m)?)?;
    m.add_function(wrap_pyfunction!(aoi_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(sa_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(aoi_report, m)?)?;
    m.add_function(wrap_pyfunction!(opt_eta_peak, m)?)?;
    m.add_function(wrap_pyfunction!(opt_a_peak, m)?)?;
    m.add_function(wrap_pyfunction!(opt_joint_peak, m)?)?;
    m.add_function(wrap_pyfunction!(opt_eta_avg, m)?)?;
    m.add_function(wrap_pyfunction!(opt_a_avg, m)?)?;
    m.add_function(wrap_pyfunction!(opt_joint_avg, m)?)?;
    m.add_function(wrap_pyfunction!(subopt_a_avg_closed, m)?)?;
    m.add_function(wrap_pyfunction!(alternating_optimize_avg, m)?)?;
    m.add_function(wrap_pyfunction!(safe_peak_params, m)?)?;
    m.add_function(wrap_pyfunction!(safe_avg_params, m)?)?;
    m.add_function(wrap_pyfunction!(peak_safe_load_limit, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_limits, m)?)?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    Ok(())
}
