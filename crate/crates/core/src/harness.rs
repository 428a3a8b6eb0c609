//! Parameter sweeps and the CSV tables behind the command-line tool.
//!
//! Every table echoes its input parameters in linear units followed by the
//! computed columns. Numbers are written with `f64`'s shortest round-trip
//! formatting, so a value read back parses to the same bits. Missing values
//! (a root that does not exist, a flag that does not apply) are empty cells.

use std::io::Write;

use rayon::prelude::*;

use crate::aoi::{aoi_report, aoi_report_on_branch, sa_baseline};
use crate::error::{Error, Result};
use crate::fixed_point::{bistable_ratio_bound, classify_region, Branch};
use crate::network::{db_to_linear, NetworkConfig, ProtocolParams};
use crate::optimize::{
    alternating_optimize_avg, opt_a_avg, opt_a_peak, opt_eta_avg, opt_eta_peak, opt_joint_avg, opt_joint_peak,
    round_threshold, safe_avg_params, safe_peak_params, scaling_limits, OptResult, Protocol, Target,
    DEFAULT_ALTERNATING_SEED,
};
use crate::sim::{run_simulation, SimConfig, SimResult, TraceRow};

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn flag(v: bool) -> String {
    v.to_string()
}

fn branch_label(b: Branch) -> &'static str {
    match b {
        Branch::Low => "low",
        Branch::Middle => "middle",
        Branch::High => "high",
    }
}

/// One (network, protocol) evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub cfg: NetworkConfig,
    pub params: ProtocolParams,
}

const INPUT_COLUMNS: [&str; 8] = [
    "lambda",
    "r",
    "theta",
    "rho",
    "alpha",
    "eta",
    "age_threshold",
    "spatial_load",
];

fn input_cells(p: &SweepPoint) -> Vec<String> {
    vec![
        num(p.cfg.lambda()),
        num(p.cfg.r()),
        num(p.cfg.theta()),
        num(p.cfg.rho()),
        num(p.cfg.alpha()),
        num(p.params.eta),
        num(p.params.age_threshold),
        num(p.cfg.spatial_load()),
    ]
}

fn header_with(extra: &[&str]) -> Table {
    let cols: Vec<&str> = INPUT_COLUMNS.iter().chain(extra).copied().collect();
    Table::new(&cols)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    AgeThreshold,
    Lambda,
    Eta,
}

impl std::str::FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "age-threshold" | "A" | "a" => Ok(Self::AgeThreshold),
            "lambda" => Ok(Self::Lambda),
            "eta" => Ok(Self::Eta),
            other => Err(Error::Config(format!("unknown sweep parameter '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analytic,
    Simulated,
    Both,
}

impl Mode {
    fn analytic(self) -> bool {
        matches!(self, Mode::Analytic | Mode::Both)
    }

    fn simulated(self) -> bool {
        matches!(self, Mode::Simulated | Mode::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub points: Vec<SweepPoint>,
    pub mode: Mode,
    pub sim: SimConfig,
    /// Evaluate the AoI on this root instead of the attained one. Points
    /// where it does not exist get empty analytic cells.
    pub branch: Option<Branch>,
}

/// Inclusive `start..=stop` in steps of `step`, robust to rounding at the end.
pub fn range_values(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config(format!("bad range {start}:{stop}:{step}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

/// Points obtained by varying one parameter of `base` over `values`.
pub fn sweep_points(
    cfg: &NetworkConfig,
    params: &ProtocolParams,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::Config("the sweep has no values".into()));
    }
    values
        .iter()
        .map(|&v| {
            Ok(match param {
                SweepParam::AgeThreshold => SweepPoint {
                    cfg: *cfg,
                    params: ProtocolParams::new(params.eta, v)?,
                },
                SweepParam::Eta => SweepPoint {
                    cfg: *cfg,
                    params: ProtocolParams::new(v, params.age_threshold)?,
                },
                SweepParam::Lambda => SweepPoint {
                    cfg: cfg.with_lambda(v)?,
                    params: *params,
                },
            })
        })
        .collect()
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Config("the sweep has no points".into()));
        }
        Ok(())
    }
}

fn simulate_points(spec: &SweepSpec) -> Result<Vec<Option<SimResult>>> {
    if !spec.mode.simulated() {
        return Ok(vec![None; spec.points.len()]);
    }
    spec.points
        .iter()
        .map(|p| run_simulation(&p.cfg, &p.params, &spec.sim).map(Some))
        .collect()
}

/// Success probability on every branch, optionally with simulation.
pub fn ps_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let mut table = header_with(&[
        "region",
        "p_low",
        "p_middle",
        "p_high",
        "p_attained",
        "sim_p",
        "sim_p_ci",
        "sim_nearest_branch",
    ]);
    let classes = spec
        .points
        .par_iter()
        .map(|p| classify_region(&p.cfg, &p.params))
        .collect::<Result<Vec<_>>>()?;
    let sims = simulate_points(spec)?;
    for ((p, c), s) in spec.points.iter().zip(&classes).zip(&sims) {
        let mut row = input_cells(p);
        if spec.mode.analytic() {
            row.extend([
                c.region.label().to_string(),
                opt(c.low),
                opt(c.middle),
                opt(c.high),
                num(c.attained()),
            ]);
        } else {
            row.extend(std::iter::repeat_n(String::new(), 5));
        }
        match s {
            Some(s) => row.extend([
                num(s.p_s_hat),
                num(s.p_s_ci),
                s.nearest_branch
                    .map(|b| branch_label(b).to_string())
                    .unwrap_or_default(),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 3)),
        }
        table.rows.push(row);
    }
    Ok(table)
}

/// Peak and time-average AoI with bounds and the SA baseline.
pub fn aoi_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.validate()?;
    let mut table = header_with(&[
        "region",
        "p_s",
        "branch",
        "peak",
        "average",
        "lower_bound",
        "upper_bound",
        "sa_baseline",
        "sim_peak",
        "sim_peak_ci",
        "sim_average",
        "sim_average_ci",
        "sim_variance",
    ]);
    let reports = spec
        .points
        .par_iter()
        .map(|p| {
            let report = match spec.branch {
                None => Some(aoi_report(&p.cfg, &p.params)?),
                Some(b) => match aoi_report_on_branch(&p.cfg, &p.params, b) {
                    Ok(r) => Some(r),
                    Err(Error::BranchNotPresent { .. }) => None,
                    Err(e) => return Err(e),
                },
            };
            Ok((report, sa_baseline(&p.cfg, p.params.eta)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let sims = simulate_points(spec)?;
    for ((p, (r, sa)), s) in spec.points.iter().zip(&reports).zip(&sims) {
        let mut row = input_cells(p);
        if let (true, Some(r)) = (spec.mode.analytic(), r) {
            row.extend([
                r.region.label().to_string(),
                num(r.p_s_used),
                branch_label(r.branch_used).to_string(),
                num(r.peak),
                num(r.average),
                num(r.lower_bound),
                num(r.upper_bound),
                num(*sa),
            ]);
        } else {
            row.extend(std::iter::repeat_n(String::new(), 8));
        }
        match s {
            Some(s) => row.extend([
                num(s.peak_aoi_hat),
                num(s.peak_ci),
                num(s.avg_aoi_hat),
                num(s.avg_ci),
                num(s.var_aoi_hat),
            ]),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        table.rows.push(row);
    }
    Ok(table)
}

/// Region, thresholds and roots for each point.
pub fn regions_table(points: &[SweepPoint]) -> Result<Table> {
    if points.is_empty() {
        return Err(Error::Config("no points to classify".into()));
    }
    let mut table = header_with(&[
        "region",
        "a_low",
        "a_high",
        "p_low",
        "p_middle",
        "p_high",
        "ratio_bound",
    ]);
    for p in points {
        let c = classify_region(&p.cfg, &p.params)?;
        let mut row = input_cells(p);
        row.extend([
            c.region.label().to_string(),
            opt(c.thresholds.map(|t| t.low)),
            opt(c.thresholds.map(|t| t.high)),
            opt(c.low),
            opt(c.middle),
            opt(c.high),
            opt(bistable_ratio_bound(&p.cfg, p.params.eta).ok()),
        ]);
        table.rows.push(row);
    }
    Ok(table)
}

/// Whether `est` is within three half-widths of `exact`.
fn agrees(est: f64, ci: f64, exact: f64) -> bool {
    ci.is_finite() && (est - exact).abs() <= 3.0 * ci
}

/// Simulation results against the analytic steady state reached from `p = 1`.
pub fn simulate_table(points: &[SweepPoint], sim: &SimConfig) -> Result<Table> {
    simulate_with_trace(points, sim).map(|(table, _)| table)
}

/// Like [`simulate_table`], also returning the first point's trace when
/// `sim.record_trace` is set.
pub fn simulate_with_trace(points: &[SweepPoint], sim: &SimConfig) -> Result<(Table, Option<Vec<TraceRow>>)> {
    if points.is_empty() {
        return Err(Error::Config("no points to simulate".into()));
    }
    let mut table = header_with(&[
        "seed",
        "slots",
        "warmup_slots",
        "replications",
        "window_side",
        "region",
        "p_s",
        "peak",
        "average",
        "sim_p",
        "sim_p_ci",
        "sim_peak",
        "sim_peak_ci",
        "sim_average",
        "sim_average_ci",
        "sim_variance",
        "sim_variance_ci",
        "attempts",
        "successes",
        "mean_links",
        "nearest_branch",
        "p_rel_error",
        "p_agrees",
        "peak_agrees",
        "average_agrees",
    ]);
    let mut trace = None;
    for p in points {
        let report = aoi_report(&p.cfg, &p.params)?;
        let mut s = run_simulation(&p.cfg, &p.params, sim)?;
        if trace.is_none() {
            trace = s.trace.take();
        }
        let mean_links = s.link_counts.iter().sum::<usize>() as f64 / s.link_counts.len() as f64;
        let mut row = input_cells(p);
        row.extend([
            sim.seed.to_string(),
            sim.slots.to_string(),
            sim.warmup_slots.to_string(),
            sim.replications.to_string(),
            num(sim.window_side),
            report.region.label().to_string(),
            num(report.p_s_used),
            num(report.peak),
            num(report.average),
            num(s.p_s_hat),
            num(s.p_s_ci),
            num(s.peak_aoi_hat),
            num(s.peak_ci),
            num(s.avg_aoi_hat),
            num(s.avg_ci),
            num(s.var_aoi_hat),
            num(s.var_ci),
            s.attempts.to_string(),
            s.successes.to_string(),
            num(mean_links),
            s.nearest_branch
                .map(|b| branch_label(b).to_string())
                .unwrap_or_default(),
            num(s.p_s_hat / report.p_s_used - 1.0),
            flag(agrees(s.p_s_hat, s.p_s_ci, report.p_s_used)),
            flag(agrees(s.peak_aoi_hat, s.peak_ci, report.peak)),
            flag(agrees(s.avg_aoi_hat, s.avg_ci, report.average)),
        ]);
        table.rows.push(row);
    }
    Ok((table, trace))
}

/// Optimal AoI and thresholds relative to `λcr²` along a load sweep.
pub fn scaling_table(base: &NetworkConfig, loads: &[f64], protocols: &[Protocol]) -> Result<Table> {
    if loads.is_empty() {
        return Err(Error::Config("no loads to evaluate".into()));
    }
    let mut table = Table::new(&[
        "protocol",
        "spatial_load",
        "avg_opt",
        "peak_opt",
        "a_star",
        "eta_star",
        "avg_ratio",
        "peak_ratio",
        "a_ratio",
    ]);
    for &protocol in protocols {
        for pt in scaling_limits(base, loads, protocol)? {
            table.rows.push(vec![
                match protocol {
                    Protocol::Sa => "sa".into(),
                    Protocol::Tsa => "tsa".into(),
                },
                num(pt.load),
                num(pt.avg_opt),
                num(pt.peak_opt),
                num(pt.a_star),
                num(pt.eta_star),
                num(pt.avg_ratio()),
                num(pt.peak_ratio()),
                num(pt.a_ratio()),
            ]);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeMode {
    /// Optimize the rate for the given threshold.
    FixedA,
    /// Optimize the threshold for the given rate.
    FixedEta,
    Joint,
    /// Joint optimum restricted to non-bistable operating points.
    Safe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeRequest {
    pub target: Target,
    pub mode: OptimizeMode,
    pub age_threshold: f64,
    pub eta: f64,
    pub tol: f64,
    pub max_rounds: usize,
    pub seed: u64,
}

impl Default for OptimizeRequest {
    fn default() -> Self {
        Self {
            target: Target::Average,
            mode: OptimizeMode::Joint,
            age_threshold: 0.0,
            eta: 1.0,
            tol: 1e-9,
            max_rounds: 100_000,
            seed: DEFAULT_ALTERNATING_SEED,
        }
    }
}

/// Optimizer output, one row per method. The joint time-average optimum is
/// reported both exactly (alternating algorithm) and in closed form.
/// Interval of equally optimal rates, when the optimum is not unique.
type EtaRange = Option<(f64, f64)>;

pub fn optimize_table(cfg: &NetworkConfig, req: &OptimizeRequest) -> Result<Table> {
    let mut results: Vec<(&str, OptResult, EtaRange)> = Vec::new();
    match (req.target, req.mode) {
        (Target::Peak, OptimizeMode::FixedA) => {
            results.push(("closed-form", opt_eta_peak(cfg, req.age_threshold)?, None))
        }
        (Target::Peak, OptimizeMode::FixedEta) => results.push(("closed-form", opt_a_peak(cfg, req.eta)?, None)),
        (Target::Peak, OptimizeMode::Joint) => {
            let (r, range) = opt_joint_peak(cfg)?;
            results.push(("closed-form", r, range));
        }
        (Target::Peak, OptimizeMode::Safe) => {
            let (r, range) = safe_peak_params(cfg)?;
            results.push(("closed-form", r, range));
        }
        (Target::Average, OptimizeMode::FixedA) => {
            results.push(("closed-form", opt_eta_avg(cfg, req.age_threshold)?, None))
        }
        (Target::Average, OptimizeMode::FixedEta) => results.push(("bisection", opt_a_avg(cfg, req.eta)?, None)),
        (Target::Average, OptimizeMode::Joint) => {
            let run = alternating_optimize_avg(cfg, req.tol, req.max_rounds, req.seed)?;
            results.push(("alternating", run.result, None));
            results.push(("closed-form", opt_joint_avg(cfg)?, None));
        }
        (Target::Average, OptimizeMode::Safe) => results.push(("golden-section", safe_avg_params(cfg)?, None)),
    }

    let mut table = Table::new(&[
        "lambda",
        "r",
        "theta",
        "rho",
        "alpha",
        "spatial_load",
        "target",
        "mode",
        "method",
        "a_star",
        "eta_star",
        "objective",
        "regime",
        "p_s",
        "region",
        "eta_range_low",
        "eta_range_high",
        "a_integer",
        "objective_integer",
    ]);
    for (method, r, range) in results {
        let region = classify_region(cfg, &r.params())?.region;
        let (a_int, obj_int) = round_threshold(cfg, req.target, r.a_star, r.eta_star)?;
        table.rows.push(vec![
            num(cfg.lambda()),
            num(cfg.r()),
            num(cfg.theta()),
            num(cfg.rho()),
            num(cfg.alpha()),
            num(cfg.spatial_load()),
            match req.target {
                Target::Peak => "peak".into(),
                Target::Average => "avg".into(),
            },
            match req.mode {
                OptimizeMode::FixedA => "fixed-a".into(),
                OptimizeMode::FixedEta => "fixed-eta".into(),
                OptimizeMode::Joint => "joint".into(),
                OptimizeMode::Safe => "safe".into(),
            },
            method.into(),
            num(r.a_star),
            num(r.eta_star),
            num(r.objective),
            r.regime.label().into(),
            num(r.p_s_at_opt),
            region.label().into(),
            opt(range.map(|x| x.0)),
            opt(range.map(|x| x.1)),
            a_int.to_string(),
            num(obj_int),
        ]);
    }
    Ok(table)
}

/// Which table a preset feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    SuccessProbability,
    Aoi,
    Scaling,
    Simulation,
    Regions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub points: Vec<SweepPoint>,
    /// Loads for scaling presets, with `points[0].cfg` as the base network.
    pub loads: Vec<f64>,
}

pub const PRESETS: [&str; 8] = ["fig2", "fig4", "fig4-sim", "fig5a", "fig5b", "fig6", "fig7", "fig9"];

fn curve(cfg: &NetworkConfig, params: ProtocolParams, param: SweepParam, values: &[f64]) -> Result<Vec<SweepPoint>> {
    sweep_points(cfg, &params, param, values)
}

/// Figure-style parameter sets. λ values for the time-average threshold
/// sweep (`fig6`) and the load grid of `fig7` are our choices.
pub fn preset(name: &str) -> Result<Preset> {
    let db = db_to_linear;
    let mut loads = Vec::new();
    let (kind, points) = match name {
        "fig2" => {
            let cfg = NetworkConfig::new(0.15, 3.0, db(0.0), db(20.0), 3.8)?;
            let values = [0.0, 10.0, 31.0, 50.0, 100.0, 135.0, 150.0];
            let pts = curve(&cfg, ProtocolParams::new(1.0, 0.0)?, SweepParam::AgeThreshold, &values)?;
            (PresetKind::Regions, pts)
        }
        "fig4" | "fig4-sim" => {
            let a_grid = if name == "fig4" {
                range_values(0.0, 100.0, 5.0)?
            } else {
                vec![5.0, 20.0, 50.0]
            };
            let mut pts = Vec::new();
            for lambda in [0.001, 0.003, 0.005, 0.01] {
                let cfg = NetworkConfig::new(lambda, 3.0, db(0.0), db(20.0), 3.8)?;
                pts.extend(curve(
                    &cfg,
                    ProtocolParams::new(1.0, 0.0)?,
                    SweepParam::AgeThreshold,
                    &a_grid,
                )?);
            }
            let kind = if name == "fig4" {
                PresetKind::SuccessProbability
            } else {
                PresetKind::Simulation
            };
            (kind, pts)
        }
        "fig5a" | "fig5b" => {
            let cfg = NetworkConfig::new(0.02, 4.0, db(0.0), db(20.0), 3.8)?;
            let etas = range_values(0.05, 1.0, 0.05)?;
            let mut pts = Vec::new();
            for a in [0.0, 10.0, 20.0, 50.0] {
                pts.extend(curve(&cfg, ProtocolParams::new(1.0, a)?, SweepParam::Eta, &etas)?);
            }
            (PresetKind::Aoi, pts)
        }
        "fig6" => {
            let a_grid = range_values(0.0, 150.0, 5.0)?;
            let mut pts = Vec::new();
            for lambda in [0.005, 0.01, 0.02] {
                let cfg = NetworkConfig::new(lambda, 5.0, 0.5, db(20.0), 3.8)?;
                pts.extend(curve(
                    &cfg,
                    ProtocolParams::new(1.0, 0.0)?,
                    SweepParam::AgeThreshold,
                    &a_grid,
                )?);
            }
            (PresetKind::Aoi, pts)
        }
        "fig7" => {
            let cfg = NetworkConfig::new(0.01, 3.0, db(0.0), f64::INFINITY, 3.8)?;
            loads = vec![0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
            (
                PresetKind::Scaling,
                vec![SweepPoint {
                    cfg,
                    params: ProtocolParams::new(1.0, 0.0)?,
                }],
            )
        }
        "fig9" => {
            let cfg = NetworkConfig::new(0.05, 3.0, db(0.0), db(20.0), 3.8)?;
            let pts = curve(
                &cfg,
                ProtocolParams::new(1.0, 0.0)?,
                SweepParam::AgeThreshold,
                &[0.0, 5.0, 10.0, 20.0],
            )?;
            (PresetKind::Simulation, pts)
        }
        other => {
            return Err(Error::Config(format!(
                "unknown preset '{other}' (available: {})",
                PRESETS.join(", ")
            )))
        }
    };
    let name = PRESETS.iter().find(|p| **p == name).copied().unwrap_or("custom");
    Ok(Preset {
        name,
        kind,
        points,
        loads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixed_point::operating_point;

    fn spec(points: Vec<SweepPoint>) -> SweepSpec {
        SweepSpec {
            points,
            mode: Mode::Analytic,
            sim: SimConfig::default(),
            branch: None,
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(range_values(0.0, 100.0, 5.0).unwrap().len(), 21);
        assert_eq!(range_values(0.05, 1.0, 0.05).unwrap().len(), 20);
        assert!(range_values(1.0, 0.0, 0.1).is_err());
        assert!(range_values(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn fig4_preset_shape() {
        let p = preset("fig4").unwrap();
        assert_eq!(p.kind, PresetKind::SuccessProbability);
        let table = ps_sweep(&spec(p.points)).unwrap();
        assert_eq!(table.rows.len(), 4 * 21);
        assert!(table.rows.iter().all(|r| r.len() == table.header.len()));
    }

    #[test]
    fn branch_selection_leaves_gaps() {
        let cfg = NetworkConfig::new(0.15, 3.0, 1.0, db_to_linear(20.0), 3.8).unwrap();
        let points = sweep_points(
            &cfg,
            &ProtocolParams::slotted_aloha(1.0).unwrap(),
            SweepParam::AgeThreshold,
            &[10.0, 50.0, 150.0],
        )
        .unwrap();
        let table = aoi_sweep(&SweepSpec {
            branch: Some(Branch::Low),
            ..spec(points)
        })
        .unwrap();
        let col = table.column("branch").unwrap();
        let cells: Vec<&str> = table.rows.iter().map(|r| r[col].as_str()).collect();
        assert_eq!(cells, ["low", "low", ""]);
    }

    #[test]
    fn empty_sweep_is_rejected() {
        assert!(ps_sweep(&spec(vec![])).is_err());
        let cfg = NetworkConfig::from_db(0.01, 3.0, 0.0, 20.0, 3.8).unwrap();
        let params = ProtocolParams::slotted_aloha(1.0).unwrap();
        assert!(sweep_points(&cfg, &params, SweepParam::Eta, &[]).is_err());
        assert!(preset("nope").is_err());
    }

    #[test]
    fn analytic_columns_match_library() {
        let p = preset("fig4").unwrap();
        let table = ps_sweep(&spec(p.points.clone())).unwrap();
        let col = table.column("p_attained").unwrap();
        for (pt, row) in p.points.iter().zip(&table.rows) {
            let direct = operating_point(&pt.cfg, &pt.params).unwrap();
            assert_eq!(row[col].parse::<f64>().unwrap(), direct);
        }
    }

    #[test]
    fn inputs_round_trip_through_csv() {
        let cfg = NetworkConfig::new(0.0123456789, 3.3, 1.0 / 3.0, 97.5, 3.8).unwrap();
        let params = ProtocolParams::new(0.7, 12.5).unwrap();
        let points = vec![SweepPoint { cfg, params }];
        let text = aoi_sweep(&spec(points)).unwrap().to_csv_string().unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let rec = reader.records().next().unwrap().unwrap();
        let parsed: Vec<f64> = (0..7).map(|i| rec[i].parse().unwrap()).collect();
        assert_eq!(parsed, vec![0.0123456789, 3.3, 1.0 / 3.0, 97.5, 3.8, 0.7, 12.5]);
    }

    #[test]
    fn regions_of_fig2() {
        let t = regions_table(&preset("fig2").unwrap().points).unwrap();
        let col = t.column("region").unwrap();
        let labels: Vec<&str> = t.rows.iter().map(|r| r[col].as_str()).collect();
        assert_eq!(labels[1], "mono-low");
        assert_eq!(labels[3], "bistable");
        assert_eq!(labels[6], "mono-high");
    }

    #[test]
    fn joint_average_reports_both_methods() {
        let cfg = NetworkConfig::from_db(0.15, 3.0, 0.0, 20.0, 3.8).unwrap();
        let t = optimize_table(&cfg, &OptimizeRequest::default()).unwrap();
        assert_eq!(t.rows.len(), 2);
        let m = t.column("method").unwrap();
        assert_eq!(t.rows[0][m], "alternating");
        assert_eq!(t.rows[1][m], "closed-form");
    }

    #[test]
    fn scaling_table_rows() {
        let p = preset("fig7").unwrap();
        let t = scaling_table(&p.points[0].cfg, &p.loads, &[Protocol::Tsa, Protocol::Sa]).unwrap();
        assert_eq!(t.rows.len(), 2 * p.loads.len());
    }
}
