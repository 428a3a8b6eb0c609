mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use tsa_aoi::harness::{
    aoi_sweep, optimize_table, preset, ps_sweep, range_values, regions_table, scaling_table, simulate_with_trace,
    sweep_points, Mode, OptimizeMode, OptimizeRequest, SweepPoint, SweepSpec, Table,
};
use tsa_aoi::sim::write_trace;
use tsa_aoi::{
    db_to_linear, Branch, Error, InitialAges, NetworkConfig, Protocol, ProtocolParams, Result, SimConfig, Target,
};

use args::*;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 usage, 3 numeric or domain, 4 non-convergence, 1 I/O.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::NonConvergence { .. } => 4,
        Error::Io(_) | Error::Csv(_) => 1,
        _ => 3,
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::PsSweep(cmd) => {
            let spec = sweep_spec(&cmd)?;
            emit(&ps_sweep(&spec)?, &cmd.out)
        }
        Command::AoiSweep(cmd) => {
            let spec = sweep_spec(&cmd)?;
            emit(&aoi_sweep(&spec)?, &cmd.out)
        }
        Command::Regions(cmd) => emit(&regions_table(&points(&cmd.points)?)?, &cmd.out),
        Command::Simulate(cmd) => simulate(&cmd),
        Command::Optimize(cmd) => optimize(&cmd),
        Command::Scaling(cmd) => scaling(&cmd),
    }
}

fn emit(table: &Table, out: &OutArgs) -> Result<()> {
    match &out.out {
        Some(path) => write_file(path, |w| table.write_csv(w)),
        None => table.write_csv(io::stdout().lock()),
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn network(args: &NetworkArgs) -> Result<NetworkConfig> {
    let theta = match (args.theta, args.theta_db) {
        (_, Some(db)) => db_to_linear(db),
        (Some(t), None) => t,
        (None, None) => 1.0,
    };
    let rho = match (args.rho, args.snr_db) {
        (_, Some(db)) => db_to_linear(db),
        (Some(r), None) => r,
        (None, None) => 100.0,
    };
    let cfg = NetworkConfig::new(args.lambda, args.r, theta, rho, args.alpha)?;
    match args.spatial_load {
        Some(load) => cfg.with_spatial_load(load),
        None => Ok(cfg),
    }
}

fn parse_range(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Config(format!("range must be START:STOP:STEP (got '{text}')"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    range_values(nums[0], nums[1], nums[2])
}

fn points(args: &PointsArgs) -> Result<Vec<SweepPoint>> {
    if let Some(name) = &args.preset {
        if args.sweep.is_some() || args.values.is_some() || args.range.is_some() {
            return Err(Error::Config(
                "--preset fixes the sweep; drop --sweep/--values/--range".into(),
            ));
        }
        return Ok(preset(name)?.points);
    }
    let cfg = network(&args.network)?;
    let params = ProtocolParams::new(args.protocol.eta, args.protocol.age_threshold)?;
    let values = match (&args.values, &args.range) {
        (Some(v), _) => Some(v.clone()),
        (None, Some(r)) => Some(parse_range(r)?),
        (None, None) => None,
    };
    match (args.sweep, values) {
        (Some(param), Some(values)) => sweep_points(&cfg, &params, param, &values),
        (Some(_), None) => Err(Error::Config("--sweep needs --values or --range".into())),
        (None, Some(_)) => Err(Error::Config("--values/--range need --sweep".into())),
        (None, None) => Ok(vec![SweepPoint { cfg, params }]),
    }
}

fn branch(arg: BranchArg) -> Branch {
    match arg {
        BranchArg::High => Branch::High,
        BranchArg::Low => Branch::Low,
        BranchArg::Middle => Branch::Middle,
    }
}

fn sim_config(args: &SimArgs, record_trace: bool) -> SimConfig {
    let base = if args.paper_scale {
        SimConfig::paper_scale()
    } else {
        SimConfig::default()
    };
    SimConfig {
        window_side: args.window.unwrap_or(base.window_side),
        slots: args.slots.unwrap_or(base.slots),
        warmup_slots: args.warmup.unwrap_or(base.warmup_slots),
        seed: args.seed,
        replications: args.replications.unwrap_or(base.replications),
        initial_ages: InitialAges::Stationary(args.branch.map(branch).unwrap_or(Branch::High)),
        torus: args.torus,
        interferers: args.interferers,
        record_trace,
    }
}

fn sweep_spec(cmd: &SweepCmd) -> Result<SweepSpec> {
    Ok(SweepSpec {
        points: points(&cmd.points)?,
        mode: match cmd.mode {
            ModeArg::Analytic => Mode::Analytic,
            ModeArg::Simulated => Mode::Simulated,
            ModeArg::Both => Mode::Both,
        },
        sim: sim_config(&cmd.sim, false),
        branch: cmd.sim.branch.map(branch),
    })
}

fn simulate(cmd: &SimulateCmd) -> Result<()> {
    let pts = points(&cmd.points)?;
    let sim = sim_config(&cmd.sim, cmd.trace.is_some());
    let (table, trace) = simulate_with_trace(&pts, &sim)?;
    emit(&table, &cmd.out)?;
    if let (Some(path), Some(rows)) = (&cmd.trace, trace) {
        write_file(path, |w| write_trace(w, &rows))?;
    }
    let agree = ["p_agrees", "peak_agrees", "average_agrees"]
        .iter()
        .filter_map(|c| table.column(c))
        .flat_map(|c| table.rows.iter().map(move |r| r[c] == "true"))
        .filter(|ok| !ok)
        .count();
    eprintln!(
        "{} points simulated, {} of {} agreement checks failed",
        table.rows.len(),
        agree,
        3 * table.rows.len()
    );
    Ok(())
}

fn optimize(cmd: &OptimizeCmd) -> Result<()> {
    let cfg = match &cmd.preset {
        Some(name) => {
            preset(name)?
                .points
                .first()
                .ok_or_else(|| Error::Config(format!("preset '{name}' has no points")))?
                .cfg
        }
        None => network(&cmd.network)?,
    };
    let req = OptimizeRequest {
        target: match cmd.target {
            TargetArg::Peak => Target::Peak,
            TargetArg::Avg => Target::Average,
        },
        mode: match cmd.mode {
            OptModeArg::FixedA => OptimizeMode::FixedA,
            OptModeArg::FixedEta => OptimizeMode::FixedEta,
            OptModeArg::Joint => OptimizeMode::Joint,
            OptModeArg::Safe => OptimizeMode::Safe,
        },
        age_threshold: cmd.protocol.age_threshold,
        eta: cmd.protocol.eta,
        tol: cmd.tol,
        max_rounds: cmd.max_iter,
        seed: cmd.seed,
    };
    emit(&optimize_table(&cfg, &req)?, &cmd.out)
}

fn scaling(cmd: &ScalingCmd) -> Result<()> {
    let (base, loads) = match &cmd.preset {
        Some(name) => {
            let p = preset(name)?;
            let base = p
                .points
                .first()
                .ok_or_else(|| Error::Config(format!("preset '{name}' has no points")))?
                .cfg;
            (base, p.loads)
        }
        None => {
            let loads = match (&cmd.loads, &cmd.range) {
                (Some(v), _) => v.clone(),
                (None, Some(r)) => parse_range(r)?,
                (None, None) => return Err(Error::Config("scaling needs --loads, --range or --preset".into())),
            };
            (network(&cmd.network)?, loads)
        }
    };
    let protocols: &[Protocol] = match cmd.protocol {
        ProtocolArg::Sa => &[Protocol::Sa],
        ProtocolArg::Tsa => &[Protocol::Tsa],
        ProtocolArg::Both => &[Protocol::Tsa, Protocol::Sa],
    };
    emit(&scaling_table(&base, &loads, protocols)?, &cmd.out)
}
