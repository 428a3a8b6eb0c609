use std::collections::HashMap;
use std::path::PathBuf;
use std::process::{Command, Output};

use tsa_aoi::harness::{preset, PresetKind, PRESETS};
use tsa_aoi::{classify_region, operating_point, NetworkConfig, ProtocolParams, Region};

/// Cheap simulation settings so the simulation presets stay fast.
const SHORT_SIM: [&str; 6] = ["--slots", "12000", "--warmup", "2000", "--replications", "2"];

fn tsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsa-aoi"))
        .args(args)
        .output()
        .expect("failed to launch tsa-aoi")
}

fn ok(args: &[&str]) -> String {
    let out = tsa(args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    tsa(args).status.code().expect("terminated by signal")
}

/// Rows as column-name → cell maps.
fn parse(csv: &str) -> Vec<HashMap<String, String>> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .zip(l.split(','))
                .map(|(h, c)| (h.to_string(), c.to_string()))
                .collect()
        })
        .collect()
}

fn f(row: &HashMap<String, String>, col: &str) -> f64 {
    row[col]
        .parse()
        .unwrap_or_else(|_| panic!("column {col} = '{}'", row[col]))
}

fn preset_args(name: &str) -> Vec<&str> {
    let sub = match preset(name).unwrap().kind {
        PresetKind::SuccessProbability => "ps-sweep",
        PresetKind::Aoi => "aoi-sweep",
        PresetKind::Scaling => "scaling",
        PresetKind::Simulation => "simulate",
        PresetKind::Regions => "regions",
    };
    let mut args = vec![sub, "--preset", name];
    if sub == "simulate" {
        args.extend(SHORT_SIM);
    }
    args
}

#[test]
fn presets_match_golden_files() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for name in PRESETS {
        let csv = ok(&preset_args(name));
        let path = dir.join(format!("{name}.csv"));
        if update {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &csv).unwrap();
            continue;
        }
        let golden = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(csv == golden, "{name} differs from {}", path.display());
    }
}

#[test]
fn fig4_has_four_curves_matching_the_library() {
    let rows = parse(&ok(&["ps-sweep", "--preset", "fig4"]));
    assert_eq!(rows.len(), 4 * 21);
    let mut lambdas: Vec<&str> = rows.iter().map(|r| r["lambda"].as_str()).collect();
    lambdas.dedup();
    assert_eq!(lambdas.len(), 4);
    for row in &rows {
        let cfg = NetworkConfig::new(
            f(row, "lambda"),
            f(row, "r"),
            f(row, "theta"),
            f(row, "rho"),
            f(row, "alpha"),
        )
        .unwrap();
        let params = ProtocolParams::new(f(row, "eta"), f(row, "age_threshold")).unwrap();
        assert_eq!(f(row, "p_attained"), operating_point(&cfg, &params).unwrap());
    }
}

#[test]
fn parameters_round_trip() {
    let rows = parse(&ok(&[
        "aoi-sweep",
        "--lambda",
        "0.0123456789",
        "--r",
        "2.5",
        "--theta",
        "1.7",
        "--rho",
        "31.4159",
        "--alpha",
        "3.3",
        "--eta",
        "0.77",
        "--age-threshold",
        "12.5",
    ]));
    let row = &rows[0];
    for (col, v) in [
        ("lambda", 0.0123456789),
        ("r", 2.5),
        ("theta", 1.7),
        ("rho", 31.4159),
        ("alpha", 3.3),
        ("eta", 0.77),
        ("age_threshold", 12.5),
    ] {
        assert_eq!(f(row, col), v, "{col}");
    }
}

#[test]
fn decibel_flags_are_stored_linear() {
    let row = &parse(&ok(&["regions", "--theta-db", "-3", "--snr-db", "20"]))[0];
    assert_eq!(f(row, "theta"), 10f64.powf(-0.3));
    assert_eq!(f(row, "rho"), 100.0);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["ps-sweep", "--sweep", "age-threshold", "--values", ""]), 2);
    assert_eq!(code(&["ps-sweep", "--sweep", "eta"]), 2);
    assert_eq!(code(&["ps-sweep", "--values", "1,2"]), 2);
    assert_eq!(code(&["ps-sweep", "--preset", "nope"]), 2);
    assert_eq!(code(&["ps-sweep", "--theta", "2", "--theta-db", "3"]), 2);
    assert_eq!(code(&["ps-sweep", "--sweep", "A", "--range", "5:1:1"]), 2);
    assert_eq!(code(&["scaling"]), 2);
    assert_eq!(code(&["bogus"]), 2);
}

#[test]
fn domain_errors_exit_3() {
    assert_eq!(code(&["ps-sweep", "--lambda", "-1"]), 3);
    assert_eq!(code(&["aoi-sweep", "--eta", "0"]), 3);
    assert_eq!(code(&["regions", "--alpha", "2"]), 3);
    assert_eq!(code(&["scaling", "--loads", "1,2"]), 3);
}

#[test]
fn non_convergence_exits_4() {
    assert_eq!(
        code(&["optimize", "--lambda", "0.15", "--max-iter", "1", "--tol", "1e-15"]),
        4
    );
}

#[test]
fn sparse_peak_optimum_is_plain_aloha() {
    let row = &parse(&ok(&[
        "optimize",
        "--target",
        "peak",
        "--mode",
        "joint",
        "--spatial-load",
        "0.5",
    ]))[0];
    assert_eq!(f(row, "a_star"), 0.0);
    assert_eq!(f(row, "eta_star"), 1.0);
}

#[test]
fn joint_average_reports_exact_and_closed_form() {
    for load in ["5", "20", "50"] {
        let rows = parse(&ok(&["optimize", "--spatial-load", load, "--rho", "inf"]));
        let exact = rows.iter().find(|r| r["method"] == "alternating").unwrap();
        let closed = rows.iter().find(|r| r["method"] == "closed-form").unwrap();
        let rel = f(closed, "objective") / f(exact, "objective") - 1.0;
        assert!((0.0..0.01).contains(&rel), "λcr² = {load}: {rel}");
    }
}

#[test]
fn safe_mode_avoids_bistability() {
    for target in ["peak", "avg"] {
        let row = &parse(&ok(&[
            "optimize", "--lambda", "0.15", "--target", target, "--mode", "safe",
        ]))[0];
        let cfg = NetworkConfig::new(0.15, 3.0, 1.0, 100.0, 3.8).unwrap();
        let params = ProtocolParams::new(f(row, "eta_star"), f(row, "a_star")).unwrap();
        assert_ne!(
            classify_region(&cfg, &params).unwrap().region,
            Region::Bistable,
            "{target}"
        );
        assert_ne!(row["region"], "bistable");
    }
}

#[test]
fn simulation_is_deterministic() {
    let args = [
        "simulate",
        "--age-threshold",
        "10",
        "--sweep",
        "lambda",
        "--values",
        "0.005,0.01",
    ];
    let run = |seed: &str| {
        let mut a = args.to_vec();
        a.extend(SHORT_SIM);
        a.extend(["--seed", seed]);
        ok(&a)
    };
    let first = run("7");
    assert_eq!(first, run("7"));
    assert_ne!(first, run("8"));
}

#[test]
fn noise_only_simulation_agrees() {
    let mut args = vec![
        "simulate",
        "--lambda",
        "0",
        "--snr-db",
        "10",
        "--r",
        "1",
        "--interferers",
        "0",
        "--age-threshold",
        "2",
    ];
    args.extend(SHORT_SIM);
    let row = &parse(&ok(&args))[0];
    assert_eq!(row["mean_links"], "1");
    assert_eq!(row["p_agrees"], "true");
    assert_eq!(row["average_agrees"], "true");
}

#[test]
fn out_and_trace_files() {
    let dir = std::env::temp_dir().join(format!("tsa-aoi-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("table.csv");
    let trace = dir.join("trace.csv");
    let mut args = vec![
        "simulate",
        "--age-threshold",
        "5",
        "--out",
        out.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ];
    args.extend(SHORT_SIM);
    assert_eq!(ok(&args), "");
    assert_eq!(parse(&std::fs::read_to_string(&out).unwrap()).len(), 1);
    let trace = std::fs::read_to_string(&trace).unwrap();
    assert!(trace.starts_with("slot,age,attempted,success,sinr\n"));
    assert_eq!(trace.lines().count(), 1 + 10_000);
    std::fs::remove_dir_all(&dir).unwrap();
}
