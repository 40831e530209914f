//! `stairmimo` command line: `ber`, `complexity` and `throughput`.

use crate::airlink::Constellation;
use crate::detectors::{Algorithm, DetectorConfig};
use crate::fxp::FxpProfile;
use crate::harness::{curves_to_csv, curves_to_table, SimConfig, Simulator};
use crate::hwmodel::{self, ComplexityReport, TimingModel};
use crate::Error;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "stairmimo",
    version,
    about = "Stair-matrix massive-MIMO detection toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte-Carlo BER/SER sweep, written as CSV.
    Ber(BerArgs),
    /// Real-multiplication counts per detector.
    Complexity(ComplexityArgs),
    /// Detection throughput of the stair detector cycle model.
    Throughput(ThroughputArgs),
}

#[derive(Debug, Args)]
pub struct BerArgs {
    /// Base-station antennas (B).
    #[arg(long, default_value_t = 128)]
    pub bs: usize,
    /// Single-antenna users (U).
    #[arg(long, default_value_t = 8)]
    pub users: usize,
    /// QAM order: 4, 16, 64 or 256.
    #[arg(long = "mod", default_value_t = 256)]
    pub modulation: usize,
    /// Comma-separated detectors: mmse, zf, stair, gs, nsa, cg, richardson.
    #[arg(long, default_value = "mmse,stair,gs,nsa,cg,richardson")]
    pub detectors: String,
    /// Iterations for every iterative detector.
    #[arg(long, default_value_t = 2)]
    pub iters: usize,
    /// SNR grid in dB: `start:step:stop` (inclusive) or a comma list.
    #[arg(long, default_value = "8:2:20")]
    pub snr: String,
    #[arg(long, default_value_t = 2000)]
    pub trials: u64,
    #[arg(long, env = "STAIRMIMO_SEED", default_value_t = 7)]
    pub seed: u64,
    /// CSV output path; a `.manifest.json` is written next to it. Without
    /// it the CSV goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also run the stair detector in fixed point.
    #[arg(long)]
    pub fixed_point: bool,
    /// Fixed-point word-length overrides, e.g. `gram=12.8,sinv=17.13`.
    #[arg(long)]
    pub fxp: Option<String>,
    /// Richardson relaxation (default 1/(B+U)).
    #[arg(long)]
    pub omega: Option<f64>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    /// User counts, comma-separated.
    #[arg(long, default_value = "8")]
    pub users: String,
    /// Iteration counts, comma-separated.
    #[arg(long, default_value = "2")]
    pub iters: String,
    #[arg(long, default_value = "cg,nsa,gs,stair")]
    pub algs: String,
    /// Also run each detector and count the operations it executes.
    #[arg(long)]
    pub instrument: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// QAM order used for the throughput column.
    #[arg(long = "mod", default_value_t = 256)]
    pub modulation: usize,
    /// Emit CSV instead of a text table.
    #[arg(long)]
    pub csv: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThroughputArgs {
    #[arg(long, default_value_t = 258.0)]
    pub clock_mhz: f64,
    #[arg(long, default_value_t = 8)]
    pub users: usize,
    #[arg(long = "mod", default_value_t = 256)]
    pub modulation: usize,
    #[arg(long, default_value_t = 2)]
    pub iters: u64,
    #[arg(long, default_value_t = 64)]
    pub load_cycles: u64,
    #[arg(long, default_value_t = 25)]
    pub iter_cycles: u64,
    #[arg(long, default_value_t = 2)]
    pub overhead_cycles: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Sim(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Sim(Error::InvalidArgument(_)) => 2,
            _ => 1,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

/// Parses `start:step:stop` (inclusive), a comma list, or one value.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| usage(format!("bad SNR value '{t}'")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if step <= 0.0 || stop < start {
                return Err(usage(format!(
                    "SNR range '{s}' needs step > 0 and stop >= start"
                )));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| start + step * i as f64).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(usage(format!("SNR grid '{s}' is not start:step:stop"))),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| usage(format!("bad {what} '{t}'")))
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    started: String,
    finished: String,
    master_seed: u64,
    bs_antennas: usize,
    users: usize,
    modulation: usize,
    snr_db: Vec<f64>,
    trials: u64,
    workers: usize,
    detectors: Vec<ManifestDetector>,
    outputs: Vec<String>,
    reproduce: String,
}

#[derive(Debug, Serialize)]
struct ManifestDetector {
    label: String,
    algorithm: String,
    iterations: usize,
    richardson_omega: Option<f64>,
    fxp_profile: Option<String>,
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn ber_config(args: &BerArgs) -> Result<SimConfig, CliError> {
    let algorithms: Vec<Algorithm> = parse_list(&args.detectors, "detector")?;
    if algorithms.is_empty() {
        return Err(usage("no detectors given"));
    }
    if args.fxp.is_some() && !args.fixed_point {
        return Err(usage("--fxp requires --fixed-point"));
    }
    if args.fixed_point && !algorithms.contains(&Algorithm::Stair) {
        return Err(usage(
            "--fixed-point needs the stair detector in --detectors",
        ));
    }
    let profile = match &args.fxp {
        Some(text) => FxpProfile::default().with_overrides(text).map_err(usage)?,
        None => FxpProfile::default(),
    };
    let mut detectors = Vec::new();
    for a in algorithms {
        let mut d = DetectorConfig::new(a, args.iters);
        if a == Algorithm::Richardson {
            d.richardson_omega = args.omega;
        }
        detectors.push(d.clone());
        if a == Algorithm::Stair && args.fixed_point {
            detectors.push(d.fixed(profile));
        }
    }
    let cfg = SimConfig {
        bs_antennas: args.bs,
        users: args.users,
        modulation: args.modulation,
        detectors,
        snr_db: parse_snr_grid(&args.snr)?,
        trials: args.trials,
        master_seed: args.seed,
        workers: args
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    };
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn cmd_ber(args: &BerArgs) -> Result<(), CliError> {
    let cfg = ber_config(args)?;
    let started = chrono::Utc::now().to_rfc3339();
    let sim = Simulator::new(cfg)?;
    let curves = sim.run_sweep()?;
    let csv = curves_to_csv(&curves);
    let Some(out) = &args.out else {
        print!("{csv}");
        return Ok(());
    };
    write_file(out, &csv)?;
    let cfg = sim.config();
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: "ber",
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        master_seed: cfg.master_seed,
        bs_antennas: cfg.bs_antennas,
        users: cfg.users,
        modulation: cfg.modulation,
        snr_db: cfg.snr_db.clone(),
        trials: cfg.trials,
        workers: cfg.workers,
        detectors: cfg
            .detectors
            .iter()
            .map(|d| ManifestDetector {
                label: d.label(),
                algorithm: d.algorithm.name().into(),
                iterations: d.iterations,
                richardson_omega: d.richardson_omega,
                fxp_profile: match d.numeric_mode {
                    crate::detectors::NumericMode::Fixed(p) => Some(p.to_string()),
                    crate::detectors::NumericMode::Float64 => None,
                },
            })
            .collect(),
        outputs: vec![out.display().to_string()],
        reproduce: reproduce_line(args, cfg),
    };
    let manifest_path = manifest_path(out);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&manifest_path, &(json + "\n"))?;
    print!("{}", curves_to_table(&curves));
    println!("wrote {} and {}", out.display(), manifest_path.display());
    Ok(())
}

fn reproduce_line(args: &BerArgs, cfg: &SimConfig) -> String {
    let mut s = format!(
        "stairmimo ber --bs {} --users {} --mod {} --detectors {} --iters {} --snr {} --trials {} --seed {}",
        cfg.bs_antennas, cfg.users, cfg.modulation, args.detectors, args.iters, args.snr, cfg.trials, cfg.master_seed
    );
    if args.fixed_point {
        s.push_str(" --fixed-point");
    }
    if let Some(f) = &args.fxp {
        s.push_str(&format!(" --fxp {f}"));
    }
    if let Some(w) = args.omega {
        s.push_str(&format!(" --omega {w}"));
    }
    s
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut name = csv
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".manifest.json");
    csv.with_file_name(name)
}

pub fn complexity_reports(args: &ComplexityArgs) -> Result<Vec<ComplexityReport>, CliError> {
    let users: Vec<usize> = parse_list(&args.users, "user count")?;
    let iters: Vec<usize> = parse_list(&args.iters, "iteration count")?;
    let algs: Vec<Algorithm> = parse_list(&args.algs, "algorithm")?;
    let bits = Constellation::<f64>::new(args.modulation)
        .map_err(usage)?
        .bits_per_symbol();
    let timing = TimingModel::default();
    let mut reports = Vec::new();
    for &a in &algs {
        for &u in &users {
            for &k in &iters {
                let mut r = if args.instrument {
                    hwmodel::instrument(a, u, k, args.seed)?
                } else {
                    ComplexityReport::formula_only(a, u, k).map_err(usage)?
                };
                if a == Algorithm::Stair && u == timing.users {
                    let tm = TimingModel {
                        bits_per_symbol: bits,
                        ..timing
                    };
                    r.throughput_bps = tm.throughput_bps(k as u64).ok();
                }
                reports.push(r);
            }
        }
    }
    Ok(reports)
}

fn cmd_complexity(args: &ComplexityArgs) -> Result<(), CliError> {
    let reports = complexity_reports(args)?;
    let text = if args.csv {
        hwmodel::render_csv(&reports)
    } else {
        hwmodel::render_text(&reports)
    };
    if let Some(path) = &args.out {
        write_file(path, &hwmodel::render_csv(&reports))?;
    }
    print!("{text}");
    Ok(())
}

pub fn throughput_report(args: &ThroughputArgs) -> Result<String, CliError> {
    let bits = Constellation::<f64>::new(args.modulation)
        .map_err(usage)?
        .bits_per_symbol();
    let tm = TimingModel {
        clock_hz: args.clock_mhz * 1e6,
        load_cycles: args.load_cycles,
        per_iteration_cycles: args.iter_cycles,
        overhead_cycles: args.overhead_cycles,
        users: args.users,
        bits_per_symbol: bits,
    };
    let bps = tm.throughput_bps(args.iters).map_err(usage)?;
    let mut out = format!(
        "throughput: {:.2} Mbps ({} users x {} bits per {} cycles at {} MHz)\n",
        bps / 1e6,
        args.users,
        bits,
        tm.total_cycles(args.iters),
        args.clock_mhz
    );
    if args.iters != 2 {
        out.push_str("note: cycle counts for t != 2 are extrapolated by the cycle model\n");
    }
    Ok(out)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ber(a) => cmd_ber(&a),
        Command::Complexity(a) => cmd_complexity(&a),
        Command::Throughput(a) => {
            print!("{}", throughput_report(&a)?);
            Ok(())
        }
    }
}
