//! Experiment orchestration for the three-species ring-exchange simulator:
//! configuration-driven simulation runs with reproducible manifests, the
//! closed-form mode-coupling report, the SPDE reference solver and analysis
//! of recorded outputs. Worker count comes from `ABC_WORKERS` (default: all
//! cores); all randomness comes from the configuration file.

mod config;
mod manifest;
mod runner;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use abc_ring::mode_coupling::{coupling_report, DensityPoint, ModeClass};
use abc_ring::params::ModelParams;
use abc_ring::rng::single_rng;
use abc_ring::spde::{SbeConfig, SbeSolver, SpectralField};

#[derive(Parser)]
#[command(name = "abcring", about = "three-species ring-exchange experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the simulations and estimators described by a config file.
    Simulate {
        /// experiment configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// override the config's output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize recorded field-trajectory CSVs or binary snapshots.
    Analyze {
        /// input files (field CSVs or .snap files; kinds may not be mixed)
        inputs: Vec<PathBuf>,
        /// treat inputs as binary snapshots
        #[arg(long)]
        snapshots: bool,
        /// output CSV path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form mode-coupling report at one density point.
    Modecoupling {
        #[arg(long)]
        ea: f64,
        #[arg(long)]
        eb: f64,
        #[arg(long)]
        ec: f64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        rho_a: f64,
        #[arg(long, default_value_t = 1.0 / 3.0)]
        rho_b: f64,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// ring size entering the 1/N^gamma scale report
        #[arg(long, default_value_t = 512)]
        n: usize,
        /// also write the report as CSV rows (one per matrix entry)
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Integrate the stochastic Burgers / Ornstein-Uhlenbeck reference SPDE.
    Sbe {
        #[arg(long, default_value_t = 256)]
        modes: usize,
        #[arg(long, default_value_t = 1e-5)]
        dt: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// number of evenly spaced output records
        #[arg(long, default_value_t = 16)]
        records: usize,
        /// real-space grid size for snapshots (0 disables them)
        #[arg(long, default_value_t = 0)]
        grid: usize,
        #[arg(long, default_value = "sbe_out")]
        out: PathBuf,
    },
    /// Check a configuration against every model-side constraint.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-run a manifest's embedded configuration and verify checksums.
    Repro {
        #[arg(long)]
        manifest: PathBuf,
        /// directory for the replay (default: alongside the manifest)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn init_workers() {
    if let Ok(value) = std::env::var("ABC_WORKERS") {
        if let Ok(workers) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(workers.max(1))
                .build_global();
        }
    }
}

fn main() -> Result<()> {
    init_workers();
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, out } => {
            let mut cfg = config::ExperimentConfig::load(&config)?;
            if let Some(out) = out {
                cfg.experiment.output_dir = out.display().to_string();
            }
            let root = PathBuf::from(&cfg.experiment.output_dir);
            let manifest = runner::run_experiment(&cfg, &root)?;
            println!(
                "wrote {} files to {} (manifest.json)",
                manifest.files.len(),
                root.display()
            );
            if !manifest.failed.is_empty() {
                eprintln!("failed units:");
                for f in &manifest.failed {
                    eprintln!("  {f}");
                }
                std::process::exit(1);
            }
        }
        Command::Analyze { inputs, snapshots, out } => {
            anyhow::ensure!(!inputs.is_empty(), "no input files given");
            let csv = if snapshots {
                runner::analyze_snapshots(&inputs)?
            } else {
                runner::analyze_field_csvs(&inputs)?
            };
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
        }
        Command::Modecoupling { ea, eb, ec, rho_a, rho_b, gamma, n, csv } => {
            let params = ModelParams::new(n, gamma, [ea, eb, ec], 0)?;
            let rho = DensityPoint::new(rho_a, rho_b)?;
            let report = coupling_report(rho, &params)?;
            let class = |c: ModeClass| match c {
                ModeClass::Ew => "EW".to_string(),
                ModeClass::Kpz => "KPZ".to_string(),
                ModeClass::Levy(z) => format!("LEVY(z={z:.6})"),
            };
            println!("rho_a        = {rho_a}");
            println!("rho_b        = {rho_b}");
            println!("scale        = {} (1/N^gamma; matrices below are in field units)", report.scale);
            println!("delta        = {}", report.delta);
            println!("v_plus       = {}", report.v_plus);
            println!("v_minus      = {}", report.v_minus);
            println!("tau_plus     = ({}, {})", report.tau_plus[0], report.tau_plus[1]);
            println!("tau_minus    = ({}, {})", report.tau_minus[0], report.tau_minus[1]);
            println!("class_plus   = {}", class(report.class_plus));
            println!("class_minus  = {}", class(report.class_minus));
            let mats = [
                ("J", &report.j),
                ("R", &report.r),
                ("R_inv", &report.r_inv),
                ("H1", &report.h1),
                ("H2", &report.h2),
                ("G1", &report.g1),
                ("G2", &report.g2),
            ];
            for (name, m) in &mats {
                println!(
                    "{name:<12} = [[{}, {}], [{}, {}]]",
                    m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]
                );
            }
            if let Some(path) = csv {
                let mut text = String::from("matrix,row,col,value\n");
                for (name, m) in &mats {
                    for r in 0..2 {
                        for c in 0..2 {
                            use std::fmt::Write as _;
                            writeln!(text, "{name},{r},{c},{}", m.0[r][c]).unwrap();
                        }
                    }
                }
                std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Sbe { modes, dt, lambda, sigma2, tmax, seed, records, grid, out } => {
            std::fs::create_dir_all(&out)?;
            let cfg = SbeConfig { modes, dt, lambda, sigma2 };
            let init = SpectralField::white_noise(modes, sigma2, &mut single_rng(seed));
            let mut solver = SbeSolver::new(cfg, init, single_rng(seed ^ 0x5be))?;
            let steps = (tmax / dt).round() as u64;
            let every = (steps / records.max(1) as u64).max(1);
            let mut modes_csv = String::from("time,k,re,im\n");
            let mut snap_csv = String::from("time,x,value\n");
            use std::fmt::Write as _;
            for step in 1..=steps {
                solver.step()?;
                if step % every == 0 || step == steps {
                    let t = solver.state.time;
                    for (k, c) in solver.state.coeffs.iter().enumerate() {
                        writeln!(modes_csv, "{t},{k},{},{}", c.re, c.im).unwrap();
                    }
                    if grid > 0 {
                        for (x, v) in solver.state.to_grid(grid).iter().enumerate() {
                            writeln!(snap_csv, "{t},{},{v}", x as f64 / grid as f64).unwrap();
                        }
                    }
                }
            }
            std::fs::write(out.join("modes.csv"), modes_csv)?;
            if grid > 0 {
                std::fs::write(out.join("snapshots.csv"), snap_csv)?;
            }
            println!("integrated {steps} steps to t = {tmax}");
        }
        Command::Validate { config } => {
            let cfg = config::ExperimentConfig::load(&config)?;
            let diags = cfg.diagnostics();
            if diags.is_empty() {
                println!("ok: configuration satisfies all model constraints");
            } else {
                for d in &diags {
                    println!("violation: {d}");
                }
                std::process::exit(1);
            }
        }
        Command::Repro { manifest, out } => {
            let m = manifest::Manifest::load(&manifest)?;
            let target = out.unwrap_or_else(|| {
                manifest
                    .parent()
                    .unwrap_or_else(|| std::path::Path::new("."))
                    .join("repro")
            });
            let mismatches = runner::reproduce(&m, &target)?;
            if mismatches.is_empty() {
                println!("reproduced {} files bit-identically", m.files.len());
            } else {
                for line in &mismatches {
                    eprintln!("mismatch: {line}");
                }
                std::process::exit(1);
            }
        }
    }
    Ok(())
}
