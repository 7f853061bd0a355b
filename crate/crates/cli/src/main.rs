use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qbdrive_cli::config::{ExperimentConfig, PerturbationChoice};
use qbdrive_cli::{experiment, verify, CliError};

/// Counter-diabatic driving toolkit: benchmark runs, verification suites,
/// and figure-style CSV/SVG output.
#[derive(Parser)]
#[command(name = "qbdrive", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Default)]
struct RunArgs {
    /// Flat key=value config file; CLI flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Perturbation added to the ideal driving: none|s3|l4|l5|l8.
    #[arg(long)]
    perturbation: Option<String>,
    #[arg(long)]
    h0: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    delta_h: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark experiment and optionally emit CSV/SVG.
    Run(RunArgs),
    /// Run a verification suite: algebra|qb|driving|stability|all.
    Verify {
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run all four perturbed benchmark variants and emit their artifacts.
    Sweep {
        /// Which perturbations to sweep (only "all" is supported).
        #[arg(long, default_value = "all")]
        perturbations: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for run_<label>.csv / run_<label>.svg.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn build_config(args: &RunArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(p) = &args.perturbation {
        cfg.perturbation = p.parse::<PerturbationChoice>()?;
    }
    if let Some(v) = args.h0 {
        cfg.h0 = v;
    }
    if let Some(v) = args.omega {
        cfg.omega = v;
    }
    if let Some(v) = args.delta_h {
        cfg.delta_h = v;
    }
    if let Some(v) = args.t_max {
        cfg.t_max = v;
    }
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(p) = &args.out_csv {
        cfg.out_csv = Some(p.clone());
    }
    if let Some(p) = &args.out_svg {
        cfg.out_svg = Some(p.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let cfg = build_config(args)?;
    let out = experiment::run_experiment(&cfg)?;
    println!(
        "run: {} samples, perturbation={}, time-averaged fidelity {:.9}, min fidelity {:.9}",
        out.rows.len(),
        cfg.perturbation,
        out.time_averaged_fidelity(),
        out.min_fidelity()
    );
    if let Some(p) = &cfg.out_csv {
        println!("wrote {}", p.display());
    }
    if let Some(p) = &cfg.out_svg {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_verify(suite: &str, seed: u64) -> Result<(), CliError> {
    let suite: verify::Suite = suite.parse()?;
    let results = verify::run_suite(suite, seed);
    let mut failed = 0usize;
    for r in &results {
        let tag = if r.passed { "ok  " } else { "FAIL" };
        println!("{tag}  {} — {}", r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", results.len(), failed);
    if failed > 0 {
        return Err(CliError::Verification { failed });
    }
    Ok(())
}

fn cmd_sweep(perturbations: &str, config: &Option<PathBuf>, out_dir: &std::path::Path) -> Result<(), CliError> {
    if perturbations != "all" {
        return Err(CliError::Validation(format!(
            "unsupported --perturbations '{perturbations}' (only 'all')"
        )));
    }
    let base = match config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let outs = experiment::sweep(&base, out_dir)?;
    for out in &outs {
        println!(
            "{}: time-averaged fidelity {:.9}, min fidelity {:.9} -> {}",
            out.config.perturbation,
            out.time_averaged_fidelity(),
            out.min_fidelity(),
            out.config.out_csv.as_ref().expect("sweep sets paths").display()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is not an error
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify { suite, seed } => cmd_verify(suite, seed.unwrap_or(42)),
        Command::Sweep { perturbations, config, out_dir } => {
            cmd_sweep(perturbations, config, out_dir)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
