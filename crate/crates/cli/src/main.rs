use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use freelab_cli::{emit_plot_data, run, CliError, ExperimentConfig, RunReport};

const DEFAULT_OUT_DIR: &str = "freelab-out";

#[derive(Debug, Parser)]
#[command(name = "freelab", version, about = "Run free-product experiments and emit plot data")]
struct Cli {
    /// Output directory, overriding the config file.
    #[arg(long, global = true, env = "FREELAB_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// PRNG seed, overriding the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplier applied to every tolerance.
        #[arg(long)]
        tol_scale: Option<f64>,
    },
    /// Write one series of a report as CSV.
    Emit { report: PathBuf, series: String },
}

fn run_command(
    config_path: &Path,
    seed: Option<u64>,
    tol_scale: Option<f64>,
    out_dir: Option<PathBuf>,
) -> Result<bool, CliError> {
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(t) = tol_scale {
        config.tol_scale = t;
        config.validate(&base)?;
    }
    let out = out_dir
        .or_else(|| config.out_dir.as_ref().map(|d| base.join(d)))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let (report, artifacts) = run(&config, &base)?;
    std::fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    for (name, contents) in artifacts {
        let path = out.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    }
    let path = out.join("report.json");
    std::fs::write(&path, report.to_json()? + "\n").map_err(|e| CliError::io(&path, e))?;

    for c in &report.checks {
        let status = if c.passed { "ok  " } else { "FAIL" };
        match c.tol {
            Some(tol) => println!("{status} {:<28} {:.3e} (tol {tol:.1e})", c.name, c.value),
            None => println!("{status} {:<28} {}", c.name, c.value),
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("{} {}: report written to {}", if report.passed { "PASS" } else { "FAIL" }, report.kind, path.display());
    Ok(report.passed)
}

fn emit_command(report_path: &Path, series: &str, out_dir: Option<PathBuf>) -> Result<(), CliError> {
    let report = RunReport::load(report_path)?;
    let out = out_dir.unwrap_or_else(|| report_path.parent().unwrap_or(Path::new(".")).to_path_buf());
    let path = emit_plot_data(&report, series, &out)?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, tol_scale } => run_command(&config, seed, tol_scale, cli.out_dir),
        Command::Emit { report, series } => emit_command(&report, &series, cli.out_dir).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
