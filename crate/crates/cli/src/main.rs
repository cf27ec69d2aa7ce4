//! zs-audit: spectral data and inequality audits for periodic
//! Zakharov-Shabat operators and comb mappings.
//!
//! Exit codes: 0 when all requested audits pass (or none were requested),
//! 2 when at least one audit fails, 1 on configuration or computational
//! errors.

mod config;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{Overrides, RawConfig};

#[derive(Parser)]
#[command(
    name = "zs-audit",
    version,
    about = "Band structure, quasimomentum data and inequality audits for periodic Zakharov-Shabat operators and comb mappings"
)]
struct Cli {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides out_dir and ZS_AUDIT_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mode override: analyze-potential | analyze-comb | audit | sweep.
    #[arg(long)]
    mode: Option<String>,
    /// Index window override (gaps -N..N).
    #[arg(long)]
    n_window: Option<u32>,
    /// Tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated exponents, e.g. "1,1.5,2,inf".
    #[arg(long)]
    p_list: Option<String>,
    /// Comma-separated weights: "1" and/or "1+|n|".
    #[arg(long)]
    weights: Option<String>,
    /// Validate the configuration and exit without computing.
    #[arg(long)]
    validate: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let raw: RawConfig = match toml::from_str(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: malformed config: {e}");
            return ExitCode::from(1);
        }
    };
    let diags = config::validate(&raw);
    if cli.validate {
        if diags.is_empty() {
            println!("configuration valid");
            return ExitCode::SUCCESS;
        }
        for d in &diags {
            println!("{d}");
        }
        return ExitCode::from(1);
    }
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("error: {d}");
        }
        return ExitCode::from(1);
    }
    let overrides = Overrides {
        mode: cli.mode,
        n_window: cli.n_window,
        tol: cli.tol,
        p_list: cli.p_list,
        weights: cli.weights,
        out: cli.out,
    };
    let cfg = match config::resolve(&raw, &overrides) {
        Ok(c) => c,
        Err(diags) => {
            for d in diags {
                eprintln!("error: {d}");
            }
            return ExitCode::from(1);
        }
    };
    match run::execute(&cfg) {
        Ok(run::Outcome::Pass) => {
            println!("ok: artifacts in {}", cfg.out_dir.display());
            ExitCode::SUCCESS
        }
        Ok(run::Outcome::AuditFailed) => {
            eprintln!("audit failure: see {}", cfg.out_dir.join("audit.csv").display());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
