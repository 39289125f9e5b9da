use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use perron_ap_cli::{run_file, validate_config, Mode, Overrides};

/// Certified asymptotic solutions of perturbed linear ODEs.
#[derive(Debug, Parser)]
#[command(name = "perron-ap", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the mode in the configuration.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Exponential weight for the conditions.
    #[arg(long)]
    beta: Option<f64>,
    /// Picard stopping tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory for report.json and samples.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use quadrature majorants in the conditions.
    #[arg(long)]
    sharp_bounds: bool,
    /// Solve even when the existence certificate fails.
    #[arg(long)]
    force: bool,
    /// Check the configuration and exit without running.
    #[arg(long)]
    validate: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.validate {
        let diags = validate_config(&args.config, args.mode);
        for d in &diags {
            eprintln!("{d}");
        }
        if diags.is_empty() {
            println!("{}: valid", args.config.display());
            return ExitCode::SUCCESS;
        }
        return ExitCode::from(1);
    }
    let ov = Overrides {
        mode: args.mode,
        beta: args.beta,
        tol: args.tol,
        out: args.out,
        sharp_bounds: args.sharp_bounds,
        force: args.force,
    };
    match run_file(&args.config, &ov) {
        Ok(out) => {
            println!("{}", out.summary);
            println!("report: {}", out.report_path.display());
            if let Some(p) = &out.samples_path {
                println!("samples: {}", p.display());
            }
            ExitCode::from(out.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
