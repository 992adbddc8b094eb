use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use hodyn::cli::{self, Options, Report, SystemDefinition};

#[derive(Parser)]
#[command(
    name = "hodyn",
    version,
    about = "Higher-order Lagrangian and Hamiltonian mechanics"
)]
struct Args {
    /// Threshold for residuals, drifts and error estimates.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Seed for probe points.
    #[arg(long, global = true, default_value_t = 0x5EED)]
    seed: u64,
    /// Directory for the JSON report and trajectory CSV.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Equations of motion, momenta, energy and Hessian.
    Derive { file: PathBuf },
    /// L -> H -> L~ or H -> L -> H~ with an equivalence verdict.
    Roundtrip { file: PathBuf },
    /// RK4 integration of the definition's integrate block.
    Integrate {
        file: PathBuf,
        /// Overrides the step from the definition.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Tulczyjew triple signs, N_L embedding and solution characterization.
    VerifyTriple {
        file: PathBuf,
        /// Shift added to the solved top derivative at each probe.
        #[arg(long, default_value_t = 0.0)]
        perturb: f64,
    },
    /// Regularity only.
    Check { file: PathBuf },
}

impl Command {
    fn label(&self) -> &'static str {
        match self {
            Command::Derive { .. } => "derive",
            Command::Roundtrip { .. } => "roundtrip",
            Command::Integrate { .. } => "integrate",
            Command::VerifyTriple { .. } => "verify-triple",
            Command::Check { .. } => "check",
        }
    }
}

fn run(args: Args) -> Result<Report> {
    let mut opts = Options {
        tol: args.tol,
        seed: args.seed,
        out: args.out.clone(),
        ..Options::default()
    };
    let file = match &args.command {
        Command::Derive { file } | Command::Roundtrip { file } | Command::Check { file } => file,
        Command::Integrate { file, step } => {
            opts.step = *step;
            file
        }
        Command::VerifyTriple { file, perturb } => {
            opts.perturb = *perturb;
            file
        }
    };
    let def: SystemDefinition = cli::load_system(file)?;
    let report = match &args.command {
        Command::Derive { .. } => cli::cmd_derive(&def, &opts),
        Command::Roundtrip { .. } => cli::cmd_roundtrip(&def, &opts),
        Command::Integrate { .. } => cli::cmd_integrate(&def, &opts),
        Command::VerifyTriple { .. } => cli::cmd_verify_triple(&def, &opts),
        Command::Check { .. } => cli::cmd_check(&def, &opts),
    }
    .with_context(|| format!("{} failed for {}", args.command.label(), file.display()))?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(format!("{}.{}.json", def.name, args.command.label()));
        fs::write(&path, report.to_json())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => print!("{}", report.to_json()),
    }
    Ok(report)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(report) if report.passed() => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
