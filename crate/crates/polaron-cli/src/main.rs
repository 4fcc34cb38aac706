use clap::{Parser, Subcommand};
use polaron_cli::CliError;
use std::path::PathBuf;
use std::process::ExitCode;

/// Quantum-dot emission spectra in structured photonic reservoirs.
#[derive(Parser)]
#[command(name = "polaron-spectra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario's engines and write one spectrum CSV per engine.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the scattering or spontaneous-emission rates as CSV.
    Rates {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a waveguide feeding map over temperature and detuning.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for this sweep.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Regenerate the data behind a figure preset.
    Figure {
        name: String,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
        /// Points on each cavity spectrum grid.
        #[arg(long)]
        points: Option<usize>,
        /// Phonon modes in the correlation-expansion hierarchy.
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Compare two spectrum CSVs after peak normalization.
    Compare { a: PathBuf, b: PathBuf },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("POLARON_SPECTRA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "POLARON_SPECTRA_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {n} threads: {e}")))
}

fn run(cli: Cli, argv: &[String]) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { scenario, out } => {
            for p in polaron_cli::simulate(&scenario, out.as_deref(), argv)? {
                println!("{}", p.display());
            }
        }
        Command::Rates { scenario, out } => {
            print!("{}", polaron_cli::rates(&scenario, out.as_deref(), argv)?)
        }
        Command::Sweep {
            scenario,
            out,
            parallel,
        } => {
            println!(
                "{}",
                polaron_cli::sweep(&scenario, out.as_deref(), parallel, argv)?.display()
            )
        }
        Command::Figure {
            name,
            out,
            points,
            modes,
        } => {
            for p in polaron_cli::figure(&name, &out, points, modes, argv)? {
                println!("{}", p.display());
            }
        }
        Command::Compare { a, b } => print!("{}", polaron_cli::compare(&a, &b)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
