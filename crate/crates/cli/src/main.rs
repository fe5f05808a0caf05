mod commands;
mod config;
mod output;

use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Context, FitArgs, FitMode, Failure};
use config::RunConfig;
use output::{Format, Sink};

/// Relief-face contact, shear-plane and cutting-force tools.
#[derive(Parser)]
#[command(name = "pdamp", version)]
struct Cli {
    /// TOML file with dotted keys (tool.*, kinematics.*, grid.*, sweep.*, shearplane.*, io.*).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files [default: io.out_dir or the current directory].
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Table format [default: io.format or csv].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps [default: available cores].
    #[arg(long, global = true)]
    workers: Option<NonZeroUsize>,
    /// Seed for randomised steps. Every current command is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Machined surface and tip path for the configured run.
    Simulate,
    /// Engagement loops over wavelengths × relief lengths with a max-contact summary.
    Sweep {
        /// Comma-separated wavelengths in mils [default: sweep.wavelengths_mils].
        #[arg(long, value_delimiter = ',')]
        wavelengths: Option<Vec<f64>>,
        /// Comma-separated relief lengths in mils [default: sweep.relief_lengths_mils].
        #[arg(long, value_delimiter = ',')]
        relief_lengths: Option<Vec<f64>>,
    },
    /// One (tool_y, contact) engagement loop for the configured run.
    ContactLoop,
    /// Shear-plane length series over one wavelength for each shear angle.
    Shearplane {
        /// Comma-separated shear angles in radians [default: shearplane.phi_rad].
        #[arg(long, value_delimiter = ',')]
        phi: Option<Vec<f64>>,
    },
    /// Least-squares fit of one column against another.
    Fit {
        /// CSV with a header row, or a JSON array of records.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: FitMode,
        /// Wavelength in mils (sinusoid mode).
        #[arg(long)]
        wavelength: Option<f64>,
        #[arg(long, default_value = "x")]
        x_column: String,
        #[arg(long, default_value = "y")]
        y_column: String,
    },
    /// Crushing thrust force from paired runs with and without relief contact.
    CrushExtract {
        /// Force CSV (`x,fx,fy`) of the run with relief contact [default: io.crush_csv].
        #[arg(long)]
        crush: Option<PathBuf>,
        /// Force CSV of the reference run [default: io.nocrush_csv].
        #[arg(long)]
        nocrush: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let dir = cli
        .out_dir
        .clone()
        .or_else(|| config.io.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let format = cli.format.or(config.io.format).unwrap_or_default();
    let workers = cli
        .workers
        .or_else(|| std::thread::available_parallelism().ok())
        .map_or(1, NonZeroUsize::get);
    let ctx = Context { sink: Sink::new(dir, format)?, config, workers };

    match &cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::Sweep { wavelengths, relief_lengths } => {
            let w = wavelengths.as_ref().unwrap_or(&ctx.config.sweep.wavelengths_mils);
            let l = relief_lengths.as_ref().unwrap_or(&ctx.config.sweep.relief_lengths_mils);
            commands::sweep(&ctx, w, l)
        }
        Command::ContactLoop => commands::contact_loop(&ctx),
        Command::Shearplane { phi } => commands::shearplane(&ctx, phi.as_deref()),
        Command::Fit { input, mode, wavelength, x_column, y_column } => commands::fit(
            &ctx,
            &FitArgs { input, mode: *mode, wavelength: *wavelength, x_column, y_column },
        ),
        Command::CrushExtract { crush, nocrush } => {
            commands::crush_extract(&ctx, crush.as_deref(), nocrush.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
