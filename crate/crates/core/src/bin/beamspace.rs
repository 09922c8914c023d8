use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use beamspace::arrays::ArrayGeometry;
use beamspace::harness::{self, ExperimentConfig, Format, TrialRecord};
use beamspace::leakage::leakage_sweep;
use beamspace::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Beamspace MIMO simulator for lens antenna arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write per-trial records.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Overrides the master seed of the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Also write per-point means and standard errors here (CSV).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Empirical single-path leakage versus off-grid offset, as CSV.
    Leakage {
        /// `ula:N` or `upa:N1xN2`.
        #[arg(long)]
        geometry: ArrayGeometry,
        /// Number of offsets spread over [0, 1/2] beam widths.
        #[arg(long, default_value_t = 11)]
        sweep_offsets: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytical sum-rate bounds next to Monte Carlo means, as CSV.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn sink(out: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io {
            path: p.clone(),
            source: e,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn simulate(
    config: &PathBuf,
    seed: Option<u64>,
    threads: Option<usize>,
) -> Result<(ExperimentConfig, Vec<TrialRecord>)> {
    let mut cfg = ExperimentConfig::from_path(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let records = match threads {
        Some(t) => harness::run_experiment_with_threads(&cfg, t)?,
        None => harness::run_experiment(&cfg)?,
    };
    Ok((cfg, records))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            format,
            seed,
            threads,
            summary,
        } => {
            let (cfg, records) = simulate(&config, seed, threads)?;
            let format = match format {
                OutputFormat::Csv => Format::Csv,
                OutputFormat::Json => Format::Json,
            };
            harness::emit(&records, &cfg, format, &out)?;
            if let Some(path) = summary {
                harness::emit_summary(&harness::summarize(&records), Format::Csv, &path)?;
            }
            let flagged = records.iter().filter(|r| r.is_flagged()).count();
            eprintln!(
                "{} records written to {} ({flagged} flagged)",
                records.len(),
                out.display()
            );
        }
        Command::Leakage {
            geometry,
            sweep_offsets,
            out,
        } => {
            let points = leakage_sweep(geometry, sweep_offsets)?;
            let mut w = csv::Writer::from_writer(sink(out.as_ref())?);
            w.write_record(["geometry", "offset", "eta"])?;
            for p in points {
                w.write_record([geometry.to_string(), p.offset.to_string(), p.eta.to_string()])?;
            }
            w.flush().map_err(csv::Error::from)?;
        }
        Command::Bounds {
            config,
            out,
            seed,
            threads,
        } => {
            let (cfg, records) = simulate(&config, seed, threads)?;
            let rows = harness::bounds_report(&cfg, &records)?;
            harness::write_bounds_csv(&rows, sink(out.as_ref())?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
