//! `drugsim`: run single simulations, seed x protocol batteries, and plots.

mod config;
mod plot;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use drugsim_core::battery::{run_battery, write_battery_csvs};
use drugsim_core::metrics::{
    delivered_per_joule, delivery_ratio, first_death_time, write_trace_csv,
};
use drugsim_core::{engine, ProtocolKind};

use config::Overrides;

const THREADS_ENV: &str = "DRUGSIM_THREADS";
const TRACE_CSV: &str = "trace.csv";

#[derive(Parser, Debug)]
#[command(
    name = "drugsim",
    version,
    about = "Wireless sensor network routing simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and write its metric tables.
    Run {
        /// Flat TOML config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        protocol: Option<ProtocolKind>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the per-message log to trace.csv.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every (seed, protocol) pair and write the comparison tables.
    Battery {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Inclusive range `A..B`, a comma list, or a single seed.
        #[arg(long, default_value = "0..9")]
        seeds: String,
        #[arg(long, value_delimiter = ',', default_value = "drug,spin,flooding")]
        protocols: Vec<ProtocolKind>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render SVG charts from a battery output directory.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        /// Where to write the charts; defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_seeds(arg: &str) -> Result<Vec<u64>> {
    let arg = arg.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = arg.split_once("..") {
        let a: u64 = a
            .trim()
            .parse()
            .with_context(|| format!("bad seed range `{arg}`"))?;
        let b: u64 = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .with_context(|| format!("bad seed range `{arg}`"))?;
        if b < a {
            bail!("empty seed range `{arg}`");
        }
        (a..=b).collect()
    } else {
        arg.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse().with_context(|| format!("bad seed `{s}`")))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_ENV} must be a positive integer, got `{v}`"))?;
            if n == 0 {
                bail!("{THREADS_ENV} must be a positive integer, got `{v}`");
            }
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context(THREADS_ENV),
    }
}

fn run_one(config: Option<&Path>, overrides: Overrides, out: &Path) -> Result<()> {
    let config = config::load(config, &overrides)?;
    let protocol = config.protocol;
    let seed = config.seed;
    let trace = config.trace;
    let run = engine::run(config).with_context(|| format!("{protocol} seed {seed}"))?;
    write_battery_csvs(std::slice::from_ref(&run), out)?;
    if trace {
        write_trace_csv(&run, BufWriter::new(File::create(out.join(TRACE_CSV))?))?;
    }
    let delivered: std::collections::HashSet<_> = run.delivered.iter().map(|(m, _)| m).collect();
    println!(
        "{protocol} seed {seed}: {} events, {} delivered (ratio {:.3}), first death {}, {:.4} J consumed, {:.2} delivered/J",
        run.generated.len(),
        delivered.len(),
        delivery_ratio(&run, run.duration_s),
        first_death_time(&run).map_or("none".to_string(), |t| format!("{t} s")),
        run.consumed_j,
        delivered_per_joule(&run),
    );
    Ok(())
}

fn battery(
    config: Option<&Path>,
    seeds: &str,
    protocols: &[ProtocolKind],
    out: &Path,
) -> Result<()> {
    let config = config::load(config, &Overrides::default())?;
    let seeds = parse_seeds(seeds)?;
    let runs = run_battery(&config, &seeds, protocols, thread_cap()?)?;
    write_battery_csvs(&runs, out)?;
    println!("{} runs written to {}", runs.len(), out.display());
    Ok(())
}

fn main() -> std::process::ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            protocol,
            seed,
            trace,
            out,
        } => run_one(
            config.as_deref(),
            Overrides {
                protocol,
                seed,
                trace,
            },
            &out,
        ),
        Command::Battery {
            config,
            seeds,
            protocols,
            out,
        } => battery(config.as_deref(), &seeds, &protocols, &out),
        Command::Plot { input, out } => {
            let out = out.unwrap_or_else(|| input.clone());
            for file in plot::render(&input, &out)? {
                println!("wrote {}", file.display());
            }
            Ok(())
        }
    }
}
