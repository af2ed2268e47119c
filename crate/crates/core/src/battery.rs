//! Runs a grid of (protocol, seed) simulations and writes comparison tables.
//!
//! Each table has columns `protocol,seed,time_s,value`, sorted by protocol
//! name, then seed, then time:
//!
//! * `first_death.csv`: one row per run; `time_s` is the run horizon and
//!   `value` the first sensor death time, `inf` if every sensor survived.
//! * `delivery_ratio.csv`: delivery ratio at every snapshot.
//! * `residual_energy.csv`: total sensor residual energy (J) at every snapshot.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::engine::{self, RunConfig};
use crate::error::{Error, Result};
use crate::metrics::{csv_err, delivery_ratio, first_death_time, RunOutput};
use crate::protocol::ProtocolKind;

pub const FIRST_DEATH_CSV: &str = "first_death.csv";
pub const DELIVERY_RATIO_CSV: &str = "delivery_ratio.csv";
pub const RESIDUAL_ENERGY_CSV: &str = "residual_energy.csv";

/// Runs every (protocol, seed) pair on top of `base` and returns the outputs
/// sorted by protocol name then seed. `threads` caps parallelism; `None`
/// uses the rayon default.
pub fn run_battery(
    base: &RunConfig,
    seeds: &[u64],
    protocols: &[ProtocolKind],
    threads: Option<usize>,
) -> Result<Vec<RunOutput>> {
    if seeds.is_empty() {
        return Err(Error::config("seeds", "at least one seed is required"));
    }
    if protocols.is_empty() {
        return Err(Error::config(
            "protocols",
            "at least one protocol is required",
        ));
    }
    base.validate()?;

    let mut jobs: Vec<(ProtocolKind, u64)> = protocols
        .iter()
        .flat_map(|&p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    jobs.sort_by(|a, b| a.0.as_str().cmp(b.0.as_str()).then(a.1.cmp(&b.1)));
    jobs.dedup();

    let run_one = |&(protocol, seed): &(ProtocolKind, u64)| -> Result<RunOutput> {
        let config = RunConfig {
            protocol,
            seed,
            ..base.clone()
        };
        engine::run(config).map_err(|e| Error::Run {
            protocol: protocol.to_string(),
            seed,
            source: Box::new(e),
        })
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let results: Vec<Result<RunOutput>> = pool.install(|| jobs.par_iter().map(run_one).collect());
    results.into_iter().collect()
}

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

fn write_table<W: Write>(
    out: W,
    rows: impl Iterator<Item = (String, u64, f64, f64)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["protocol", "seed", "time_s", "value"])
        .map_err(csv_err)?;
    for (protocol, seed, time, value) in rows {
        w.write_record([protocol, seed.to_string(), fmt_f64(time), fmt_f64(value)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn sorted(runs: &[RunOutput]) -> Vec<&RunOutput> {
    let mut v: Vec<&RunOutput> = runs.iter().collect();
    v.sort_by(|a, b| {
        a.protocol
            .as_str()
            .cmp(b.protocol.as_str())
            .then(a.seed.cmp(&b.seed))
    });
    v
}

pub fn write_first_death<W: Write>(runs: &[RunOutput], out: W) -> Result<()> {
    write_table(
        out,
        sorted(runs).into_iter().map(|r| {
            (
                r.protocol.to_string(),
                r.seed,
                r.duration_s,
                first_death_time(r).unwrap_or(f64::INFINITY),
            )
        }),
    )
}

pub fn write_delivery_ratio<W: Write>(runs: &[RunOutput], out: W) -> Result<()> {
    write_table(
        out,
        sorted(runs).into_iter().flat_map(|r| {
            r.snapshots.iter().map(move |s| {
                (
                    r.protocol.to_string(),
                    r.seed,
                    s.time_s,
                    delivery_ratio(r, s.time_s),
                )
            })
        }),
    )
}

pub fn write_residual_energy<W: Write>(runs: &[RunOutput], out: W) -> Result<()> {
    write_table(
        out,
        sorted(runs).into_iter().flat_map(|r| {
            r.snapshots
                .iter()
                .map(move |s| (r.protocol.to_string(), r.seed, s.time_s, s.residual_j))
        }),
    )
}

/// Writes the three comparison tables into `dir`, creating it if needed.
pub fn write_battery_csvs(runs: &[RunOutput], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let open = |name: &str| -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(dir.join(name))?))
    };
    write_first_death(runs, open(FIRST_DEATH_CSV)?)?;
    write_delivery_ratio(runs, open(DELIVERY_RATIO_CSV)?)?;
    write_residual_energy(runs, open(RESIDUAL_ENERGY_CSV)?)?;
    Ok(())
}
