//! Run outputs and the metrics computed from them.

use std::io::Write;

use crate::error::Result;
use crate::protocol::{Destination, Gradient, MessageKind, MetaData, ProtocolKind};
use crate::topology::NodeId;

/// One transmission, with every energy charge it caused.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageRecord {
    /// Send time; receivers get the message `per_hop_latency_s` later.
    pub time_s: f64,
    pub kind: MessageKind,
    pub src: NodeId,
    pub dst: Destination,
    /// `None` for gradient-setup advertisements, which carry no data.
    pub meta: Option<MetaData>,
    pub bits: u64,
    /// Energy actually debited from the sender.
    pub tx_cost_j: f64,
    /// Energy actually debited from all receivers together.
    pub rx_cost_total_j: f64,
    /// Receivers that got the message and survived its receive charge.
    pub receivers: Vec<NodeId>,
    pub sender_gradient: Gradient,
    pub sender_energy_j: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snapshot {
    pub time_s: f64,
    /// Sum of residual energy over sensors (sink excluded).
    pub residual_j: f64,
    pub alive_sensors: usize,
    pub generated: usize,
    pub delivered: usize,
    /// Sum of every charge applied so far.
    pub consumed_j: f64,
    /// Number of transmissions logged so far.
    pub messages: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub protocol: ProtocolKind,
    pub seed: u64,
    pub sink: NodeId,
    pub sensor_count: usize,
    pub initial_energy_j: f64,
    pub duration_s: f64,
    pub snapshots: Vec<Snapshot>,
    /// Per-message log; empty unless the run was traced.
    pub records: Vec<MessageRecord>,
    /// Sensed events in generation order.
    pub generated: Vec<(MetaData, f64)>,
    /// Events accepted by the sink, in delivery order.
    pub delivered: Vec<(MetaData, f64)>,
    /// Sensors in order of death.
    pub deaths: Vec<(NodeId, f64)>,
    /// Forwarding attempts abandoned for lack of a next hop.
    pub abandoned: usize,
    /// Gradient values at the end of the run (all `INFINITY` except the sink
    /// for protocols without a setup phase).
    pub gradients: Vec<Gradient>,
    /// Residual energy per node at the end of the run, sink included.
    pub final_energy_j: Vec<f64>,
    pub consumed_j: f64,
    pub message_count: usize,
}

/// Time the first sensor died, or `None` if all survived.
pub fn first_death_time(run: &RunOutput) -> Option<f64> {
    run.deaths
        .iter()
        .filter(|(id, _)| *id != run.sink)
        .map(|(_, t)| *t)
        .min_by(f64::total_cmp)
}

/// Distinct events delivered by `t` over events generated by `t`; 1.0 when
/// nothing has been generated yet.
pub fn delivery_ratio(run: &RunOutput, t: f64) -> f64 {
    let generated = run.generated.iter().filter(|(_, at)| *at <= t).count();
    if generated == 0 {
        return 1.0;
    }
    let mut delivered: Vec<MetaData> = run
        .delivered
        .iter()
        .filter(|(_, at)| *at <= t)
        .map(|(m, _)| *m)
        .collect();
    delivered.sort_unstable();
    delivered.dedup();
    delivered.len() as f64 / generated as f64
}

/// Total sensor residual energy as of the latest snapshot at or before `t`.
pub fn residual_energy_total(run: &RunOutput, t: f64) -> f64 {
    run.snapshots
        .iter()
        .take_while(|s| s.time_s <= t)
        .last()
        .map(|s| s.residual_j)
        .unwrap_or(run.sensor_count as f64 * run.initial_energy_j)
}

/// Distinct delivered events per joule consumed over the whole run.
pub fn delivered_per_joule(run: &RunOutput) -> f64 {
    if run.consumed_j == 0.0 {
        return 0.0;
    }
    let mut delivered: Vec<MetaData> = run.delivered.iter().map(|(m, _)| *m).collect();
    delivered.sort_unstable();
    delivered.dedup();
    delivered.len() as f64 / run.consumed_j
}

/// Writes the per-message log as CSV.
pub fn write_trace_csv<W: Write>(run: &RunOutput, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "time_s",
        "kind",
        "src",
        "dst",
        "meta_origin",
        "meta_seq",
        "bits",
        "tx_cost_J",
        "rx_cost_total_J",
    ])
    .map_err(csv_err)?;
    for r in &run.records {
        let (origin, seq) = match r.meta {
            Some(m) => (m.origin.to_string(), m.event_seq.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.time_s.to_string(),
            r.kind.to_string(),
            r.src.to_string(),
            r.dst.to_string(),
            origin,
            seq,
            r.bits.to_string(),
            r.tx_cost_j.to_string(),
            r.rx_cost_total_j.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::error::Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}
