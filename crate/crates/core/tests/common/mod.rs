//! Fixture graphs and run helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use drugsim_core::metrics::MessageRecord;
use drugsim_core::protocol::{Destination, MessageKind, MetaData};
use drugsim_core::{NodeId, Position, ProtocolKind, RunConfig, RunOutput, Simulation};

pub const SPACING: f64 = 100.0;

/// Sink at the origin followed by `hops` sensors spaced 100 m apart on a line.
pub fn chain(hops: usize) -> Vec<Position> {
    (0..=hops)
        .map(|i| Position::new(SPACING * i as f64, 0.0))
        .collect()
}

/// Hub 0 at the origin with four leaves 100 m away. With a 120 m range the
/// leaves only hear the hub. Leaf 1 is the sink.
pub fn star() -> (Vec<Position>, NodeId) {
    let positions = vec![
        Position::new(0.0, 0.0),
        Position::new(SPACING, 0.0),
        Position::new(0.0, SPACING),
        Position::new(-SPACING, 0.0),
        Position::new(0.0, -SPACING),
    ];
    (positions, NodeId(1))
}

pub const STAR_RANGE: f64 = 120.0;

/// `side` x `side` grid at 100 m pitch; node 0 (a corner) is the sink.
pub fn grid(side: usize) -> Vec<Position> {
    (0..side * side)
        .map(|i| Position::new(SPACING * (i % side) as f64, SPACING * (i / side) as f64))
        .collect()
}

/// Config for scripted fixture runs: no random traffic, tracing on.
pub fn fixture_config(protocol: ProtocolKind) -> RunConfig {
    RunConfig {
        protocol,
        event_rate_hz: 0.0,
        duration_s: 10.0,
        snapshot_s: 1.0,
        trace: true,
        ..RunConfig::default()
    }
}

pub fn run_scripted(
    config: RunConfig,
    positions: Vec<Position>,
    sink: NodeId,
    events: &[(f64, NodeId)],
) -> RunOutput {
    let mut sim = Simulation::with_deployment(config, positions, sink).unwrap();
    for &(t, node) in events {
        sim.sense_at(t, node).unwrap();
    }
    sim.run().unwrap()
}

pub fn of_kind(run: &RunOutput, kind: MessageKind) -> Vec<&MessageRecord> {
    run.records
        .iter()
        .filter(|r| r.kind == kind && r.meta.is_some())
        .collect()
}

pub fn count_kind(run: &RunOutput, kind: MessageKind) -> usize {
    of_kind(run, kind).len()
}

pub fn delivered_set(run: &RunOutput) -> HashSet<MetaData> {
    run.delivered.iter().map(|(m, _)| *m).collect()
}

/// Sum of every charge logged in the per-message trace up to and including `t`.
pub fn logged_charges_until(run: &RunOutput, t: f64) -> f64 {
    run.records
        .iter()
        .filter(|r| r.time_s <= t)
        .map(|r| r.tx_cost_j + r.rx_cost_total_j)
        .sum()
}

pub fn initial_total(run: &RunOutput) -> f64 {
    run.final_energy_j.len() as f64 * run.initial_energy_j
}

pub fn final_total(run: &RunOutput) -> f64 {
    run.final_energy_j.iter().sum()
}

pub fn relative_error(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}

/// Nodes that transmitted DATA for `meta`, in send order.
pub fn data_senders(run: &RunOutput, meta: MetaData) -> Vec<NodeId> {
    of_kind(run, MessageKind::Data)
        .into_iter()
        .filter(|r| r.meta == Some(meta))
        .map(|r| r.src)
        .collect()
}

pub fn unicast_target(dst: &Destination) -> Option<NodeId> {
    match dst {
        Destination::Node(id) => Some(*id),
        _ => None,
    }
}

/// Every violated protocol property in a traced run, as readable strings.
/// Empty means the run is clean.
pub fn property_violations(run: &RunOutput, threshold: f64) -> Vec<String> {
    let mut out = Vec::new();
    let data = of_kind(run, MessageKind::Data);

    // DRUG hands a datum on once per holder; flooding relays it once per node.
    // SPIN may answer several requesters and is checked on the receiving side.
    if run.protocol != ProtocolKind::Spin {
        let mut per_sender: HashMap<(NodeId, MetaData), usize> = HashMap::new();
        for r in &data {
            *per_sender.entry((r.src, r.meta.unwrap())).or_default() += 1;
        }
        for ((node, meta), n) in &per_sender {
            if *n > 1 {
                out.push(format!("{node} sent DATA for {meta:?} {n} times"));
            }
        }
    }

    match run.protocol {
        ProtocolKind::Drug => {
            for r in run.records.iter().filter(|r| r.kind != MessageKind::Adv) {
                if unicast_target(&r.dst).is_none() {
                    out.push(format!(
                        "{} {} at {} was not unicast",
                        r.kind, r.src, r.time_s
                    ));
                }
            }
            for r in &data {
                let Some(next) = unicast_target(&r.dst) else {
                    continue;
                };
                let from = run.gradients[r.src.index()];
                let to = run.gradients[next.index()];
                if to >= from {
                    out.push(format!(
                        "DATA {} (V={from}) -> {next} (V={to}) does not descend",
                        r.src
                    ));
                }
                // The relay must have volunteered with enough energy.
                if next != run.sink {
                    let volunteered = run.records.iter().any(|a| {
                        a.kind == MessageKind::Ack
                            && a.src == next
                            && a.meta == r.meta
                            && unicast_target(&a.dst) == Some(r.src)
                            && a.sender_energy_j >= threshold
                            && a.time_s <= r.time_s
                    });
                    if !volunteered {
                        out.push(format!(
                            "relay {next} for {:?} never acked above threshold",
                            r.meta
                        ));
                    }
                }
            }
            for meta in data.iter().filter_map(|r| r.meta).collect::<HashSet<_>>() {
                let path = data_senders(run, meta);
                let unique: HashSet<_> = path.iter().collect();
                if unique.len() != path.len() {
                    out.push(format!("DATA path for {meta:?} revisits a node: {path:?}"));
                }
            }
        }
        ProtocolKind::Spin => {
            let mut requests: HashMap<(NodeId, MetaData), usize> = HashMap::new();
            for r in of_kind(run, MessageKind::Ack) {
                *requests.entry((r.src, r.meta.unwrap())).or_default() += 1;
            }
            for ((node, meta), n) in requests {
                if n > 1 {
                    out.push(format!("{node} requested {meta:?} {n} times"));
                }
            }
            let mut received: HashMap<(NodeId, MetaData), usize> = HashMap::new();
            for r in &data {
                for &to in &r.receivers {
                    *received.entry((to, r.meta.unwrap())).or_default() += 1;
                }
            }
            for ((node, meta), n) in received {
                if n > 1 {
                    out.push(format!("{node} received DATA for {meta:?} {n} times"));
                }
            }
        }
        ProtocolKind::Flooding => {
            if run.records.iter().any(|r| r.kind != MessageKind::Data) {
                out.push("flooding sent control traffic".to_string());
            }
        }
    }
    out
}
