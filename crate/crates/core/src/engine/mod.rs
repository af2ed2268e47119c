//! Deterministic discrete-event engine.
//!
//! The engine owns the clock, the radio and the batteries. Protocols only see
//! one node at a time through the [`Protocol`] handlers. A transmission is
//! charged in full at send time (sender plus every receiver that hears it)
//! and handed to the surviving receivers `per_hop_latency_s` later. There is
//! no MAC layer: simultaneous transmissions never collide.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`: stream 0 places
//! the sensors, stream 2 drives traffic, stream 3 draws flooding jitter.

mod config;
mod queue;

use std::collections::HashSet;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

pub use config::RunConfig;
pub use queue::EventQueue;

use crate::error::{Error, Result};
use crate::metrics::{MessageRecord, RunOutput, Snapshot};
use crate::protocol::{
    initialize_gradient_among, Action, Destination, Drug, DrugParams, Flooding, Gradient, Message,
    MessageKind, MetaData, NodeState, Protocol, ProtocolKind, Spin,
};
use crate::topology::{build_adjacency, generate_deployment, NodeId, Position, Topology};

const TRAFFIC_STREAM: u64 = 2;

/// Flooding relays wait up to this fraction of the per-hop latency before
/// rebroadcasting.
pub const FLOOD_JITTER_FRACTION: f64 = 0.1;

#[derive(Debug)]
enum Event {
    Snapshot(u64),
    /// Next Poisson arrival of a sensed event.
    Arrival,
    /// Scripted sensed event at a given node.
    Sense(NodeId),
    /// Deferred transmission.
    Transmit(Message),
    Deliver {
        to: NodeId,
        message: Rc<Message>,
    },
    Timer {
        node: NodeId,
        meta: MetaData,
    },
    Reinit,
}

pub struct Simulation {
    config: RunConfig,
    topology: Topology,
    sink: NodeId,
    sensors: Vec<NodeId>,
    nodes: Vec<NodeState>,
    protocol: Box<dyn Protocol>,
    queue: EventQueue<Event>,
    traffic_rng: ChaCha8Rng,
    next_event_seq: Vec<u32>,
    records: Vec<MessageRecord>,
    message_count: usize,
    consumed: f64,
    generated: Vec<(MetaData, f64)>,
    delivered: Vec<(MetaData, f64)>,
    delivered_set: HashSet<MetaData>,
    deaths: Vec<(NodeId, f64)>,
    abandoned: usize,
    snapshots: Vec<Snapshot>,
}

/// Builds the default deployment for `config` and runs it.
pub fn run(config: RunConfig) -> Result<RunOutput> {
    Simulation::new(config)?.run()
}

impl Simulation {
    /// Places `node_count` sensors at random and appends the sink, whose id
    /// is therefore `node_count`.
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let mut positions = generate_deployment(
            config.node_count,
            config.area_w_m,
            config.area_h_m,
            config.seed,
        )?;
        positions.push(config.sink.resolve(config.area_w_m, config.area_h_m));
        let sink = NodeId(config.node_count as u32);
        Self::build(config, positions, sink)
    }

    /// Uses explicit positions. Every node except `sink` is a sensor;
    /// `node_count` and the area/sink settings in `config` are ignored.
    pub fn with_deployment(
        config: RunConfig,
        positions: Vec<Position>,
        sink: NodeId,
    ) -> Result<Self> {
        config.validate()?;
        if sink.index() >= positions.len() {
            return Err(Error::UnknownNode(sink));
        }
        Self::build(config, positions, sink)
    }

    fn build(config: RunConfig, positions: Vec<Position>, sink: NodeId) -> Result<Self> {
        let topology = build_adjacency(positions, config.radio_range_m);
        let n = topology.len();
        let nodes: Vec<NodeState> = topology
            .node_ids()
            .map(|id| {
                NodeState::new(
                    id,
                    topology.position(id),
                    config.energy.initial_energy,
                    id == sink,
                )
            })
            .collect();
        let sensors = topology.node_ids().filter(|&id| id != sink).collect();
        let protocol: Box<dyn Protocol> = match config.protocol {
            ProtocolKind::Drug => Box::new(Drug::new(
                DrugParams {
                    sizes: config.sizes,
                    participation_threshold: config.energy.participation_threshold,
                    ack_wait: config.ack_wait_s,
                    max_retries: config.max_retries,
                },
                n,
            )),
            ProtocolKind::Spin => Box::new(Spin::new(
                config.sizes,
                n,
                config.spin_data,
                config.ack_wait_s,
            )),
            ProtocolKind::Flooding => Box::new(Flooding::new(
                config.sizes,
                n,
                config.per_hop_latency_s * FLOOD_JITTER_FRACTION,
                config.seed,
            )),
        };
        let mut traffic_rng = ChaCha8Rng::seed_from_u64(config.seed);
        traffic_rng.set_stream(TRAFFIC_STREAM);
        Ok(Self {
            topology,
            sink,
            sensors,
            nodes,
            protocol,
            queue: EventQueue::new(),
            traffic_rng,
            next_event_seq: vec![0; n],
            records: Vec::new(),
            message_count: 0,
            consumed: 0.0,
            generated: Vec::new(),
            delivered: Vec::new(),
            delivered_set: HashSet::new(),
            deaths: Vec::new(),
            abandoned: 0,
            snapshots: Vec::new(),
            config,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn node(&self, id: NodeId) -> &NodeState {
        &self.nodes[id.index()]
    }

    /// Makes `node` sense a new event at time `t`, on top of any random traffic.
    pub fn sense_at(&mut self, t: f64, node: NodeId) -> Result<()> {
        if !self.topology.contains(node) {
            return Err(Error::UnknownNode(node));
        }
        if node == self.sink {
            return Err(Error::config("sink", "the sink does not sense events"));
        }
        self.queue.schedule(t, Event::Sense(node))?;
        Ok(())
    }

    pub fn run(mut self) -> Result<RunOutput> {
        self.take_snapshot(0.0);
        if self.config.protocol == ProtocolKind::Drug {
            self.setup_gradient(0.0)?;
            if let Some(period) = self.config.reinit_period_s {
                self.queue.schedule(period, Event::Reinit)?;
            }
        }
        if self.snapshot_time(1) <= self.config.duration_s {
            self.queue
                .schedule(self.snapshot_time(1), Event::Snapshot(1))?;
        }
        if self.config.event_rate_hz > 0.0 && !self.sensors.is_empty() {
            let first = self.next_arrival(0.0)?;
            self.queue.schedule(first, Event::Arrival)?;
        }

        while let Some(time) = self.queue.peek_time() {
            if time > self.config.duration_s {
                break;
            }
            let (now, event) = self.queue.pop().expect("peeked");
            self.handle(now, event)?;
        }

        let gradients = self.nodes.iter().map(|n| n.gradient).collect();
        let final_energy_j = self.nodes.iter().map(|n| n.residual_energy).collect();
        Ok(RunOutput {
            protocol: self.config.protocol,
            seed: self.config.seed,
            sink: self.sink,
            sensor_count: self.sensors.len(),
            initial_energy_j: self.config.energy.initial_energy,
            duration_s: self.config.duration_s,
            snapshots: self.snapshots,
            records: self.records,
            generated: self.generated,
            delivered: self.delivered,
            deaths: self.deaths,
            abandoned: self.abandoned,
            gradients,
            final_energy_j,
            consumed_j: self.consumed,
            message_count: self.message_count,
        })
    }

    fn snapshot_time(&self, index: u64) -> f64 {
        index as f64 * self.config.snapshot_s
    }

    fn next_arrival(&mut self, now: f64) -> Result<f64> {
        let exp = Exp::new(self.config.event_rate_hz)
            .map_err(|e| Error::config("event_rate_hz", e.to_string()))?;
        Ok(now + exp.sample(&mut self.traffic_rng))
    }

    fn handle(&mut self, now: f64, event: Event) -> Result<()> {
        match event {
            Event::Snapshot(index) => {
                self.take_snapshot(now);
                let next = self.snapshot_time(index + 1);
                if next <= self.config.duration_s {
                    self.queue.schedule(next, Event::Snapshot(index + 1))?;
                }
            }
            Event::Arrival => {
                let pick = self.traffic_rng.random_range(0..self.sensors.len());
                let node = self.sensors[pick];
                self.sense(now, node)?;
                let next = self.next_arrival(now)?;
                self.queue.schedule(next, Event::Arrival)?;
            }
            Event::Sense(node) => self.sense(now, node)?,
            Event::Transmit(message) => {
                if self.nodes[message.src.index()].alive {
                    self.transmit(now, message)?;
                }
            }
            Event::Deliver { to, message } => {
                let node = &mut self.nodes[to.index()];
                if node.alive {
                    let actions = self.protocol.on_receive(node, &message, now);
                    self.apply(now, to, actions)?;
                }
            }
            Event::Timer { node, meta } => {
                let state = &mut self.nodes[node.index()];
                if state.alive {
                    let actions = self.protocol.on_timer(state, meta, now);
                    self.apply(now, node, actions)?;
                }
            }
            Event::Reinit => {
                self.setup_gradient(now)?;
                if let Some(period) = self.config.reinit_period_s {
                    self.queue.schedule(now + period, Event::Reinit)?;
                }
            }
        }
        Ok(())
    }

    /// Events at dead nodes still count as generated; they just go nowhere.
    fn sense(&mut self, now: f64, node: NodeId) -> Result<()> {
        let seq = &mut self.next_event_seq[node.index()];
        let meta = MetaData::new(node, *seq);
        *seq += 1;
        self.generated.push((meta, now));
        let state = &mut self.nodes[node.index()];
        if state.alive {
            let actions = self.protocol.on_event_sensed(state, meta, now);
            self.apply(now, node, actions)?;
        }
        Ok(())
    }

    fn apply(&mut self, now: f64, node: NodeId, actions: Vec<Action>) -> Result<()> {
        for action in actions {
            match action {
                Action::Send { message, delay } => {
                    if message.src != node {
                        return Err(Error::Invariant(format!(
                            "node {node} tried to send as {}",
                            message.src
                        )));
                    }
                    if delay > 0.0 {
                        self.queue.schedule(now + delay, Event::Transmit(message))?;
                    } else if self.nodes[node.index()].alive {
                        self.transmit(now, message)?;
                    }
                }
                Action::SetTimer { meta, delay } => {
                    self.queue
                        .schedule(now + delay, Event::Timer { node, meta })?;
                }
                Action::Deliver(meta) => {
                    if node != self.sink {
                        return Err(Error::Invariant(format!("node {node} is not the sink")));
                    }
                    if self.delivered_set.insert(meta) {
                        self.delivered.push((meta, now));
                    }
                }
                Action::Abandon(_) => self.abandoned += 1,
            }
        }
        Ok(())
    }

    fn transmit(&mut self, now: f64, message: Message) -> Result<()> {
        let meta = Some(message.meta);
        let message = Rc::new(message);
        let receivers = self.radiate(now, &message, meta)?;
        let arrival = now + self.config.per_hop_latency_s;
        for to in receivers {
            self.queue.schedule(
                arrival,
                Event::Deliver {
                    to,
                    message: Rc::clone(&message),
                },
            )?;
        }
        Ok(())
    }

    /// Charges sender and receivers for one transmission, logs it, and
    /// returns the receivers that are still alive to process it.
    fn radiate(
        &mut self,
        now: f64,
        message: &Message,
        meta: Option<MetaData>,
    ) -> Result<Vec<NodeId>> {
        let src = message.src;
        let (distance, candidates): (f64, Vec<NodeId>) = match &message.dst {
            Destination::Broadcast => (
                self.topology.radio_range(),
                self.topology.neighbors(src).to_vec(),
            ),
            Destination::Node(dst) => {
                let dst = *dst;
                if !self.topology.are_neighbors(src, dst) {
                    return Err(Error::Invariant(format!(
                        "unicast from {src} to non-neighbor {dst}"
                    )));
                }
                (self.topology.distance(src, dst), vec![dst])
            }
            // Amplifier power must reach the farthest member.
            Destination::Group(members) => {
                let mut farthest: f64 = 0.0;
                for &dst in members {
                    if !self.topology.are_neighbors(src, dst) {
                        return Err(Error::Invariant(format!(
                            "multicast from {src} to non-neighbor {dst}"
                        )));
                    }
                    farthest = farthest.max(self.topology.distance(src, dst));
                }
                (farthest, members.clone())
            }
        };

        let model = self.config.energy;
        let sender_gradient = self.nodes[src.index()].gradient;
        let sender_energy = self.nodes[src.index()].residual_energy;
        let tx = self.nodes[src.index()].charge_send(message, distance, &model, now)?;
        self.note_death(src, now);

        let mut rx_total = 0.0;
        let mut receivers = Vec::with_capacity(candidates.len());
        for id in candidates {
            if !self.nodes[id.index()].alive {
                continue;
            }
            rx_total += self.nodes[id.index()].charge_receive(message, &model, now)?;
            if self.note_death(id, now) {
                continue;
            }
            receivers.push(id);
        }

        self.consumed += tx + rx_total;
        self.message_count += 1;
        if self.config.trace {
            self.records.push(MessageRecord {
                time_s: now,
                kind: message.kind,
                src,
                dst: message.dst.clone(),
                meta,
                bits: message.bits,
                tx_cost_j: tx,
                rx_cost_total_j: rx_total,
                receivers: receivers.clone(),
                sender_gradient,
                sender_energy_j: sender_energy,
            });
        }
        Ok(receivers)
    }

    /// Records `id`'s death if its last charge killed it.
    fn note_death(&mut self, id: NodeId, now: f64) -> bool {
        let node = &self.nodes[id.index()];
        if !node.alive && node.death_time == Some(now) && !self.deaths.iter().any(|(d, _)| *d == id)
        {
            self.deaths.push((id, now));
        }
        !node.alive
    }

    /// Runs the sink-rooted setup wave over the nodes alive at `now`,
    /// charging every setup broadcast, and installs the resulting labels.
    fn setup_gradient(&mut self, now: f64) -> Result<()> {
        let alive: Vec<bool> = self.nodes.iter().map(|n| n.alive).collect();
        let init = initialize_gradient_among(&self.topology, self.sink, &alive)?;
        for &x in &init.broadcasts {
            if !self.nodes[x.index()].alive {
                continue;
            }
            let adv = Message {
                kind: MessageKind::Adv,
                meta: MetaData::new(self.sink, u32::MAX),
                bits: self.config.sizes.control_bits,
                src: x,
                dst: Destination::Broadcast,
                gradient: init.values[x.index()],
                energy: self.nodes[x.index()].residual_energy,
            };
            self.radiate(now, &adv, None)?;
        }
        for (node, value) in self.nodes.iter_mut().zip(init.values) {
            node.gradient = if node.alive || node.is_sink {
                value
            } else {
                Gradient::INFINITY
            };
        }
        Ok(())
    }

    fn take_snapshot(&mut self, now: f64) {
        let (residual, alive) = self
            .sensors
            .iter()
            .map(|id| &self.nodes[id.index()])
            .fold((0.0, 0), |(e, a), n| {
                (e + n.residual_energy, a + usize::from(n.alive))
            });
        self.snapshots.push(Snapshot {
            time_s: now,
            residual_j: residual,
            alive_sensors: alive,
            generated: self.generated.len(),
            delivered: self.delivered.len(),
            consumed_j: self.consumed,
            messages: self.message_count,
        });
    }
}
