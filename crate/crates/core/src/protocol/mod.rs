//! Message and node-state vocabulary shared by every routing protocol, plus the
//! sans-io handler interface the engine drives.
//!
//! Protocols never touch the radio or the clock. A handler looks at one node's
//! state and one input (a sensed event, a received message, an expired timer)
//! and returns a list of [`Action`]s. The engine turns those into transmissions,
//! energy charges and scheduled events.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::topology::Position;

pub use crate::topology::NodeId;

pub mod drug;
pub mod flooding;
pub mod spin;

pub use drug::{
    initialize_gradient, initialize_gradient_among, select_next_hop, should_ack, AckOffer, Drug,
    DrugParams, GradientInit,
};
pub use flooding::Flooding;
pub use spin::{Spin, SpinDataMode};

/// Identifies one sensed datum: the sensing node plus its per-node sequence
/// number. Copies of the same datum compare equal; distinct data never do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetaData {
    pub origin: NodeId,
    pub event_seq: u32,
}

impl MetaData {
    pub fn new(origin: NodeId, event_seq: u32) -> Self {
        Self { origin, event_seq }
    }
}

/// Hop-count label toward the sink. `INFINITY` means "not reached".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gradient(pub u32);

impl Gradient {
    pub const INFINITY: Gradient = Gradient(u32::MAX);
    pub const SINK: Gradient = Gradient(0);

    pub fn is_infinite(self) -> bool {
        self == Self::INFINITY
    }

    /// The label one hop further out. Saturates at `INFINITY`.
    pub fn next(self) -> Gradient {
        if self.is_infinite() {
            self
        } else {
            Gradient(self.0 + 1)
        }
    }

    pub fn finite(self) -> Option<u32> {
        (!self.is_infinite()).then_some(self.0)
    }
}

impl fmt::Display for Gradient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.finite() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    /// Advertisement of data (or, during setup, of a gradient value).
    Adv,
    /// Request for advertised data.
    Ack,
    /// The data itself, with a meta-data header.
    Data,
}

impl MessageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::Adv => "ADV",
            MessageKind::Ack => "ACK",
            MessageKind::Data => "DATA",
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Destination {
    Broadcast,
    Node(NodeId),
    /// One transmission addressed to several neighbors.
    Group(Vec<NodeId>),
}

impl Destination {
    pub fn is_broadcast(&self) -> bool {
        matches!(self, Destination::Broadcast)
    }
}

impl fmt::Display for Destination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Destination::Broadcast => f.write_str("*"),
            Destination::Node(id) => write!(f, "{id}"),
            Destination::Group(ids) => {
                for (i, id) in ids.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{id}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub kind: MessageKind,
    pub meta: MetaData,
    /// Size on air in bits.
    pub bits: u64,
    pub src: NodeId,
    pub dst: Destination,
    /// Sender's gradient value when the message was built.
    pub gradient: Gradient,
    /// Sender's residual energy when the message was built (J).
    pub energy: f64,
}

/// Per-run message sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageSizes {
    /// Payload of a DATA message, excluding its meta-data header.
    pub data_bits: u64,
    /// ADV and ACK size, and the DATA header size.
    pub control_bits: u64,
}

impl Default for MessageSizes {
    fn default() -> Self {
        Self {
            data_bits: 2000,
            control_bits: 64,
        }
    }
}

impl MessageSizes {
    pub fn bits_for(&self, kind: MessageKind) -> u64 {
        match kind {
            MessageKind::Adv | MessageKind::Ack => self.control_bits,
            MessageKind::Data => self.data_bits + self.control_bits,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data_bits == 0 {
            return Err(Error::config("data_bits", "must be positive"));
        }
        if self.control_bits >= self.data_bits {
            return Err(Error::config(
                "control_bits",
                format!(
                    "meta-data must be smaller than the data it describes ({} >= data_bits {})",
                    self.control_bits, self.data_bits
                ),
            ));
        }
        Ok(())
    }

    /// Builds a message from `node`, stamping its current gradient and energy.
    pub fn message(
        &self,
        kind: MessageKind,
        meta: MetaData,
        node: &NodeState,
        dst: Destination,
    ) -> Message {
        Message {
            kind,
            meta,
            bits: self.bits_for(kind),
            src: node.id,
            dst,
            gradient: node.gradient,
            energy: node.residual_energy,
        }
    }
}

/// Everything the simulator tracks about one node.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: NodeId,
    pub position: Position,
    /// Never negative.
    pub residual_energy: f64,
    pub gradient: Gradient,
    pub alive: bool,
    /// The sink is mains-powered and never charged.
    pub is_sink: bool,
    pub death_time: Option<f64>,
    seen: HashSet<MetaData>,
}

impl NodeState {
    pub fn new(id: NodeId, position: Position, initial_energy: f64, is_sink: bool) -> Self {
        Self {
            id,
            position,
            residual_energy: initial_energy,
            gradient: if is_sink {
                Gradient::SINK
            } else {
                Gradient::INFINITY
            },
            alive: true,
            is_sink,
            death_time: None,
            seen: HashSet::new(),
        }
    }

    pub fn mark_seen(&mut self, meta: MetaData) {
        self.seen.insert(meta);
    }

    pub fn has_seen(&self, meta: &MetaData) -> bool {
        self.seen.contains(meta)
    }

    /// Charges the transmit cost of `message` sent over `distance` meters and
    /// returns the energy actually debited.
    pub fn charge_send(
        &mut self,
        message: &Message,
        distance: f64,
        model: &EnergyModel,
        now: f64,
    ) -> Result<f64> {
        let cost = model.tx_cost(message.bits as f64, distance)?;
        self.debit(cost, now)
    }

    /// Charges the receive cost of `message` and returns the energy debited.
    pub fn charge_receive(
        &mut self,
        message: &Message,
        model: &EnergyModel,
        now: f64,
    ) -> Result<f64> {
        let cost = model.rx_cost(message.bits as f64)?;
        self.debit(cost, now)
    }

    fn debit(&mut self, cost: f64, now: f64) -> Result<f64> {
        if !self.alive {
            return Err(Error::Invariant(format!("charged dead node {}", self.id)));
        }
        if self.is_sink || cost == 0.0 {
            return Ok(0.0);
        }
        let debited = cost.min(self.residual_energy);
        self.residual_energy -= debited;
        if self.residual_energy <= 0.0 {
            self.residual_energy = 0.0;
            self.alive = false;
            self.death_time = Some(now);
        }
        Ok(debited)
    }
}

/// Something a protocol handler wants the engine to do.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Transmit `message` after `delay` seconds (0 = now).
    Send { message: Message, delay: f64 },
    /// Call `on_timer(meta)` on this node after `delay` seconds.
    SetTimer { meta: MetaData, delay: f64 },
    /// The sink accepted `meta`.
    Deliver(MetaData),
    /// The node gave up forwarding `meta`.
    Abandon(MetaData),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProtocolKind {
    Drug,
    Spin,
    Flooding,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [
        ProtocolKind::Drug,
        ProtocolKind::Spin,
        ProtocolKind::Flooding,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProtocolKind::Drug => "drug",
            ProtocolKind::Spin => "spin",
            ProtocolKind::Flooding => "flooding",
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProtocolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "drug" => Ok(ProtocolKind::Drug),
            "spin" => Ok(ProtocolKind::Spin),
            "flooding" | "flood" => Ok(ProtocolKind::Flooding),
            other => Err(Error::config(
                "protocol",
                format!("unknown protocol `{other}` (expected drug, spin or flooding)"),
            )),
        }
    }
}

/// Behaviour of one routing protocol, shared by all nodes of a run.
///
/// Handlers must be deterministic in their inputs. Per-node protocol state
/// lives inside the implementor, keyed by node id.
pub trait Protocol {
    fn kind(&self) -> ProtocolKind;

    /// `node` sensed a new datum.
    fn on_event_sensed(&mut self, node: &mut NodeState, meta: MetaData, now: f64) -> Vec<Action>;

    /// `node` received `message`. Only called for alive nodes.
    fn on_receive(&mut self, node: &mut NodeState, message: &Message, now: f64) -> Vec<Action>;

    /// A timer set by this node for `meta` expired.
    fn on_timer(&mut self, _node: &mut NodeState, _meta: MetaData, _now: f64) -> Vec<Action> {
        Vec::new()
    }
}
