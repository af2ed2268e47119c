//! Gradient-based, energy-thresholded unicast forwarding.
//!
//! Setup labels every node with its hop distance to the sink by a
//! sink-rooted advertisement wave. Afterwards a node holding data advertises
//! it to its neighbors; every neighbor that is strictly closer to the sink and
//! still above the participation threshold answers with an ACK, and the
//! holder unicasts the data to one of them. The chosen relay repeats the
//! cycle until the data reaches the sink. Because each hop strictly lowers the
//! gradient, a datum crosses at most `V[origin]` hops and can never loop.

use std::collections::{HashMap, VecDeque};

use super::{
    Action, Destination, Gradient, Message, MessageKind, MessageSizes, MetaData, NodeState,
    Protocol, ProtocolKind,
};
use crate::error::{Error, Result};
use crate::topology::{NodeId, Topology};

/// Outcome of the setup wave.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientInit {
    /// Gradient value per node, indexed by node id.
    pub values: Vec<Gradient>,
    /// Nodes in the order they broadcast their setup ADV.
    pub broadcasts: Vec<NodeId>,
}

/// Runs the setup wave from `sink` over every node of `topology`.
pub fn initialize_gradient(topology: &Topology, sink: NodeId) -> Result<GradientInit> {
    initialize_gradient_among(topology, sink, &vec![true; topology.len()])
}

/// Runs the setup wave using only nodes flagged in `participating`.
///
/// Every node starts at `INFINITY` except the sink at 0. Nodes are dequeued
/// FIFO; each dequeued node broadcasts its value `V`, and a neighbor holding
/// more than `V + 1` takes `V + 1` and is enqueued.
pub fn initialize_gradient_among(
    topology: &Topology,
    sink: NodeId,
    participating: &[bool],
) -> Result<GradientInit> {
    if !topology.contains(sink) {
        return Err(Error::UnknownNode(sink));
    }
    let mut values = vec![Gradient::INFINITY; topology.len()];
    let mut broadcasts = Vec::new();
    values[sink.index()] = Gradient::SINK;
    let mut queue = VecDeque::from([sink]);
    while let Some(x) = queue.pop_front() {
        broadcasts.push(x);
        let offered = values[x.index()].next();
        for &y in topology.neighbors(x) {
            if participating[y.index()] && offered < values[y.index()] {
                values[y.index()] = offered;
                queue.push_back(y);
            }
        }
    }
    Ok(GradientInit { values, broadcasts })
}

/// Whether a node should volunteer as the next hop for an advertisement.
///
/// True iff the node is strictly closer to the sink than the advertiser and
/// holds at least `threshold` joules.
pub fn should_ack(own: Gradient, advertised: Gradient, own_energy: f64, threshold: f64) -> bool {
    own < advertised && own_energy >= threshold
}

/// A neighbor's answer to an advertisement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AckOffer {
    pub node: NodeId,
    pub gradient: Gradient,
    pub energy: f64,
}

/// Picks the relay: lowest gradient, then highest residual energy, then
/// lowest id. `None` when nobody answered.
pub fn select_next_hop(offers: &[AckOffer]) -> Option<NodeId> {
    offers
        .iter()
        .min_by(|a, b| {
            a.gradient
                .cmp(&b.gradient)
                .then_with(|| b.energy.total_cmp(&a.energy))
                .then_with(|| a.node.cmp(&b.node))
        })
        .map(|o| o.node)
}

#[derive(Debug, Clone, Default)]
struct Attempt {
    offers: Vec<AckOffer>,
    retries: u32,
}

/// Tunables for the forwarding handshake.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrugParams {
    pub sizes: MessageSizes,
    pub participation_threshold: f64,
    /// How long a holder collects ACKs after advertising (s).
    pub ack_wait: f64,
    /// Re-advertisements after an ACK window closes empty.
    pub max_retries: u32,
}

#[derive(Debug, Clone)]
pub struct Drug {
    params: DrugParams,
    pending: Vec<HashMap<MetaData, Attempt>>,
}

impl Drug {
    pub fn new(params: DrugParams, node_count: usize) -> Self {
        Self {
            params,
            pending: vec![HashMap::new(); node_count],
        }
    }

    pub fn params(&self) -> &DrugParams {
        &self.params
    }

    /// Number of forwarding attempts `node` currently has open.
    pub fn pending_count(&self, node: NodeId) -> usize {
        self.pending[node.index()].len()
    }

    fn advertise(&self, node: &NodeState, meta: MetaData) -> Vec<Action> {
        let adv = self
            .params
            .sizes
            .message(MessageKind::Adv, meta, node, Destination::Broadcast);
        vec![
            Action::Send {
                message: adv,
                delay: 0.0,
            },
            Action::SetTimer {
                meta,
                delay: self.params.ack_wait,
            },
        ]
    }

    fn take_custody(&mut self, node: &mut NodeState, meta: MetaData) -> Vec<Action> {
        node.mark_seen(meta);
        self.pending[node.id.index()].insert(meta, Attempt::default());
        self.advertise(node, meta)
    }
}

impl Protocol for Drug {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Drug
    }

    fn on_event_sensed(&mut self, node: &mut NodeState, meta: MetaData, _now: f64) -> Vec<Action> {
        // Origination ignores the participation threshold; only relays are gated.
        if !node.alive || node.has_seen(&meta) || self.pending[node.id.index()].contains_key(&meta)
        {
            return Vec::new();
        }
        self.take_custody(node, meta)
    }

    fn on_receive(&mut self, node: &mut NodeState, message: &Message, _now: f64) -> Vec<Action> {
        match message.kind {
            MessageKind::Adv => {
                if should_ack(
                    node.gradient,
                    message.gradient,
                    node.residual_energy,
                    self.params.participation_threshold,
                ) {
                    let ack = self.params.sizes.message(
                        MessageKind::Ack,
                        message.meta,
                        node,
                        Destination::Node(message.src),
                    );
                    vec![Action::Send {
                        message: ack,
                        delay: 0.0,
                    }]
                } else {
                    Vec::new()
                }
            }
            MessageKind::Ack => {
                if let Some(attempt) = self.pending[node.id.index()].get_mut(&message.meta) {
                    if attempt.offers.iter().all(|o| o.node != message.src) {
                        attempt.offers.push(AckOffer {
                            node: message.src,
                            gradient: message.gradient,
                            energy: message.energy,
                        });
                    }
                }
                Vec::new()
            }
            MessageKind::Data => {
                if node.has_seen(&message.meta) {
                    return Vec::new();
                }
                if node.is_sink {
                    node.mark_seen(message.meta);
                    return vec![Action::Deliver(message.meta)];
                }
                self.take_custody(node, message.meta)
            }
        }
    }

    fn on_timer(&mut self, node: &mut NodeState, meta: MetaData, _now: f64) -> Vec<Action> {
        let slot = &mut self.pending[node.id.index()];
        let Some(attempt) = slot.get_mut(&meta) else {
            return Vec::new();
        };
        if !node.alive {
            slot.remove(&meta);
            return Vec::new();
        }
        if let Some(next) = select_next_hop(&attempt.offers) {
            slot.remove(&meta);
            let data =
                self.params
                    .sizes
                    .message(MessageKind::Data, meta, node, Destination::Node(next));
            return vec![Action::Send {
                message: data,
                delay: 0.0,
            }];
        }
        if attempt.retries < self.params.max_retries {
            attempt.retries += 1;
            return self.advertise(node, meta);
        }
        slot.remove(&meta);
        vec![Action::Abandon(meta)]
    }
}
