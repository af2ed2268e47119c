//! Classic flooding: every node rebroadcasts each new datum exactly once.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    Action, Destination, Message, MessageKind, MessageSizes, MetaData, NodeState, Protocol,
    ProtocolKind,
};

/// Stream of the run RNG reserved for relay jitter.
const JITTER_STREAM: u64 = 3;

#[derive(Debug, Clone)]
pub struct Flooding {
    sizes: MessageSizes,
    // Fixed per-node rebroadcast delay, seconds.
    jitter: Vec<f64>,
}

impl Flooding {
    /// Each node gets a fixed rebroadcast jitter in `[0, max_jitter)` drawn
    /// from the run seed.
    pub fn new(sizes: MessageSizes, node_count: usize, max_jitter: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(JITTER_STREAM);
        let jitter = (0..node_count)
            .map(|_| rng.random::<f64>() * max_jitter)
            .collect();
        Self { sizes, jitter }
    }

    fn broadcast(&self, node: &NodeState, meta: MetaData, delay: f64) -> Action {
        Action::Send {
            message: self
                .sizes
                .message(MessageKind::Data, meta, node, Destination::Broadcast),
            delay,
        }
    }
}

impl Protocol for Flooding {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Flooding
    }

    fn on_event_sensed(&mut self, node: &mut NodeState, meta: MetaData, _now: f64) -> Vec<Action> {
        if !node.alive || node.has_seen(&meta) {
            return Vec::new();
        }
        node.mark_seen(meta);
        vec![self.broadcast(node, meta, 0.0)]
    }

    fn on_receive(&mut self, node: &mut NodeState, message: &Message, _now: f64) -> Vec<Action> {
        if message.kind != MessageKind::Data || node.has_seen(&message.meta) {
            return Vec::new();
        }
        node.mark_seen(message.meta);
        // The sink keeps the flood going like any other node.
        let relay = self.broadcast(node, message.meta, self.jitter[node.id.index()]);
        if node.is_sink {
            return vec![Action::Deliver(message.meta), relay];
        }
        vec![relay]
    }
}
