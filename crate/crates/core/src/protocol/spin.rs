//! SPIN-style three-stage negotiation.
//!
//! A holder broadcasts an ADV. Each neighbor that neither has the datum nor
//! has already asked for it unicasts a request (an ACK-kind message) back, and
//! the holder answers with DATA. New holders advertise in turn, so the datum
//! spreads through the whole network; the sink accepts it when the wave
//! reaches it and then advertises it like any other holder. There is no gradient and no energy threshold.
//!
//! How DATA goes out is selectable. In [`SpinDataMode::Multicast`] the holder
//! collects requests for one request window after advertising, then sends a
//! single DATA addressed to every requester. In [`SpinDataMode::PerRequester`]
//! it unicasts a separate DATA to each requester as soon as the request
//! arrives.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use super::{
    Action, Destination, Message, MessageKind, MessageSizes, MetaData, NodeState, Protocol,
    ProtocolKind,
};
use crate::error::Error;
use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpinDataMode {
    #[default]
    Multicast,
    PerRequester,
}

impl SpinDataMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SpinDataMode::Multicast => "multicast",
            SpinDataMode::PerRequester => "unicast",
        }
    }
}

impl fmt::Display for SpinDataMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SpinDataMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "multicast" => Ok(SpinDataMode::Multicast),
            "unicast" | "per_requester" => Ok(SpinDataMode::PerRequester),
            other => Err(Error::config(
                "spin_data",
                format!("unknown SPIN data mode `{other}` (expected multicast or unicast)"),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spin {
    sizes: MessageSizes,
    mode: SpinDataMode,
    request_window: f64,
    requested: Vec<HashSet<MetaData>>,
    // Multicast mode: requesters collected per datum while a window is open.
    serving: Vec<HashMap<MetaData, Vec<NodeId>>>,
}

impl Spin {
    pub fn new(
        sizes: MessageSizes,
        node_count: usize,
        mode: SpinDataMode,
        request_window: f64,
    ) -> Self {
        Self {
            sizes,
            mode,
            request_window,
            requested: vec![HashSet::new(); node_count],
            serving: vec![HashMap::new(); node_count],
        }
    }

    pub fn mode(&self) -> SpinDataMode {
        self.mode
    }

    fn advertise(&mut self, node: &NodeState, meta: MetaData) -> Vec<Action> {
        let mut actions = vec![Action::Send {
            message: self
                .sizes
                .message(MessageKind::Adv, meta, node, Destination::Broadcast),
            delay: 0.0,
        }];
        if self.mode == SpinDataMode::Multicast {
            actions.extend(self.open_window(node.id, meta));
        }
        actions
    }

    fn open_window(&mut self, node: NodeId, meta: MetaData) -> Option<Action> {
        let slot = &mut self.serving[node.index()];
        if slot.contains_key(&meta) {
            return None;
        }
        slot.insert(meta, Vec::new());
        Some(Action::SetTimer {
            meta,
            delay: self.request_window,
        })
    }
}

impl Protocol for Spin {
    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Spin
    }

    fn on_event_sensed(&mut self, node: &mut NodeState, meta: MetaData, _now: f64) -> Vec<Action> {
        if !node.alive || node.has_seen(&meta) {
            return Vec::new();
        }
        node.mark_seen(meta);
        self.advertise(node, meta)
    }

    fn on_receive(&mut self, node: &mut NodeState, message: &Message, _now: f64) -> Vec<Action> {
        let meta = message.meta;
        match message.kind {
            MessageKind::Adv => {
                if node.has_seen(&meta) || !self.requested[node.id.index()].insert(meta) {
                    return Vec::new();
                }
                vec![Action::Send {
                    message: self.sizes.message(
                        MessageKind::Ack,
                        meta,
                        node,
                        Destination::Node(message.src),
                    ),
                    delay: 0.0,
                }]
            }
            MessageKind::Ack => {
                if !node.has_seen(&meta) {
                    return Vec::new();
                }
                match self.mode {
                    SpinDataMode::PerRequester => vec![Action::Send {
                        message: self.sizes.message(
                            MessageKind::Data,
                            meta,
                            node,
                            Destination::Node(message.src),
                        ),
                        delay: 0.0,
                    }],
                    SpinDataMode::Multicast => {
                        // A request after the window closed opens a fresh one.
                        let opened = self.open_window(node.id, meta);
                        let requesters = self.serving[node.id.index()]
                            .get_mut(&meta)
                            .expect("window open");
                        if !requesters.contains(&message.src) {
                            requesters.push(message.src);
                        }
                        opened.into_iter().collect()
                    }
                }
            }
            MessageKind::Data => {
                if node.has_seen(&meta) {
                    return Vec::new();
                }
                node.mark_seen(meta);
                let mut actions = Vec::new();
                if node.is_sink {
                    actions.push(Action::Deliver(meta));
                }
                actions.extend(self.advertise(node, meta));
                actions
            }
        }
    }

    fn on_timer(&mut self, node: &mut NodeState, meta: MetaData, _now: f64) -> Vec<Action> {
        let Some(mut requesters) = self.serving[node.id.index()].remove(&meta) else {
            return Vec::new();
        };
        if requesters.is_empty() {
            return Vec::new();
        }
        requesters.sort_unstable();
        let dst = if requesters.len() == 1 {
            Destination::Node(requesters[0])
        } else {
            Destination::Group(requesters)
        };
        vec![Action::Send {
            message: self.sizes.message(MessageKind::Data, meta, node, dst),
            delay: 0.0,
        }]
    }
}
