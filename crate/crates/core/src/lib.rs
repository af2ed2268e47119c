//! Deterministic discrete-event simulator for wireless sensor network routing.
//!
//! Three protocols share one engine and one radio energy model:
//!
//! * DRUG: hop-count gradient from the sink, then ADV/ACK/DATA negotiation
//!   with energy-thresholded unicast forwarding toward the sink.
//! * SPIN: ADV/request/DATA negotiation that spreads every datum network-wide.
//! * Flooding: every node rebroadcasts every new datum once.
//!
//! ```
//! use drugsim_core::{engine, metrics, ProtocolKind, RunConfig};
//!
//! let config = RunConfig {
//!     protocol: ProtocolKind::Drug,
//!     duration_s: 20.0,
//!     ..RunConfig::default()
//! };
//! let out = engine::run(config).unwrap();
//! assert!(metrics::delivery_ratio(&out, 20.0) > 0.5);
//! ```

pub mod battery;
pub mod energy;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod protocol;
pub mod topology;

pub use energy::EnergyModel;
pub use engine::{RunConfig, Simulation};
pub use error::{Error, Result};
pub use metrics::RunOutput;
pub use protocol::{MessageSizes, ProtocolKind};
pub use topology::{NodeId, Position, SinkPlacement, Topology};
