use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::protocol::{MessageSizes, ProtocolKind, SpinDataMode};
use crate::topology::SinkPlacement;

/// Everything that determines a run. Two runs with equal configs produce
/// identical outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Number of sensors, not counting the sink.
    pub node_count: usize,
    pub area_w_m: f64,
    pub area_h_m: f64,
    pub radio_range_m: f64,
    pub sink: SinkPlacement,
    pub protocol: ProtocolKind,
    pub energy: EnergyModel,
    pub sizes: MessageSizes,
    pub per_hop_latency_s: f64,
    pub ack_wait_s: f64,
    pub max_retries: u32,
    /// How SPIN holders answer requests. Multicast holders collect requests
    /// for `ack_wait_s` after advertising.
    pub spin_data: SpinDataMode,
    /// Mean rate of sensed events across the whole network (Poisson).
    pub event_rate_hz: f64,
    pub duration_s: f64,
    pub snapshot_s: f64,
    pub seed: u64,
    /// Re-run gradient setup every this many seconds. `None` disables it.
    pub reinit_period_s: Option<f64>,
    /// Keep the per-message log in the run output.
    pub trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            node_count: 100,
            area_w_m: 1000.0,
            area_h_m: 1000.0,
            radio_range_m: 150.0,
            sink: SinkPlacement::Center,
            protocol: ProtocolKind::Drug,
            energy: EnergyModel::default(),
            sizes: MessageSizes::default(),
            per_hop_latency_s: 0.01,
            ack_wait_s: 0.05,
            max_retries: 2,
            spin_data: SpinDataMode::Multicast,
            event_rate_hz: 1.0,
            duration_s: 500.0,
            snapshot_s: 5.0,
            seed: 0,
            reinit_period_s: None,
            trace: false,
        }
    }
}

fn positive(key: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::config(
            key,
            format!("must be finite and positive, got {value}"),
        ));
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(Error::config("node_count", "must be at least 1"));
        }
        positive("area_w_m", self.area_w_m)?;
        positive("area_h_m", self.area_h_m)?;
        positive("radio_range_m", self.radio_range_m)?;
        positive("per_hop_latency_s", self.per_hop_latency_s)?;
        positive("ack_wait_s", self.ack_wait_s)?;
        positive("duration_s", self.duration_s)?;
        positive("snapshot_s", self.snapshot_s)?;
        if !self.event_rate_hz.is_finite() || self.event_rate_hz < 0.0 {
            return Err(Error::config(
                "event_rate_hz",
                format!(
                    "must be finite and non-negative, got {}",
                    self.event_rate_hz
                ),
            ));
        }
        if let Some(period) = self.reinit_period_s {
            positive("reinit_period_s", period)?;
        }
        if let crate::topology::SinkPlacement::At(p) = self.sink {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::config("sink", "coordinates must be finite"));
            }
        }
        self.energy.validate().map_err(|e| match e {
            Error::Config { key, message } => Error::Config {
                key: energy_key(&key).to_string(),
                message,
            },
            other => other,
        })?;
        self.sizes.validate()
    }
}

fn energy_key(field: &str) -> &str {
    match field {
        "e_elec" => "e_elec_j_per_bit",
        "eps_amp" => "eps_amp_j_per_bit_m2",
        "initial_energy" => "initial_energy_j",
        "participation_threshold" => "threshold_j",
        other => other,
    }
}
