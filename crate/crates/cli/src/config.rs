//! Run configuration files.
//!
//! A config file is a flat TOML document: `key = value` lines, no tables.
//! Every key is optional and falls back to the simulator default. Unknown
//! keys, wrong types and out-of-range values are rejected with an error that
//! names the offending key.

use std::path::Path;

use anyhow::{bail, Context, Result};
use drugsim_core::protocol::SpinDataMode;
use drugsim_core::{Position, ProtocolKind, RunConfig, SinkPlacement};
use toml::{Table, Value};

/// Every key a config file may contain, in documentation order.
pub const KEYS: &[&str] = &[
    "node_count",
    "area_w_m",
    "area_h_m",
    "radio_range_m",
    "sink",
    "protocol",
    "e_elec_j_per_bit",
    "eps_amp_j_per_bit_m2",
    "initial_energy_j",
    "threshold_j",
    "data_bits",
    "control_bits",
    "per_hop_latency_s",
    "ack_wait_s",
    "max_retries",
    "event_rate_hz",
    "duration_s",
    "snapshot_s",
    "seed",
    "reinit_period_s",
    "trace",
    "spin_data",
];

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub protocol: Option<ProtocolKind>,
    pub seed: Option<u64>,
    pub trace: bool,
}

pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
    let text = match path {
        Some(p) => {
            std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?
        }
        None => String::new(),
    };
    let mut config = parse(&text).with_context(|| match path {
        Some(p) => format!("in config {}", p.display()),
        None => "in default config".to_string(),
    })?;
    if let Some(protocol) = overrides.protocol {
        config.protocol = protocol;
    }
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if overrides.trace {
        config.trace = true;
    }
    config.validate()?;
    Ok(config)
}

/// Parses config text on top of the defaults. Does not run the cross-field
/// validation; [`load`] does that after applying overrides.
pub fn parse(text: &str) -> Result<RunConfig> {
    let table: Table = text.parse().context("malformed config")?;
    let mut c = RunConfig::default();
    for (key, value) in &table {
        let v = Field { key, value };
        match key.as_str() {
            "node_count" => c.node_count = v.uint()? as usize,
            "area_w_m" => c.area_w_m = v.float()?,
            "area_h_m" => c.area_h_m = v.float()?,
            "radio_range_m" => c.radio_range_m = v.float()?,
            "sink" => c.sink = parse_sink(v.string()?).with_context(|| v.bad())?,
            "protocol" => c.protocol = v.string()?.parse()?,
            "e_elec_j_per_bit" => c.energy.e_elec = v.float()?,
            "eps_amp_j_per_bit_m2" => c.energy.eps_amp = v.float()?,
            "initial_energy_j" => c.energy.initial_energy = v.float()?,
            "threshold_j" => c.energy.participation_threshold = v.float()?,
            "data_bits" => c.sizes.data_bits = v.uint()?,
            "control_bits" => c.sizes.control_bits = v.uint()?,
            "per_hop_latency_s" => c.per_hop_latency_s = v.float()?,
            "ack_wait_s" => c.ack_wait_s = v.float()?,
            "max_retries" => c.max_retries = u32::try_from(v.uint()?).with_context(|| v.bad())?,
            "event_rate_hz" => c.event_rate_hz = v.float()?,
            "duration_s" => c.duration_s = v.float()?,
            "snapshot_s" => c.snapshot_s = v.float()?,
            "seed" => c.seed = v.uint()?,
            "reinit_period_s" => {
                c.reinit_period_s = match value {
                    Value::Boolean(false) => None,
                    _ => Some(v.float()?),
                }
            }
            "trace" => c.trace = v.boolean()?,
            "spin_data" => c.spin_data = v.string()?.parse::<SpinDataMode>()?,
            _ => bail!(
                "unknown config key `{key}` (known keys: {})",
                KEYS.join(", ")
            ),
        }
    }
    Ok(c)
}

fn parse_sink(s: &str) -> Result<SinkPlacement> {
    match s.trim().to_ascii_lowercase().as_str() {
        "center" => Ok(SinkPlacement::Center),
        "corner" => Ok(SinkPlacement::Corner),
        other => {
            let (x, y) = other
                .split_once(',')
                .context("expected `center`, `corner` or `x,y`")?;
            Ok(SinkPlacement::At(Position::new(
                x.trim().parse()?,
                y.trim().parse()?,
            )))
        }
    }
}

struct Field<'a> {
    key: &'a str,
    value: &'a Value,
}

impl Field<'_> {
    fn bad(&self) -> String {
        format!(
            "invalid value for config key `{}`: {}",
            self.key, self.value
        )
    }

    fn mismatch(&self, expected: &str) -> anyhow::Error {
        anyhow::anyhow!(
            "config key `{}` expects {expected}, got {} `{}`",
            self.key,
            self.value.type_str(),
            self.value
        )
    }

    fn float(&self) -> Result<f64> {
        match self.value {
            Value::Float(f) => Ok(*f),
            Value::Integer(i) => Ok(*i as f64),
            _ => Err(self.mismatch("a number")),
        }
    }

    fn uint(&self) -> Result<u64> {
        match self.value {
            Value::Integer(i) if *i >= 0 => Ok(*i as u64),
            _ => Err(self.mismatch("a non-negative integer")),
        }
    }

    fn string(&self) -> Result<&str> {
        self.value.as_str().ok_or_else(|| self.mismatch("a string"))
    }

    fn boolean(&self) -> Result<bool> {
        self.value
            .as_bool()
            .ok_or_else(|| self.mismatch("true or false"))
    }
}
