//! First-order radio energy model.
//!
//! A radio spends `e_elec` joules per bit to run its transmitter or receiver
//! electronics, and `eps_amp * d^2` joules per bit in the transmit amplifier
//! to reach a receiver `d` meters away. All quantities are SI: joules, bits,
//! meters.
//!
//! Besides the per-message prices used by the simulator ([`EnergyModel::tx_cost`],
//! [`EnergyModel::rx_cost`]), the model exposes closed forms for a `k`-bit
//! message crossing `n` equally spaced hops. Those are used as analytic oracles
//! for end-to-end runs.

use crate::error::{Error, Result};

/// Transmit/receive electronics cost, 50 nJ/bit.
pub const DEFAULT_E_ELEC: f64 = 50e-9;
/// Transmit amplifier cost, 100 pJ/bit/m^2.
pub const DEFAULT_EPS_AMP: f64 = 100e-12;
pub const DEFAULT_INITIAL_ENERGY: f64 = 0.5;
pub const DEFAULT_PARTICIPATION_THRESHOLD: f64 = 0.05;

/// Radio constants plus the battery parameters every sensor starts with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    /// Electronics energy per bit (J/bit).
    pub e_elec: f64,
    /// Amplifier energy per bit per square meter (J/bit/m^2).
    pub eps_amp: f64,
    /// Starting battery of every sensor (J).
    pub initial_energy: f64,
    /// Minimum residual energy a node needs to volunteer as a relay (J).
    pub participation_threshold: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            e_elec: DEFAULT_E_ELEC,
            eps_amp: DEFAULT_EPS_AMP,
            initial_energy: DEFAULT_INITIAL_ENERGY,
            participation_threshold: DEFAULT_PARTICIPATION_THRESHOLD,
        }
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value < 0.0 {
        return Err(Error::Domain(format!(
            "{name} must be non-negative, got {value}"
        )));
    }
    Ok(())
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value <= 0.0 {
        return Err(Error::Domain(format!(
            "{name} must be positive, got {value}"
        )));
    }
    Ok(())
}

fn at_least_one_hop(n: u32) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain("hop count must be at least 1".into()));
    }
    Ok(())
}

impl EnergyModel {
    /// Builds a model and checks its invariants.
    pub fn new(
        e_elec: f64,
        eps_amp: f64,
        initial_energy: f64,
        participation_threshold: f64,
    ) -> Result<Self> {
        let model = Self {
            e_elec,
            eps_amp,
            initial_energy,
            participation_threshold,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("e_elec", self.e_elec),
            ("eps_amp", self.eps_amp),
            ("initial_energy", self.initial_energy),
            ("participation_threshold", self.participation_threshold),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::Config {
                    key: name.into(),
                    message: format!("must be finite and strictly positive, got {value}"),
                });
            }
        }
        if self.participation_threshold >= self.initial_energy {
            return Err(Error::Config {
                key: "participation_threshold".into(),
                message: format!(
                    "must be below initial_energy ({} >= {})",
                    self.participation_threshold, self.initial_energy
                ),
            });
        }
        Ok(())
    }

    /// Energy to transmit `k` bits over `d` meters: `e_elec*k + eps_amp*k*d^2`.
    pub fn tx_cost(&self, k: f64, d: f64) -> Result<f64> {
        non_negative("bit count", k)?;
        non_negative("distance", d)?;
        Ok(self.e_elec * k + self.eps_amp * k * d * d)
    }

    /// Energy to receive `k` bits: `e_elec*k`.
    pub fn rx_cost(&self, k: f64) -> Result<f64> {
        non_negative("bit count", k)?;
        Ok(self.e_elec * k)
    }

    /// Single transmission straight across `n` hops of length `r`, i.e. over
    /// distance `n*r`: `k*(e_elec + eps_amp*n^2*r^2)`.
    pub fn direct_energy(&self, k: f64, n: u32, r: f64) -> Result<f64> {
        non_negative("bit count", k)?;
        at_least_one_hop(n)?;
        positive("hop distance", r)?;
        let n = f64::from(n);
        Ok(k * (self.e_elec + self.eps_amp * n * n * r * r))
    }

    /// Receive energy spent by the `n - 1` intermediate relays of an `n`-hop
    /// path: `(n-1)*e_elec*k`.
    pub fn multihop_receive_energy(&self, k: f64, n: u32) -> Result<f64> {
        non_negative("bit count", k)?;
        at_least_one_hop(n)?;
        Ok(f64::from(n - 1) * self.e_elec * k)
    }

    /// Total energy for relaying `k` bits across `n` hops of length `r`
    /// (`n` transmissions, `n - 1` receptions; the destination is not charged):
    /// `k*((2n-1)*e_elec + eps_amp*n*r^2)`.
    pub fn multihop_total_energy(&self, k: f64, n: u32, r: f64) -> Result<f64> {
        non_negative("bit count", k)?;
        at_least_one_hop(n)?;
        positive("hop distance", r)?;
        let n = f64::from(n);
        Ok(k * ((2.0 * n - 1.0) * self.e_elec + self.eps_amp * n * r * r))
    }

    /// One transmission plus one reception over distance `r`:
    /// `k*(2*e_elec + eps_amp*r^2)`.
    pub fn singlehop_pair_energy(&self, k: f64, r: f64) -> Result<f64> {
        non_negative("bit count", k)?;
        positive("distance", r)?;
        Ok(k * (2.0 * self.e_elec + self.eps_amp * r * r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        if a == b {
            return true;
        }
        (a - b).abs() <= tol * a.abs().max(b.abs())
    }

    #[test]
    fn defaults_are_si_converted() {
        let m = EnergyModel::default();
        assert_eq!(m.e_elec, 5e-8);
        assert_eq!(m.eps_amp, 1e-10);
        m.validate().unwrap();
    }

    #[test]
    fn tx_cost_examples() {
        let m = EnergyModel::default();
        assert!(rel_close(m.tx_cost(1000.0, 100.0).unwrap(), 1.05e-3, 1e-12));
        assert_eq!(m.tx_cost(0.0, 500.0).unwrap(), 0.0);
        assert!(rel_close(m.tx_cost(1000.0, 0.0).unwrap(), 5.0e-5, 1e-12));
    }

    #[test]
    fn rx_cost_examples() {
        let m = EnergyModel::default();
        assert!(rel_close(m.rx_cost(1000.0).unwrap(), 5.0e-5, 1e-12));
        assert_eq!(m.rx_cost(0.0).unwrap(), 0.0);
        assert!(rel_close(m.rx_cost(1.0).unwrap(), 5.0e-8, 1e-12));
    }

    #[test]
    fn closed_form_examples() {
        let m = EnergyModel::default();
        assert!(rel_close(
            m.direct_energy(1000.0, 5, 100.0).unwrap(),
            2.505e-2,
            1e-12
        ));
        assert!(rel_close(
            m.direct_energy(1000.0, 1, 100.0).unwrap(),
            1.05e-3,
            1e-12
        ));
        assert_eq!(m.direct_energy(0.0, 5, 100.0).unwrap(), 0.0);

        assert!(rel_close(
            m.multihop_receive_energy(1000.0, 5).unwrap(),
            2.0e-4,
            1e-12
        ));
        assert_eq!(m.multihop_receive_energy(1000.0, 1).unwrap(), 0.0);
        assert_eq!(m.multihop_receive_energy(0.0, 9).unwrap(), 0.0);

        assert!(rel_close(
            m.multihop_total_energy(1000.0, 5, 100.0).unwrap(),
            5.45e-3,
            1e-12
        ));
        assert!(rel_close(
            m.multihop_total_energy(1000.0, 1, 100.0).unwrap(),
            1.05e-3,
            1e-12
        ));
        assert_eq!(m.multihop_total_energy(0.0, 3, 50.0).unwrap(), 0.0);

        assert!(rel_close(
            m.singlehop_pair_energy(1000.0, 100.0).unwrap(),
            1.1e-3,
            1e-12
        ));
        assert_eq!(m.singlehop_pair_energy(0.0, 100.0).unwrap(), 0.0);
        let pair = m.singlehop_pair_energy(1000.0, 100.0).unwrap();
        let tx = m.tx_cost(1000.0, 100.0).unwrap();
        assert!(rel_close(pair - m.rx_cost(1000.0).unwrap(), tx, 1e-12));
    }

    #[test]
    fn domain_errors() {
        let m = EnergyModel::default();
        assert!(matches!(m.tx_cost(-1.0, 10.0), Err(Error::Domain(_))));
        assert!(matches!(m.tx_cost(1.0, -10.0), Err(Error::Domain(_))));
        assert!(matches!(m.rx_cost(-5.0), Err(Error::Domain(_))));
        assert!(matches!(
            m.direct_energy(1.0, 0, 10.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            m.multihop_receive_energy(1.0, 0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            m.multihop_total_energy(1.0, 0, 10.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            m.singlehop_pair_energy(1.0, -1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(m.tx_cost(f64::NAN, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(EnergyModel::new(0.0, 1e-10, 0.5, 0.05).is_err());
        assert!(EnergyModel::new(5e-8, 1e-10, 0.5, 0.5).is_err());
        assert!(EnergyModel::new(5e-8, 1e-10, -0.5, 0.05).is_err());
        assert!(EnergyModel::new(5e-8, 1e-10, 0.5, 0.05).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tx_dominates_rx(k in 0.0f64..1e7, d in 0.0f64..2000.0) {
                let m = EnergyModel::default();
                let tx = m.tx_cost(k, d).unwrap();
                let rx = m.rx_cost(k).unwrap();
                prop_assert!(tx >= rx);
                if k > 0.0 && d > 0.0 {
                    prop_assert!(tx > rx);
                } else {
                    prop_assert_eq!(tx, rx);
                }
            }

            #[test]
            fn multihop_total_decomposes(k in 0.0f64..1e7, n in 1u32..50, r in 1.0f64..1000.0) {
                let m = EnergyModel::default();
                let total = m.multihop_total_energy(k, n, r).unwrap();
                let parts = f64::from(n) * m.tx_cost(k, r).unwrap()
                    + f64::from(n - 1) * m.rx_cost(k).unwrap();
                prop_assert!(rel_close(total, parts, 1e-12), "{} vs {}", total, parts);
            }

            #[test]
            fn costs_are_linear_in_bits(k in 0.0f64..1e6, n in 1u32..20, r in 1.0f64..500.0) {
                let m = EnergyModel::default();
                let checks = [
                    (m.tx_cost(2.0 * k, r).unwrap(), m.tx_cost(k, r).unwrap()),
                    (m.rx_cost(2.0 * k).unwrap(), m.rx_cost(k).unwrap()),
                    (m.direct_energy(2.0 * k, n, r).unwrap(), m.direct_energy(k, n, r).unwrap()),
                    (m.multihop_receive_energy(2.0 * k, n).unwrap(), m.multihop_receive_energy(k, n).unwrap()),
                    (m.multihop_total_energy(2.0 * k, n, r).unwrap(), m.multihop_total_energy(k, n, r).unwrap()),
                    (m.singlehop_pair_energy(2.0 * k, r).unwrap(), m.singlehop_pair_energy(k, r).unwrap()),
                ];
                for (double, single) in checks {
                    prop_assert!(rel_close(double, 2.0 * single, 1e-12));
                }
            }
        }
    }

    #[test]
    fn direct_beats_multihop_exactly_when_amplifier_dominates() {
        let m = EnergyModel::default();
        let k = 1000.0;
        for n in 2..=20u32 {
            for r in (10..=500).step_by(10) {
                let r = f64::from(r);
                let nf = f64::from(n);
                let direct = m.direct_energy(k, n, r).unwrap();
                let multi = m.multihop_total_energy(k, n, r).unwrap();
                if m.eps_amp * r * r * nf * (nf - 1.0) > (2.0 * nf - 2.0) * m.e_elec {
                    assert!(direct > multi, "n={n} r={r}");
                }
            }
        }
    }
}
