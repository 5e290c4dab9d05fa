//! Physical parameter records.
//!
//! Volumes are in litres, concentrations in mol/L, and flow rates are held
//! internally in L/s. The cell geometry defaults (`alpha_c`, `alpha_t`, `T`,
//! `c_max`) are the published bench values; `E_e0`, the inductance and the
//! total loop resistance are not published and default to values recovered by
//! [`crate::analysis::calibrate`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Faraday constant, C/mol (CODATA 2018).
pub const FARADAY: f64 = 96_485.332_12;
/// Molar gas constant, J/(mol K) (CODATA 2018).
pub const GAS_CONSTANT: f64 = 8.314_462_618;

/// Equilibrium EMF at half charge recovered by calibration, V.
pub const CALIBRATED_E_E0: f64 = 1.395_533_924_700_401;
/// Loop inductance recovered by calibration, H.
pub const CALIBRATED_INDUCTANCE: f64 = 0.099_723_202_454_444_4;
/// Total loop resistance `r1 + r2` recovered by calibration, ohm.
pub const CALIBRATED_R_TOTAL: f64 = 0.049_851_988_908_246_6;

/// Volumetric flow rate of electrolyte through the cell.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowRate(f64);

impl FlowRate {
    pub fn from_l_per_s(w: f64) -> Self {
        FlowRate(w)
    }

    pub fn from_l_per_min(w: f64) -> Self {
        FlowRate(w / 60.0)
    }

    pub fn l_per_s(self) -> f64 {
        self.0
    }

    pub fn l_per_min(self) -> f64 {
        self.0 * 60.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    /// Cell volume, L.
    pub alpha_c: f64,
    /// Tank volume, L.
    pub alpha_t: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Maximum cell concentration, mol/L.
    pub c_max: f64,
    /// EMF at `c_c = c_max / 2`, V.
    pub e_e0: f64,
    pub faraday: f64,
    pub gas_constant: f64,
    /// Replaces the `2RT/F` factor in front of the Nernst logarithm when set.
    pub nernst_prefactor: Option<f64>,
}

impl Default for BatteryParams {
    fn default() -> Self {
        BatteryParams {
            alpha_c: 0.100,
            alpha_t: 0.900,
            temperature: 307.0,
            c_max: 1.70,
            e_e0: CALIBRATED_E_E0,
            faraday: FARADAY,
            gas_constant: GAS_CONSTANT,
            nernst_prefactor: None,
        }
    }
}

impl BatteryParams {
    /// Coefficient of `ln(c / (c_max - c))` in the EMF, V.
    pub fn nernst_prefactor(&self) -> f64 {
        self.nernst_prefactor
            .unwrap_or(2.0 * self.gas_constant * self.temperature / self.faraday)
    }

    /// Returns every violated invariant, empty when the record is valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = [
            ("battery.alpha_c", self.alpha_c),
            ("battery.alpha_t", self.alpha_t),
            ("battery.T", self.temperature),
            ("battery.c_max", self.c_max),
            ("battery.E_e0", self.e_e0),
            ("battery.F", self.faraday),
            ("battery.R", self.gas_constant),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                out.push(format!("{name} must be finite and > 0 (got {v})"));
            }
        }
        if let Some(k) = self.nernst_prefactor {
            if !(k > 0.0 && k.is_finite()) {
                out.push(format!(
                    "battery.nernst_prefactor must be finite and > 0 (got {k})"
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        join_violations(self.violations())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Source-side resistance, ohm.
    pub r1: f64,
    /// Load resistance, ohm.
    pub r2: f64,
    /// Inductance, H.
    pub inductance: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        CircuitParams {
            r1: 0.0,
            r2: CALIBRATED_R_TOTAL,
            inductance: CALIBRATED_INDUCTANCE,
        }
    }
}

impl CircuitParams {
    pub fn r_total(&self) -> f64 {
        self.r1 + self.r2
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.r1 >= 0.0 && self.r2 >= 0.0) {
            out.push(format!(
                "circuit.r1 and circuit.r2 must be >= 0 (got {}, {})",
                self.r1, self.r2
            ));
        }
        if !(self.r_total() > 0.0 && self.r_total().is_finite()) {
            out.push(format!(
                "circuit.r1 + circuit.r2 must be > 0 (got {})",
                self.r_total()
            ));
        }
        if !(self.inductance > 0.0 && self.inductance.is_finite()) {
            out.push(format!("circuit.L must be > 0 (got {})", self.inductance));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        join_violations(self.violations())
    }
}

/// Loop current just before the switch closes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InitialCurrent {
    /// No current flows before `t = 0`.
    #[default]
    OpenSwitch,
    /// Steady current through `r1 + r_pre` before the load steps.
    SteadyPreload { r_pre: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingCondition {
    pub flow: FlowRate,
    /// Initial cell (and tank) concentration, mol/L.
    pub c_c0: f64,
    pub initial_current: InitialCurrent,
}

impl OperatingCondition {
    pub fn new(flow_l_per_min: f64, c_c0: f64) -> Self {
        OperatingCondition {
            flow: FlowRate::from_l_per_min(flow_l_per_min),
            c_c0,
            initial_current: InitialCurrent::OpenSwitch,
        }
    }

    pub fn violations(&self, battery: &BatteryParams, circuit: &CircuitParams) -> Vec<String> {
        let mut out = Vec::new();
        let w = self.flow.l_per_s();
        if !(w >= 0.0 && w.is_finite()) {
            out.push(format!(
                "operating.W must be >= 0 (got {} L/min)",
                self.flow.l_per_min()
            ));
        }
        if !(self.c_c0 > 0.0 && self.c_c0 < battery.c_max) {
            out.push(format!(
                "operating.c_c0 must satisfy 0 < c_c0 < c_max = {} (got {})",
                battery.c_max, self.c_c0
            ));
        }
        if let InitialCurrent::SteadyPreload { r_pre } = self.initial_current {
            if !(r_pre >= 0.0 && circuit.r1 + r_pre > 0.0) {
                out.push(format!(
                    "operating.r_pre must give r1 + r_pre > 0 (got {r_pre})"
                ));
            }
        }
        out
    }

    pub fn validate(&self, battery: &BatteryParams, circuit: &CircuitParams) -> Result<()> {
        join_violations(self.violations(battery, circuit))
    }
}

fn join_violations(v: Vec<String>) -> Result<()> {
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(v.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flow_rate_units() {
        let w = FlowRate::from_l_per_min(0.120);
        assert!((w.l_per_s() - 0.002).abs() < 1e-15);
        assert!((w.l_per_min() - 0.120).abs() < 1e-15);
    }

    #[test]
    fn defaults_are_valid() {
        let b = BatteryParams::default();
        let c = CircuitParams::default();
        assert!(b.validate().is_ok());
        assert!(c.validate().is_ok());
        assert!(OperatingCondition::new(0.1, 0.125).validate(&b, &c).is_ok());
    }

    #[test]
    fn concentration_above_c_max_is_rejected() {
        let b = BatteryParams::default();
        let err = OperatingCondition::new(0.1, 2.0)
            .validate(&b, &CircuitParams::default())
            .unwrap_err();
        assert!(err.to_string().contains("0 < c_c0 < c_max"));
    }

    #[test]
    fn every_violation_is_listed() {
        let b = BatteryParams {
            alpha_c: -1.0,
            c_max: 0.0,
            ..Default::default()
        };
        assert_eq!(b.violations().len(), 2);
        let c = CircuitParams {
            r1: 0.0,
            r2: 0.0,
            inductance: 0.0,
        };
        assert_eq!(c.violations().len(), 2);
    }
}
