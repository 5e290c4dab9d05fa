//! Right-hand sides of the cell/tank/circuit equations.
//!
//! First-order form, with `W` in L/s and `r = r1 + r2`:
//!
//! ```text
//! dc_c/dt = (W/alpha_c)(c_t - c_c) - i/(alpha_c F)
//! dc_t/dt = (W/alpha_t)(c_c - c_t)
//! di/dt   = -((r i) - E(c_c)) / L
//! ```
//!
//! Differentiating the first line and eliminating `c_t` gives the second-order
//! form in `(c_c, dc_c/dt, i)`, kept as an independent cross-check.

use super::nernst::{emf_unchecked, nernst_emf};
use super::params::{BatteryParams, CircuitParams, FlowRate};
use super::state::{PhysicalState, SecondOrderState};
use crate::error::{check_open, Result};
use crate::integrator::OdeSystem;

/// A flow cell and tank driving an R-L load at a fixed flow rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCircuit {
    pub battery: BatteryParams,
    pub circuit: CircuitParams,
    pub flow: FlowRate,
    w_cell: f64,
    w_tank: f64,
    reaction: f64,
    r_total: f64,
    inv_l: f64,
    prefactor: f64,
}

impl CellCircuit {
    pub fn new(battery: BatteryParams, circuit: CircuitParams, flow: FlowRate) -> Self {
        let w = flow.l_per_s();
        CellCircuit {
            battery,
            circuit,
            flow,
            w_cell: w / battery.alpha_c,
            w_tank: w / battery.alpha_t,
            reaction: 1.0 / (battery.alpha_c * battery.faraday),
            r_total: circuit.r_total(),
            inv_l: 1.0 / circuit.inductance,
            prefactor: battery.nernst_prefactor(),
        }
    }

    pub fn emf(&self, c_c: f64) -> Result<f64> {
        nernst_emf(c_c, &self.battery)
    }

    /// `E_e0 / (r1 + r2)`, A.
    pub fn current_scale(&self) -> f64 {
        self.battery.e_e0 / self.r_total
    }

    #[inline]
    fn emf_checked(&self, c_c: f64) -> Result<f64> {
        check_open("c_c", c_c, 0.0, self.battery.c_max)?;
        Ok(emf_unchecked(
            c_c,
            self.battery.c_max,
            self.battery.e_e0,
            self.prefactor,
        ))
    }

    /// Derivatives of `(c_c, c_t, i)`.
    #[inline]
    pub fn first_order(&self, y: &[f64; 3]) -> Result<[f64; 3]> {
        let [c_c, c_t, i] = *y;
        let emf = self.emf_checked(c_c)?;
        Ok([
            self.w_cell * (c_t - c_c) - i * self.reaction,
            self.w_tank * (c_c - c_t),
            -(self.r_total * i - emf) * self.inv_l,
        ])
    }

    /// Derivatives of `(c_c, dc_c/dt, i)`.
    pub fn second_order(&self, y: &[f64; 3]) -> Result<[f64; 3]> {
        let [c_c, v, i] = *y;
        let emf = self.emf_checked(c_c)?;
        let damping = self.w_cell + self.w_tank;
        let dv = -damping * v + (self.r_total * self.inv_l - self.w_tank) * i * self.reaction
            - self.reaction * self.inv_l * emf;
        let di = -(self.r_total * i - emf) * self.inv_l;
        Ok([v, dv, di])
    }

    /// `dc_c/dt` implied by a first-order state.
    pub fn cell_rate(&self, c_c: f64, c_t: f64, i: f64) -> f64 {
        self.w_cell * (c_t - c_c) - i * self.reaction
    }

    /// Recovers the tank concentration from `(c_c, dc_c/dt, i)`.
    pub fn tank_concentration(&self, c_c: f64, v: f64, i: f64) -> Option<f64> {
        if self.w_cell > 0.0 {
            Some(c_c + (v + i * self.reaction) / self.w_cell)
        } else {
            None
        }
    }

    /// Moles of active ion in cell and tank, `alpha_c c_c + alpha_t c_t`.
    pub fn ion_inventory(&self, c_c: f64, c_t: f64) -> f64 {
        self.battery.alpha_c * c_c + self.battery.alpha_t * c_t
    }

    pub fn second_order_form(&self) -> SecondOrderForm<'_> {
        SecondOrderForm(self)
    }
}

impl OdeSystem<3> for CellCircuit {
    #[inline]
    fn derivative(&self, y: &[f64; 3]) -> Result<[f64; 3]> {
        self.first_order(y)
    }
}

/// The same system integrated in `(c_c, dc_c/dt, i)`.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrderForm<'a>(&'a CellCircuit);

impl OdeSystem<3> for SecondOrderForm<'_> {
    fn derivative(&self, y: &[f64; 3]) -> Result<[f64; 3]> {
        self.0.second_order(y)
    }
}

/// Time derivative of `(c_c, c_t, i)` at `state`, with the flow rate in L/s.
pub fn state_rhs(
    state: &PhysicalState,
    battery: &BatteryParams,
    circuit: &CircuitParams,
    flow: FlowRate,
) -> Result<[f64; 3]> {
    CellCircuit::new(*battery, *circuit, flow).first_order(&state.vector())
}

/// Time derivative of `(c_c, dc_c/dt, i)` at `state`.
pub fn second_order_rhs(
    state: &SecondOrderState,
    battery: &BatteryParams,
    circuit: &CircuitParams,
    flow: FlowRate,
) -> Result<[f64; 3]> {
    CellCircuit::new(*battery, *circuit, flow).second_order(&state.vector())
}
