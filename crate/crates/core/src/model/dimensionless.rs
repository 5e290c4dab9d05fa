//! Scaled form of the cell/circuit equations.
//!
//! With `c_hat = c_max`, `t_hat = sqrt(alpha_c F L c_max / E_e0)`,
//! `i_hat = E_e0 / r` and `t_hat' = L / r`:
//!
//! ```text
//! dx1/dtau       = x2
//! dx2/dtau       = -beta x2 + (1 - gamma) x3 - N(x1)
//! delta dx3/dtau = -x3 + N(x1)
//! ```

use serde::{Deserialize, Serialize};

use super::nernst::{dimensionless_unchecked, nernst_slope};
use super::params::{BatteryParams, CircuitParams, FlowRate};
use super::state::{DimensionlessState, PhysicalState};
use crate::error::{check_open, Result};
use crate::integrator::OdeSystem;

/// Row-major 3x3 matrix.
pub type Matrix3 = [[f64; 3]; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    /// Concentration scale, mol/L.
    pub c_hat: f64,
    /// Slow time scale, s.
    pub t_hat: f64,
    /// Current scale, A.
    pub i_hat: f64,
    /// Circuit time constant `L / r`, s.
    pub t_hat_prime: f64,
}

/// Scales and dimensionless groups for a given flow rate.
pub fn nondimensionalize(
    battery: &BatteryParams,
    circuit: &CircuitParams,
    flow: FlowRate,
) -> Result<DimensionlessParams> {
    battery.validate()?;
    circuit.validate()?;
    let w = flow.l_per_s();
    if !(w >= 0.0 && w.is_finite()) {
        return Err(crate::error::Error::InvalidParameter(format!(
            "flow rate must be >= 0 (got {w} L/s)"
        )));
    }
    let r = circuit.r_total();
    let l = circuit.inductance;
    let t_hat = (battery.alpha_c * battery.faraday * l * battery.c_max / battery.e_e0).sqrt();
    let t_hat_prime = l / r;
    Ok(DimensionlessParams {
        beta: w * (1.0 / battery.alpha_c + 1.0 / battery.alpha_t) * t_hat,
        gamma: w * l / (battery.alpha_t * r),
        delta: t_hat_prime / t_hat,
        epsilon: battery.nernst_prefactor() / battery.e_e0,
        c_hat: battery.c_max,
        t_hat,
        i_hat: battery.e_e0 / r,
        t_hat_prime,
    })
}

impl DimensionlessParams {
    /// Maps a physical state and its `dc_c/dt` onto the scaled variables.
    pub fn scale(&self, s: &PhysicalState, dc_c_dt: f64) -> DimensionlessState {
        DimensionlessState {
            tau: s.t / self.t_hat,
            x1: s.c_c / self.c_hat,
            x2: dc_c_dt * self.t_hat / self.c_hat,
            x3: s.i / self.i_hat,
        }
    }

    /// Returns `(t, c_c, dc_c/dt, i)` for a scaled state.
    pub fn unscale(&self, x: &DimensionlessState) -> (f64, f64, f64, f64) {
        (
            x.tau * self.t_hat,
            x.x1 * self.c_hat,
            x.x2 * self.c_hat / self.t_hat,
            x.x3 * self.i_hat,
        )
    }
}

/// Derivatives of `(x1, x2, x3)` with respect to `tau`.
pub fn dimensionless_rhs(x: &DimensionlessState, d: &DimensionlessParams) -> Result<[f64; 3]> {
    d.derivative(&x.vector())
}

impl OdeSystem<3> for DimensionlessParams {
    #[inline]
    fn derivative(&self, x: &[f64; 3]) -> Result<[f64; 3]> {
        let [x1, x2, x3] = *x;
        check_open("x1", x1, 0.0, 1.0)?;
        let n = dimensionless_unchecked(x1, self.epsilon);
        Ok([
            x2,
            -self.beta * x2 + (1.0 - self.gamma) * x3 - n,
            (-x3 + n) / self.delta,
        ])
    }
}

/// Jacobian of the scaled system, evaluated at cell concentration `x1`.
pub fn jacobian(x1: f64, d: &DimensionlessParams) -> Result<Matrix3> {
    let f = nernst_slope(x1, d.epsilon)?;
    Ok([
        [0.0, 1.0, 0.0],
        [-f, -d.beta, 1.0 - d.gamma],
        [f / d.delta, 0.0, -1.0 / d.delta],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::nernst::nernst_dimensionless;

    fn defaults(w_l_per_min: f64) -> DimensionlessParams {
        nondimensionalize(
            &BatteryParams::default(),
            &CircuitParams::default(),
            FlowRate::from_l_per_min(w_l_per_min),
        )
        .unwrap()
    }

    #[test]
    fn zero_flow_has_no_flow_groups() {
        let d0 = defaults(0.0);
        let d1 = defaults(0.1);
        assert_eq!(d0.beta, 0.0);
        assert_eq!(d0.gamma, 0.0);
        assert_eq!(d0.delta, d1.delta);
        assert_eq!(d0.epsilon, d1.epsilon);
    }

    #[test]
    fn flow_groups_are_linear_in_flow() {
        let a = defaults(0.05);
        let b = defaults(0.10);
        assert!((b.beta / a.beta - 2.0).abs() < 1e-14);
        assert!((b.gamma / a.gamma - 2.0).abs() < 1e-14);
        assert_eq!(a.delta, b.delta);
    }

    #[test]
    fn rounded_circuit_predicts_the_slow_rate() {
        let b = BatteryParams {
            e_e0: 1.40,
            ..Default::default()
        };
        let c = CircuitParams {
            r1: 0.0,
            r2: 0.05,
            inductance: 0.1,
        };
        let d = nondimensionalize(&b, &c, FlowRate::from_l_per_min(0.050)).unwrap();
        let slow = -d.gamma / d.delta;
        assert!((slow / -3.17e-2 - 1.0).abs() < 0.02, "{slow}");
        assert_eq!(d.delta, d.t_hat_prime / d.t_hat);
        assert_eq!(d.epsilon, b.nernst_prefactor() / b.e_e0);
    }

    #[test]
    fn fast_nullcline_freezes_current() {
        let d = defaults(0.1);
        let x1 = 2e-4;
        let n = nernst_dimensionless(x1, d.epsilon).unwrap();
        let x = DimensionlessState {
            tau: 0.0,
            x1,
            x2: 0.0,
            x3: n,
        };
        assert_eq!(dimensionless_rhs(&x, &d).unwrap()[2], 0.0);
    }

    #[test]
    fn generic_point_by_hand() {
        let d = DimensionlessParams {
            beta: 0.5,
            gamma: 0.25,
            delta: 0.1,
            epsilon: 0.04,
            c_hat: 1.0,
            t_hat: 1.0,
            i_hat: 1.0,
            t_hat_prime: 0.1,
        };
        let x = DimensionlessState {
            tau: 0.0,
            x1: 0.2,
            x2: 0.3,
            x3: 0.7,
        };
        // N(0.2) = 1 + 0.04 ln(0.25) = 0.944548225...
        let n = 1.0 + 0.04 * 0.25f64.ln();
        let got = dimensionless_rhs(&x, &d).unwrap();
        assert_eq!(got[0], 0.3);
        assert!((got[1] - (-0.15 + 0.525 - n)).abs() < 1e-15);
        assert!((got[2] - (-0.7 + n) / 0.1).abs() < 1e-14);
    }

    #[test]
    fn jacobian_structure() {
        let d = defaults(0.1);
        let a = jacobian(1e-3, &d).unwrap();
        assert_eq!(a[0], [0.0, 1.0, 0.0]);
        assert_eq!(a[2][1], 0.0);
        let unit_gamma = DimensionlessParams { gamma: 1.0, ..d };
        assert_eq!(jacobian(1e-3, &unit_gamma).unwrap()[1][2], 0.0);
        assert!(jacobian(0.0, &d).is_err());
    }

    #[test]
    fn jacobian_determinant_by_cofactors() {
        let d = defaults(0.2);
        let x1 = 3e-4;
        let a = jacobian(x1, &d).unwrap();
        // expansion along the first row: only the (0,1) cofactor survives
        let det = -(a[1][0] * a[2][2] - a[1][2] * a[2][0]);
        let f = nernst_slope(x1, d.epsilon).unwrap();
        let expect = -f * d.gamma / d.delta;
        assert!(((det - expect) / expect).abs() < 1e-12);
    }

    #[test]
    fn scale_round_trip() {
        let d = defaults(0.1);
        let s = PhysicalState {
            t: 12.5,
            c_c: 0.1,
            c_t: 0.12,
            i: 20.0,
        };
        let x = d.scale(&s, -2e-3);
        let (t, c, v, i) = d.unscale(&x);
        assert!((t - 12.5).abs() < 1e-12);
        assert!((c - 0.1).abs() < 1e-15);
        assert!((v + 2e-3).abs() < 1e-15);
        assert!((i - 20.0).abs() < 1e-12);
    }
}
