//! Recovers the unpublished EMF offset, inductance and loop resistance from
//! the reported fixed point and linearized spectrum.

use serde::{Deserialize, Serialize};

use super::eigen::{cubic_roots, EigenSpectrum};
use super::fixed_point::fixed_point;
use crate::error::{Error, Result};
use crate::model::{
    jacobian, nernst_slope, nondimensionalize, BatteryParams, CircuitParams, FlowRate,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    /// Fixed-point cell concentration, dimensionless.
    pub x1_star: f64,
    /// Flow rate at which the spectrum was reported, L/min.
    pub w_l_per_min: f64,
    /// Real slow eigenvalue.
    pub slow: f64,
    /// Real part of the fast complex pair.
    pub fast_re: f64,
}

impl Default for CalibrationTargets {
    fn default() -> Self {
        CalibrationTargets {
            x1_star: 3.51e-12,
            w_l_per_min: 0.050,
            slow: -3.17e-2,
            fast_re: -8.70,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResiduals {
    pub x1_star: f64,
    pub slow: f64,
    pub fast_re: f64,
}

impl CalibrationResiduals {
    pub fn max(&self) -> f64 {
        self.x1_star
            .abs()
            .max(self.slow.abs())
            .max(self.fast_re.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub e_e0: f64,
    pub inductance: f64,
    pub r_total: f64,
    pub epsilon: f64,
    pub t_hat: f64,
    pub delta: f64,
    /// Relative errors of the targets recomputed through the forward model.
    pub residuals: CalibrationResiduals,
}

/// Slow real root and fast-pair real part of the linearization at `x1`, for
/// time scale `t_hat` and inverse ratio `s = 1/delta`.
fn spectrum_parts(b: &BatteryParams, w: f64, f: f64, t_hat: f64, s: f64) -> Option<(f64, f64)> {
    let beta = w * (1.0 / b.alpha_c + 1.0 / b.alpha_t) * t_hat;
    // gamma / delta = W t_hat / alpha_t
    let gd = w * t_hat / b.alpha_t;
    let spec = EigenSpectrum::from_roots(cubic_roots(&[beta + s, beta * s + f, f * gd]));
    if !spec.has_complex_pair() {
        return None;
    }
    Some((spec.lambda[2].re, spec.lambda[0].re))
}

fn relative(got: f64, want: f64) -> f64 {
    (got - want) / want
}

/// Fits `(E_e0, L, r1 + r2)` to `targets` with the cell geometry of `battery`.
///
/// The EMF offset follows from the fixed point in closed form. The slow root
/// and the fast real part of the exact characteristic cubic are then matched
/// by Newton iteration on `(t_hat, 1/delta)`.
pub fn calibrate(battery: &BatteryParams, targets: &CalibrationTargets) -> Result<Calibration> {
    let x = targets.x1_star;
    if !(x > 0.0 && x < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "fixed-point target must lie in (0, 1/2) (got {x})"
        )));
    }
    if !(targets.slow < 0.0 && targets.fast_re < 0.0 && targets.w_l_per_min > 0.0) {
        return Err(Error::InvalidParameter(
            "eigenvalue targets must be negative and the flow rate positive".into(),
        ));
    }
    let epsilon = -1.0 / (x.ln() - (-x).ln_1p());
    let e_e0 = battery.nernst_prefactor() / epsilon;
    let f = nernst_slope(x, epsilon)?;
    let w = FlowRate::from_l_per_min(targets.w_l_per_min).l_per_s();

    // first-order guesses: slow ~ -W t_hat / alpha_t, fast Re ~ -(beta + 1/delta) / 2
    let mut t_hat = -targets.slow * battery.alpha_t / w;
    let beta0 = w * (1.0 / battery.alpha_c + 1.0 / battery.alpha_t) * t_hat;
    let mut s = -2.0 * targets.fast_re - beta0;
    let residual = |t_hat: f64, s: f64| -> Result<[f64; 2]> {
        let (slow, re) =
            spectrum_parts(battery, w, f, t_hat, s).ok_or(Error::CalibrationMismatch {
                stage: "spectrum",
                relative_error: f64::INFINITY,
            })?;
        Ok([relative(slow, targets.slow), relative(re, targets.fast_re)])
    };
    for _ in 0..50 {
        let r = residual(t_hat, s)?;
        if r[0].abs().max(r[1].abs()) < 1e-14 {
            break;
        }
        let (ht, hs) = (1e-7 * t_hat, 1e-7 * s);
        let rt = residual(t_hat + ht, s)?;
        let rs = residual(t_hat, s + hs)?;
        let j = [
            [(rt[0] - r[0]) / ht, (rs[0] - r[0]) / hs],
            [(rt[1] - r[1]) / ht, (rs[1] - r[1]) / hs],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dt = (r[0] * j[1][1] - r[1] * j[0][1]) / det;
        let ds = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        t_hat -= dt;
        s -= ds;
    }

    let inductance = t_hat * t_hat * e_e0 / (battery.alpha_c * battery.faraday * battery.c_max);
    let delta = 1.0 / s;
    let r_total = inductance / (delta * t_hat);

    // forward verification through the public model
    let b = BatteryParams { e_e0, ..*battery };
    let c = CircuitParams {
        r1: 0.0,
        r2: r_total,
        inductance,
    };
    let d = nondimensionalize(&b, &c, FlowRate::from_l_per_min(targets.w_l_per_min))?;
    let x1 = fixed_point(&d).x1;
    let spec = super::eigen::eigenvalues(&jacobian(x1, &d)?);
    let residuals = CalibrationResiduals {
        x1_star: relative(x1, x),
        slow: relative(spec.slowest_real().unwrap_or(f64::NAN), targets.slow),
        fast_re: relative(spec.lambda[0].re, targets.fast_re),
    };
    for (stage, err) in [
        ("fixed point", residuals.x1_star),
        ("slow eigenvalue", residuals.slow),
        ("fast real part", residuals.fast_re),
    ] {
        if !(err.abs() <= 0.05) {
            return Err(Error::CalibrationMismatch {
                stage,
                relative_error: err.abs(),
            });
        }
    }
    Ok(Calibration {
        e_e0,
        inductance,
        r_total,
        epsilon,
        t_hat,
        delta,
        residuals,
    })
}
