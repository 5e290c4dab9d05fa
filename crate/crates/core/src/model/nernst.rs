//! Nernst EMF of the cell and its dimensionless counterpart.
//!
//! `E(c) = E_e0 + k ln(c / (c_max - c))` with `k = 2RT/F` unless overridden.
//! Dividing by `E_e0` gives `N(x) = 1 + eps ln(x / (1 - x))` with
//! `x = c / c_max` and `eps = k / E_e0`.

use super::params::BatteryParams;
use crate::error::{check_open, Result};

/// Cell EMF in volts at cell concentration `c_c` (mol/L).
pub fn nernst_emf(c_c: f64, battery: &BatteryParams) -> Result<f64> {
    check_open("c_c", c_c, 0.0, battery.c_max)?;
    Ok(emf_unchecked(
        c_c,
        battery.c_max,
        battery.e_e0,
        battery.nernst_prefactor(),
    ))
}

#[inline]
pub(crate) fn emf_unchecked(c_c: f64, c_max: f64, e_e0: f64, prefactor: f64) -> f64 {
    e_e0 + prefactor * (c_c / (c_max - c_c)).ln()
}

/// Dimensionless EMF `N(x1) = 1 + eps ln(x1 / (1 - x1))`.
pub fn nernst_dimensionless(x1: f64, epsilon: f64) -> Result<f64> {
    check_open("x1", x1, 0.0, 1.0)?;
    Ok(dimensionless_unchecked(x1, epsilon))
}

#[inline]
pub(crate) fn dimensionless_unchecked(x1: f64, epsilon: f64) -> f64 {
    1.0 + epsilon * (x1 / (1.0 - x1)).ln()
}

/// Slope of the dimensionless EMF, `f(x1) = eps / (x1 (1 - x1))`.
///
/// This is the coupling entry of the linearised system.
pub fn nernst_slope(x1: f64, epsilon: f64) -> Result<f64> {
    check_open("x1", x1, 0.0, 1.0)?;
    Ok(epsilon / (x1 * (1.0 - x1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    fn battery(e_e0: f64) -> BatteryParams {
        BatteryParams {
            e_e0,
            ..Default::default()
        }
    }

    #[test]
    fn half_charge_gives_e_e0() {
        let b = battery(1.40);
        assert_eq!(nernst_emf(0.850, &b).unwrap(), 1.40);
        assert_eq!(nernst_dimensionless(0.5, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn three_quarter_charge_by_hand() {
        // 2 * 8.314462618 * 307 / 96485.33212 = 0.0529104262..., times ln 3.
        let e = nernst_emf(1.275, &battery(1.40)).unwrap();
        assert!((e - 1.458_128_044).abs() < 1e-8, "{e}");
    }

    #[test]
    fn emf_vanishes_at_the_fixed_point_concentration() {
        let x_star: f64 = 3.51e-12;
        let eps = 1.0 / ((1.0 - x_star) / x_star).ln();
        let b = BatteryParams::default();
        let e_e0 = b.nernst_prefactor() / eps;
        let e = nernst_emf(b.c_max * x_star, &battery(e_e0)).unwrap();
        assert!(e.abs() < 1e-6, "{e}");
    }

    #[test]
    fn dimensionless_examples() {
        // epsilon from the fixed point itself; rounding it to 0.03791 moves N by 1.1e-4
        let eps = 0.037_914_109_642_136;
        let n = nernst_dimensionless(3.51e-12, eps).unwrap();
        assert!(n.abs() < 1e-4, "{n}");
        let n = nernst_dimensionless(1.0 - 3.51e-12, eps).unwrap();
        assert!((n - 2.0).abs() < 1e-4, "{n}");
    }

    #[test]
    fn slope_examples() {
        assert!((nernst_slope(0.5, 0.2).unwrap() - 0.8).abs() < 1e-15);
        let f = nernst_slope(5.72e-4, 0.03791).unwrap();
        assert!((f - 66.3).abs() / 66.3 < 5e-3, "{f}");
    }

    #[test]
    fn domain_edges_are_errors() {
        let b = BatteryParams::default();
        for c in [0.0, -1.0, b.c_max, 2.0, f64::NAN] {
            assert!(matches!(nernst_emf(c, &b), Err(Error::Domain { .. })));
        }
        for x in [0.0, 1.0] {
            assert!(nernst_dimensionless(x, 0.04).is_err());
            assert!(nernst_slope(x, 0.04).is_err());
        }
    }

    #[test]
    fn prefactor_override_is_used() {
        let b = BatteryParams {
            nernst_prefactor: Some(0.1),
            ..battery(1.0)
        };
        let e = nernst_emf(1.275, &b).unwrap();
        assert!((e - (1.0 + 0.1 * 3f64.ln())).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn dimensionless_form_matches_physical(x in 1e-9f64..(1.0 - 1e-9)) {
            let b = BatteryParams::default();
            let eps = b.nernst_prefactor() / b.e_e0;
            let lhs = nernst_dimensionless(x, eps).unwrap() * b.e_e0;
            let rhs = nernst_emf(b.c_max * x, &b).unwrap();
            // c_max - c loses relative precision as x approaches 1
            let cond = 1.0 + eps / x.min(1.0 - x);
            prop_assert!((lhs - rhs).abs() <= 8.0 * f64::EPSILON * b.e_e0 * cond, "{lhs} vs {rhs}");
        }

        #[test]
        fn slope_is_symmetric(x in 1e-6f64..0.5) {
            let a = nernst_slope(x, 0.04).unwrap();
            let b = nernst_slope(1.0 - x, 0.04).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a);
        }

        #[test]
        fn slope_matches_centered_difference(x in 1e-6f64..(1.0 - 1e-6)) {
            let eps = 0.03791;
            let step = 1e-5 * x.min(1.0 - x);
            let (xp, xm) = (x + step, x - step);
            let fd = (nernst_dimensionless(xp, eps).unwrap()
                - nernst_dimensionless(xm, eps).unwrap())
                / (xp - xm);
            let f = nernst_slope(x, eps).unwrap();
            prop_assert!(((fd - f) / f).abs() < 1e-6, "fd {fd} f {f}");
        }

        #[test]
        fn emf_is_increasing(a in 1e-6f64..1.69, b in 1e-6f64..1.69) {
            prop_assume!(b - a > 1e-9);
            let p = BatteryParams::default();
            prop_assert!(nernst_emf(a, &p).unwrap() < nernst_emf(b, &p).unwrap());
        }
    }
}
