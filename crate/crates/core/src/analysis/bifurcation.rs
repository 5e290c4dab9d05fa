use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eigen::{characteristic_polynomial, cubic_discriminant, eigenvalues, EigenSpectrum};
use crate::error::{Error, Result};
use crate::model::{jacobian, DimensionlessParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub x1: f64,
    pub lambda: [Complex64; 3],
    pub discriminant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationResult {
    /// Cell concentration at which the complex pair conjoins on the real axis.
    pub x1_c: f64,
    pub discriminant_at_x1_c: f64,
    /// Largest `|discriminant|` at the ends of the scanned range.
    pub discriminant_scale: f64,
    pub branch: Vec<BranchPoint>,
}

pub fn discriminant_at(x1: f64, d: &DimensionlessParams) -> Result<f64> {
    Ok(cubic_discriminant(&characteristic_polynomial(&jacobian(
        x1, d,
    )?)))
}

pub fn spectrum_at(x1: f64, d: &DimensionlessParams) -> Result<EigenSpectrum> {
    Ok(eigenvalues(&jacobian(x1, d)?))
}

/// Scans `x1` log-uniformly over `range` and bisects the first sign change
/// of the cubic discriminant to relative width `1e-6`.
pub fn bifurcation_scan(
    d: &DimensionlessParams,
    range: (f64, f64),
    n_samples: usize,
) -> Result<BifurcationResult> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "scan range must satisfy 0 < lower < upper <= 1/2 (got [{lo}, {hi}])"
        )));
    }
    if n_samples < 16 {
        return Err(Error::InvalidParameter(format!(
            "at least 16 scan samples are required (got {n_samples})"
        )));
    }
    let step = (hi / lo).ln() / (n_samples - 1) as f64;
    let xs: Vec<f64> = (0..n_samples)
        .map(|k| {
            if k == n_samples - 1 {
                hi
            } else {
                lo * (step * k as f64).exp()
            }
        })
        .collect();
    let mut branch = Vec::with_capacity(n_samples);
    for &x1 in &xs {
        let spectrum = spectrum_at(x1, d)?;
        branch.push(BranchPoint {
            x1,
            lambda: spectrum.lambda,
            discriminant: discriminant_at(x1, d)?,
        });
    }
    let scale = branch[0]
        .discriminant
        .abs()
        .max(branch[n_samples - 1].discriminant.abs());

    let k = branch
        .windows(2)
        .position(|w| w[0].discriminant.signum() != w[1].discriminant.signum())
        .ok_or(Error::NoBifurcation {
            lower: lo,
            upper: hi,
        })?;
    let (mut a, mut b) = (branch[k].x1, branch[k + 1].x1);
    let sign_a = branch[k].discriminant.signum();
    while (b - a) > 1e-6 * a {
        let mid = (a * b).sqrt();
        let dm = discriminant_at(mid, d)?;
        if dm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if dm.signum() == sign_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    let x1_c = 0.5 * (a + b);
    Ok(BifurcationResult {
        x1_c,
        discriminant_at_x1_c: discriminant_at(x1_c, d)?,
        discriminant_scale: scale,
        branch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> DimensionlessParams {
        DimensionlessParams {
            beta: 0.5,
            gamma: 0.1,
            delta: 0.05,
            epsilon: 0.04,
            c_hat: 1.0,
            t_hat: 1.0,
            i_hat: 1.0,
            t_hat_prime: 0.05,
        }
    }

    #[test]
    fn too_few_samples_is_invalid() {
        assert!(bifurcation_scan(&toy(), (1e-6, 1e-2), 8).is_err());
    }

    #[test]
    fn sign_change_brackets_real_and_complex_regimes() {
        let d = toy();
        let r = bifurcation_scan(&d, (1e-6, 0.4), 64).unwrap();
        assert!(spectrum_at(r.x1_c * 0.99, &d).unwrap().has_complex_pair());
        assert!(!spectrum_at(r.x1_c * 1.01, &d).unwrap().has_complex_pair());
        assert!(r.discriminant_at_x1_c.abs() < 1e-6 * r.discriminant_scale);
    }

    #[test]
    fn no_sign_change_is_reported() {
        let d = toy();
        let r = bifurcation_scan(&d, (1e-6, 0.4), 64).unwrap();
        assert!(matches!(
            bifurcation_scan(&d, (1e-6, r.x1_c * 0.5), 32),
            Err(Error::NoBifurcation { .. })
        ));
    }
}
