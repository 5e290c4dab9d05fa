//! Eigenvalues of 3x3 matrices through the characteristic cubic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::Matrix3;

/// Coefficients `[c2, c1, c0]` of the monic cubic `l^3 + c2 l^2 + c1 l + c0`.
pub type Cubic = [f64; 3];

/// Characteristic polynomial `det(l I - A)` from trace, principal-minor sum and
/// determinant.
pub fn characteristic_polynomial(a: &Matrix3) -> Cubic {
    let trace = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    [-trace, minors, -det]
}

/// Discriminant of the monic cubic: positive for three distinct real roots,
/// negative for one real root and a complex pair.
pub fn cubic_discriminant(c: &Cubic) -> f64 {
    let [a, b, d] = *c;
    18.0 * a * b * d - 4.0 * a.powi(3) * d + a * a * b * b - 4.0 * b.powi(3) - 27.0 * d * d
}

fn eval(c: &Cubic, z: Complex64) -> (Complex64, Complex64) {
    let p = ((z + c[0]) * z + c[1]) * z + c[2];
    let dp = (z * 3.0 + 2.0 * c[0]) * z + c[1];
    (p, dp)
}

fn polish(c: &Cubic, mut z: Complex64) -> Complex64 {
    let (mut p, _) = eval(c, z);
    for _ in 0..8 {
        let (_, dp) = eval(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        let (pn, _) = eval(c, next);
        if !(pn.norm() < p.norm()) {
            break;
        }
        z = next;
        p = pn;
    }
    z
}

fn polish_real(c: &Cubic, x: f64) -> f64 {
    polish(c, Complex64::new(x, 0.0)).re
}

/// Remaining two roots once the real root `r` is known. `r` should be the
/// root of largest magnitude, or the other two come from `-a - r` when that
/// does not cancel.
fn deflate(c: &Cubic, r: f64) -> [Complex64; 2] {
    let [a, b, d] = *c;
    // sum s and product p of the other two roots
    let (s, p) = if r == 0.0 {
        (-a, b)
    } else if r.abs() > (a + r).abs() {
        let p = -d / r;
        ((b - p) / r, p)
    } else {
        (-a - r, -d / r)
    };
    let disc = s * s - 4.0 * p;
    if disc < 0.0 {
        let z = Complex64::new(s / 2.0, (-disc).sqrt() / 2.0);
        [z, z.conj()]
    } else {
        let q = 0.5 * (s + s.signum() * disc.sqrt());
        let other = if q == 0.0 { 0.0 } else { p / q };
        [Complex64::new(q, 0.0), Complex64::new(other, 0.0)]
    }
}

fn with_deflated(c: &Cubic, r: f64) -> [Complex64; 3] {
    let [y, z] = deflate(c, r);
    let y = polish(c, y);
    let z = if y.im != 0.0 { y.conj() } else { polish(c, z) };
    [Complex64::new(r, 0.0), y, z]
}

/// Roots of the monic cubic by Cardano's formula (one real root) or the
/// trigonometric form (three real roots), each refined by Newton steps.
/// Roots much smaller than the largest one are recovered by deflation.
pub fn cubic_roots(c: &Cubic) -> [Complex64; 3] {
    let [a, b, d] = *c;
    let shift = a / 3.0;
    // depressed cubic t^3 + p t + q with l = t - a/3
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + d;
    let half_q = q / 2.0;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p.powi(3);

    if disc > 0.0 || p == 0.0 {
        // pick the sign that avoids cancellation, then v = -p / (3u)
        let s = disc.max(0.0).sqrt();
        let u = (-half_q - half_q.signum() * s).cbrt();
        let v = if u == 0.0 { 0.0 } else { -third_p / u };
        let real = polish_real(c, u + v - shift);
        let pair = Complex64::new(-(u + v) / 2.0 - shift, 3f64.sqrt() / 2.0 * (u - v));
        if real.abs() >= pair.norm() {
            return with_deflated(c, real);
        }
        let pair = polish(c, pair);
        if pair.im == 0.0 {
            return [Complex64::new(real, 0.0), pair, pair];
        }
        // rebuild the real root from the product, which is insensitive to
        // cancellation in u + v
        let norm2 = pair.norm_sqr();
        let real = if norm2 > 0.0 && real.abs() * 1e3 < pair.norm() {
            polish_real(c, -d / norm2)
        } else {
            real
        };
        [Complex64::new(real, 0.0), pair, pair.conj()]
    } else {
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        let roots = [0.0, 1.0, 2.0].map(|k: f64| {
            polish_real(
                c,
                m * (theta - 2.0 * std::f64::consts::PI * k / 3.0).cos() - shift,
            )
        });
        let big = roots
            .into_iter()
            .max_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(0.0);
        with_deflated(c, big)
    }
}

/// Three eigenvalues ordered by descending `|Im|`, ties by ascending `Re`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    pub lambda: [Complex64; 3],
}

impl EigenSpectrum {
    pub fn from_roots(mut lambda: [Complex64; 3]) -> Self {
        lambda.sort_by(|x, y| {
            y.im.abs()
                .total_cmp(&x.im.abs())
                .then(x.re.total_cmp(&y.re))
                .then(y.im.total_cmp(&x.im))
        });
        EigenSpectrum { lambda }
    }

    /// The real eigenvalue closest to zero, if any eigenvalue is real.
    pub fn slowest_real(&self) -> Option<f64> {
        self.lambda
            .iter()
            .filter(|z| z.im == 0.0)
            .map(|z| z.re)
            .max_by(|a, b| a.total_cmp(b))
    }

    pub fn has_complex_pair(&self) -> bool {
        self.lambda[0].im != 0.0
    }

    /// Coefficients of `prod (l - lambda_k)`.
    pub fn polynomial(&self) -> Cubic {
        let [x, y, z] = self.lambda;
        [-(x + y + z).re, (x * y + x * z + y * z).re, -(x * y * z).re]
    }
}

pub fn eigenvalues(a: &Matrix3) -> EigenSpectrum {
    EigenSpectrum::from_roots(cubic_roots(&characteristic_polynomial(a)))
}

/// `arg(lambda)` in degrees, in `[0, 180]`, taking the upper-half-plane member
/// of each conjugate pair.
pub fn phase_lags(spectrum: &EigenSpectrum) -> [f64; 3] {
    spectrum.lambda.map(|z| z.im.abs().atan2(z.re).to_degrees())
}
