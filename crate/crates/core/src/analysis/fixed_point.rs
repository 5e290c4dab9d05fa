use crate::model::{DimensionlessParams, DimensionlessState};

/// `x1*` from `1 + eps ln(x1 / (1 - x1)) = 0`, i.e. `1 / (1 + e^(1/eps))`.
pub fn fixed_point_closed_form(epsilon: f64) -> f64 {
    1.0 / (1.0 + (1.0 / epsilon).exp())
}

/// Bisection for `x1*` in log space on `(lower, 1/2)`, to relative width `rtol`.
///
/// The dimensionless EMF is monotone on `(0, 1)`, negative below `x1*` and
/// equal to 1 at `x1 = 1/2`, so the bracket is valid whenever `lower < x1*`.
pub fn fixed_point_bisection(epsilon: f64, lower: f64, rtol: f64) -> f64 {
    // work with the log-odds form to keep precision for x1 ~ 1e-12
    let g = |x: f64| 1.0 + epsilon * (x.ln() - (-x).ln_1p());
    let (mut lo, mut hi) = (lower, 0.5);
    if g(lo) >= 0.0 {
        return lo;
    }
    while (hi - lo) > rtol * lo {
        let mid = (lo * hi).sqrt();
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The unique fixed point `(x1*, 0, 0)` of the scaled system.
pub fn fixed_point(d: &DimensionlessParams) -> DimensionlessState {
    let lower = f64::MIN_POSITIVE.max(1e-300);
    DimensionlessState {
        tau: 0.0,
        x1: fixed_point_bisection(d.epsilon, lower, 1e-13),
        x2: 0.0,
        x3: 0.0,
    }
}
