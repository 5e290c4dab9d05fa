use crate::error::{Error, Result};

/// An autonomous system `dy/dt = g(y)` of fixed dimension.
pub trait OdeSystem<const N: usize> {
    fn derivative(&self, y: &[f64; N]) -> Result<[f64; N]>;
}

impl<F, const N: usize> OdeSystem<N> for F
where
    F: Fn(&[f64; N]) -> Result<[f64; N]>,
{
    fn derivative(&self, y: &[f64; N]) -> Result<[f64; N]> {
        self(y)
    }
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for (o, k) in out.iter_mut().zip(k) {
        *o += a * k;
    }
    out
}

/// One classical four-stage Runge-Kutta step of size `h`.
#[inline]
pub fn rk4_step<S, const N: usize>(system: &S, y: &[f64; N], h: f64) -> Result<[f64; N]>
where
    S: OdeSystem<N> + ?Sized,
{
    let k1 = system.derivative(y)?;
    let k2 = system.derivative(&axpy(y, 0.5 * h, &k1))?;
    let k3 = system.derivative(&axpy(y, 0.5 * h, &k2))?;
    let k4 = system.derivative(&axpy(y, h, &k3))?;
    let mut out = *y;
    for n in 0..N {
        out[n] += h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
    }
    if out.iter().all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::NonFinite)
    }
}

/// Integrates `steps` fixed steps from `y0`, keeping every `stride`-th state
/// and the last one. Times are `k * h`.
pub fn integrate_fixed<S, const N: usize>(
    system: &S,
    y0: [f64; N],
    h: f64,
    steps: usize,
    stride: usize,
) -> Result<Vec<(f64, [f64; N])>>
where
    S: OdeSystem<N> + ?Sized,
{
    let stride = stride.max(1);
    let mut out = Vec::with_capacity(steps / stride + 2);
    out.push((0.0, y0));
    let mut y = y0;
    for k in 1..=steps {
        y = rk4_step(system, &y, h)?;
        if k % stride == 0 || k == steps {
            out.push((k as f64 * h, y));
        }
    }
    Ok(out)
}
