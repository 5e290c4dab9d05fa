#![allow(dead_code)]

use rfb_dyn::integrator::{integrate_fixed, rk4_step, OdeSystem};
use rfb_dyn::model::{nondimensionalize, BatteryParams, CellCircuit, CircuitParams, FlowRate};

pub fn cell(w_l_per_min: f64) -> CellCircuit {
    CellCircuit::new(
        BatteryParams::default(),
        CircuitParams::default(),
        FlowRate::from_l_per_min(w_l_per_min),
    )
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / b.abs().max(scale)
}

/// Steps two systems side by side and returns the largest relative gap in
/// `(c_c, i)` after mapping each state with `a_map`/`b_map`, together with the
/// time reached. Stops early once either state leaves the model domain.
fn compare<A, B>(
    a: &A,
    b: &B,
    (mut ya, mut yb): ([f64; 3], [f64; 3]),
    (ha, hb): (f64, f64),
    steps: usize,
    a_map: impl Fn(&[f64; 3]) -> (f64, f64),
    b_map: impl Fn(&[f64; 3]) -> (f64, f64),
    i_scale: f64,
) -> (f64, f64)
where
    A: OdeSystem<3>,
    B: OdeSystem<3>,
{
    let mut worst = 0.0f64;
    for k in 1..=steps {
        match (rk4_step(a, &ya, ha), rk4_step(b, &yb, hb)) {
            (Ok(na), Ok(nb)) => (ya, yb) = (na, nb),
            _ => return (worst, (k - 1) as f64 * ha),
        }
        let (ca, ia) = a_map(&ya);
        let (cb, ib) = b_map(&yb);
        worst = worst.max(rel(cb, ca, 1e-300)).max(rel(ib, ia, i_scale));
    }
    (worst, steps as f64 * ha)
}

/// Largest relative gap in `(c_c, i)` between the `(c_c, c_t, i)` and
/// `(c_c, dc_c/dt, i)` integrations after closing the switch at `t = 0`,
/// and the time reached.
pub fn first_vs_second_order(w: f64, c_c0: f64, t_end: f64, h: f64) -> (f64, f64) {
    let sys = cell(w);
    let v0 = sys.cell_rate(c_c0, c_c0, 0.0);
    compare(
        &sys,
        &sys.second_order_form(),
        ([c_c0, c_c0, 0.0], [c_c0, v0, 0.0]),
        (h, h),
        (t_end / h).round() as usize,
        |y| (y[0], y[2]),
        |y| (y[0], y[2]),
        1e-9 * sys.current_scale(),
    )
}

/// Same comparison between the dimensional system and the scaled one mapped
/// back to physical units.
pub fn dimensional_vs_scaled(w: f64, c_c0: f64, t_end: f64, h: f64) -> (f64, f64) {
    let sys = cell(w);
    let d = nondimensionalize(&sys.battery, &sys.circuit, sys.flow).unwrap();
    let x0 = [
        c_c0 / d.c_hat,
        sys.cell_rate(c_c0, c_c0, 0.0) * d.t_hat / d.c_hat,
        0.0,
    ];
    compare(
        &sys,
        &d,
        ([c_c0, c_c0, 0.0], x0),
        (h, h / d.t_hat),
        (t_end / h).round() as usize,
        |y| (y[0], y[2]),
        |x| (x[0] * d.c_hat, x[2] * d.i_hat),
        1e-9 * d.i_hat,
    )
}

/// Empirical order from end states at `h`, `h/2`, `h/4`.
pub fn convergence_order(w: f64, c_c0: f64, t_end: f64, h: f64) -> f64 {
    let sys = cell(w);
    let end = |h: f64| {
        let steps = (t_end / h).round() as usize;
        integrate_fixed(&sys, [c_c0, c_c0, 0.0], h, steps, steps)
            .unwrap()
            .last()
            .unwrap()
            .1
    };
    let (a, b, c) = (end(h), end(h / 2.0), end(h / 4.0));
    // the current carries the fast dynamics; concentrations barely move
    let e1 = (a[2] - b[2]).abs();
    let e2 = (b[2] - c[2]).abs();
    (e1 / e2).log2()
}
