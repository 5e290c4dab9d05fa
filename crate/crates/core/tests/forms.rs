mod common;

use rfb_dyn::integrator::{integrate, IntegratorConfig};
use rfb_dyn::model::{BatteryParams, CircuitParams, OperatingCondition};

#[test]
fn first_and_second_order_forms_agree() {
    for w in [0.05, 0.1, 0.2] {
        let (e, t) = common::first_vs_second_order(w, 0.125, 100.0, 1e-3);
        assert!(e < 1e-6, "W = {w}: {e:e}");
        assert!(t > 1.0);
    }
}

#[test]
fn dimensional_and_scaled_forms_agree() {
    for w in [0.05, 0.1, 0.2] {
        let (e, t) = common::dimensional_vs_scaled(w, 0.125, 100.0, 1e-3);
        assert!(e < 1e-6, "W = {w}: {e:e}");
        assert!(t > 1.0);
    }
}

#[test]
fn rk4_is_fourth_order_on_the_cell() {
    let p = common::convergence_order(0.1, 0.125, 2.0, 0.02);
    assert!((3.5..=4.5).contains(&p), "order {p}");
}

#[test]
fn ion_balance_holds_on_reference_runs() {
    let b = BatteryParams::default();
    let c = CircuitParams::default();
    let cfg = IntegratorConfig {
        t_end: 3000.0,
        ..Default::default()
    };
    for w in [0.05, 0.1, 0.2] {
        let traj = integrate(&b, &c, &OperatingCondition::new(w, 0.125), &cfg).unwrap();
        let r = traj.conservation_residual(&b);
        assert!(r < 1e-10, "W = {w}: {r:e}");
        // the trapezoid estimate on recorded samples only sees the stride
        assert!(traj.conservation_residual_trapezoid(&b) < 1e-4);
    }
}
