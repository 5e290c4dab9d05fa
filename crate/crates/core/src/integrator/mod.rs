//! Fixed-step RK4 integration of the cell/circuit model.

mod rk4;
mod trajectory;

pub use rk4::{integrate_fixed, rk4_step, OdeSystem};
pub use trajectory::{
    detect_discharge_end, initial_current, integrate, DischargeEnd, EndEvent, IntegratorConfig,
    Trajectory,
};
