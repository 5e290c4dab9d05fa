//! Physical and dimensionless model of the flow cell driving an R-L load.
//!
//! Sign convention: a positive current discharges the cell and consumes
//! active ions at `i / F` mol/s.

mod dimensionless;
mod nernst;
mod params;
mod state;
mod system;

pub use dimensionless::{
    dimensionless_rhs, jacobian, nondimensionalize, DimensionlessParams, Matrix3,
};
pub use nernst::{nernst_dimensionless, nernst_emf, nernst_slope};
pub use params::{
    BatteryParams, CircuitParams, FlowRate, InitialCurrent, OperatingCondition, CALIBRATED_E_E0,
    CALIBRATED_INDUCTANCE, CALIBRATED_R_TOTAL, FARADAY, GAS_CONSTANT,
};
pub use state::{DimensionlessState, PhysicalState, SecondOrderState};
pub use system::{second_order_rhs, state_rhs, CellCircuit, SecondOrderForm};
