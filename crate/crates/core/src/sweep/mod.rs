//! Consumption-rate map over a (flow rate, initial concentration) grid.

mod boundary;
mod grid;

pub use boundary::{extract_boundary, BoundaryPoint};
pub use grid::{
    run_cell, run_sweep, run_sweep_sequential, SweepCell, SweepResult, SweepSpec, TimeCap,
};
