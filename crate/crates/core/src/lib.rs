pub mod analysis;
pub mod error;
pub mod integrator;
pub mod io;
pub mod model;
pub mod sweep;
