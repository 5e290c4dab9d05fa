use serde::{Deserialize, Serialize};

/// A point of the dimensional trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhysicalState {
    /// Time, s.
    pub t: f64,
    /// Cell concentration, mol/L.
    pub c_c: f64,
    /// Tank concentration, mol/L.
    pub c_t: f64,
    /// Loop current, A. Positive while discharging.
    pub i: f64,
}

impl PhysicalState {
    pub fn vector(&self) -> [f64; 3] {
        [self.c_c, self.c_t, self.i]
    }

    pub fn from_vector(t: f64, y: [f64; 3]) -> Self {
        PhysicalState {
            t,
            c_c: y[0],
            c_t: y[1],
            i: y[2],
        }
    }
}

/// Cell concentration with its rate of change instead of the tank concentration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SecondOrderState {
    pub t: f64,
    pub c_c: f64,
    /// `dc_c/dt`, mol/(L s).
    pub v: f64,
    pub i: f64,
}

impl SecondOrderState {
    pub fn vector(&self) -> [f64; 3] {
        [self.c_c, self.v, self.i]
    }

    pub fn from_vector(t: f64, y: [f64; 3]) -> Self {
        SecondOrderState {
            t,
            c_c: y[0],
            v: y[1],
            i: y[2],
        }
    }
}

/// State of the scaled system: `x1 = c_c / c_hat`, `x2 = (dc_c/dt) t_hat / c_hat`,
/// `x3 = i / i_hat`, `tau = t / t_hat`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DimensionlessState {
    pub tau: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl DimensionlessState {
    pub fn vector(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn from_vector(tau: f64, x: [f64; 3]) -> Self {
        DimensionlessState {
            tau,
            x1: x[0],
            x2: x[1],
            x3: x[2],
        }
    }
}
