//! Planar slices of the scaled vector field with nullclines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::OdeSystem;
use crate::model::{nernst_dimensionless, DimensionlessParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X1,
    X2,
    X3,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X1 => 0,
            Axis::X2 => 1,
            Axis::X3 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        ["x1", "x2", "x3"][self.index()]
    }

    /// The two in-plane axes of a slice normal to `self`, in index order.
    pub fn complement(self) -> (Axis, Axis) {
        match self {
            Axis::X1 => (Axis::X2, Axis::X3),
            Axis::X2 => (Axis::X1, Axis::X3),
            Axis::X3 => (Axis::X1, Axis::X2),
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x1" => Ok(Axis::X1),
            "x2" => Ok(Axis::X2),
            "x3" => Ok(Axis::X3),
            _ => Err(Error::InvalidParameter(format!(
                "unknown axis '{s}' (x1, x2 or x3)"
            ))),
        }
    }
}

/// The plane `axis = level`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub axis: Axis,
    pub level: f64,
}

/// Regular lattice over the two in-plane axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceGrid {
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub nu: usize,
    pub nv: usize,
}

impl SliceGrid {
    /// Ranges around the fast-slow structure near the fixed point.
    pub fn default_for(axis: Axis) -> Self {
        let x1 = (0.25e-4, 3.0e-4);
        let x2 = (-4.0e-3, 4.0e-3);
        let x3 = (0.55, 0.75);
        let (u_range, v_range) = match axis {
            Axis::X1 => (x2, x3),
            Axis::X2 => (x1, x3),
            Axis::X3 => (x1, x2),
        };
        SliceGrid {
            u_range,
            v_range,
            nu: 21,
            nv: 21,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    /// Full state `(x1, x2, x3)`.
    pub x: [f64; 3],
    /// `d(x1, x2, x3)/dtau`, or `None` where the state is outside `0 < x1 < 1`.
    pub derivative: Option<[f64; 3]>,
    pub error: Option<String>,
    /// Signed distance `x3 - N(x1)` from the fast nullcline.
    pub fast_offset: Option<f64>,
}

impl FieldSample {
    /// Components of the derivative along the two in-plane axes.
    pub fn in_plane(&self, plane: &Plane) -> Option<(f64, f64)> {
        let (u, v) = plane.axis.complement();
        self.derivative.map(|d| (d[u.index()], d[v.index()]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullclineKind {
    /// `dx1/dtau = 0`, the set `x2 = 0`.
    Slow,
    /// `dx3/dtau = 0`, the curve `x3 = N(x1)`.
    Fast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nullcline {
    pub kind: NullclineKind,
    /// Polyline in in-plane coordinates `(u, v)`.
    pub points: Vec<(f64, f64)>,
    /// Vector field evaluated at each polyline vertex.
    pub samples: Vec<FieldSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSlice {
    pub plane: Plane,
    pub grid: SliceGrid,
    /// Row-major over `(u, v)`: index `iu * nv + iv`.
    pub samples: Vec<FieldSample>,
    pub nullclines: Vec<Nullcline>,
}

fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range.0];
    }
    (0..n)
        .map(|k| range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64)
        .collect()
}

fn sample(d: &DimensionlessParams, x: [f64; 3]) -> FieldSample {
    match d.derivative(&x) {
        Ok(dx) => FieldSample {
            x,
            derivative: Some(dx),
            error: None,
            fast_offset: nernst_dimensionless(x[0], d.epsilon).ok().map(|n| x[2] - n),
        },
        Err(e) => FieldSample {
            x,
            derivative: None,
            error: Some(e.to_string()),
            fast_offset: None,
        },
    }
}

fn embed(plane: &Plane, u: f64, v: f64) -> [f64; 3] {
    let (ua, va) = plane.axis.complement();
    let mut x = [0.0; 3];
    x[plane.axis.index()] = plane.level;
    x[ua.index()] = u;
    x[va.index()] = v;
    x
}

/// Inverse of the dimensionless EMF: the `x1` at which `N(x1) = n`.
fn nernst_inverse(n: f64, epsilon: f64) -> f64 {
    1.0 / (1.0 + (-(n - 1.0) / epsilon).exp())
}

pub fn vector_field_slice(
    d: &DimensionlessParams,
    plane: Plane,
    grid: SliceGrid,
) -> Result<FieldSlice> {
    if grid.nu < 1 || grid.nv < 1 {
        return Err(Error::InvalidParameter(
            "slice grid needs at least one point per axis".into(),
        ));
    }
    if !plane.level.is_finite()
        || (plane.axis == Axis::X1 && !(plane.level > 0.0 && plane.level < 1.0))
    {
        return Err(Error::Domain {
            quantity: "plane level",
            value: plane.level,
            lower: 0.0,
            upper: 1.0,
        });
    }
    let us = linspace(grid.u_range, grid.nu);
    let vs = linspace(grid.v_range, grid.nv);
    let mut samples = Vec::with_capacity(grid.nu * grid.nv);
    for &u in &us {
        for &v in &vs {
            samples.push(sample(d, embed(&plane, u, v)));
        }
    }

    let mut nullclines = Vec::new();

    // slow nullcline x2 = 0; on an x2 plane it is either empty or the whole plane
    let slow_points: Vec<(f64, f64)> = match plane.axis {
        Axis::X2 => Vec::new(),
        Axis::X1 => vs.iter().map(|&v| (0.0, v)).collect(),
        Axis::X3 => us.iter().map(|&u| (u, 0.0)).collect(),
    };
    if !slow_points.is_empty() {
        nullclines.push(Nullcline {
            kind: NullclineKind::Slow,
            samples: slow_points
                .iter()
                .map(|&(u, v)| sample(d, embed(&plane, u, v)))
                .collect(),
            points: slow_points,
        });
    }

    // fast nullcline x3 = N(x1)
    let fast_points: Vec<(f64, f64)> = match plane.axis {
        Axis::X2 => us
            .iter()
            .filter(|&&u| u > 0.0 && u < 1.0)
            .map(|&u| (u, nernst_dimensionless(u, d.epsilon).unwrap_or(f64::NAN)))
            .collect(),
        Axis::X1 => {
            let n = nernst_dimensionless(plane.level, d.epsilon)?;
            us.iter().map(|&u| (u, n)).collect()
        }
        Axis::X3 => {
            let x1 = nernst_inverse(plane.level, d.epsilon);
            if x1 > 0.0 && x1 < 1.0 {
                vs.iter().map(|&v| (x1, v)).collect()
            } else {
                Vec::new()
            }
        }
    };
    let fast_samples = fast_points
        .iter()
        .map(|&(u, v)| {
            let mut x = embed(&plane, u, v);
            // place the vertex exactly on the curve
            if let Ok(n) = nernst_dimensionless(x[0], d.epsilon) {
                x[2] = n;
            }
            sample(d, x)
        })
        .collect();
    nullclines.push(Nullcline {
        kind: NullclineKind::Fast,
        points: fast_points,
        samples: fast_samples,
    });

    Ok(FieldSlice {
        plane,
        grid,
        samples,
        nullclines,
    })
}

impl FieldSlice {
    pub fn fast_nullcline(&self) -> Option<&Nullcline> {
        self.nullclines
            .iter()
            .find(|n| n.kind == NullclineKind::Fast)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{nondimensionalize, BatteryParams, CircuitParams, FlowRate};

    fn params() -> DimensionlessParams {
        nondimensionalize(
            &BatteryParams::default(),
            &CircuitParams::default(),
            FlowRate::from_l_per_min(0.1),
        )
        .unwrap()
    }

    #[test]
    fn zero_x2_plane_has_no_x1_motion() {
        let d = params();
        let plane = Plane {
            axis: Axis::X2,
            level: 0.0,
        };
        let s = vector_field_slice(&d, plane, SliceGrid::default_for(Axis::X2)).unwrap();
        assert_eq!(s.samples.len(), 21 * 21);
        assert!(s.samples.iter().all(|p| p.derivative.unwrap()[0] == 0.0));
    }

    #[test]
    fn fast_nullcline_is_stationary_in_x3() {
        let d = params();
        for axis in [Axis::X1, Axis::X2, Axis::X3] {
            let level = match axis {
                Axis::X1 => 1e-4,
                Axis::X2 => 2e-3,
                Axis::X3 => 0.66,
            };
            let s = vector_field_slice(&d, Plane { axis, level }, SliceGrid::default_for(axis))
                .unwrap();
            let fast = s.fast_nullcline().unwrap();
            assert!(!fast.samples.is_empty());
            for p in &fast.samples {
                assert!(p.derivative.unwrap()[2].abs() < 1e-12, "{axis:?} {p:?}");
            }
        }
    }

    #[test]
    fn invalid_states_are_marked_not_fatal() {
        let d = params();
        let grid = SliceGrid {
            u_range: (-1e-4, 1e-4),
            v_range: (0.6, 0.7),
            nu: 3,
            nv: 2,
        };
        let s = vector_field_slice(
            &d,
            Plane {
                axis: Axis::X2,
                level: 0.0,
            },
            grid,
        )
        .unwrap();
        assert!(s.samples[0].error.is_some());
        assert!(s.samples[1].error.is_some());
        assert!(s.samples[5].derivative.is_some());
    }

    #[test]
    fn inverse_emf_round_trip() {
        let eps = 0.0379;
        for x in [1e-9, 1e-4, 0.3, 0.5] {
            let n = nernst_dimensionless(x, eps).unwrap();
            assert!((nernst_inverse(n, eps) / x - 1.0).abs() < 1e-9);
        }
    }
}
