use serde::{Deserialize, Serialize};

use crate::analysis::{classify, CaseLabel, ClassifierConfig};
use crate::error::{Error, Result};
use crate::integrator::{integrate, EndEvent, IntegratorConfig};
use crate::model::{BatteryParams, CircuitParams, OperatingCondition};

/// Per-cell horizon `clamp(factor * alpha_t / W, floor, ceiling)`: slow flows
/// need longer to drain the tank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeCap {
    pub factor: f64,
    pub floor: f64,
    pub ceiling: f64,
}

impl Default for TimeCap {
    fn default() -> Self {
        TimeCap {
            factor: 8.0,
            floor: 5000.0,
            ceiling: 20000.0,
        }
    }
}

impl TimeCap {
    pub fn t_end(&self, alpha_t: f64, w_l_per_s: f64) -> f64 {
        (self.factor * alpha_t / w_l_per_s).clamp(self.floor, self.ceiling)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Flow-rate range, L/min, inclusive.
    pub w_range: (f64, f64),
    pub w_count: usize,
    /// Initial concentration range, mol/L, inclusive.
    pub c_range: (f64, f64),
    pub c_count: usize,
    pub battery: BatteryParams,
    pub circuit: CircuitParams,
    /// Step, stride and tolerances; `t_end` is replaced per cell by `time_cap`.
    pub integrator: IntegratorConfig,
    pub time_cap: TimeCap,
    pub classifier: ClassifierConfig,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            w_range: (0.001, 0.200),
            w_count: 40,
            c_range: (0.01, 1.00),
            c_count: 20,
            battery: BatteryParams::default(),
            circuit: CircuitParams::default(),
            integrator: IntegratorConfig::default(),
            time_cap: TimeCap::default(),
            classifier: ClassifierConfig::default(),
            workers: None,
        }
    }
}

fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            if k + 1 == n {
                range.1
            } else {
                range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64
            }
        })
        .collect()
}

impl SweepSpec {
    /// Problems with the grid itself, excluding the model parameters.
    pub fn grid_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (w0, w1) = self.w_range;
        if !(w0 > 0.0 && w1 >= w0 && w1.is_finite()) {
            out.push(format!(
                "flow range must satisfy 0 < min <= max (got [{w0}, {w1}])"
            ));
        }
        let (c0, c1) = self.c_range;
        if !(c0 > 0.0 && c1 >= c0 && c1 < self.battery.c_max) {
            out.push(format!(
                "concentration range must satisfy 0 < min <= max < c_max (got [{c0}, {c1}])"
            ));
        }
        if self.w_count < 2 || self.c_count < 2 {
            out.push("grid counts must be >= 2".to_string());
        }
        if self.workers == Some(0) {
            out.push("workers must be >= 1".to_string());
        }
        if !(self.time_cap.factor > 0.0
            && self.time_cap.floor > 0.0
            && self.time_cap.ceiling >= self.time_cap.floor)
        {
            out.push("time cap must satisfy factor > 0 and 0 < floor <= ceiling".to_string());
        }
        out
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = self.grid_violations();
        out.extend(self.battery.violations());
        out.extend(self.circuit.violations());
        out.extend(self.integrator.violations());
        out.extend(self.classifier.violations());
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }

    pub fn w_axis(&self) -> Vec<f64> {
        axis(self.w_range, self.w_count)
    }

    pub fn c_axis(&self) -> Vec<f64> {
        axis(self.c_range, self.c_count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub w_l_per_min: f64,
    pub c_c0: f64,
    /// NaN when the cell failed.
    pub epsilon_t: f64,
    pub label: Option<CaseLabel>,
    pub oscillation_count: usize,
    pub t_f: f64,
    pub end_event: Option<EndEvent>,
    /// Ion-balance residual using the co-integrated charge.
    pub conservation_residual: f64,
    pub error: Option<String>,
}

impl SweepCell {
    pub fn end_event_label(&self) -> &'static str {
        self.end_event.map_or("error", |e| e.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub w_axis: Vec<f64>,
    pub c_axis: Vec<f64>,
    /// Row-major over `(c_c0, W)`: index `ic * w_count + iw`.
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn cell(&self, ic: usize, iw: usize) -> &SweepCell {
        &self.cells[ic * self.w_axis.len() + iw]
    }
}

/// Simulates and classifies one grid point. Failures are stored in the cell.
pub fn run_cell(spec: &SweepSpec, w_l_per_min: f64, c_c0: f64) -> SweepCell {
    let op = OperatingCondition::new(w_l_per_min, c_c0);
    let cfg = IntegratorConfig {
        t_end: spec.time_cap.t_end(spec.battery.alpha_t, op.flow.l_per_s()),
        current_tol: spec.classifier.current_tol,
        ..spec.integrator
    };
    let mut cell = SweepCell {
        w_l_per_min,
        c_c0,
        epsilon_t: f64::NAN,
        label: None,
        oscillation_count: 0,
        t_f: f64::NAN,
        end_event: None,
        conservation_residual: f64::NAN,
        error: None,
    };
    let traj = match integrate(&spec.battery, &spec.circuit, &op, &cfg) {
        Ok(t) => t,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    cell.end_event = Some(traj.end_event);
    cell.conservation_residual = traj.conservation_residual(&spec.battery);
    match classify(&traj, &spec.classifier) {
        Ok(c) => {
            cell.epsilon_t = c.epsilon_t;
            cell.label = Some(c.label);
            cell.oscillation_count = c.oscillation_count;
            cell.t_f = c.t_f;
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

#[cfg(feature = "parallel")]
fn map_cells(spec: &SweepSpec, points: &[(f64, f64)]) -> Result<Vec<SweepCell>> {
    use rayon::prelude::*;
    let work = || {
        points
            .par_iter()
            .map(|&(w, c)| run_cell(spec, w, c))
            .collect::<Vec<_>>()
    };
    match spec.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

fn map_cells_sequential(spec: &SweepSpec, points: &[(f64, f64)]) -> Result<Vec<SweepCell>> {
    Ok(points.iter().map(|&(w, c)| run_cell(spec, w, c)).collect())
}

#[cfg(not(feature = "parallel"))]
fn map_cells(spec: &SweepSpec, points: &[(f64, f64)]) -> Result<Vec<SweepCell>> {
    map_cells_sequential(spec, points)
}

/// Runs every grid cell independently. The result does not depend on the
/// number of workers or on scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    sweep_with(spec, map_cells)
}

/// [`run_sweep`] on the calling thread only, ignoring `workers`.
pub fn run_sweep_sequential(spec: &SweepSpec) -> Result<SweepResult> {
    sweep_with(spec, map_cells_sequential)
}

fn sweep_with(
    spec: &SweepSpec,
    map: fn(&SweepSpec, &[(f64, f64)]) -> Result<Vec<SweepCell>>,
) -> Result<SweepResult> {
    spec.validate()?;
    let w_axis = spec.w_axis();
    let c_axis = spec.c_axis();
    let points: Vec<(f64, f64)> = c_axis
        .iter()
        .flat_map(|&c| w_axis.iter().map(move |&w| (w, c)))
        .collect();
    let cells = map(spec, &points)?;
    Ok(SweepResult {
        w_axis,
        c_axis,
        cells,
    })
}
