//! Fixed-step simulation of a discharge with event detection.

use serde::{Deserialize, Serialize};

use super::rk4::{rk4_step, OdeSystem};
use crate::analysis::fixed_point_closed_form;
use crate::error::{Error, Result};
use crate::model::{
    nernst_emf, BatteryParams, CellCircuit, CircuitParams, InitialCurrent, OperatingCondition,
    PhysicalState,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Step size, s.
    pub h: f64,
    /// Time horizon, s.
    pub t_end: f64,
    /// Steps between stored samples.
    pub record_stride: usize,
    /// Discharge-end threshold as a fraction of the current scale `i_hat`.
    pub current_tol: f64,
    /// Cell concentration (mol/L) at which the cell counts as exhausted.
    /// `None` selects twice the fixed-point concentration.
    pub depletion_floor: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            h: 1e-3,
            t_end: 5000.0,
            record_stride: 100,
            current_tol: 1e-4,
            depletion_floor: None,
        }
    }
}

impl IntegratorConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.h > 0.0 && self.h.is_finite()) {
            out.push(format!("integrator.h must be > 0 (got {})", self.h));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            out.push(format!("integrator.t_end must be > 0 (got {})", self.t_end));
        }
        if self.record_stride < 1 {
            out.push("integrator.record_stride must be >= 1".to_string());
        }
        if !(self.current_tol > 0.0 && self.current_tol < 1.0) {
            out.push(format!(
                "integrator.current_tol must lie in (0, 1) (got {})",
                self.current_tol
            ));
        }
        if let Some(f) = self.depletion_floor {
            if !(f > 0.0 && f.is_finite()) {
                out.push(format!("integrator.depletion_floor must be > 0 (got {f})"));
            }
        }
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

    /// Depletion floor in mol/L for the given battery.
    pub fn floor_for(&self, battery: &BatteryParams) -> f64 {
        self.depletion_floor.unwrap_or_else(|| {
            let eps = battery.nernst_prefactor() / battery.e_e0;
            2.0 * fixed_point_closed_form(eps) * battery.c_max
        })
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndEvent {
    /// The current fell below `current_tol * i_hat` after having exceeded twice that.
    CurrentZero {
        t_f: f64,
    },
    /// The cell concentration reached the depletion floor.
    Depleted {
        t_f: f64,
    },
    TimeLimit,
    NumericalBlowup {
        t: f64,
    },
}

impl EndEvent {
    pub fn label(&self) -> &'static str {
        match self {
            EndEvent::CurrentZero { .. } => "current_zero",
            EndEvent::Depleted { .. } => "depleted",
            EndEvent::TimeLimit => "time_limit",
            EndEvent::NumericalBlowup { .. } => "numerical_blowup",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<PhysicalState>,
    /// EMF at each stored sample, V.
    pub emf: Vec<f64>,
    /// Charge delivered since `t = 0` at each stored sample, C.
    pub charge: Vec<f64>,
    pub end_event: EndEvent,
    /// Current scale `E_e0 / (r1 + r2)`, A.
    pub i_hat: f64,
}

impl Trajectory {
    pub fn first(&self) -> &PhysicalState {
        &self.samples[0]
    }

    pub fn last(&self) -> &PhysicalState {
        self.samples
            .last()
            .expect("trajectory has at least one sample")
    }

    pub fn currents(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.i).collect()
    }

    /// Ion-balance residual with the charge taken from the trapezoid rule over
    /// the stored current series, relative to the initial tank inventory.
    pub fn conservation_residual_trapezoid(&self, battery: &BatteryParams) -> f64 {
        let charge: f64 = self
            .samples
            .windows(2)
            .map(|w| 0.5 * (w[0].i + w[1].i) * (w[1].t - w[0].t))
            .sum();
        self.balance(battery, charge)
    }

    /// Ion-balance residual using the charge integrated alongside the state.
    pub fn conservation_residual(&self, battery: &BatteryParams) -> f64 {
        self.balance(battery, *self.charge.last().unwrap_or(&0.0))
    }

    fn balance(&self, battery: &BatteryParams, charge: f64) -> f64 {
        let (a, b) = (self.first(), self.last());
        let inventory = |s: &PhysicalState| battery.alpha_c * s.c_c + battery.alpha_t * s.c_t;
        ((inventory(b) - inventory(a)) + charge / battery.faraday).abs() / (battery.alpha_t * a.c_t)
    }
}

/// State vector augmented with the delivered charge, guarded against the
/// depletion floor.
struct Guarded<'a> {
    cell: &'a CellCircuit,
    floor: f64,
    ceiling: f64,
}

impl OdeSystem<4> for Guarded<'_> {
    #[inline]
    fn derivative(&self, y: &[f64; 4]) -> Result<[f64; 4]> {
        let c_c = y[0];
        if !(c_c > self.floor && c_c < self.ceiling) {
            return Err(Error::Domain {
                quantity: "c_c",
                value: c_c,
                lower: self.floor,
                upper: self.ceiling,
            });
        }
        let [a, b, c] = self.cell.first_order(&[y[0], y[1], y[2]])?;
        Ok([a, b, c, y[2]])
    }
}

/// True when the circuit relaxation `h r / L` cannot be what drove the state
/// out of range, i.e. the current has left any physical scale.
fn unstable(y: &[f64; 4], cell: &CellCircuit) -> bool {
    y[2].abs() > 1e3 * cell.current_scale()
}

/// Loop current at `t = 0`.
pub fn initial_current(
    battery: &BatteryParams,
    circuit: &CircuitParams,
    op: &OperatingCondition,
) -> Result<f64> {
    match op.initial_current {
        InitialCurrent::OpenSwitch => Ok(0.0),
        InitialCurrent::SteadyPreload { r_pre } => {
            Ok(nernst_emf(op.c_c0, battery)? / (circuit.r1 + r_pre))
        }
    }
}

/// Simulates the step response from `op` until an end event or `cfg.t_end`.
///
/// Instability and depletion are recorded in `end_event` rather than
/// returned as errors; only invalid inputs fail.
pub fn integrate(
    battery: &BatteryParams,
    circuit: &CircuitParams,
    op: &OperatingCondition,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    battery.validate()?;
    circuit.validate()?;
    op.validate(battery, circuit)?;
    cfg.validate()?;

    let cell = CellCircuit::new(*battery, *circuit, op.flow);
    let floor = cfg.floor_for(battery);
    let system = Guarded {
        cell: &cell,
        floor,
        ceiling: battery.c_max - floor,
    };
    let i_hat = battery.e_e0 / circuit.r_total();
    let threshold = cfg.current_tol * i_hat;
    let h = cfg.h;
    let steps = (cfg.t_end / h).round() as usize;
    let stride = cfg.record_stride;

    let i0 = initial_current(battery, circuit, op)?;
    let mut y = [op.c_c0, op.c_c0, i0, 0.0];
    let mut samples = Vec::with_capacity(steps / stride + 2);
    let mut charge = Vec::with_capacity(steps / stride + 2);
    let store = |t: f64, y: &[f64; 4], samples: &mut Vec<PhysicalState>, charge: &mut Vec<f64>| {
        samples.push(PhysicalState::from_vector(t, [y[0], y[1], y[2]]));
        charge.push(y[3]);
    };
    store(0.0, &y, &mut samples, &mut charge);

    let mut armed = i0 > 2.0 * threshold;
    let mut end_event = EndEvent::TimeLimit;
    let mut t = 0.0;
    for k in 1..=steps {
        let t_next = k as f64 * h;
        let next = match rk4_step(&system, &y, h) {
            Ok(next) => next,
            Err(Error::Domain { value, lower, .. }) if value <= lower && !unstable(&y, &cell) => {
                end_event = EndEvent::Depleted { t_f: t };
                break;
            }
            Err(_) => {
                end_event = EndEvent::NumericalBlowup { t: t_next };
                break;
            }
        };
        if !(next[0] > floor && next[0] < battery.c_max - floor && next[1] > 0.0) {
            end_event = if next[0] <= floor && !unstable(&y, &cell) {
                EndEvent::Depleted { t_f: t }
            } else {
                EndEvent::NumericalBlowup { t: t_next }
            };
            break;
        }
        y = next;
        t = t_next;
        if y[2] > 2.0 * threshold {
            armed = true;
        } else if armed && y[2] < threshold {
            end_event = EndEvent::CurrentZero { t_f: t };
            break;
        }
        if k % stride == 0 {
            store(t, &y, &mut samples, &mut charge);
        }
    }
    if samples.last().map(|s| s.t) != Some(t) {
        store(t, &y, &mut samples, &mut charge);
    }

    let emf = samples
        .iter()
        .map(|s| nernst_emf(s.c_c, battery))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        samples,
        emf,
        charge,
        end_event,
        i_hat,
    })
}

/// End-of-discharge time and the tank concentration at that time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DischargeEnd {
    pub t_f: f64,
    pub c_tf: f64,
    /// False when the run stopped (time limit or blowup) before the discharge ended.
    pub complete: bool,
}

/// Locates the end of discharge on a trajectory. `tol` is relative to `i_hat`.
pub fn detect_discharge_end(trajectory: &Trajectory, tol: f64) -> Result<DischargeEnd> {
    let last = trajectory.last();
    let threshold = tol * trajectory.i_hat;
    let peak = trajectory
        .samples
        .iter()
        .map(|s| s.i)
        .fold(f64::NEG_INFINITY, f64::max);
    let discharged = peak > 2.0 * threshold;

    if let EndEvent::Depleted { t_f } = trajectory.end_event {
        return Ok(DischargeEnd {
            t_f,
            c_tf: last.c_t,
            complete: true,
        });
    }
    if !discharged {
        return Err(Error::NoDischarge {
            threshold: 2.0 * threshold,
        });
    }
    if let EndEvent::CurrentZero { t_f } = trajectory.end_event {
        return Ok(DischargeEnd {
            t_f,
            c_tf: last.c_t,
            complete: true,
        });
    }
    let mut armed = false;
    for s in &trajectory.samples {
        if s.i > 2.0 * threshold {
            armed = true;
        } else if armed && s.i < threshold {
            return Ok(DischargeEnd {
                t_f: s.t,
                c_tf: s.c_t,
                complete: true,
            });
        }
    }
    Ok(DischargeEnd {
        t_f: last.t,
        c_tf: last.c_t,
        complete: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FlowRate;

    fn run(w: f64, cfg: &IntegratorConfig) -> Trajectory {
        integrate(
            &BatteryParams::default(),
            &CircuitParams::default(),
            &OperatingCondition::new(w, 0.125),
            cfg,
        )
        .unwrap()
    }

    fn synthetic(currents: &[f64], end_event: EndEvent) -> Trajectory {
        let samples: Vec<PhysicalState> = currents
            .iter()
            .enumerate()
            .map(|(k, &i)| PhysicalState {
                t: k as f64,
                c_c: 0.1,
                c_t: 0.1 - 0.001 * k as f64,
                i,
            })
            .collect();
        Trajectory {
            emf: vec![1.0; samples.len()],
            charge: vec![0.0; samples.len()],
            samples,
            end_event,
            i_hat: 1.0,
        }
    }

    #[test]
    fn depleted_run_reports_its_end_time() {
        let t = synthetic(&[0.0, 0.5, 0.6], EndEvent::Depleted { t_f: 2.0 });
        let end = detect_discharge_end(&t, 1e-4).unwrap();
        assert_eq!(end.t_f, 2.0);
        assert_eq!(end.c_tf, t.last().c_t);
    }

    #[test]
    fn zero_current_is_no_discharge() {
        let t = synthetic(&[0.0; 5], EndEvent::TimeLimit);
        assert!(matches!(
            detect_discharge_end(&t, 1e-4),
            Err(Error::NoDischarge { .. })
        ));
    }

    #[test]
    fn crossing_found_on_stored_series() {
        let t = synthetic(&[0.0, 0.5, 0.1, 1e-5, 0.0], EndEvent::TimeLimit);
        let end = detect_discharge_end(&t, 1e-4).unwrap();
        assert_eq!(end.t_f, 3.0);
        assert!(end.complete);
        let t = synthetic(&[0.0, 0.5, 0.4], EndEvent::TimeLimit);
        assert!(!detect_discharge_end(&t, 1e-4).unwrap().complete);
    }

    #[test]
    fn low_flow_run_depletes_early() {
        let traj = run(0.050, &IntegratorConfig::default());
        let EndEvent::Depleted { t_f } = traj.end_event else {
            panic!("{:?}", traj.end_event)
        };
        assert!(t_f > 30.0 && t_f < 200.0, "{t_f}");
        let end = detect_discharge_end(&traj, 1e-4).unwrap();
        assert!(end.c_tf > 0.7 * 0.125);
    }

    #[test]
    fn stored_series_is_consistent() {
        let traj = run(0.1, &IntegratorConfig::default());
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
        for (s, e) in traj.samples.iter().zip(&traj.emf) {
            assert_eq!(*e, nernst_emf(s.c_c, &BatteryParams::default()).unwrap());
        }
        let floor = IntegratorConfig::default().floor_for(&BatteryParams::default());
        assert!(traj.samples.iter().all(|s| s.c_c > floor && s.c_t > 0.0));
        assert!(traj.last().c_t <= traj.first().c_t);
    }

    #[test]
    fn identical_inputs_give_identical_runs() {
        let cfg = IntegratorConfig {
            t_end: 150.0,
            ..Default::default()
        };
        assert_eq!(run(0.1, &cfg), run(0.1, &cfg));
    }

    #[test]
    fn preload_sets_the_initial_current() {
        let b = BatteryParams::default();
        let c = CircuitParams::default();
        let op = OperatingCondition {
            initial_current: InitialCurrent::SteadyPreload { r_pre: 0.2 },
            ..OperatingCondition::new(0.1, 0.5)
        };
        let cfg = IntegratorConfig {
            t_end: 1.0,
            ..Default::default()
        };
        let traj = integrate(&b, &c, &op, &cfg).unwrap();
        let expect = nernst_emf(0.5, &b).unwrap() / 0.2;
        assert!((traj.first().i - expect).abs() < 1e-12);
    }

    #[test]
    fn unstable_step_ends_the_run() {
        // r / L = 1e7 1/s puts h = 1e-3 far outside the RK4 stability region
        let c = CircuitParams {
            r1: 0.0,
            r2: 1e6,
            inductance: 0.1,
        };
        let op = OperatingCondition {
            flow: FlowRate::from_l_per_s(0.0),
            ..OperatingCondition::new(0.0, 0.5)
        };
        let cfg = IntegratorConfig {
            t_end: 2.0,
            ..Default::default()
        };
        let traj = integrate(&BatteryParams::default(), &c, &op, &cfg).unwrap();
        assert!(
            matches!(traj.end_event, EndEvent::NumericalBlowup { .. }),
            "{:?}",
            traj.end_event
        );
        assert!(traj.samples.iter().all(|s| s.i.is_finite()));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = IntegratorConfig {
            h: 0.0,
            record_stride: 0,
            ..Default::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("integrator.h") && err.contains("record_stride"));
    }
}
