//! Transient taxonomy: premature stop, complete discharge, oscillation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{detect_discharge_end, EndEvent, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Sharp stop with most of the tank unused.
    Case1,
    /// Gradual, nearly complete discharge.
    Case2,
    /// Oscillating current.
    Case3,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CaseLabel::Case1 => "Case1",
            CaseLabel::Case2 => "Case2",
            CaseLabel::Case3 => "Case3",
        })
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Case1" => Ok(CaseLabel::Case1),
            "Case2" => Ok(CaseLabel::Case2),
            "Case3" => Ok(CaseLabel::Case3),
            other => Err(Error::InvalidParameter(format!(
                "unknown case label '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    /// Peaks needed after the initial transient to call a run oscillatory.
    pub n_osc: usize,
    /// Minimum peak prominence, as a fraction of `i_hat`.
    pub p_osc: f64,
    /// Consumption rate at or above which a run is a complete discharge.
    pub eta: f64,
    /// Discharge-end threshold, as a fraction of `i_hat`.
    pub current_tol: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            n_osc: 2,
            p_osc: 1e-4,
            eta: 0.95,
            current_tol: 1e-4,
        }
    }
}

impl ClassifierConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.n_osc < 1 {
            out.push("classifier.n_osc must be >= 1".to_string());
        }
        if !(self.p_osc > 0.0 && self.p_osc.is_finite()) {
            out.push(format!("classifier.p_osc must be > 0 (got {})", self.p_osc));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            out.push(format!(
                "classifier.eta must lie in (0, 1) (got {})",
                self.eta
            ));
        }
        if !(self.current_tol > 0.0 && self.current_tol < 1.0) {
            out.push(format!(
                "classifier.current_tol must lie in (0, 1) (got {})",
                self.current_tol
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: CaseLabel,
    pub epsilon_t: f64,
    pub oscillation_count: usize,
    pub t_f: f64,
    pub c_tf: f64,
    pub end_event: EndEvent,
}

/// Fraction of the tank inventory consumed, `(c_t0 - c_tf) / c_t0`.
pub fn consumption_rate(c_t0: f64, c_tf: f64) -> Result<f64> {
    if !(c_t0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "c_t0 must be > 0 (got {c_t0})"
        )));
    }
    if !(c_tf > 0.0 && c_tf <= c_t0) {
        return Err(Error::Domain {
            quantity: "c_tf",
            value: c_tf,
            lower: 0.0,
            upper: c_t0,
        });
    }
    Ok((c_t0 - c_tf) / c_t0)
}

/// Indices of local maxima whose topographic prominence exceeds `min_prominence`.
/// A flat top counts once, at its midpoint.
pub fn prominent_peaks(y: &[f64], min_prominence: f64) -> Vec<(usize, f64)> {
    let n = y.len();
    let mut out = Vec::new();
    let mut k = 1;
    while k + 1 < n {
        if y[k - 1] < y[k] {
            let mut j = k;
            while j + 1 < n && y[j + 1] == y[k] {
                j += 1;
            }
            if j + 1 < n && y[j + 1] < y[k] {
                let peak = (k + j) / 2;
                let prom = prominence(y, k, j);
                if prom > min_prominence {
                    out.push((peak, prom));
                }
                k = j + 1;
                continue;
            }
            k = j + 1;
            continue;
        }
        k += 1;
    }
    out
}

fn prominence(y: &[f64], first: usize, last: usize) -> f64 {
    let h = y[first];
    let mut left_min = h;
    for &v in y[..first].iter().rev() {
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for &v in &y[last + 1..] {
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Index where the initial transient ends: the first local maximum of the
/// current, i.e. the top of the rise after the switch closes.
pub fn transient_end(currents: &[f64]) -> usize {
    currents
        .windows(2)
        .position(|w| w[1] < w[0])
        .unwrap_or(currents.len().saturating_sub(1))
}

/// Counts prominent current maxima after the initial transient.
pub fn oscillation_count(currents: &[f64], min_prominence: f64) -> usize {
    let start = transient_end(currents);
    prominent_peaks(&currents[start + 1..], min_prominence).len()
}

pub fn classify(trajectory: &Trajectory, cfg: &ClassifierConfig) -> Result<Classification> {
    let end = detect_discharge_end(trajectory, cfg.current_tol).map_err(|e| match e {
        Error::NoDischarge { threshold } => {
            Error::Unclassifiable(format!("current never exceeded {threshold:e} A"))
        }
        other => other,
    })?;
    let c_t0 = trajectory.first().c_t;
    let epsilon_t = consumption_rate(c_t0, end.c_tf)?;
    let currents = trajectory.currents();
    let oscillations = oscillation_count(&currents, cfg.p_osc * trajectory.i_hat);
    let label = if oscillations >= cfg.n_osc {
        CaseLabel::Case3
    } else if epsilon_t >= cfg.eta {
        CaseLabel::Case2
    } else {
        CaseLabel::Case1
    };
    Ok(Classification {
        label,
        epsilon_t,
        oscillation_count: oscillations,
        t_f: end.t_f,
        c_tf: end.c_tf,
        end_event: trajectory.end_event,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhysicalState;

    #[test]
    fn consumption_rate_examples() {
        assert_eq!(consumption_rate(0.2, 0.2).unwrap(), 0.0);
        assert_eq!(consumption_rate(0.2, 0.1).unwrap(), 0.5);
        assert!(consumption_rate(0.2, 0.3).is_err());
    }

    #[test]
    fn peaks_and_prominence() {
        let y = [0.0, 1.0, 0.5, 0.8, 0.0, 0.2, 0.2, 0.1];
        let p = prominent_peaks(&y, 0.0);
        assert_eq!(p.iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 3, 5]);
        assert!((p[0].1 - 1.0).abs() < 1e-15);
        assert!((p[1].1 - 0.3).abs() < 1e-15);
        assert!((p[2].1 - 0.1).abs() < 1e-15);
        assert_eq!(prominent_peaks(&y, 0.25).len(), 2);
    }

    #[test]
    fn transient_is_the_initial_rise() {
        assert_eq!(transient_end(&[0.0, 1.0, 2.0, 1.5, 1.8, 1.0]), 2);
        assert_eq!(oscillation_count(&[0.0, 1.0, 2.0, 1.5, 1.8, 1.0], 0.1), 1);
    }

    fn synthetic(currents: Vec<f64>, c_t: impl Fn(usize) -> f64) -> Trajectory {
        let n = currents.len();
        Trajectory {
            samples: currents
                .iter()
                .enumerate()
                .map(|(k, &i)| PhysicalState {
                    t: k as f64,
                    c_c: 0.1,
                    c_t: c_t(k),
                    i,
                })
                .collect(),
            emf: vec![1.0; n],
            charge: vec![0.0; n],
            end_event: EndEvent::TimeLimit,
            i_hat: 10.0,
        }
    }

    #[test]
    fn monotone_decay_with_full_consumption_is_case2() {
        let n = 400;
        let currents: Vec<f64> = (0..n)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    5.0 * (-(k as f64) / 40.0).exp()
                }
            })
            .collect();
        let traj = synthetic(currents, |k| {
            0.1 * (1.0 - 0.99 * (k as f64 / 200.0).min(1.0))
        });
        let c = classify(&traj, &ClassifierConfig::default()).unwrap();
        assert_eq!(c.label, CaseLabel::Case2);
        assert_eq!(c.oscillation_count, 0);
    }

    #[test]
    fn ringing_current_is_case3() {
        let currents: Vec<f64> = (0..200)
            .map(|k| {
                let t = k as f64;
                5.0 * (1.0 - (-t / 3.0).exp()) + 0.5 * (t / 4.0).sin() * (-t / 80.0).exp()
            })
            .collect();
        let traj = synthetic(currents, |k| 0.1 - 1e-4 * k as f64);
        let c = classify(&traj, &ClassifierConfig::default()).unwrap();
        assert_eq!(c.label, CaseLabel::Case3);
    }

    #[test]
    fn dead_circuit_is_unclassifiable() {
        let traj = synthetic(vec![0.0; 10], |_| 0.1);
        assert!(matches!(
            classify(&traj, &ClassifierConfig::default()),
            Err(Error::Unclassifiable(_))
        ));
    }

    #[test]
    fn labels_round_trip_as_text() {
        for l in [CaseLabel::Case1, CaseLabel::Case2, CaseLabel::Case3] {
            assert_eq!(l.to_string().parse::<CaseLabel>().unwrap(), l);
        }
    }
}
