//! TOML run configuration with per-field provenance.
//!
//! Sections and keys (all optional):
//!
//! ```toml
//! [battery]     alpha_c alpha_t temperature c_max e_e0 faraday gas_constant nernst_prefactor
//! [circuit]     r1 r2 inductance
//! [operating]   w_l_per_min c_c0 initial_current ("open_switch" | "steady_preload") r_pre
//! [integrator]  h t_end record_stride current_tol depletion_floor
//! [classifier]  n_osc p_osc eta
//! [sweep]       w_min w_max w_count c_min c_max c_count workers
//!               t_cap_factor t_cap_floor t_cap_ceiling
//! [output]      dir
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::analysis::ClassifierConfig;
use crate::integrator::IntegratorConfig;
use crate::model::{
    BatteryParams, CircuitParams, FlowRate, InitialCurrent, OperatingCondition, CALIBRATED_E_E0,
    CALIBRATED_INDUCTANCE, CALIBRATED_R_TOTAL,
};
use crate::sweep::{SweepSpec, TimeCap};

/// Where the value of a configuration field came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Published bench value.
    PublishedDefault,
    /// Recovered by calibration against the published fixed point and spectrum.
    CalibratedDefault,
    /// Tool default with no published counterpart.
    ToolDefault,
    UserSet,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Io {
        path: PathBuf,
        message: String,
    },
    Parse {
        line: Option<usize>,
        message: String,
    },
    Override {
        key: String,
        message: String,
    },
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io { path, message } => {
                write!(f, "cannot read {}: {message}", path.display())
            }
            ConfigError::Parse {
                line: Some(line),
                message,
            } => write!(f, "config parse error at line {line}: {message}"),
            ConfigError::Parse {
                line: None,
                message,
            } => {
                write!(f, "config parse error: {message}")
            }
            ConfigError::Override { key, message } => {
                write!(f, "invalid override '{key}': {message}")
            }
            ConfigError::Invalid(v) => {
                write!(f, "invalid configuration: {}", v.join("; "))
            }
        }
    }
}

impl std::error::Error for ConfigError {}

macro_rules! sections {
    ($( $section:ident : $ty:ident { $( $key:ident : $kty:ty ),* $(,)? } )*) => {
        $(
            #[derive(Debug, Clone, Default, PartialEq, Deserialize)]
            #[serde(deny_unknown_fields)]
            struct $ty {
                $( $key: Option<$kty>, )*
            }

            impl $ty {
                fn merge(&mut self, other: $ty) {
                    $( if other.$key.is_some() { self.$key = other.$key; } )*
                }

                fn set_keys(&self, out: &mut Vec<String>) {
                    $( if self.$key.is_some() {
                        out.push(concat!(stringify!($section), ".", stringify!($key)).to_string());
                    } )*
                }
            }
        )*

        #[derive(Debug, Clone, Default, PartialEq, Deserialize)]
        #[serde(deny_unknown_fields)]
        struct RawConfig {
            $( $section: Option<$ty>, )*
        }

        impl RawConfig {
            fn merge(&mut self, other: RawConfig) {
                $(
                    if let Some(o) = other.$section {
                        self.$section.get_or_insert_with(Default::default).merge(o);
                    }
                )*
            }

            fn set_keys(&self) -> Vec<String> {
                let mut out = Vec::new();
                $( if let Some(s) = &self.$section { s.set_keys(&mut out); } )*
                out
            }
        }

        /// Every accepted `section.key`.
        pub const CONFIG_KEYS: &[&str] = &[
            $( $( concat!(stringify!($section), ".", stringify!($key)), )* )*
        ];
    };
}

sections! {
    battery: RawBattery {
        alpha_c: f64, alpha_t: f64, temperature: f64, c_max: f64, e_e0: f64,
        faraday: f64, gas_constant: f64, nernst_prefactor: f64,
    }
    circuit: RawCircuit { r1: f64, r2: f64, inductance: f64 }
    operating: RawOperating {
        w_l_per_min: f64, c_c0: f64, initial_current: String, r_pre: f64,
    }
    integrator: RawIntegrator {
        h: f64, t_end: f64, record_stride: i64, current_tol: f64, depletion_floor: f64,
    }
    classifier: RawClassifier { n_osc: i64, p_osc: f64, eta: f64 }
    sweep: RawSweep {
        w_min: f64, w_max: f64, w_count: i64, c_min: f64, c_max: f64, c_count: i64,
        workers: i64, t_cap_factor: f64, t_cap_floor: f64, t_cap_ceiling: f64,
    }
    output: RawOutput { dir: String }
}

fn default_provenance(key: &str) -> Provenance {
    match key {
        "battery.alpha_c"
        | "battery.alpha_t"
        | "battery.temperature"
        | "battery.c_max"
        | "integrator.h"
        | "operating.w_l_per_min"
        | "operating.c_c0"
        | "sweep.w_min"
        | "sweep.w_max"
        | "sweep.c_min"
        | "sweep.c_max" => Provenance::PublishedDefault,
        "battery.e_e0" | "circuit.r2" | "circuit.inductance" => Provenance::CalibratedDefault,
        _ => Provenance::ToolDefault,
    }
}

/// Sweep-grid settings from the `[sweep]` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub w_range: (f64, f64),
    pub w_count: usize,
    pub c_range: (f64, f64),
    pub c_count: usize,
    pub workers: Option<usize>,
    pub time_cap: TimeCap,
}

impl Default for SweepSettings {
    fn default() -> Self {
        let s = SweepSpec::default();
        SweepSettings {
            w_range: s.w_range,
            w_count: s.w_count,
            c_range: s.c_range,
            c_count: s.c_count,
            workers: s.workers,
            time_cap: s.time_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub battery: BatteryParams,
    pub circuit: CircuitParams,
    pub operating: OperatingCondition,
    pub integrator: IntegratorConfig,
    pub classifier: ClassifierConfig,
    pub sweep: SweepSettings,
    pub output_dir: Option<PathBuf>,
    /// Source of every key in [`CONFIG_KEYS`].
    pub provenance: BTreeMap<String, Provenance>,
    /// Calibrated values filled in for missing keys.
    pub warnings: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("", &[]).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            w_range: self.sweep.w_range,
            w_count: self.sweep.w_count,
            c_range: self.sweep.c_range,
            c_count: self.sweep.c_count,
            battery: self.battery,
            circuit: self.circuit,
            integrator: self.integrator,
            time_cap: self.sweep.time_cap,
            classifier: self.classifier,
            workers: self.sweep.workers,
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_raw(text: &str) -> Result<RawConfig, ConfigError> {
    toml::from_str::<RawConfig>(text).map_err(|e| ConfigError::Parse {
        line: e.span().map(|s| line_of(text, s.start)),
        message: e.message().to_string(),
    })
}

/// Parses `key=value` with a dotted key; the value is read as a TOML value,
/// falling back to a bare string.
fn parse_override(spec: &str) -> Result<RawConfig, ConfigError> {
    let (key, value) = spec.split_once('=').ok_or_else(|| ConfigError::Override {
        key: spec.to_string(),
        message: "expected section.key=value".into(),
    })?;
    let key = key.trim();
    let (section, field) = key.split_once('.').ok_or_else(|| ConfigError::Override {
        key: key.to_string(),
        message: "expected a dotted key such as operating.c_c0".into(),
    })?;
    let value = value.trim();
    let doc = |v: &str| format!("[{section}]\n{field} = {v}\n");
    let parsed = parse_raw(&doc(value)).or_else(|first| {
        let quoted = format!("\"{}\"", value.replace('\\', "\\\\").replace('"', "\\\""));
        parse_raw(&doc(&quoted)).map_err(|_| first)
    });
    parsed.map_err(|e| ConfigError::Override {
        key: key.to_string(),
        message: match e {
            ConfigError::Parse { message, .. } => message,
            other => other.to_string(),
        },
    })
}

fn count(v: Option<i64>, default: usize, key: &str, errors: &mut Vec<String>) -> usize {
    match v {
        None => default,
        Some(n) if n >= 0 => n as usize,
        Some(n) => {
            errors.push(format!("{key} must be >= 0 (got {n})"));
            default
        }
    }
}

/// Builds a validated configuration from TOML text plus `key=value` overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut raw = parse_raw(text)?;
    for o in overrides {
        raw.merge(parse_override(o)?);
    }
    let user_keys = raw.set_keys();
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    let b = raw.battery.unwrap_or_default();
    let bd = BatteryParams::default();
    if b.e_e0.is_none() {
        warnings.push(format!(
            "battery.e_e0 not set; using calibrated default {CALIBRATED_E_E0} V"
        ));
    }
    let battery = BatteryParams {
        alpha_c: b.alpha_c.unwrap_or(bd.alpha_c),
        alpha_t: b.alpha_t.unwrap_or(bd.alpha_t),
        temperature: b.temperature.unwrap_or(bd.temperature),
        c_max: b.c_max.unwrap_or(bd.c_max),
        e_e0: b.e_e0.unwrap_or(bd.e_e0),
        faraday: b.faraday.unwrap_or(bd.faraday),
        gas_constant: b.gas_constant.unwrap_or(bd.gas_constant),
        nernst_prefactor: b.nernst_prefactor,
    };

    let c = raw.circuit.unwrap_or_default();
    let r1 = c.r1.unwrap_or(0.0);
    if c.r2.is_none() {
        warnings.push(format!(
            "circuit.r2 not set; using calibrated loop resistance {CALIBRATED_R_TOTAL} ohm minus r1"
        ));
    }
    if c.inductance.is_none() {
        warnings.push(format!(
            "circuit.inductance not set; using calibrated default {CALIBRATED_INDUCTANCE} H"
        ));
    }
    let circuit = CircuitParams {
        r1,
        r2: c.r2.unwrap_or(CALIBRATED_R_TOTAL - r1),
        inductance: c.inductance.unwrap_or(CALIBRATED_INDUCTANCE),
    };

    let o = raw.operating.unwrap_or_default();
    let initial_current = match o.initial_current.as_deref() {
        None | Some("open_switch") => {
            if o.r_pre.is_some() {
                errors.push("operating.r_pre requires initial_current = \"steady_preload\"".into());
            }
            InitialCurrent::OpenSwitch
        }
        Some("steady_preload") => match o.r_pre {
            Some(r_pre) => InitialCurrent::SteadyPreload { r_pre },
            None => {
                errors.push(
                    "operating.initial_current = \"steady_preload\" needs operating.r_pre".into(),
                );
                InitialCurrent::OpenSwitch
            }
        },
        Some(other) => {
            errors.push(format!(
                "operating.initial_current must be \"open_switch\" or \"steady_preload\" (got \"{other}\")"
            ));
            InitialCurrent::OpenSwitch
        }
    };
    let operating = OperatingCondition {
        flow: FlowRate::from_l_per_min(o.w_l_per_min.unwrap_or(0.100)),
        c_c0: o.c_c0.unwrap_or(0.125),
        initial_current,
    };

    let i = raw.integrator.unwrap_or_default();
    let id = IntegratorConfig::default();
    let integrator = IntegratorConfig {
        h: i.h.unwrap_or(id.h),
        t_end: i.t_end.unwrap_or(id.t_end),
        record_stride: count(
            i.record_stride,
            id.record_stride,
            "integrator.record_stride",
            &mut errors,
        ),
        current_tol: i.current_tol.unwrap_or(id.current_tol),
        depletion_floor: i.depletion_floor,
    };

    let k = raw.classifier.unwrap_or_default();
    let kd = ClassifierConfig::default();
    let classifier = ClassifierConfig {
        n_osc: count(k.n_osc, kd.n_osc, "classifier.n_osc", &mut errors),
        p_osc: k.p_osc.unwrap_or(kd.p_osc),
        eta: k.eta.unwrap_or(kd.eta),
        current_tol: integrator.current_tol,
    };

    let s = raw.sweep.unwrap_or_default();
    let sd = SweepSettings::default();
    let workers = match s.workers {
        None => None,
        Some(n) if n >= 1 => Some(n as usize),
        Some(n) => {
            errors.push(format!("sweep.workers must be >= 1 (got {n})"));
            None
        }
    };
    let sweep = SweepSettings {
        w_range: (
            s.w_min.unwrap_or(sd.w_range.0),
            s.w_max.unwrap_or(sd.w_range.1),
        ),
        w_count: count(s.w_count, sd.w_count, "sweep.w_count", &mut errors),
        c_range: (
            s.c_min.unwrap_or(sd.c_range.0),
            s.c_max.unwrap_or(sd.c_range.1),
        ),
        c_count: count(s.c_count, sd.c_count, "sweep.c_count", &mut errors),
        workers,
        time_cap: TimeCap {
            factor: s.t_cap_factor.unwrap_or(sd.time_cap.factor),
            floor: s.t_cap_floor.unwrap_or(sd.time_cap.floor),
            ceiling: s.t_cap_ceiling.unwrap_or(sd.time_cap.ceiling),
        },
    };

    let output_dir = raw.output.and_then(|o| o.dir).map(PathBuf::from);

    errors.extend(battery.violations());
    errors.extend(circuit.violations());
    errors.extend(operating.violations(&battery, &circuit));
    errors.extend(integrator.violations());
    errors.extend(classifier.violations());
    let spec = SweepSpec {
        battery,
        circuit,
        integrator,
        classifier,
        w_range: sweep.w_range,
        w_count: sweep.w_count,
        c_range: sweep.c_range,
        c_count: sweep.c_count,
        workers: sweep.workers,
        time_cap: sweep.time_cap,
    };
    errors.extend(
        spec.grid_violations()
            .into_iter()
            .map(|v| format!("sweep: {v}")),
    );
    if !errors.is_empty() {
        return Err(ConfigError::Invalid(errors));
    }

    let provenance = CONFIG_KEYS
        .iter()
        .map(|k| {
            let p = if user_keys.iter().any(|u| u == k) {
                Provenance::UserSet
            } else {
                default_provenance(k)
            };
            (k.to_string(), p)
        })
        .collect();

    Ok(RunConfig {
        battery,
        circuit,
        operating,
        integrator,
        classifier,
        sweep,
        output_dir,
        provenance,
        warnings,
    })
}

/// Reads and validates a configuration file, logging calibrated fill-ins.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| ConfigError::Io {
            path: p.to_path_buf(),
            message: e.to_string(),
        })?,
        None => String::new(),
    };
    let cfg = parse_config(&text, overrides)?;
    for w in &cfg.warnings {
        warn!("{w}");
    }
    Ok(cfg)
}
