//! Command-line surface.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;
use serde_json::json;

use super::config::{load_config, ConfigError, Provenance, RunConfig};
use super::output::{
    ensure_dir, field_file_name, write_boundary_csv, write_branch_csv, write_field_csv, write_json,
    write_map_csv, write_trajectory_csv,
};
use crate::analysis::{
    bifurcation_scan, calibrate, classify, eigenvalues, fixed_point, phase_lags, Axis,
    CalibrationTargets, Plane, SliceGrid,
};
use crate::integrator::integrate;
use crate::model::{jacobian, nondimensionalize, FlowRate};
use crate::sweep::{extract_boundary, run_sweep};

/// Environment variable read for the sweep worker count when `--workers` is absent.
pub const WORKERS_ENV: &str = "RFB_DYN_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "rfb-dyn",
    version,
    about = "Flow-battery step-response simulation and stability analysis"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: output.dir, else ./out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override any configuration key, e.g. --set battery.e_e0=1.4 (repeatable).
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one discharge and classify it.
    Simulate(SimulateArgs),
    /// Consumption-rate map over flow rate and initial concentration.
    Sweep(SweepArgs),
    /// Linearized spectra at the fixed point for a list of flow rates.
    Eigen(EigenArgs),
    /// Locate where the fast complex pair becomes real.
    Bifurcate(BifurcateArgs),
    /// Vector-field slices with nullclines.
    Field(FieldArgs),
    /// Recover E_e0, inductance and loop resistance from spectral targets.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Flow rate, L/min (operating.w_l_per_min).
    #[arg(long = "W", alias = "w")]
    pub w: Option<f64>,
    /// Initial concentration, mol/L (operating.c_c0).
    #[arg(long)]
    pub c_c0: Option<f64>,
    /// operating.initial_current: open_switch or steady_preload.
    #[arg(long)]
    pub initial_current: Option<String>,
    /// operating.r_pre, ohm.
    #[arg(long)]
    pub r_pre: Option<f64>,
    /// integrator.h, s.
    #[arg(long)]
    pub h: Option<f64>,
    /// integrator.t_end, s.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// integrator.record_stride.
    #[arg(long)]
    pub record_stride: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Worker threads (sweep.workers); falls back to RFB_DYN_WORKERS.
    #[arg(long)]
    pub workers: Option<u64>,
    #[arg(long)]
    pub w_min: Option<f64>,
    #[arg(long)]
    pub w_max: Option<f64>,
    #[arg(long)]
    pub w_count: Option<u64>,
    #[arg(long)]
    pub c_min: Option<f64>,
    #[arg(long)]
    pub c_max: Option<f64>,
    #[arg(long)]
    pub c_count: Option<u64>,
    /// classifier.eta.
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    /// Comma-separated flow rates, L/min.
    #[arg(long = "W", alias = "w", value_delimiter = ',', default_values_t = [0.050, 0.100, 0.200])]
    pub w: Vec<f64>,
    /// Linearize at this x1 instead of the fixed point.
    #[arg(long)]
    pub x1: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BifurcateArgs {
    /// Flow rate, L/min (operating.w_l_per_min).
    #[arg(long = "W", alias = "w")]
    pub w: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub x1_min: f64,
    #[arg(long, default_value_t = 5e-3)]
    pub x1_max: f64,
    #[arg(long, default_value_t = 400)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Flow rate, L/min (operating.w_l_per_min).
    #[arg(long = "W", alias = "w")]
    pub w: Option<f64>,
    /// Plane as AXIS=LEVEL, e.g. x2=0 (repeatable). Defaults to nine planes
    /// through the fast-slow region.
    #[arg(long = "plane")]
    pub planes: Vec<String>,
    /// Grid points per in-plane axis.
    #[arg(long, default_value_t = 21)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long, default_value_t = 3.51e-12)]
    pub x1_star: f64,
    /// Real slow eigenvalue target.
    #[arg(long, default_value_t = -3.17e-2, allow_negative_numbers = true)]
    pub slow: f64,
    /// Fast-pair real part target.
    #[arg(long, default_value_t = -8.70, allow_negative_numbers = true)]
    pub fast_re: f64,
    /// Flow rate of the targets, L/min.
    #[arg(long = "W", alias = "w", default_value_t = 0.050)]
    pub w: f64,
}

/// Failure reported as JSON on stderr.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl CliError {
    fn new(kind: &'static str, message: impl ToString) -> Self {
        CliError {
            kind,
            message: message.to_string(),
            violations: Vec::new(),
            line: None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            "usage" => 2,
            "config" => 3,
            _ => 1,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let mut err = CliError::new("config", &e);
        match e {
            ConfigError::Invalid(v) => err.violations = v,
            ConfigError::Parse { line, .. } => err.line = line,
            _ => {}
        }
        err
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        CliError::new("computation", e)
    }
}

impl From<Box<dyn std::error::Error + Send + Sync>> for CliError {
    fn from(e: Box<dyn std::error::Error + Send + Sync>) -> Self {
        CliError::new("io", e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn push<T: ToString>(overrides: &mut Vec<String>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        overrides.push(format!("{key}={}", v.to_string()));
    }
}

fn quoted(s: Option<String>) -> Option<String> {
    s.map(|s| format!("\"{s}\""))
}

/// Subcommand flags expressed as config overrides, so they share validation
/// and provenance with the file.
fn flag_overrides(cmd: &Command) -> Vec<String> {
    let mut o = Vec::new();
    match cmd {
        Command::Simulate(a) => {
            push(&mut o, "operating.w_l_per_min", a.w);
            push(&mut o, "operating.c_c0", a.c_c0);
            push(
                &mut o,
                "operating.initial_current",
                quoted(a.initial_current.clone()),
            );
            push(&mut o, "operating.r_pre", a.r_pre);
            push(&mut o, "integrator.h", a.h);
            push(&mut o, "integrator.t_end", a.t_end);
            push(&mut o, "integrator.record_stride", a.record_stride);
        }
        Command::Sweep(a) => {
            let env = std::env::var(WORKERS_ENV)
                .ok()
                .filter(|s| !s.trim().is_empty());
            match (a.workers, env) {
                (Some(n), _) => push(&mut o, "sweep.workers", Some(n)),
                (None, Some(s)) => push(&mut o, "sweep.workers", Some(s.trim().to_string())),
                _ => {}
            }
            push(&mut o, "sweep.w_min", a.w_min);
            push(&mut o, "sweep.w_max", a.w_max);
            push(&mut o, "sweep.w_count", a.w_count);
            push(&mut o, "sweep.c_min", a.c_min);
            push(&mut o, "sweep.c_max", a.c_max);
            push(&mut o, "sweep.c_count", a.c_count);
            push(&mut o, "classifier.eta", a.eta);
        }
        Command::Bifurcate(BifurcateArgs { w, .. }) | Command::Field(FieldArgs { w, .. }) => {
            push(&mut o, "operating.w_l_per_min", *w);
        }
        Command::Eigen(_) | Command::Calibrate(_) => {}
    }
    o
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> CliResult<PathBuf> {
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(ensure_dir(&dir)?)
}

#[derive(Serialize)]
struct Complex {
    re: f64,
    im: f64,
}

fn simulate(cfg: &RunConfig, dir: &Path) -> CliResult<serde_json::Value> {
    let start = Instant::now();
    let traj = integrate(&cfg.battery, &cfg.circuit, &cfg.operating, &cfg.integrator)?;
    write_trajectory_csv(&dir.join("trajectory.csv"), &traj)?;
    let classification = classify(&traj, &cfg.classifier);
    let mut summary = json!({
        "subcommand": "simulate",
        "W_L_per_min": cfg.operating.flow.l_per_min(),
        "c_c0_mol_per_L": cfg.operating.c_c0,
        "end_event": traj.end_event,
        "samples": traj.samples.len(),
        "i_hat_A": traj.i_hat,
        "conservation_residual": traj.conservation_residual(&cfg.battery),
        "conservation_residual_trapezoid": traj.conservation_residual_trapezoid(&cfg.battery),
        "elapsed_s": start.elapsed().as_secs_f64(),
        "config": cfg,
    });
    match &classification {
        Ok(c) => {
            summary["case_label"] = json!(c.label);
            summary["epsilon_t"] = json!(c.epsilon_t);
            summary["oscillation_count"] = json!(c.oscillation_count);
            summary["t_f_s"] = json!(c.t_f);
            summary["c_tf_mol_per_L"] = json!(c.c_tf);
        }
        Err(e) => {
            summary["case_label"] = serde_json::Value::Null;
            summary["classification_error"] = json!(e.to_string());
        }
    }
    write_json(&dir.join("summary.json"), &summary)?;
    classification?;
    Ok(summary)
}

fn sweep(cfg: &RunConfig, dir: &Path) -> CliResult<serde_json::Value> {
    let start = Instant::now();
    let spec = cfg.sweep_spec();
    let result = run_sweep(&spec)?;
    write_map_csv(&dir.join("map.csv"), &result)?;
    let boundary = extract_boundary(&result, cfg.classifier.eta);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for c in &result.cells {
        let key = c
            .label
            .map_or_else(|| "failed".to_string(), |l| l.to_string());
        *counts.entry(key).or_default() += 1;
    }
    let max_residual = result
        .cells
        .iter()
        .map(|c| c.conservation_residual)
        .filter(|r| r.is_finite())
        .fold(0.0, f64::max);
    let time_limited = result
        .cells
        .iter()
        .filter(|c| c.end_event_label() == "time_limit")
        .count();
    let mut summary = json!({
        "subcommand": "sweep",
        "cells": result.cells.len(),
        "label_counts": counts,
        "time_limited_cells": time_limited,
        "max_conservation_residual": max_residual,
        "elapsed_s": start.elapsed().as_secs_f64(),
        "config": cfg,
    });
    match &boundary {
        Ok(b) => {
            write_boundary_csv(&dir.join("boundary.csv"), b)?;
            summary["boundary_points"] = json!(b.len());
        }
        Err(e) => summary["boundary_error"] = json!(e.to_string()),
    }
    write_json(&dir.join("sweep_summary.json"), &summary)?;
    boundary?;
    Ok(summary)
}

fn eigen(cfg: &RunConfig, args: &EigenArgs, dir: &Path) -> CliResult<serde_json::Value> {
    let mut spectra = Vec::new();
    for &w in &args.w {
        let d = nondimensionalize(&cfg.battery, &cfg.circuit, FlowRate::from_l_per_min(w))?;
        let x1 = match args.x1 {
            Some(x) => x,
            None => fixed_point(&d).x1,
        };
        let spec = eigenvalues(&jacobian(x1, &d)?);
        spectra.push(json!({
            "W_L_per_min": w,
            "x1": x1,
            "beta": d.beta,
            "gamma": d.gamma,
            "delta": d.delta,
            "epsilon": d.epsilon,
            "eigenvalues": spec.lambda.iter().map(|z| Complex { re: z.re, im: z.im }).collect::<Vec<_>>(),
            "phase_lags_deg": phase_lags(&spec),
            "slow_eigenvalue": spec.slowest_real(),
        }));
    }
    let out = json!({
        "subcommand": "eigen",
        "spectra": spectra,
        "provenance": cfg.provenance,
    });
    write_json(&dir.join("eigen.json"), &out)?;
    Ok(out)
}

fn bifurcate(cfg: &RunConfig, args: &BifurcateArgs, dir: &Path) -> CliResult<serde_json::Value> {
    let d = nondimensionalize(&cfg.battery, &cfg.circuit, cfg.operating.flow)?;
    let result = bifurcation_scan(&d, (args.x1_min, args.x1_max), args.samples)?;
    write_branch_csv(&dir.join("branch.csv"), &result)?;
    let out = json!({
        "subcommand": "bifurcate",
        "W_L_per_min": cfg.operating.flow.l_per_min(),
        "x1_c": result.x1_c,
        "c_c_at_x1_c_mol_per_L": result.x1_c * d.c_hat,
        "discriminant_at_x1_c": result.discriminant_at_x1_c,
        "discriminant_scale": result.discriminant_scale,
        "range": [args.x1_min, args.x1_max],
        "samples": args.samples,
        "branch_csv": "branch.csv",
        "provenance": cfg.provenance,
    });
    write_json(&dir.join("bifurcation.json"), &out)?;
    Ok(out)
}

pub fn default_planes() -> Vec<Plane> {
    let mut planes = Vec::new();
    for level in [-2.0e-3, 0.0, 2.0e-3] {
        planes.push(Plane {
            axis: Axis::X2,
            level,
        });
    }
    for level in [0.60, 0.66, 0.70] {
        planes.push(Plane {
            axis: Axis::X3,
            level,
        });
    }
    for level in [0.5e-4, 1.0e-4, 2.0e-4] {
        planes.push(Plane {
            axis: Axis::X1,
            level,
        });
    }
    planes
}

fn parse_plane(s: &str) -> CliResult<Plane> {
    let (axis, level) = s
        .split_once('=')
        .ok_or_else(|| CliError::new("usage", format!("plane '{s}' must look like x2=0")))?;
    let axis: Axis = axis.trim().parse().map_err(|e| CliError::new("usage", e))?;
    let level: f64 = level
        .trim()
        .parse()
        .map_err(|e| CliError::new("usage", format!("plane level '{level}': {e}")))?;
    Ok(Plane { axis, level })
}

fn field(cfg: &RunConfig, args: &FieldArgs, dir: &Path) -> CliResult<serde_json::Value> {
    let d = nondimensionalize(&cfg.battery, &cfg.circuit, cfg.operating.flow)?;
    let planes = if args.planes.is_empty() {
        default_planes()
    } else {
        args.planes
            .iter()
            .map(|p| parse_plane(p))
            .collect::<CliResult<_>>()?
    };
    let mut files = Vec::new();
    for plane in planes {
        let grid = SliceGrid {
            nu: args.n,
            nv: args.n,
            ..SliceGrid::default_for(plane.axis)
        };
        let slice = crate::analysis::vector_field_slice(&d, plane, grid)?;
        let name = field_file_name(&slice);
        write_field_csv(&dir.join(&name), &slice)?;
        files.push(name);
    }
    let out = json!({
        "subcommand": "field",
        "W_L_per_min": cfg.operating.flow.l_per_min(),
        "delta": d.delta,
        "epsilon": d.epsilon,
        "files": files,
        "provenance": cfg.provenance,
    });
    write_json(&dir.join("field.json"), &out)?;
    Ok(out)
}

fn calibrate_cmd(
    cfg: &RunConfig,
    args: &CalibrateArgs,
    dir: &Path,
) -> CliResult<serde_json::Value> {
    let targets = CalibrationTargets {
        x1_star: args.x1_star,
        w_l_per_min: args.w,
        slow: args.slow,
        fast_re: args.fast_re,
    };
    let c = calibrate(&cfg.battery, &targets)?;
    let out = json!({
        "subcommand": "calibrate",
        "targets": targets,
        "e_e0_V": c.e_e0,
        "inductance_H": c.inductance,
        "r_total_ohm": c.r_total,
        "epsilon": c.epsilon,
        "t_hat_s": c.t_hat,
        "delta": c.delta,
        "residuals": c.residuals,
        "provenance": cfg.provenance,
    });
    write_json(&dir.join("calibration.json"), &out)?;
    Ok(out)
}

fn run(cli: &Cli) -> CliResult<serde_json::Value> {
    let mut overrides = cli.overrides.clone();
    overrides.extend(flag_overrides(&cli.command));
    let cfg = load_config(cli.config.as_deref(), &overrides)?;
    let dir = out_dir(cli, &cfg)?;
    info!("writing results to {}", dir.display());
    match &cli.command {
        Command::Simulate(_) => simulate(&cfg, &dir),
        Command::Sweep(_) => sweep(&cfg, &dir),
        Command::Eigen(a) => eigen(&cfg, a, &dir),
        Command::Bifurcate(a) => bifurcate(&cfg, a, &dir),
        Command::Field(a) => field(&cfg, a, &dir),
        Command::Calibrate(a) => calibrate_cmd(&cfg, a, &dir),
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit status.
/// Failures print a JSON object `{"error": {...}}` on stderr.
pub fn cli_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            report(&CliError::new("usage", e.to_string().trim()));
            return 2;
        }
    };
    match run(&cli) {
        Ok(v) => {
            if let Some(label) = v.get("case_label").and_then(|l| l.as_str()) {
                info!("case label {label}");
            }
            0
        }
        Err(e) => {
            report(&e);
            e.exit_code()
        }
    }
}

fn report(e: &CliError) {
    eprintln!("{}", json!({ "error": e }));
}

/// Config keys supplied by the user rather than defaulted.
pub fn user_set_keys(cfg: &RunConfig) -> Vec<&str> {
    cfg.provenance
        .iter()
        .filter(|(_, p)| **p == Provenance::UserSet)
        .map(|(k, _)| k.as_str())
        .collect()
}
