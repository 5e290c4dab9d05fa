//! CSV and JSON writers. Numbers use the shortest representation that parses
//! back to the same `f64`.

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{BifurcationResult, FieldSlice, NullclineKind};
use crate::integrator::Trajectory;
use crate::sweep::{BoundaryPoint, SweepResult};

pub type IoResult<T> = std::result::Result<T, Box<dyn std::error::Error + Send + Sync>>;

pub const TRAJECTORY_HEADER: [&str; 5] = ["t_s", "c_c", "c_t", "i_A", "emf_V"];
pub const MAP_HEADER: [&str; 6] = [
    "W_L_per_min",
    "c_c0_mol_per_L",
    "epsilon_t",
    "case_label",
    "t_f_s",
    "end_event",
];
pub const BOUNDARY_HEADER: [&str; 2] = ["c_c0", "W_star"];

/// Shortest round-trip decimal form of `x`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:?}")
    }
}

fn writer(path: &Path) -> IoResult<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> IoResult<()> {
    let mut w = writer(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for (s, e) in traj.samples.iter().zip(&traj.emf) {
        w.write_record([num(s.t), num(s.c_c), num(s.c_t), num(s.i), num(*e)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_map_csv(path: &Path, result: &SweepResult) -> IoResult<()> {
    let mut w = writer(path)?;
    w.write_record(MAP_HEADER)?;
    for c in &result.cells {
        w.write_record([
            num(c.w_l_per_min),
            num(c.c_c0),
            num(c.epsilon_t),
            c.label
                .map_or_else(|| "none".to_string(), |l| l.to_string()),
            num(c.t_f),
            c.end_event_label().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_boundary_csv(path: &Path, boundary: &[BoundaryPoint]) -> IoResult<()> {
    let mut w = writer(path)?;
    w.write_record(BOUNDARY_HEADER)?;
    for p in boundary {
        w.write_record([num(p.c_c0), num(p.w_star)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_branch_csv(path: &Path, result: &BifurcationResult) -> IoResult<()> {
    let mut w = writer(path)?;
    w.write_record([
        "x1",
        "discriminant",
        "l1_re",
        "l1_im",
        "l2_re",
        "l2_im",
        "l3_re",
        "l3_im",
    ])?;
    for b in &result.branch {
        let mut row = vec![num(b.x1), num(b.discriminant)];
        for z in b.lambda {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn field_file_name(slice: &FieldSlice) -> String {
    format!(
        "field_{}_{}.csv",
        slice.plane.axis.name(),
        num(slice.plane.level)
    )
}

/// One row per grid sample and per nullcline vertex; `kind` tells them apart.
pub fn write_field_csv(path: &Path, slice: &FieldSlice) -> IoResult<()> {
    let mut w = writer(path)?;
    w.write_record([
        "kind",
        "x1",
        "x2",
        "x3",
        "dx1_dtau",
        "dx2_dtau",
        "dx3_dtau",
        "fast_offset",
        "error",
    ])?;
    let rows = slice
        .samples
        .iter()
        .map(|s| ("grid", s))
        .chain(slice.nullclines.iter().flat_map(|n| {
            let kind = match n.kind {
                NullclineKind::Slow => "slow_nullcline",
                NullclineKind::Fast => "fast_nullcline",
            };
            n.samples.iter().map(move |s| (kind, s))
        }));
    for (kind, s) in rows {
        let d = s.derivative.unwrap_or([f64::NAN; 3]);
        w.write_record([
            kind.to_string(),
            num(s.x[0]),
            num(s.x[1]),
            num(s.x[2]),
            num(d[0]),
            num(d[1]),
            num(d[2]),
            num(s.fast_offset.unwrap_or(f64::NAN)),
            s.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> IoResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a CSV written by this module: header plus rows of raw strings.
pub fn read_csv(path: &Path) -> IoResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

pub fn ensure_dir(dir: &Path) -> IoResult<PathBuf> {
    std::fs::create_dir_all(dir)?;
    Ok(dir.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 3.51e-12, 1.0 / 3.0, -8.7, 1e300, 0.0, 123456789.125] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::NAN), "NaN");
    }
}
