use serde::{Deserialize, Serialize};

use super::grid::SweepResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub c_c0: f64,
    /// Flow rate at which the consumption rate crosses the level, L/min.
    pub w_star: f64,
}

/// Level curve `epsilon_t = eta`, one point per concentration column: the
/// first upward crossing in `W`, linearly interpolated between the two
/// straddling cells. Failed cells are skipped.
pub fn extract_boundary(result: &SweepResult, eta: f64) -> Result<Vec<BoundaryPoint>> {
    let nw = result.w_axis.len();
    if nw < 2 || result.c_axis.len() < 2 {
        return Err(Error::InvalidParameter(
            "boundary needs at least a 2x2 grid".into(),
        ));
    }
    let mut out = Vec::new();
    for (ic, &c) in result.c_axis.iter().enumerate() {
        let column: Vec<(f64, f64)> = (0..nw)
            .map(|iw| result.cell(ic, iw))
            .filter(|cell| cell.epsilon_t.is_finite())
            .map(|cell| (cell.w_l_per_min, cell.epsilon_t))
            .collect();
        let crossing = column.windows(2).find(|p| p[0].1 < eta && p[1].1 >= eta);
        if let Some(p) = crossing {
            let ((w0, e0), (w1, e1)) = (p[0], p[1]);
            let w_star = w0 + (eta - e0) * (w1 - w0) / (e1 - e0);
            out.push(BoundaryPoint { c_c0: c, w_star });
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyBoundary { eta });
    }
    Ok(out)
}
