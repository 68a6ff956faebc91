//! CSV export of trajectories.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! the text back reproduces the values exactly.

use std::fmt::Write as _;

use super::{EpidemicError, Trajectory};

pub const TRAJECTORY_HEADER: &str = "t,agent,s,x,r,d,l";
pub const AGGREGATE_HEADER: &str = "t,mean_s,mean_x,mean_r,mean_d,mean_l";

/// One row per (grid point, agent).
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * traj.len() * traj.n());
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    let grid = traj.grid();
    for k in 0..traj.len() {
        let t = grid.time(k);
        let (s, x, r, d) = (traj.s_at(k), traj.x_at(k), traj.r_at(k), traj.d_at(k));
        let l = traj.policy().at(k);
        for i in 0..traj.n() {
            let _ = writeln!(out, "{t},{i},{},{},{},{},{}", s[i], x[i], r[i], d[i], l[i]);
        }
    }
    out
}

/// Population means per grid point.
pub fn aggregate_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    out.push_str(AGGREGATE_HEADER);
    out.push('\n');
    let grid = traj.grid();
    for k in 0..traj.len() {
        let [s, x, r, d, l] = traj.means_at(k);
        let _ = writeln!(out, "{},{s},{x},{r},{d},{l}", grid.time(k));
    }
    out
}

/// Parses a headed numeric CSV into rows, checking the header and width.
pub fn parse_numeric_csv(text: &str, header: &str) -> Result<Vec<Vec<f64>>, EpidemicError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((_, h)) => {
            return Err(EpidemicError::Parse {
                line: 1,
                reason: format!("expected header `{header}`, got `{h}`"),
            })
        }
        None => {
            return Err(EpidemicError::Parse {
                line: 1,
                reason: "empty input".into(),
            })
        }
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| EpidemicError::Parse {
            line: idx + 1,
            reason: e.to_string(),
        })?;
        if row.len() != width {
            return Err(EpidemicError::Parse {
                line: idx + 1,
                reason: format!("expected {width} fields, got {}", row.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}
