//! TUM trajectory text: `timestamp tx ty tz qx qy qz qw` per line, scalar
//! last, `#` comment lines.

use steadystream_core::geometry::quat_normalize;
use steadystream_core::{Pose, Quaternion, Trajectory, Vec3};

use super::{fmt_real, parse_err, parse_real, FormatError, Result};

pub const HEADER: &str = "# timestamp tx ty tz qx qy qz qw";

/// Quaternions are normalized on read unless already unit to within a few
/// ulps, so that reading back a written file reproduces it bit for bit. An
/// input without records yields an empty trajectory.
pub fn read_trajectory_tum(text: &str) -> Result<Trajectory> {
    let mut poses: Vec<Pose> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(parse_err(line, format!("expected 8 fields, found {}", fields.len())));
        }
        let mut v = [0.0; 8];
        for (slot, tok) in v.iter_mut().zip(&fields) {
            *slot = parse_real(tok, line)?;
        }
        let raw_q = Quaternion::new(v[7], v[4], v[5], v[6]);
        let n2 = raw_q.dot(raw_q);
        let q = if (n2 - 1.0).abs() <= 4.0 * f64::EPSILON {
            raw_q
        } else {
            quat_normalize(raw_q).map_err(|e| parse_err(line, e.to_string()))?
        };
        if let Some(prev) = poses.last() {
            if !(v[0] > prev.timestamp) {
                return Err(FormatError::NonMonotonicTimestamps { line });
            }
        }
        poses.push(Pose::new(Vec3::new(v[1], v[2], v[3]), q, v[0]));
    }
    Ok(Trajectory::new(poses)?)
}

pub fn write_trajectory_tum(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (traj.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for p in traj.iter() {
        let fields = [p.timestamp, p.t.x, p.t.y, p.t.z, p.q.x, p.q.y, p.q.z, p.q.w];
        let line: Vec<String> = fields.iter().map(|v| fmt_real(*v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
