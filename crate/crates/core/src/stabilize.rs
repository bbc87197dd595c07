//! Causal trajectory stabilization.
//!
//! Translations go through a single-stage One Euro filter: the cutoff grows
//! with the speed between the raw current translation and the previous
//! smoothed one, and there is no separate low-pass on that speed. Rotations
//! are slerped toward the raw quaternion by the same factor.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::{quat_normalize, slerp, Pose, Quaternion, Trajectory, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneEuroConfig {
    /// Minimum cutoff frequency in Hz.
    pub f_min: f64,
    /// Cutoff increase per unit of speed (Hz per scene unit per second).
    pub beta_gain: f64,
    /// Time step used when consecutive timestamps are not increasing.
    pub default_dt: f64,
}

impl Default for OneEuroConfig {
    fn default() -> Self {
        Self { f_min: 1.0, beta_gain: 0.007, default_dt: 1.0 / 30.0 }
    }
}

impl OneEuroConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_min > 0.0) || !self.f_min.is_finite() {
            return Err(Error::InvalidParameter { name: "f_min", reason: "must be finite and > 0" });
        }
        if !(self.beta_gain >= 0.0) || !self.beta_gain.is_finite() {
            return Err(Error::InvalidParameter { name: "beta_gain", reason: "must be finite and >= 0" });
        }
        if !(self.default_dt > 0.0) || !self.default_dt.is_finite() {
            return Err(Error::InvalidParameter { name: "default_dt", reason: "must be finite and > 0" });
        }
        Ok(())
    }
}

/// `2 pi f dt / (2 pi f dt + 1)`.
pub fn smoothing_alpha(f: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt);
    }
    if !(f >= 0.0) {
        return Err(Error::InvalidParameter { name: "cutoff", reason: "must be >= 0" });
    }
    let r = 2.0 * PI * f * dt;
    Ok(r / (r + 1.0))
}

/// `f_min + beta_gain * |speed|`.
pub fn cutoff_freq(cfg: &OneEuroConfig, speed: f64) -> f64 {
    cfg.f_min + cfg.beta_gain * speed.abs()
}

/// Smoothed pose carried between frames.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilterState {
    pub last_t: Vec3,
    pub last_q: Quaternion,
    pub last_timestamp: f64,
    pub initialized: bool,
}

impl FilterState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Filters one raw pose and advances the state.
    pub fn step(&mut self, raw: &Pose, cfg: &OneEuroConfig) -> Result<Pose> {
        self.advance(raw, cfg, None)
    }

    /// Same as [`step`](Self::step) but with the smoothing factor forced to
    /// `alpha`. Test hook.
    #[doc(hidden)]
    pub fn step_with_alpha(&mut self, raw: &Pose, cfg: &OneEuroConfig, alpha: f64) -> Result<Pose> {
        self.advance(raw, cfg, Some(alpha))
    }

    /// Smoothing factor the next call to `step` would use for `raw`.
    pub fn next_alpha(&self, raw: &Pose, cfg: &OneEuroConfig) -> Result<f64> {
        let mut dt = raw.timestamp - self.last_timestamp;
        if !(dt > 0.0) || !dt.is_finite() {
            dt = cfg.default_dt;
        }
        let speed = (raw.t - self.last_t).norm() / dt;
        smoothing_alpha(cutoff_freq(cfg, speed), dt)
    }

    fn advance(&mut self, raw: &Pose, cfg: &OneEuroConfig, pinned: Option<f64>) -> Result<Pose> {
        cfg.validate()?;
        raw.q.check_unit()?;
        let q_raw = quat_normalize(raw.q)?;
        if !self.initialized {
            *self = FilterState { last_t: raw.t, last_q: q_raw, last_timestamp: raw.timestamp, initialized: true };
            return Ok(*raw);
        }
        let alpha = match pinned {
            Some(a) if (0.0..=1.0).contains(&a) => a,
            Some(a) => return Err(Error::InvalidGamma(a)),
            None => self.next_alpha(raw, cfg)?,
        };
        let t = raw.t * alpha + self.last_t * (1.0 - alpha);
        let q = slerp(self.last_q, q_raw, alpha)?;
        self.last_t = t;
        self.last_q = q;
        self.last_timestamp = raw.timestamp;
        Ok(Pose::new(t, q, raw.timestamp))
    }
}

/// Value-passing form of [`FilterState::step`].
pub fn filter_step(state: FilterState, raw: &Pose, cfg: &OneEuroConfig) -> Result<(FilterState, Pose)> {
    let mut next = state;
    let out = next.step(raw, cfg)?;
    Ok((next, out))
}

/// Streams every pose through a fresh filter. Output timestamps equal the
/// input ones and pose `i` depends only on inputs `0..=i`.
pub fn stabilize_trajectory(raw: &Trajectory, cfg: &OneEuroConfig) -> Result<Trajectory> {
    if raw.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut state = FilterState::new();
    let poses = raw.iter().map(|p| state.step(p, cfg)).collect::<Result<Vec<_>>>()?;
    Trajectory::new(poses)
}
