//! Pose-adaptive update weight for a streaming frame.
//!
//! A frame's weight is the product of a motion score (how far the camera
//! moved) and a quality score (how much of the grayscale spectrum lies
//! outside a low-frequency disk), clipped from above.

use alloc::vec::Vec;

use crate::fft::dft2_real;
use crate::geometry::{relative_pose, Pose};
use crate::math;
use crate::{Error, Result};

pub const DEFAULT_SIGMOID_GAIN: f64 = 20.0;
pub const DEFAULT_SIGMOID_MIDPOINT: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_CLIP_MAX: f64 = 1.0;
pub const DEFAULT_INITIAL_WEIGHT: f64 = 1.0;

/// BT.601 luma coefficients.
pub const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Interleaved row-major raster with any channel count.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height * channels {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn same_shape(&self, other: &Raster) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.channels == other.channels
            && self.data.len() == other.data.len()
    }
}

/// Row-major grayscale frame, nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(Error::ShapeMismatch);
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("pixel"));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn to_raster(&self) -> Raster {
        Raster { width: self.width, height: self.height, channels: 1, data: self.pixels.clone() }
    }
}

/// Centered DFT magnitude; zero frequency sits at `(width / 2, height / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub width: usize,
    pub height: usize,
    pub magnitudes: Vec<f64>,
}

impl Spectrum {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.magnitudes[y * self.width + x]
    }

    pub fn center(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreConfig {
    /// Weight on the translation magnitude.
    pub w1: f64,
    /// Weight on the rotation angle (radians).
    pub w2: f64,
    /// High-pass radius in frequency bins; `None` means `max(1, floor(min(W, H) / 8))`.
    pub radius: Option<f64>,
    pub sigmoid_gain: f64,
    pub sigmoid_midpoint: f64,
    pub epsilon: f64,
    pub clip_max: f64,
    /// Weight reported for the first frame of a stream.
    pub initial_weight: f64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            w1: 1.0,
            w2: 1.0,
            radius: None,
            sigmoid_gain: DEFAULT_SIGMOID_GAIN,
            sigmoid_midpoint: DEFAULT_SIGMOID_MIDPOINT,
            epsilon: DEFAULT_EPSILON,
            clip_max: DEFAULT_CLIP_MAX,
            initial_weight: DEFAULT_INITIAL_WEIGHT,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !nonneg(self.w1) {
            return Err(Error::InvalidParameter { name: "w1", reason: "must be finite and >= 0" });
        }
        if !nonneg(self.w2) {
            return Err(Error::InvalidParameter { name: "w2", reason: "must be finite and >= 0" });
        }
        if !(self.sigmoid_gain > 0.0) || !self.sigmoid_gain.is_finite() {
            return Err(Error::InvalidParameter { name: "sigmoid_gain", reason: "must be > 0" });
        }
        if !self.sigmoid_midpoint.is_finite() {
            return Err(Error::InvalidParameter { name: "sigmoid_midpoint", reason: "must be finite" });
        }
        if !nonneg(self.epsilon) {
            return Err(Error::InvalidParameter { name: "epsilon", reason: "must be finite and >= 0" });
        }
        if !nonneg(self.clip_max) {
            return Err(Error::InvalidParameter { name: "clip_max", reason: "must be finite and >= 0" });
        }
        if !nonneg(self.initial_weight) {
            return Err(Error::InvalidParameter { name: "initial_weight", reason: "must be finite and >= 0" });
        }
        Ok(())
    }

    /// Radius used for a `width x height` frame.
    pub fn radius_for(&self, width: usize, height: usize) -> f64 {
        self.radius.unwrap_or_else(|| default_radius(width, height))
    }
}

pub fn default_radius(width: usize, height: usize) -> f64 {
    ((width.min(height) / 8).max(1)) as f64
}

/// BT.601 luma of a 3-channel raster.
pub fn to_grayscale(rgb: &Raster) -> Result<GrayImage> {
    if rgb.width == 0 || rgb.height == 0 {
        return Err(Error::EmptyImage);
    }
    if rgb.channels != 3 || rgb.data.len() != rgb.width * rgb.height * 3 {
        return Err(Error::ShapeMismatch);
    }
    let pixels = rgb.data.chunks_exact(3).map(|c| LUMA[0] * c[0] + LUMA[1] * c[1] + LUMA[2] * c[2]).collect();
    GrayImage::new(rgb.width, rgb.height, pixels)
}

/// Magnitude of the 2D DFT with the zero frequency moved to the center.
pub fn dft2_magnitude_centered(img: &GrayImage) -> Spectrum {
    let (w, h) = (img.width, img.height);
    // Transform the offset from the first pixel and put the offset back into
    // the DC bin: a constant image then has an exactly zero AC spectrum at
    // any size, not just where the FFT happens to cancel.
    let base = img.pixels[0];
    let shifted: Vec<f64> = img.pixels.iter().map(|p| p - base).collect();
    let mut raw = dft2_real(&shifted, w, h);
    raw[0].re += base * (w * h) as f64;
    let mut magnitudes = alloc::vec![0.0; w * h];
    let (cx, cy) = (w / 2, h / 2);
    for y in 0..h {
        let sy = (y + cy) % h;
        let src = &raw[y * w..(y + 1) * w];
        let dst = &mut magnitudes[sy * w..(sy + 1) * w];
        // x -> (x + cx) mod w as two contiguous runs
        let (lo, hi) = src.split_at(w - cx);
        let (dst_hi, dst_lo) = dst.split_at_mut(cx);
        for (d, c) in dst_lo.iter_mut().zip(lo).chain(dst_hi.iter_mut().zip(hi)) {
            *d = math::sqrt(c.norm_sqr());
        }
    }
    Spectrum { width: w, height: h, magnitudes }
}

/// Fraction of spectral magnitude strictly outside the disk of `radius`
/// around the center: `sum(F * M) / (sum(F) + epsilon)`.
pub fn highfreq_ratio(spectrum: &Spectrum, radius: f64, epsilon: f64) -> f64 {
    let (cx, cy) = spectrum.center();
    let r2 = radius * radius;
    let mut total = 0.0;
    let mut high = 0.0;
    for y in 0..spectrum.height {
        let v = y as f64 - cy as f64;
        let row = &spectrum.magnitudes[y * spectrum.width..(y + 1) * spectrum.width];
        for (x, m) in row.iter().enumerate() {
            let u = x as f64 - cx as f64;
            total += m;
            if u * u + v * v > r2 {
                high += m;
            }
        }
    }
    high / (total + epsilon)
}

/// Logistic quality score with the default gain 20 and midpoint 0.1.
pub fn quality_score(ratio: f64) -> f64 {
    quality_score_with(ratio, DEFAULT_SIGMOID_GAIN, DEFAULT_SIGMOID_MIDPOINT)
}

pub fn quality_score_with(ratio: f64, gain: f64, midpoint: f64) -> f64 {
    1.0 / (1.0 + math::exp(-gain * (ratio - midpoint)))
}

/// `w1 * delta_x + w2 * delta_q`.
pub fn motion_score(delta_x: f64, delta_q: f64, w1: f64, w2: f64) -> Result<f64> {
    if !(delta_x >= 0.0) || !(delta_q >= 0.0) {
        return Err(Error::NegativeMagnitude);
    }
    Ok(w1 * delta_x + w2 * delta_q)
}

/// `min(s1 * s2, clip_max)`, the learning-rate weight of the state update.
pub fn adaptive_update_weight(s1: f64, s2: f64, clip_max: f64) -> f64 {
    (s1 * s2).min(clip_max)
}

/// Every intermediate of one frame's score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameScore {
    pub delta_x: f64,
    pub delta_q: f64,
    pub s1: f64,
    pub ratio: f64,
    pub s2: f64,
    pub weight: f64,
}

/// Scores `cur` against the previous pose of the stream. With no previous
/// pose the weight is `cfg.initial_weight` and the motion terms are zero.
pub fn score_frame(prev: Option<&Pose>, cur: &Pose, img: &GrayImage, cfg: &ScoreConfig) -> Result<FrameScore> {
    cfg.validate()?;
    let (w, h) = (img.width, img.height);
    let radius = cfg.radius_for(w, h);
    if !(radius > 0.0) || !(2.0 * radius < w.min(h) as f64) {
        return Err(Error::InvalidRadius { radius, width: w, height: h });
    }
    let spectrum = dft2_magnitude_centered(img);
    let ratio = highfreq_ratio(&spectrum, radius, cfg.epsilon);
    let s2 = quality_score_with(ratio, cfg.sigmoid_gain, cfg.sigmoid_midpoint);

    let Some(prev) = prev else {
        return Ok(FrameScore { delta_x: 0.0, delta_q: 0.0, s1: 0.0, ratio, s2, weight: cfg.initial_weight });
    };
    let (dt, dq) = relative_pose(prev, cur)?;
    let delta_x = dt.norm();
    let s1 = motion_score(delta_x, dq, cfg.w1, cfg.w2)?;
    let weight = adaptive_update_weight(s1, s2, cfg.clip_max);
    Ok(FrameScore { delta_x, delta_q: dq, s1, ratio, s2, weight })
}
