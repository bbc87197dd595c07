//! Edge-preserving bilateral refinement of depth maps and their point clouds.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Vec3;
use crate::losses::PointSet;
use crate::math;
use crate::{Error, Result};

/// Normalizer below which a pixel keeps its input depth.
pub const MIN_WEIGHT_SUM: f64 = 1e-300;

/// Row-major depth raster with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    depths: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    pub fn new(width: usize, height: usize, depths: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if depths.len() != width * height || valid.len() != width * height {
            return Err(Error::ShapeMismatch);
        }
        if depths.iter().zip(&valid).any(|(d, v)| *v && !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidParameter { name: "depth", reason: "valid depths must be finite and > 0" });
        }
        Ok(Self { width, height, depths, valid })
    }

    /// Pixels that are finite and positive are valid; everything else is not.
    pub fn from_depths(width: usize, height: usize, depths: Vec<f64>) -> Result<Self> {
        let valid = depths.iter().map(|d| d.is_finite() && *d > 0.0).collect();
        Self::new(width, height, depths, valid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    pub fn valid_mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn depth(&self, x: usize, y: usize) -> f64 {
        self.depths[y * self.width + x]
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.width + x]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Median of the valid depths (mean of the middle pair for even counts).
    pub fn median_valid_depth(&self) -> Option<f64> {
        let mut d: Vec<f64> = self.depths.iter().zip(&self.valid).filter(|(_, v)| **v).map(|(d, _)| *d).collect();
        median_in_place(&mut d)
    }

    /// Applies `f` to every valid depth, keeping the mask.
    pub fn map_valid(&self, mut f: impl FnMut(f64) -> f64) -> Result<DepthMap> {
        let depths = self.depths.iter().zip(&self.valid).map(|(d, v)| if *v { f(*d) } else { *d }).collect();
        DepthMap::new(self.width, self.height, depths, self.valid.clone())
    }
}

pub(crate) fn median_in_place(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) || !fx.is_finite() || !fy.is_finite() {
            return Err(Error::InvalidParameter { name: "focal length", reason: "must be finite and > 0" });
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(Error::NonFinite("principal point"));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    pub fn back_project(&self, u: f64, v: f64, depth: f64) -> Vec3 {
        Vec3::new((u - self.cx) * depth / self.fx, (v - self.cy) * depth / self.fy, depth)
    }

    /// Inverse of [`back_project`](Self::back_project): `(u, v, depth)`.
    pub fn project(&self, p: Vec3) -> (f64, f64, f64) {
        (p.x * self.fx / p.z + self.cx, p.y * self.fy / p.z + self.cy, p.z)
    }
}

/// Range kernel width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangeSigma {
    /// Fixed, in depth units.
    Fixed(f64),
    /// `factor * median valid depth` of the map being filtered.
    Adaptive { factor: f64 },
}

/// How the spatial distance between two pixels is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpatialMetric {
    /// Image-plane distance in pixels.
    Pixel,
    /// Distance between back-projected 3D points, in scene units.
    Metric(Intrinsics),
}

/// Which depth the weights average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeWeighting {
    /// Standard bilateral filter: weighted mean of neighbor depths.
    Neighbor,
    /// Weights multiply the center depth, which reduces to the identity.
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilateralConfig {
    /// Half-width of the square window.
    pub window: usize,
    pub sigma_s: f64,
    pub sigma_r: RangeSigma,
    pub spatial: SpatialMetric,
    pub weighting: RangeWeighting,
}

impl Default for BilateralConfig {
    fn default() -> Self {
        Self {
            window: 2,
            sigma_s: 1.0,
            sigma_r: RangeSigma::Adaptive { factor: 0.05 },
            spatial: SpatialMetric::Pixel,
            weighting: RangeWeighting::Neighbor,
        }
    }
}

impl BilateralConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 1 {
            return Err(Error::InvalidParameter { name: "window", reason: "must be >= 1" });
        }
        if !(self.sigma_s > 0.0) || !self.sigma_s.is_finite() {
            return Err(Error::InvalidParameter { name: "sigma_s", reason: "must be finite and > 0" });
        }
        let sr = match self.sigma_r {
            RangeSigma::Fixed(s) => s,
            RangeSigma::Adaptive { factor } => factor,
        };
        if !(sr > 0.0) || !sr.is_finite() {
            return Err(Error::InvalidParameter { name: "sigma_r", reason: "must be finite and > 0" });
        }
        Ok(())
    }

    /// Range sigma actually used for `map`.
    pub fn resolve_sigma_r(&self, map: &DepthMap) -> Result<f64> {
        match self.sigma_r {
            RangeSigma::Fixed(s) => Ok(s),
            RangeSigma::Adaptive { factor } => Ok(factor * map.median_valid_depth().ok_or(Error::NoValidPixels)?),
        }
    }
}

/// Bilateral filter over valid pixels; invalid pixels pass through and the
/// mask is unchanged.
pub fn bilateral_depth(map: &DepthMap, cfg: &BilateralConfig) -> Result<DepthMap> {
    cfg.validate()?;
    if map.valid_count() == 0 {
        return Err(Error::NoValidPixels);
    }
    let sigma_r = cfg.resolve_sigma_r(map)?;
    let (w, h, r) = (map.width, map.height, cfg.window as isize);
    let inv_2ss = 1.0 / (2.0 * cfg.sigma_s * cfg.sigma_s);
    let inv_2sr = 1.0 / (2.0 * sigma_r * sigma_r);

    let side = (2 * r + 1) as usize;
    let mut pixel_kernel = vec![0.0; side * side];
    for dy in -r..=r {
        for dx in -r..=r {
            let d2 = (dx * dx + dy * dy) as f64;
            pixel_kernel[((dy + r) as usize) * side + (dx + r) as usize] = math::exp(-d2 * inv_2ss);
        }
    }

    let mut out = map.depths.clone();
    for y in 0..h {
        for x in 0..w {
            let idx = y * w + x;
            if !map.valid[idx] {
                continue;
            }
            let dp = map.depths[idx];
            let center = match cfg.spatial {
                SpatialMetric::Metric(k) => Some((k, k.back_project(x as f64, y as f64, dp))),
                SpatialMetric::Pixel => None,
            };
            let mut wsum = 0.0;
            let mut acc = 0.0;
            let y0 = (y as isize - r).max(0) as usize;
            let y1 = (y as isize + r).min(h as isize - 1) as usize;
            let x0 = (x as isize - r).max(0) as usize;
            let x1 = (x as isize + r).min(w as isize - 1) as usize;
            for qy in y0..=y1 {
                for qx in x0..=x1 {
                    let qi = qy * w + qx;
                    if !map.valid[qi] {
                        continue;
                    }
                    let dq = map.depths[qi];
                    let spatial = match center {
                        None => {
                            let ky = (qy as isize - y as isize + r) as usize;
                            let kx = (qx as isize - x as isize + r) as usize;
                            pixel_kernel[ky * side + kx]
                        }
                        Some((k, pc)) => {
                            let d2 = (k.back_project(qx as f64, qy as f64, dq) - pc).norm_squared();
                            math::exp(-d2 * inv_2ss)
                        }
                    };
                    let diff = dp - dq;
                    let weight = spatial * math::exp(-diff * diff * inv_2sr);
                    wsum += weight;
                    acc += weight
                        * match cfg.weighting {
                            RangeWeighting::Neighbor => dq,
                            RangeWeighting::Center => dp,
                        };
                }
            }
            if wsum >= MIN_WEIGHT_SUM {
                out[idx] = acc / wsum;
            }
        }
    }
    DepthMap::new(w, h, out, map.valid.clone())
}

/// Back-projects every valid pixel `(u, v)` (integer pixel coordinates),
/// row-major.
pub fn depth_to_points(map: &DepthMap, k: &Intrinsics) -> PointSet {
    let mut points = Vec::with_capacity(map.valid_count());
    for y in 0..map.height {
        for x in 0..map.width {
            if map.is_valid(x, y) {
                points.push(k.back_project(x as f64, y as f64, map.depth(x, y)));
            }
        }
    }
    PointSet { points, confidences: None }
}

/// Bilateral-filtered depth, back-projected.
pub fn refine_cloud(map: &DepthMap, k: &Intrinsics, cfg: &BilateralConfig) -> Result<PointSet> {
    Ok(depth_to_points(&bilateral_depth(map, cfg)?, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_edge(w: usize, h: usize) -> DepthMap {
        DepthMap::from_depths(w, h, (0..w * h).map(|i| if i % w < w / 2 { 1.0 } else { 10.0 }).collect()).unwrap()
    }

    #[test]
    fn constant_map_unchanged() {
        let m = DepthMap::from_depths(7, 5, vec![3.25; 35]).unwrap();
        let out = bilateral_depth(&m, &BilateralConfig::default()).unwrap();
        assert!(out.depths().iter().all(|d| (d - 3.25).abs() < 1e-12));
    }

    #[test]
    fn step_edge_preserved() {
        let m = step_edge(12, 6);
        let cfg = BilateralConfig { sigma_r: RangeSigma::Fixed(0.1), sigma_s: 2.0, ..Default::default() };
        let out = bilateral_depth(&m, &cfg).unwrap();
        for (a, b) in out.depths().iter().zip(m.depths()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_pixels_pass_through() {
        let mut depths = vec![2.0; 16];
        depths[5] = f64::NAN;
        depths[6] = 0.0;
        depths[7] = 3.0;
        let m = DepthMap::from_depths(4, 4, depths).unwrap();
        let out = bilateral_depth(&m, &BilateralConfig::default()).unwrap();
        assert_eq!(out.valid_mask(), m.valid_mask());
        assert!(out.depths()[5].is_nan());
        assert_eq!(out.depths()[6], 0.0);
        let none = DepthMap::from_depths(2, 1, vec![0.0, -1.0]).unwrap();
        assert_eq!(bilateral_depth(&none, &BilateralConfig::default()), Err(Error::NoValidPixels));
    }

    #[test]
    fn tiny_sigma_s_is_identity() {
        let m = DepthMap::from_depths(5, 4, (0..20).map(|i| 1.0 + (i as f64 * 0.37).sin().abs()).collect()).unwrap();
        let cfg = BilateralConfig { sigma_s: 1e-6, ..Default::default() };
        let out = bilateral_depth(&m, &cfg).unwrap();
        for (a, b) in out.depths().iter().zip(m.depths()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn center_weighting_is_identity() {
        let m = step_edge(6, 3).map_valid(|d| d + 0.25).unwrap();
        let cfg = BilateralConfig { weighting: RangeWeighting::Center, ..Default::default() };
        let out = bilateral_depth(&m, &cfg).unwrap();
        for (a, b) in out.depths().iter().zip(m.depths()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_mode_constant_plane() {
        let k = Intrinsics::new(50.0, 50.0, 4.0, 3.0).unwrap();
        let m = DepthMap::from_depths(8, 6, vec![2.0; 48]).unwrap();
        let cfg = BilateralConfig { spatial: SpatialMetric::Metric(k), sigma_s: 0.05, ..Default::default() };
        let out = bilateral_depth(&m, &cfg).unwrap();
        assert!(out.depths().iter().all(|d| (d - 2.0).abs() < 1e-12));
    }

    #[test]
    fn back_projection_examples() {
        let k = Intrinsics::new(500.0, 400.0, 3.0, 2.0).unwrap();
        let mut depths = vec![0.0; 20];
        depths[2 * 5 + 3] = 2.0;
        let m = DepthMap::from_depths(5, 4, depths).unwrap();
        assert_eq!(depth_to_points(&m, &k).points, vec![Vec3::new(0.0, 0.0, 2.0)]);

        let k = Intrinsics::new(1.0, 1.0, 0.0, 0.0).unwrap();
        let mut depths = vec![0.0; 25];
        depths[4 * 5 + 3] = 1.0;
        let m = DepthMap::from_depths(5, 5, depths).unwrap();
        assert_eq!(depth_to_points(&m, &k).points, vec![Vec3::new(3.0, 4.0, 1.0)]);
        assert!(Intrinsics::new(0.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn median_rule() {
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median_in_place(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median_in_place(&mut []), None);
    }
}
