//! Quaternion and pose algebra shared by the rest of the crate.
//!
//! Quaternions are stored scalar-first `(w, x, y, z)`. File formats that use
//! a different component order convert at the boundary.

use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use crate::math;
use crate::{Error, Result};

/// Tolerance on `| |q| - 1 |` above which a quaternion is rejected as non-unit.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Below this norm a quaternion cannot be normalized.
pub const ZERO_NORM: f64 = 1e-12;

/// Below this `sin(theta)` slerp falls back to normalized linear interpolation.
pub const SLERP_LINEAR_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::sqrt(self.norm_squared())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Quaternion, scalar first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    /// Rotation of `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Self> {
        let n = axis.norm();
        if n < ZERO_NORM {
            return Err(Error::InvalidParameter { name: "axis", reason: "zero length" });
        }
        let (s, c) = (math::sin(angle / 2.0), math::cos(angle / 2.0));
        let a = axis * (s / n);
        Ok(Quaternion::new(c, a.x, a.y, a.z))
    }

    #[inline]
    pub fn dot(self, o: Quaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::sqrt(self.dot(self))
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn vector(self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    #[inline]
    pub fn scale(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    #[inline]
    pub fn conjugate(self) -> Quaternion {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn normalize(self) -> Result<Quaternion> {
        quat_normalize(self)
    }

    /// Errors unless `| |q| - 1 | <= UNIT_TOLERANCE`.
    pub fn check_unit(self) -> Result<()> {
        let norm = self.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NonUnitQuaternion { norm });
        }
        Ok(())
    }

    /// Rotates `v` by this (unit) quaternion.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        let u = self.vector();
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    /// Row-major rotation matrix of a unit quaternion.
    pub fn to_rotation_matrix(self) -> [[f64; 3]; 3] {
        let Quaternion { w, x, y, z } = self;
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    /// Flip sign so that `self . reference >= 0`.
    #[inline]
    pub fn aligned_to(self, reference: Quaternion) -> Quaternion {
        if self.dot(reference) < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

pub fn quat_normalize(q: Quaternion) -> Result<Quaternion> {
    let n = q.norm();
    if !(n >= ZERO_NORM) || !n.is_finite() {
        return Err(Error::ZeroQuaternion);
    }
    Ok(q.scale(1.0 / n))
}

/// Angle between two unit 4-vectors, in `[0, pi]`.
///
/// `2 atan2(|a - b|, |a + b|)` stays accurate near 0 and pi where `acos` of
/// the dot product loses half the digits.
fn angle_4d(a: Quaternion, b: Quaternion) -> f64 {
    2.0 * math::atan2((a - b).norm(), (a + b).norm())
}

/// Rotation angle (radians, in `[0, pi]`) taking `a` to `b`.
///
/// Equal to `2 acos(min(1, |a . b|))`, so `q` and `-q` are the same rotation.
pub fn quat_geodesic_angle(a: Quaternion, b: Quaternion) -> Result<f64> {
    a.check_unit()?;
    b.check_unit()?;
    Ok(2.0 * angle_4d(a, b.aligned_to(a)))
}

/// Spherical linear interpolation from `a` (`gamma = 0`) to `b` (`gamma = 1`)
/// along the shorter arc.
pub fn slerp(a: Quaternion, b: Quaternion, gamma: f64) -> Result<Quaternion> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidGamma(gamma));
    }
    let b = b.aligned_to(a);
    let theta = angle_4d(a, b);
    let sin_theta = math::sin(theta);
    if sin_theta < SLERP_LINEAR_THRESHOLD {
        return quat_normalize(a.scale(1.0 - gamma) + b.scale(gamma));
    }
    let wa = math::sin((1.0 - gamma) * theta) / sin_theta;
    let wb = math::sin(gamma * theta) / sin_theta;
    Ok(a.scale(wa) + b.scale(wb))
}

/// One camera pose: translation, unit rotation, timestamp in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub t: Vec3,
    pub q: Quaternion,
    pub timestamp: f64,
}

impl Pose {
    pub fn new(t: Vec3, q: Quaternion, timestamp: f64) -> Self {
        Self { t, q, timestamp }
    }

    pub fn identity(timestamp: f64) -> Self {
        Self::new(Vec3::ZERO, Quaternion::IDENTITY, timestamp)
    }

    /// Rigid composition `self * other` (apply `other` first). Keeps
    /// `other`'s timestamp.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(self.q.rotate(other.t) + self.t, self.q * other.q, other.timestamp)
    }

    pub fn inverse(&self) -> Pose {
        let qi = self.q.conjugate();
        Pose::new(-qi.rotate(self.t), qi, self.timestamp)
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.q.rotate(p) + self.t
    }
}

/// Translation difference and rotation angle between consecutive poses.
pub fn relative_pose(prev: &Pose, cur: &Pose) -> Result<(Vec3, f64)> {
    Ok((cur.t - prev.t, quat_geodesic_angle(prev.q, cur.q)?))
}

/// Timestamp-ordered pose sequence.
///
/// Construction checks that timestamps are finite and strictly increasing.
/// An empty trajectory is representable (for writers); operations that need
/// frames report `EmptyTrajectory` or `TooShort` themselves.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    poses: Vec<Pose>,
}

impl Trajectory {
    pub fn new(poses: Vec<Pose>) -> Result<Self> {
        for (i, p) in poses.iter().enumerate() {
            if !p.timestamp.is_finite() {
                return Err(Error::NonFinite("timestamp"));
            }
            if !p.t.is_finite() || !p.q.is_finite() {
                return Err(Error::NonFinite("pose"));
            }
            if i > 0 && !(p.timestamp > poses[i - 1].timestamp) {
                return Err(Error::NonMonotonicTimestamps { index: i });
            }
        }
        Ok(Self { poses })
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn into_poses(self) -> Vec<Pose> {
        self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Pose> {
        self.poses.iter()
    }

    pub fn translations(&self) -> Vec<Vec3> {
        self.poses.iter().map(|p| p.t).collect()
    }

    /// First `k` poses (all of them if `k >= len`).
    pub fn prefix(&self, k: usize) -> Trajectory {
        Trajectory { poses: self.poses[..k.min(self.poses.len())].to_vec() }
    }

    /// Applies `transform` on the left of every pose.
    pub fn transformed(&self, transform: &Pose) -> Trajectory {
        Trajectory { poses: self.poses.iter().map(|p| transform.compose(p)).collect() }
    }
}

impl<'a> IntoIterator for &'a Trajectory {
    type Item = &'a Pose;
    type IntoIter = core::slice::Iter<'a, Pose>;
    fn into_iter(self) -> Self::IntoIter {
        self.poses.iter()
    }
}
