//! Trajectory-consistent training objectives.
//!
//! Scale normalizers are the mean Euclidean norm of each set, floored at
//! `1e-8`. Quaternion difference terms act on raw components after making
//! each sequence hemisphere-consistent (`q_t . q_{t-1} >= 0`). Translation
//! gradients treat the normalizers as constants.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{Quaternion, Trajectory, Vec3};
use crate::math;
use crate::scoring::Raster;
use crate::{Error, Result};

pub const SCALE_FLOOR: f64 = 1e-8;

/// Points with optional per-point confidences.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    pub points: Vec<Vec3>,
    pub confidences: Option<Vec<f64>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        Ok(Self { points, confidences: None })
    }

    pub fn with_confidences(points: Vec<Vec3>, confidences: Vec<f64>) -> Result<Self> {
        if confidences.len() != points.len() {
            return Err(Error::LengthMismatch { left: points.len(), right: confidences.len() });
        }
        if confidences.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidParameter { name: "confidence", reason: "must be finite and > 0" });
        }
        let mut set = Self::new(points)?;
        set.confidences = Some(confidences);
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    /// ATE term weight.
    pub w_a: f64,
    /// RPE term weight.
    pub w_r: f64,
    /// Acceleration term weight.
    pub w_s: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub alpha_conf: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { w_a: 1.0, w_r: 1.0, w_s: 1.0, lambda1: 1.0, lambda2: 1.0, lambda3: 1.0, alpha_conf: 0.2 }
    }
}

impl LossWeights {
    pub fn pose(w_a: f64, w_r: f64, w_s: f64) -> Self {
        Self { w_a, w_r, w_s, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.w_a, self.w_r, self.w_s, self.lambda1, self.lambda2, self.lambda3, self.alpha_conf];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter { name: "loss weight", reason: "must be finite and >= 0" });
        }
        Ok(())
    }
}

/// Mean Euclidean norm, floored at [`SCALE_FLOOR`].
pub fn scale_normalizer(vectors: &[Vec3]) -> Result<f64> {
    if vectors.is_empty() {
        return Err(Error::EmptyList);
    }
    let mean = vectors.iter().map(|v| v.norm()).sum::<f64>() / vectors.len() as f64;
    Ok(mean.max(SCALE_FLOOR))
}

/// Confidence-weighted, scale-normalized point regression loss.
pub fn loss_conf(pred: &PointSet, gt: &PointSet, alpha: f64) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: gt.len() });
    }
    let conf = pred.confidences.as_ref().ok_or(Error::MissingConfidence)?;
    let sp = scale_normalizer(&pred.points)?;
    let sg = scale_normalizer(&gt.points)?;
    Ok(pred
        .points
        .iter()
        .zip(&gt.points)
        .zip(conf)
        .map(|((p, g), c)| c * (*p * (1.0 / sp) - *g * (1.0 / sg)).norm() - alpha * math::ln(*c))
        .sum())
}

/// Squared L2 distance between two rasters of the same shape.
pub fn loss_rgb(pred: &Raster, gt: &Raster) -> Result<f64> {
    if !pred.same_shape(gt) {
        return Err(Error::ShapeMismatch);
    }
    Ok(pred.data.iter().zip(&gt.data).map(|(a, b)| (a - b) * (a - b)).sum())
}

fn check_pair(pred: &Trajectory, gt: &Trajectory) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: gt.len() });
    }
    if pred.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(())
}

/// Quaternions of a trajectory with consecutive signs made consistent.
pub fn hemisphere_aligned(traj: &Trajectory) -> Vec<Quaternion> {
    let mut out: Vec<Quaternion> = Vec::with_capacity(traj.len());
    for p in traj {
        let q = match out.last() {
            Some(prev) => p.q.aligned_to(*prev),
            None => p.q,
        };
        out.push(q);
    }
    out
}

/// Per-frame scale-normalized translation error plus `1 - |q_pred . q_gt|`,
/// averaged.
pub fn loss_ate(pred: &Trajectory, gt: &Trajectory) -> Result<f64> {
    check_pair(pred, gt)?;
    let sp = scale_normalizer(&pred.translations())?;
    let sg = scale_normalizer(&gt.translations())?;
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| (p.t * (1.0 / sp) - g.t * (1.0 / sg)).norm() + (1.0 - p.q.dot(g.q).abs()))
        .sum();
    Ok(sum / pred.len() as f64)
}

fn quat_norm4(q: Quaternion) -> f64 {
    q.norm()
}

/// Mismatch of consecutive raw differences, translation and quaternion.
pub fn loss_rpe(pred: &Trajectory, gt: &Trajectory) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: gt.len() });
    }
    let n = pred.len();
    if n < 2 {
        return Err(Error::TooShort { required: 2, found: n });
    }
    let (qp, qg) = (hemisphere_aligned(pred), hemisphere_aligned(gt));
    let (pp, gp) = (pred.poses(), gt.poses());
    let mut sum = 0.0;
    for t in 1..n {
        let dx = (pp[t].t - pp[t - 1].t) - (gp[t].t - gp[t - 1].t);
        let dq = (qp[t] - qp[t - 1]) - (qg[t] - qg[t - 1]);
        sum += dx.norm() + quat_norm4(dq);
    }
    Ok(sum / (n - 1) as f64)
}

/// Mean norm of second differences of translation and quaternion.
pub fn loss_acc(pred: &Trajectory) -> Result<f64> {
    let n = pred.len();
    if n < 3 {
        return Err(Error::TooShort { required: 3, found: n });
    }
    let q = hemisphere_aligned(pred);
    let p = pred.poses();
    let mut sum = 0.0;
    for t in 2..n {
        let ax = p[t].t - p[t - 1].t * 2.0 + p[t - 2].t;
        let aq = q[t] - q[t - 1].scale(2.0) + q[t - 2];
        sum += ax.norm() + quat_norm4(aq);
    }
    Ok(sum / (n - 2) as f64)
}

/// Components and weighted sum of the pose loss. Terms with zero weight are
/// skipped (and reported as 0), so short trajectories work when the terms
/// that need more frames are switched off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseLoss {
    pub ate: f64,
    pub rpe: f64,
    pub acc: f64,
    pub total: f64,
}

pub fn pose_loss_terms(pred: &Trajectory, gt: &Trajectory, w: &LossWeights) -> Result<PoseLoss> {
    w.validate()?;
    check_pair(pred, gt)?;
    let ate = if w.w_a > 0.0 { loss_ate(pred, gt)? } else { 0.0 };
    let rpe = if w.w_r > 0.0 { loss_rpe(pred, gt)? } else { 0.0 };
    let acc = if w.w_s > 0.0 { loss_acc(pred)? } else { 0.0 };
    Ok(PoseLoss { ate, rpe, acc, total: w.w_a * ate + w.w_r * rpe + w.w_s * acc })
}

/// `w_a L_ate + w_r L_rpe + w_s L_acc`.
pub fn loss_pose(pred: &Trajectory, gt: &Trajectory, w: &LossWeights) -> Result<f64> {
    Ok(pose_loss_terms(pred, gt, w)?.total)
}

/// `lambda1 L_conf + lambda2 L_rgb + lambda3 L_pose`.
pub fn loss_total(conf: f64, rgb: f64, pose: f64, w: &LossWeights) -> f64 {
    w.lambda1 * conf + w.lambda2 * rgb + w.lambda3 * pose
}

/// `v / |v|`, or zero at the origin (subgradient choice).
fn unit_or_zero(v: Vec3) -> Vec3 {
    let n = v.norm();
    if n > 0.0 {
        v * (1.0 / n)
    } else {
        Vec3::ZERO
    }
}

/// Gradient of [`loss_pose`] with respect to each predicted translation,
/// holding the scale normalizers fixed.
pub fn grad_pose_translations(pred: &Trajectory, gt: &Trajectory, w: &LossWeights) -> Result<Vec<Vec3>> {
    w.validate()?;
    check_pair(pred, gt)?;
    let n = pred.len();
    if w.w_r > 0.0 && n < 2 {
        return Err(Error::TooShort { required: 2, found: n });
    }
    if w.w_s > 0.0 && n < 3 {
        return Err(Error::TooShort { required: 3, found: n });
    }
    let (pp, gp) = (pred.poses(), gt.poses());
    let mut grad = vec![Vec3::ZERO; n];

    if w.w_a > 0.0 {
        let sp = scale_normalizer(&pred.translations())?;
        let sg = scale_normalizer(&gt.translations())?;
        let k = w.w_a / (n as f64 * sp);
        for t in 0..n {
            let r = pp[t].t * (1.0 / sp) - gp[t].t * (1.0 / sg);
            grad[t] += unit_or_zero(r) * k;
        }
    }
    if w.w_r > 0.0 {
        let k = w.w_r / (n - 1) as f64;
        for t in 1..n {
            let e = (pp[t].t - pp[t - 1].t) - (gp[t].t - gp[t - 1].t);
            let u = unit_or_zero(e) * k;
            grad[t] += u;
            grad[t - 1] -= u;
        }
    }
    if w.w_s > 0.0 {
        let k = w.w_s / (n - 2) as f64;
        for t in 2..n {
            let a = pp[t].t - pp[t - 1].t * 2.0 + pp[t - 2].t;
            let u = unit_or_zero(a) * k;
            grad[t] += u;
            grad[t - 1] -= u * 2.0;
            grad[t - 2] += u;
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;

    fn line(xs: &[f64]) -> Trajectory {
        Trajectory::new(
            xs.iter()
                .enumerate()
                .map(|(i, x)| Pose::new(Vec3::new(*x, 0.0, 0.0), Quaternion::IDENTITY, i as f64))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn scale_normalizer_examples() {
        assert_eq!(scale_normalizer(&[Vec3::new(1.0, 0.0, 0.0)]).unwrap(), 1.0);
        assert_eq!(scale_normalizer(&[Vec3::new(3.0, 4.0, 0.0), Vec3::new(0.0, 0.0, 5.0)]).unwrap(), 5.0);
        assert_eq!(scale_normalizer(&[Vec3::ZERO, Vec3::ZERO]).unwrap(), 1e-8);
        assert_eq!(scale_normalizer(&[]), Err(Error::EmptyList));
    }

    #[test]
    fn loss_conf_examples() {
        let pts = vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 2.0)];
        let gt = PointSet::new(pts.clone()).unwrap();
        let pred = PointSet::with_confidences(pts.clone(), vec![1.0, 1.0]).unwrap();
        assert_eq!(loss_conf(&pred, &gt, 0.7).unwrap(), 0.0);
        let doubled = PointSet::with_confidences(pts.iter().map(|p| *p * 2.0).collect(), vec![1.0, 1.0]).unwrap();
        assert!(loss_conf(&doubled, &gt, 0.2).unwrap().abs() < 1e-15);

        let pred = PointSet::with_confidences(vec![Vec3::new(0.0, 0.0, 2.0)], vec![2.0]).unwrap();
        let gt = PointSet::new(vec![Vec3::new(0.0, 0.0, 1.0)]).unwrap();
        assert_eq!(loss_conf(&pred, &gt, 0.2).unwrap(), -0.2 * libm::log(2.0));
        assert_eq!(loss_conf(&gt, &gt, 0.2), Err(Error::MissingConfidence));
    }

    #[test]
    fn loss_conf_half_residual() {
        // both normalized points are unit vectors; pick the angle whose chord is 0.5
        let theta = 2.0 * libm::asin(0.25);
        let pred = PointSet::with_confidences(vec![Vec3::new(1.0, 0.0, 0.0)], vec![2.0]).unwrap();
        let gt = PointSet::new(vec![Vec3::new(libm::cos(theta), libm::sin(theta), 0.0)]).unwrap();
        let got = loss_conf(&pred, &gt, 0.2).unwrap();
        assert!((got - (2.0 * 0.5 - 0.2 * libm::log(2.0))).abs() < 1e-12);
        assert!((got - 0.86137).abs() < 1e-5);
    }

    #[test]
    fn loss_rgb_examples() {
        let a = Raster::new(2, 1, 1, vec![0.1, 0.2]).unwrap();
        assert_eq!(loss_rgb(&a, &a).unwrap(), 0.0);
        let b = Raster::new(1, 1, 1, vec![0.5]).unwrap();
        let c = Raster::new(1, 1, 1, vec![0.0]).unwrap();
        assert_eq!(loss_rgb(&b, &c).unwrap(), 0.25);
        let d = Raster::new(2, 1, 1, vec![1.1, -0.8]).unwrap();
        assert!((loss_rgb(&a, &d).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(loss_rgb(&a, &b), Err(Error::ShapeMismatch));
    }

    #[test]
    fn loss_ate_examples() {
        let t = line(&[1.0, 2.0, 4.0]);
        assert_eq!(loss_ate(&t, &t).unwrap(), 0.0);
        let p = Trajectory::new(vec![Pose::new(Vec3::new(1.0, 0.0, 0.0), Quaternion::IDENTITY, 0.0)]).unwrap();
        let g = Trajectory::new(vec![Pose::new(Vec3::new(0.0, 1.0, 0.0), Quaternion::IDENTITY, 0.0)]).unwrap();
        assert!((loss_ate(&p, &g).unwrap() - libm::sqrt(2.0)).abs() < 1e-15);
        // gt at the origin normalizes to zero, pred to a unit vector
        let g0 = Trajectory::new(vec![Pose::new(Vec3::ZERO, Quaternion::IDENTITY, 0.0)]).unwrap();
        assert!((loss_ate(&p, &g0).unwrap() - 1.0).abs() < 1e-15);

        let h = core::f64::consts::FRAC_1_SQRT_2;
        let orth = Quaternion::new(0.0, 1.0, 0.0, 0.0);
        let a = Trajectory::new(vec![
            Pose::new(Vec3::new(1.0, 0.0, 0.0), Quaternion::IDENTITY, 0.0),
            Pose::new(Vec3::new(1.0, 1.0, 0.0), Quaternion::new(h, 0.0, 0.0, h), 1.0),
        ])
        .unwrap();
        let mut poses = a.poses().to_vec();
        poses[0].q = orth;
        let b = Trajectory::new(poses).unwrap();
        assert!((loss_ate(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(loss_ate(&a, &p), Err(Error::LengthMismatch { left: 2, right: 1 }));
    }

    #[test]
    fn loss_rpe_examples() {
        let g = line(&[0.0, 1.0, 3.0, 3.5]);
        assert_eq!(loss_rpe(&g, &g).unwrap(), 0.0);
        let shifted = line(&[5.0, 6.0, 8.0, 8.5]);
        assert_eq!(loss_rpe(&shifted, &g).unwrap(), 0.0);
        let a = line(&[0.0, 1.3]);
        let b = line(&[0.0, 1.0]);
        assert!((loss_rpe(&a, &b).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(loss_rpe(&line(&[0.0]), &line(&[0.0])), Err(Error::TooShort { required: 2, found: 1 }));
    }

    #[test]
    fn loss_acc_examples() {
        assert_eq!(loss_acc(&line(&[0.0, 1.0, 2.0, 3.0])).unwrap(), 0.0);
        assert_eq!(loss_acc(&line(&[0.0, 0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(loss_acc(&line(&[0.0, 1.0])), Err(Error::TooShort { required: 3, found: 2 }));
    }

    #[test]
    fn loss_acc_ignores_quaternion_sign_flips() {
        let mut poses = line(&[0.0, 1.0, 2.0]).into_poses();
        poses[1].q = -poses[1].q;
        assert_eq!(loss_acc(&Trajectory::new(poses).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn loss_pose_examples() {
        let g = line(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(loss_pose(&g, &g, &LossWeights::default()).unwrap(), 0.0);
        let p = line(&[0.5, 1.0, 2.0, 3.5]);
        assert_eq!(loss_pose(&p, &g, &LossWeights::pose(1.0, 0.0, 0.0)).unwrap(), loss_ate(&p, &g).unwrap());
        let t = line(&[0.0, 0.0, 1.0]);
        assert_eq!(loss_pose(&t, &t, &LossWeights::pose(1.0, 1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(loss_pose(&p, &g, &LossWeights::pose(0.0, 0.0, 0.0)).unwrap(), 0.0);
        let two = line(&[0.0, 1.0]);
        assert!(loss_pose(&two, &two, &LossWeights::pose(1.0, 1.0, 1.0)).is_err());
        assert!(loss_pose(&two, &two, &LossWeights::pose(1.0, 1.0, 0.0)).is_ok());
    }

    #[test]
    fn loss_total_examples() {
        let w = LossWeights::default();
        assert_eq!(loss_total(0.0, 0.0, 0.0, &w), 0.0);
        assert_eq!(loss_total(1.0, 1.0, 1.0, &w), 3.0);
        let w = LossWeights { lambda1: 0.5, lambda2: 1.0, lambda3: 2.0, ..w };
        assert_eq!(loss_total(2.0, 0.0, 0.5, &w), 2.0);
    }

    #[test]
    fn grad_examples() {
        let g = line(&[0.0, 1.0, 2.0, 3.0]);
        let grad = grad_pose_translations(&g, &g, &LossWeights::default()).unwrap();
        assert!(grad.iter().all(|v| *v == Vec3::ZERO));

        // d/dx of |x3 - 2 x2 + x1| at second difference +1
        let t = line(&[0.0, 0.0, 1.0]);
        let grad = grad_pose_translations(&t, &t, &LossWeights::pose(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(grad, vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(-2.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)]);
    }
}
