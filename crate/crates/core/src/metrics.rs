//! Evaluation metrics: trajectory ATE/RPE, depth errors, point-cloud
//! accuracy/completeness/normal consistency.

use alloc::vec::Vec;

use crate::geometry::{Pose, Quaternion, Trajectory, Vec3};
use crate::linalg::{mat3_mul_vec, symmetric_eigen, Mat3, IDENTITY3};
use crate::losses::PointSet;
use crate::math;
use crate::nn::{NeighborIndex, SearchStrategy};
use crate::refine::{median_in_place, DepthMap};
use crate::{Error, Result};

/// Relative singular-value threshold for a rank-deficient cross-covariance.
const RANK_TOLERANCE: f64 = 1e-9;

/// `x -> scale * R x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity3 {
    pub scale: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Similarity3 {
    pub const IDENTITY: Similarity3 = Similarity3 { scale: 1.0, rotation: IDENTITY3, translation: Vec3::ZERO };

    pub fn apply(&self, p: Vec3) -> Vec3 {
        mat3_mul_vec(&self.rotation, p) * self.scale + self.translation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DepthEvalMode {
    #[default]
    Original,
    /// Multiply by the median of `gt / pred`.
    Scale,
    /// Least-squares affine correction `a * pred + b`.
    ScaleAndShift,
}

/// Least-squares similarity (or rigid, if `with_scale` is false) taking `src`
/// onto `dst`.
///
/// The rotation is the dominant eigenvector of Horn's 4x4 quaternion matrix,
/// which always yields a proper rotation.
pub fn umeyama_align(src: &[Vec3], dst: &[Vec3], with_scale: bool) -> Result<Similarity3> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch { left: src.len(), right: dst.len() });
    }
    let n = src.len();
    if n < 3 {
        return Err(Error::DegenerateConfiguration);
    }
    if src.iter().chain(dst).any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("alignment points"));
    }
    let inv_n = 1.0 / n as f64;
    let mu_s = src.iter().fold(Vec3::ZERO, |a, p| a + *p) * inv_n;
    let mu_d = dst.iter().fold(Vec3::ZERO, |a, p| a + *p) * inv_n;

    // m[j][k] = sum a_j b_k over centered pairs.
    let mut m = [[0.0; 3]; 3];
    let mut src_var = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let a = *s - mu_s;
        let b = *d - mu_d;
        src_var += a.norm_squared();
        for j in 0..3 {
            for k in 0..3 {
                m[j][k] += a[j] * b[k];
            }
        }
    }

    let mut mtm = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            mtm[i][j] = (0..3).map(|k| m[k][i] * m[k][j]).sum();
        }
    }
    let (sv2, _) = symmetric_eigen(&mtm);
    let top = sv2[2].max(0.0);
    if !(top > 0.0) || math::sqrt(sv2[1].max(0.0)) <= RANK_TOLERANCE * math::sqrt(top) {
        return Err(Error::DegenerateConfiguration);
    }

    let [[sxx, sxy, sxz], [syx, syy, syz], [szx, szy, szz]] = m;
    let horn = [
        [sxx + syy + szz, syz - szy, szx - sxz, sxy - syx],
        [syz - szy, sxx - syy - szz, sxy + syx, szx + sxz],
        [szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy],
        [sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz],
    ];
    let (_, vecs) = symmetric_eigen(&horn);
    let q = Quaternion::new(vecs[0][3], vecs[1][3], vecs[2][3], vecs[3][3]).normalize()?;
    let rotation = q.to_rotation_matrix();

    let scale = if with_scale {
        let mut num = 0.0;
        for (s, d) in src.iter().zip(dst) {
            num += (*d - mu_d).dot(mat3_mul_vec(&rotation, *s - mu_s));
        }
        num / src_var
    } else {
        1.0
    };
    if !(scale > 0.0) {
        return Err(Error::DegenerateConfiguration);
    }
    let translation = mu_d - mat3_mul_vec(&rotation, mu_s) * scale;
    Ok(Similarity3 { scale, rotation, translation })
}

fn check_pair(pred: &Trajectory, gt: &Trajectory) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: gt.len() });
    }
    Ok(())
}

/// Position RMSE after aligning `pred` onto `gt`.
pub fn metric_ate(pred: &Trajectory, gt: &Trajectory, with_scale: bool) -> Result<f64> {
    check_pair(pred, gt)?;
    let p = pred.translations();
    let g = gt.translations();
    let sim = umeyama_align(&p, &g, with_scale)?;
    let sum: f64 = p.iter().zip(&g).map(|(a, b)| (sim.apply(*a) - *b).norm_squared()).sum();
    Ok(math::sqrt(sum / p.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpeResult {
    pub trans: f64,
    /// Degrees.
    pub rot: f64,
}

/// RMSE over consecutive pairs of the SE(3) error `inv(gt_rel) * pred_rel`.
pub fn metric_rpe(pred: &Trajectory, gt: &Trajectory) -> Result<RpeResult> {
    check_pair(pred, gt)?;
    let n = pred.len();
    if n < 2 {
        return Err(Error::TooShort { required: 2, found: n });
    }
    let (p, g) = (pred.poses(), gt.poses());
    let (mut st, mut sr) = (0.0, 0.0);
    for i in 0..n - 1 {
        let pr = p[i].inverse().compose(&p[i + 1]);
        let gr = g[i].inverse().compose(&g[i + 1]);
        let e: Pose = gr.inverse().compose(&pr);
        let angle = 2.0 * math::atan2(e.q.vector().norm(), e.q.w.abs()) * (180.0 / core::f64::consts::PI);
        st += e.t.norm_squared();
        sr += angle * angle;
    }
    let m = (n - 1) as f64;
    Ok(RpeResult { trans: math::sqrt(st / m), rot: math::sqrt(sr / m) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthMetrics {
    pub abs_rel: f64,
    /// Percentage in [0, 100].
    pub delta_125: f64,
}

/// Abs Rel and the δ < 1.25 percentage over pixels valid in both maps.
///
/// For scale-and-shift on a constant prediction the fit degenerates; the
/// correction then reduces to a pure shift. Corrected depths `<= 0` never
/// count towards δ.
pub fn metric_depth(pred: &DepthMap, gt: &DepthMap, mode: DepthEvalMode) -> Result<DepthMetrics> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::ShapeMismatch);
    }
    let pairs: Vec<(f64, f64)> = pred
        .depths()
        .iter()
        .zip(gt.depths())
        .zip(pred.valid_mask().iter().zip(gt.valid_mask()))
        .filter(|(_, (vp, vg))| **vp && **vg)
        .map(|((p, g), _)| (*p, *g))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoOverlappingValidity);
    }
    let n = pairs.len() as f64;
    let (a, b) = match mode {
        DepthEvalMode::Original => (1.0, 0.0),
        DepthEvalMode::Scale => {
            let mut ratios: Vec<f64> = pairs.iter().map(|(p, g)| g / p).collect();
            (median_in_place(&mut ratios).unwrap_or(1.0), 0.0)
        }
        DepthEvalMode::ScaleAndShift => {
            let mp = pairs.iter().map(|(p, _)| p).sum::<f64>() / n;
            let mg = pairs.iter().map(|(_, g)| g).sum::<f64>() / n;
            let (mut cov, mut var) = (0.0, 0.0);
            for (p, g) in &pairs {
                cov += (p - mp) * (g - mg);
                var += (p - mp) * (p - mp);
            }
            if var > 0.0 {
                let a = cov / var;
                (a, mg - a * mp)
            } else {
                (1.0, mg - mp)
            }
        }
    };
    let (mut rel, mut good) = (0.0, 0usize);
    for (p, g) in &pairs {
        let c = a * p + b;
        rel += (c - g).abs() / g;
        if c > 0.0 && (c / g).max(g / c) < 1.25 {
            good += 1;
        }
    }
    Ok(DepthMetrics { abs_rel: rel / n, delta_125: 100.0 * good as f64 / n })
}

/// Unit normal of the least-variance direction of `points`, flipped to face
/// the origin from `anchor`.
pub fn pca_normal(points: &[Vec3], anchor: Vec3) -> Vec3 {
    let inv = 1.0 / points.len() as f64;
    let c = points.iter().fold(Vec3::ZERO, |a, p| a + *p) * inv;
    let mut cov = [[0.0; 3]; 3];
    for p in points {
        let d = *p - c;
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    for row in cov.iter_mut() {
        for v in row.iter_mut() {
            *v *= inv;
        }
    }
    let (_, vecs) = symmetric_eigen(&cov);
    let mut n = Vec3::new(vecs[0][0], vecs[1][0], vecs[2][0]);
    let len = n.norm();
    if len > 0.0 {
        n = n * (1.0 / len);
    }
    if n.dot(anchor) > 0.0 {
        n = -n;
    }
    n
}

/// Normals from each point plus its `k` nearest other points.
pub fn estimate_normals(points: &[Vec3], k: usize, strategy: SearchStrategy) -> Vec<Vec3> {
    let index = NeighborIndex::new(points, strategy);
    let mut hood = Vec::with_capacity(k + 1);
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            hood.clear();
            hood.push(*p);
            hood.extend(index.knn(*p, k, Some(i)).iter().map(|n| points[n.index]));
            pca_normal(&hood, *p)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconMetrics {
    pub acc: f64,
    pub comp: f64,
    pub nc: f64,
}

pub const DEFAULT_K_NORMALS: usize = 16;

pub fn metric_recon(pred: &PointSet, gt: &PointSet, k_normals: usize) -> Result<ReconMetrics> {
    metric_recon_with(pred, gt, k_normals, SearchStrategy::Auto)
}

pub fn metric_recon_with(
    pred: &PointSet,
    gt: &PointSet,
    k_normals: usize,
    strategy: SearchStrategy,
) -> Result<ReconMetrics> {
    let need = k_normals + 1;
    for set in [pred, gt] {
        if set.len() < need {
            return Err(Error::TooFewPoints { required: need, found: set.len() });
        }
    }
    let (p, g) = (&pred.points, &gt.points);
    let p_index = NeighborIndex::new(p, strategy);
    let g_index = NeighborIndex::new(g, strategy);
    let p_normals = estimate_normals(p, k_normals, strategy);
    let g_normals = estimate_normals(g, k_normals, strategy);

    let (mut acc, mut nc) = (0.0, 0.0);
    for (i, q) in p.iter().enumerate() {
        let nn = g_index.nearest(*q).ok_or(Error::EmptySet)?;
        acc += math::sqrt(nn.dist_sq);
        nc += p_normals[i].dot(g_normals[nn.index]).abs();
    }
    let mut comp = 0.0;
    for q in g {
        comp += math::sqrt(p_index.nearest(*q).ok_or(Error::EmptySet)?.dist_sq);
    }
    let np = p.len() as f64;
    Ok(ReconMetrics { acc: acc / np, comp: comp / g.len() as f64, nc: nc / np })
}
