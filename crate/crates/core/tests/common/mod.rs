#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use steadystream_core::{Pose, Quaternion, Trajectory, Vec3};

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn vec3(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(gauss(rng) * scale, gauss(rng) * scale, gauss(rng) * scale)
}

/// Uniform on the unit 3-sphere.
pub fn unit_quat(rng: &mut ChaCha8Rng) -> Quaternion {
    loop {
        let q = Quaternion::new(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
        let n = q.norm();
        if n > 1e-3 {
            return q.scale(1.0 / n);
        }
    }
}

pub fn random_trajectory(rng: &mut ChaCha8Rng, n: usize) -> Trajectory {
    let poses = (0..n).map(|i| Pose::new(vec3(rng, 1.0), unit_quat(rng), i as f64 / 30.0)).collect();
    Trajectory::new(poses).unwrap()
}

pub fn unit_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| gauss(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

// Hamilton product and power written out independently of the library.
pub fn qmul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// Unit quaternion raised to a real power via its axis-angle form.
pub fn qpow(q: [f64; 4], g: f64) -> [f64; 4] {
    let v = (q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    let half = v.atan2(q[0]);
    if v < 1e-300 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let (s, c) = (g * half).sin_cos();
    [c, s * q[1] / v, s * q[2] / v, s * q[3] / v]
}
