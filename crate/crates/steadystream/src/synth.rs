//! Seeded synthetic inputs: smooth camera paths, noisy copies, textured
//! frames, depth maps and clouds.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;
use steadystream_core::losses::PointSet;
use steadystream_core::refine::DepthMap;
use steadystream_core::scoring::GrayImage;
use steadystream_core::{Pose, Quaternion, Trajectory, Vec3};

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Camera on a horizontal circle of `radius`, one revolution per `period`
/// seconds, yawing to follow the path.
pub fn circle_trajectory(frames: usize, fps: f64, radius: f64, period: f64) -> Trajectory {
    let poses = (0..frames)
        .map(|i| {
            let t = i as f64 / fps;
            let a = 2.0 * PI * t / period;
            let pos = Vec3::new(radius * a.cos(), 0.1 * (0.5 * a).sin(), radius * a.sin());
            let q = Quaternion::from_axis_angle(Vec3::new(0.0, 1.0, 0.0), -a).expect("unit axis");
            Pose::new(pos, q, t)
        })
        .collect();
    Trajectory::new(poses).expect("increasing timestamps")
}

/// Adds isotropic Gaussian noise of standard deviation `sigma` to every translation.
pub fn jitter_translations(traj: &Trajectory, sigma: f64, rng: &mut ChaCha8Rng) -> Trajectory {
    let poses = traj
        .iter()
        .map(|p| {
            let n = Vec3::new(gauss(rng), gauss(rng), gauss(rng)) * sigma;
            Pose::new(p.t + n, p.q, p.timestamp)
        })
        .collect();
    Trajectory::new(poses).expect("timestamps unchanged")
}

/// Smooth gradient plus white noise; `detail` in `[0, 1]` sets the noise share.
pub fn textured_frame(rng: &mut ChaCha8Rng, width: usize, height: usize, detail: f64) -> GrayImage {
    let (fx, fy, phase) = (rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), rng.random_range(0.0..2.0 * PI));
    GrayImage::from_fn(width, height, |x, y| {
        let u = x as f64 / width as f64;
        let v = y as f64 / height as f64;
        let smooth = 0.5 + 0.4 * (2.0 * PI * (fx * u + fy * v) + phase).sin();
        let noise: f64 = rng.random();
        ((1.0 - detail) * smooth + detail * noise).clamp(0.0, 1.0)
    })
    .expect("nonempty frame")
}

/// A slanted plane at depth ~`base` with a raised box in the middle.
pub fn box_scene_depth(width: usize, height: usize, base: f64) -> DepthMap {
    let depths = (0..width * height)
        .map(|i| {
            let (x, y) = (i % width, i / width);
            let inside = x > width / 3 && x < 2 * width / 3 && y > height / 3 && y < 2 * height / 3;
            let d = base + 0.01 * x as f64 + 0.02 * y as f64;
            if inside {
                d - 0.5 * base
            } else {
                d
            }
        })
        .collect();
    DepthMap::from_depths(width, height, depths).expect("matching size")
}

/// Adds Gaussian noise to every valid depth, keeping it positive.
pub fn noisy_depth(map: &DepthMap, sigma: f64, rng: &mut ChaCha8Rng) -> DepthMap {
    map.map_valid(|d| (d + sigma * gauss(rng)).max(1e-3)).expect("positive depths")
}

/// `n` points scattered on the faces of the unit cube centered at `center`.
pub fn cube_surface_cloud(rng: &mut ChaCha8Rng, n: usize, center: Vec3) -> PointSet {
    let points = (0..n)
        .map(|_| {
            let face = rng.random_range(0..6);
            let (a, b): (f64, f64) = (rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            let s = if face % 2 == 0 { 0.5 } else { -0.5 };
            let p = match face / 2 {
                0 => Vec3::new(s, a, b),
                1 => Vec3::new(a, s, b),
                _ => Vec3::new(a, b, s),
            };
            p + center
        })
        .collect();
    PointSet::new(points).expect("finite points")
}

/// `count` unit keys of dimension `dim`; each consecutive block of `dim`
/// keys is orthonormal (Gram-Schmidt on Gaussian draws).
pub fn orthonormal_keys(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut keys: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut block: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while keys.len() < count {
        if block.len() == dim {
            block.clear();
        }
        let mut v: Vec<f64> = (0..dim).map(|_| gauss(rng)).collect();
        for _ in 0..2 {
            for k in &block {
                let d: f64 = v.iter().zip(k).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(k).for_each(|(a, b)| *a -= d * b);
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= n);
        block.push(v.clone());
        keys.push(v);
    }
    keys
}

/// The golden fixture set as `(relative path, bytes)`, fully determined by
/// fixed seeds. `examples/make_fixtures.rs` writes it to `tests/fixtures/`.
pub fn fixture_set() -> Vec<(String, Vec<u8>)> {
    use crate::formats::{pfm::write_pfm, pgm::write_pgm, ply::write_ply, tum::write_trajectory_tum};
    use rand::SeedableRng;

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    let stream = circle_trajectory(12, 30.0, 1.0, 2.0);
    files.push(("stream.tum".into(), write_trajectory_tum(&stream).into_bytes()));
    let mut list = String::new();
    for i in 0..12 {
        let detail = (i % 4) as f64 / 3.0;
        let img = textured_frame(&mut rng, 32, 24, detail);
        let name = format!("frames/f{i:02}.pgm");
        list.push_str(&name);
        list.push('\n');
        files.push((name, write_pgm(&img, 255)));
    }
    files.push(("frames.txt".into(), list.into_bytes()));

    let clean = circle_trajectory(200, 30.0, 1.0, 20.0);
    let noisy = jitter_translations(&clean, 0.05, &mut rng);
    files.push(("clean.tum".into(), write_trajectory_tum(&clean).into_bytes()));
    files.push(("noisy.tum".into(), write_trajectory_tum(&noisy).into_bytes()));

    // Depths on a grid of 10/4096 so both the map and its 1.3x copy are exact
    // in f32 and every per-pixel ratio is the same double.
    let ticks: Vec<f64> = box_scene_depth(48, 36, 4.0).depths().iter().map(|d| (d * 409.6).round()).collect();
    let gt = DepthMap::from_depths(48, 36, ticks.iter().map(|n| n * 10.0 / 4096.0).collect()).expect("matching size");
    let scaled =
        DepthMap::from_depths(48, 36, ticks.iter().map(|n| n * 13.0 / 4096.0).collect()).expect("matching size");
    let noisy_depth_map = noisy_depth(&gt, 0.02, &mut rng);
    let step = DepthMap::from_depths(16, 8, (0..128).map(|i| if i % 16 < 8 { 1.0 } else { 10.0 }).collect())
        .expect("matching size");
    files.push(("depth_gt.pfm".into(), write_pfm(&gt)));
    files.push(("depth_scaled.pfm".into(), write_pfm(&scaled)));
    files.push(("depth_noisy.pfm".into(), write_pfm(&noisy_depth_map)));
    files.push(("step.pfm".into(), write_pfm(&step)));

    let cloud = cube_surface_cloud(&mut rng, 400, Vec3::new(0.0, 0.0, 3.0));
    let jittered: Vec<Vec3> =
        cloud.points.iter().map(|p| *p + Vec3::new(gauss(&mut rng), gauss(&mut rng), gauss(&mut rng)) * 0.01).collect();
    let conf: Vec<f64> = (0..jittered.len()).map(|_| rng.random_range(1.0..3.0)).collect();
    let pred = PointSet::with_confidences(jittered, conf).expect("valid cloud");
    files.push(("cloud_gt.ply".into(), write_ply(&cloud).into_bytes()));
    files.push(("cloud_pred.ply".into(), write_ply(&pred).into_bytes()));

    files.push((
        "stabilize.conf".into(),
        b"# One Euro settings for the noisy circle\nfmin = 1.0\nbeta-gain = 0.007\n".to_vec(),
    ));
    files
}
