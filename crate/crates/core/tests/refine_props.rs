mod common;

use common::gauss;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steadystream_core::refine::{
    bilateral_depth, depth_to_points, refine_cloud, BilateralConfig, DepthMap, Intrinsics, RangeSigma,
};

fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize, holes: f64) -> DepthMap {
    let depths =
        (0..w * h).map(|_| if rng.random::<f64>() < holes { 0.0 } else { rng.random_range(0.5..8.0) }).collect();
    DepthMap::from_depths(w, h, depths).unwrap()
}

/// Normalized Gaussian blur over valid pixels of the truncated window.
fn gaussian_blur(map: &DepthMap, r: usize, sigma: f64) -> Vec<f64> {
    let (w, h) = (map.width() as isize, map.height() as isize);
    let mut out = map.depths().to_vec();
    for y in 0..h {
        for x in 0..w {
            if !map.is_valid(x as usize, y as usize) {
                continue;
            }
            let (mut num, mut den) = (0.0, 0.0);
            for dy in -(r as isize)..=r as isize {
                for dx in -(r as isize)..=r as isize {
                    let (qx, qy) = (x + dx, y + dy);
                    if qx < 0 || qy < 0 || qx >= w || qy >= h || !map.is_valid(qx as usize, qy as usize) {
                        continue;
                    }
                    let k = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                    num += k * map.depth(qx as usize, qy as usize);
                    den += k;
                }
            }
            out[(y * w + x) as usize] = num / den;
        }
    }
    out
}

#[test]
fn huge_range_sigma_is_a_gaussian_blur() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for (window, sigma_s) in [(1, 0.7), (2, 1.0), (3, 2.5)] {
        let map = random_map(&mut rng, 17, 11, 0.15);
        let cfg = BilateralConfig { window, sigma_s, sigma_r: RangeSigma::Fixed(1e12), ..Default::default() };
        let got = bilateral_depth(&map, &cfg).unwrap();
        let want = gaussian_blur(&map, window, sigma_s);
        for (a, b) in got.depths().iter().zip(&want) {
            assert!((a - b).abs() < 1e-9 || (a.is_nan() && b.is_nan()));
        }
    }
}

#[test]
fn output_within_window_range_and_mask_kept() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..20 {
        let map = random_map(&mut rng, 13, 9, 0.2);
        if map.valid_count() == 0 {
            continue;
        }
        let cfg = BilateralConfig { sigma_r: RangeSigma::Fixed(rng.random_range(0.1..5.0)), ..Default::default() };
        let out = bilateral_depth(&map, &cfg).unwrap();
        assert_eq!(out.valid_mask(), map.valid_mask());
        for y in 0..9usize {
            for x in 0..13usize {
                if !map.is_valid(x, y) {
                    assert_eq!(out.depth(x, y).to_bits(), map.depth(x, y).to_bits());
                    continue;
                }
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for qy in y.saturating_sub(2)..=(y + 2).min(8) {
                    for qx in x.saturating_sub(2)..=(x + 2).min(12) {
                        if map.is_valid(qx, qy) {
                            lo = lo.min(map.depth(qx, qy));
                            hi = hi.max(map.depth(qx, qy));
                        }
                    }
                }
                let d = out.depth(x, y);
                assert!(d >= lo - 1e-12 && d <= hi + 1e-12);
            }
        }
    }
}

#[test]
fn offset_equivariance_with_fixed_sigma() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..20 {
        let map = random_map(&mut rng, 10, 10, 0.1);
        let k = rng.random_range(0.1..10.0);
        let cfg = BilateralConfig { sigma_r: RangeSigma::Fixed(0.8), ..Default::default() };
        let a = bilateral_depth(&map.map_valid(|d| d + k).unwrap(), &cfg).unwrap();
        let b = bilateral_depth(&map, &cfg).unwrap().map_valid(|d| d + k).unwrap();
        for (x, y) in a.depths().iter().zip(b.depths()) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn noisy_plane_gets_flatter() {
    let k = Intrinsics::new(40.0, 40.0, 16.0, 12.0).unwrap();
    let mut better = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + seed);
        let map = DepthMap::from_depths(32, 24, (0..32 * 24).map(|_| 5.0 + 0.02 * gauss(&mut rng)).collect()).unwrap();
        let rmse = |pts: &[steadystream_core::Vec3]| {
            (pts.iter().map(|p| (p.z - 5.0).powi(2)).sum::<f64>() / pts.len() as f64).sqrt()
        };
        let before = rmse(&depth_to_points(&map, &k).points);
        let after = rmse(&refine_cloud(&map, &k, &BilateralConfig::default()).unwrap().points);
        if after < before {
            better += 1;
        }
    }
    assert!(better >= 95, "{better}/100");
}

#[test]
fn projection_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    let k = Intrinsics::new(525.0, 520.0, 7.3, 4.9).unwrap();
    let map = random_map(&mut rng, 15, 10, 0.3);
    let pts = depth_to_points(&map, &k).points;
    let mut it = pts.iter();
    for y in 0..10 {
        for x in 0..15 {
            if map.is_valid(x, y) {
                let (u, v, d) = k.project(*it.next().unwrap());
                assert!((u - x as f64).abs() < 1e-9 && (v - y as f64).abs() < 1e-9);
                assert!((d - map.depth(x, y)).abs() < 1e-9);
            }
        }
    }
    assert!(it.next().is_none());
}

#[test]
fn step_edge_cloud_is_untouched() {
    let k = Intrinsics::new(10.0, 10.0, 8.0, 4.0).unwrap();
    let map = DepthMap::from_depths(16, 8, (0..128).map(|i| if i % 16 < 8 { 1.0 } else { 10.0 }).collect()).unwrap();
    let cfg = BilateralConfig { sigma_r: RangeSigma::Fixed(0.1), ..Default::default() };
    let a = depth_to_points(&map, &k).points;
    let b = refine_cloud(&map, &k, &cfg).unwrap().points;
    for (p, q) in a.iter().zip(&b) {
        assert!((*p - *q).norm() < 1e-6);
    }
}
