mod common;

use common::{qmul, qpow, unit_quat};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use steadystream_core::geometry::{quat_geodesic_angle, slerp};
use steadystream_core::Quaternion;

fn arb_unit_quat() -> impl Strategy<Value = Quaternion> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("away from zero", |(w, x, y, z)| w * w + x * x + y * y + z * z > 1e-2)
        .prop_map(|(w, x, y, z)| Quaternion::new(w, x, y, z).normalize().unwrap())
}

proptest! {
    #[test]
    fn slerp_stays_on_the_sphere(a in arb_unit_quat(), b in arb_unit_quat(), g in 0.0f64..=1.0) {
        let s = slerp(a, b, g).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn slerp_has_constant_angular_velocity(a in arb_unit_quat(), b in arb_unit_quat(), g in 0.0f64..=1.0) {
        let theta = quat_geodesic_angle(a, b).unwrap();
        let s = slerp(a, b, g).unwrap();
        prop_assert!((quat_geodesic_angle(a, s).unwrap() - g * theta).abs() < 1e-9);
    }

    #[test]
    fn slerp_ignores_the_sign_of_b(a in arb_unit_quat(), b in arb_unit_quat(), g in 0.0f64..=1.0) {
        let s = slerp(a, b, g).unwrap();
        let t = slerp(a, -b, g).unwrap();
        prop_assert!((s - t).norm() < 1e-9);
    }
}

#[test]
fn geodesic_angle_is_a_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let (a, b, c) = (unit_quat(&mut rng), unit_quat(&mut rng), unit_quat(&mut rng));
        let ab = quat_geodesic_angle(a, b).unwrap();
        assert!((ab - quat_geodesic_angle(b, a).unwrap()).abs() < 1e-12);
        let bc = quat_geodesic_angle(b, c).unwrap();
        let ac = quat_geodesic_angle(a, c).unwrap();
        assert!(ac <= ab + bc + 1e-9);
    }
}

#[test]
fn slerp_matches_quaternion_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..1000 {
        let (a, mut b) = (unit_quat(&mut rng), unit_quat(&mut rng));
        if a.dot(b) < 0.0 {
            b = -b;
        }
        let (aa, ba) = (a.to_array(), b.to_array());
        let a_inv = [aa[0], -aa[1], -aa[2], -aa[3]];
        for g in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let want = qmul(aa, qpow(qmul(a_inv, ba), g));
            let got = slerp(a, b, g).unwrap().to_array();
            for i in 0..4 {
                assert!((got[i] - want[i]).abs() < 1e-9, "{got:?} vs {want:?}");
            }
        }
    }
}
