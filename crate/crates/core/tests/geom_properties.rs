//! Property tests for the geometry kernel.

mod common;

use common::Lcg;
use confrag::geom3d::{dihedral, kabsch, rmsd, rotate_about_bond, RigidTransform};
use confrag::molgraph::Vec3;
use proptest::prelude::*;
use std::f64::consts::PI;

fn random_rotation(rng: &mut Lcg) -> nalgebra::Matrix3<f64> {
    // Shoemake quaternion from three uniforms.
    let (u1, u2, u3) = (rng.unit_f64(), rng.unit_f64(), rng.unit_f64());
    let tau = std::f64::consts::TAU;
    let (x, y, z, w) = (
        (1.0 - u1).sqrt() * (tau * u2).sin(),
        (1.0 - u1).sqrt() * (tau * u2).cos(),
        u1.sqrt() * (tau * u3).sin(),
        u1.sqrt() * (tau * u3).cos(),
    );
    nalgebra::Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - z * w),
        2.0 * (x * z + y * w),
        2.0 * (x * y + z * w),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - x * w),
        2.0 * (x * z - y * w),
        2.0 * (y * z + x * w),
        1.0 - 2.0 * (x * x + y * y),
    )
}

fn random_points(rng: &mut Lcg, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|_| {
            Vec3::new(
                rng.unit_f64() * 8.0 - 4.0,
                rng.unit_f64() * 8.0 - 4.0,
                rng.unit_f64() * 8.0 - 4.0,
            )
        })
        .collect()
}

#[test]
fn kabsch_recovers_1000_random_transforms() {
    let mut rng = Lcg(42);
    let mut recovered = 0;
    while recovered < 1000 {
        let n = 3 + rng.below(8);
        let points = random_points(&mut rng, n);
        // Skip (rare) nearly-collinear draws.
        let rotation = random_rotation(&mut rng);
        let translation = Vec3::new(
            rng.unit_f64() * 10.0 - 5.0,
            rng.unit_f64() * 10.0 - 5.0,
            rng.unit_f64() * 10.0 - 5.0,
        );
        let moved: Vec<Vec3> = points.iter().map(|&p| rotation * p + translation).collect();
        let Ok((transform, residual)) = kabsch(&points, &moved) else {
            continue;
        };
        assert!(residual <= 1e-9, "aligned rmsd {residual}");
        let rot_err = (transform.rotation - rotation).norm();
        assert!(rot_err <= 1e-9, "rotation error {rot_err}");
        let t_err = (transform.translation - translation).norm();
        assert!(t_err <= 1e-8, "translation error {t_err}");
        recovered += 1;
    }
}

#[test]
fn kabsch_left_invariance() {
    // Pre-transforming P by a rigid T leaves the aligned RMSD unchanged.
    let mut rng = Lcg(7);
    for _ in 0..200 {
        let p = random_points(&mut rng, 6);
        let q = random_points(&mut rng, 6);
        let rotation = random_rotation(&mut rng);
        let Ok((_, base)) = kabsch(&p, &q) else {
            continue;
        };
        let shift = Vec3::new(rng.unit_f64(), rng.unit_f64(), rng.unit_f64()) * 4.0;
        let moved: Vec<Vec3> = p.iter().map(|&x| rotation * x + shift).collect();
        let Ok((_, after)) = kabsch(&moved, &q) else {
            continue;
        };
        assert!(
            (base - after).abs() <= 1e-9,
            "rmsd changed under rigid pre-transform: {base} vs {after}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_preserves_moving_set_distances(angle in -PI..PI, seed in 0u64..1000) {
        let mut rng = Lcg(seed);
        let coords = random_points(&mut rng, 8);
        let moving = [3usize, 4, 5, 6, 7];
        let rotated = rotate_about_bond(&coords, &moving, (0, 1), angle).unwrap();
        for &i in &moving {
            for &j in &moving {
                let before = (coords[i] - coords[j]).norm();
                let after = (rotated[i] - rotated[j]).norm();
                prop_assert!((before - after).abs() <= 1e-9);
            }
        }
        // Fixed atoms stay put.
        for i in [0usize, 1, 2] {
            prop_assert!((coords[i] - rotated[i]).norm() <= 1e-12);
        }
    }

    #[test]
    fn rotation_shifts_dihedral_by_angle(angle in -PI..PI) {
        let coords = vec![
            Vec3::new(-0.7, 1.1, 0.2),
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.5, 0.0, 0.0),
            Vec3::new(2.1, 0.9, -0.4),
        ];
        let before = dihedral(coords[0], coords[1], coords[2], coords[3]).unwrap();
        let rotated = rotate_about_bond(&coords, &[3], (1, 2), angle).unwrap();
        let after = dihedral(rotated[0], rotated[1], rotated[2], rotated[3]).unwrap();
        let delta = (after - before - angle).rem_euclid(2.0 * PI);
        prop_assert!(delta <= 1e-9 || (2.0 * PI - delta) <= 1e-9, "delta {delta}");
    }

    #[test]
    fn superposed_rmsd_never_exceeds_raw(seed in 0u64..500) {
        let mut rng = Lcg(seed);
        let p = random_points(&mut rng, 5);
        let q = random_points(&mut rng, 5);
        let raw = rmsd(&p, &q, false).unwrap();
        let aligned = rmsd(&p, &q, true).unwrap();
        prop_assert!(aligned <= raw + 1e-9);
    }
}

#[test]
fn transform_validation() {
    let bad = nalgebra::Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
    assert!(RigidTransform::new(bad, Vec3::zeros()).is_err());
    let good = random_rotation(&mut Lcg(9));
    assert!(RigidTransform::new(good, Vec3::zeros()).is_ok());
}
