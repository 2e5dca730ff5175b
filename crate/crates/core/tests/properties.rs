use proptest::prelude::*;
use sdfield::camera::io::{format_pose, parse_pose};
use sdfield::camera::{rotation_from_6d, six_d_from_rotation, CameraPose, Rotation6D};
use sdfield::extraction::marching_cubes;
use sdfield::geometry::io::{read_grid, read_points, write_grid, write_points};
use sdfield::geometry::shapes::{icosphere, torus};
use sdfield::geometry::{signed_distance, unsigned_distance, Aabb, PointSample, SdfGrid};
use sdfield::metrics::{chamfer, emd_with, hungarian, sample_surface_points, EmdOptions};
use sdfield::regressor::io::{read_loss_log, write_loss_log};
use sdfield::{Mat3, Vec3};

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn cloud(max: usize) -> impl Strategy<Value = Vec<Vec3>> {
    prop::collection::vec(vec3(1.0), 1..max)
}

fn frame() -> impl Strategy<Value = Rotation6D> {
    (vec3(3.0), vec3(3.0))
        .prop_filter("independent columns", |(a, b)| a.cross(b).norm() > 1e-2 * a.norm() * b.norm() && a.norm() > 1e-3)
        .prop_map(|(a, b)| Rotation6D::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn six_d_gives_proper_rotations(b in frame()) {
        let r = rotation_from_6d(&b).unwrap();
        prop_assert!((r * r.transpose() - Mat3::identity()).abs().max() < 1e-9);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-9);
        let back = rotation_from_6d(&six_d_from_rotation(&r).unwrap()).unwrap();
        prop_assert!((back - r).abs().max() < 1e-9);
    }

    #[test]
    fn six_d_ignores_scale_and_shear(b in frame(), alpha in 0.01f64..50.0, beta in -5.0f64..5.0) {
        let r = rotation_from_6d(&b).unwrap();
        let scaled = rotation_from_6d(&Rotation6D::new(b.bx * alpha, b.by * alpha)).unwrap();
        let sheared = rotation_from_6d(&Rotation6D::new(b.bx, b.by + b.bx * beta)).unwrap();
        prop_assert!((scaled - r).abs().max() < 1e-12);
        prop_assert!((sheared - r).abs().max() < 1e-12);
    }

    #[test]
    fn pose_text_round_trip(b in frame(), t in vec3(5.0)) {
        let pose = CameraPose::from_6d(&b, t).unwrap();
        let back = parse_pose(&format_pose(&pose)).unwrap();
        // The file stores the 6D frame; loading re-orthonormalizes it.
        prop_assert!((back.rotation() - pose.rotation()).abs().max() < 1e-15);
        prop_assert_eq!(back.translation(), pose.translation());
    }

    #[test]
    fn signed_distance_is_one_lipschitz(p in vec3(0.8), q in vec3(0.8)) {
        let mesh = torus(0.3, 0.1, 24, 12);
        let gap = (signed_distance(&mesh, &p) - signed_distance(&mesh, &q)).abs();
        prop_assert!(gap <= (p - q).norm() + 1e-12);
    }

    #[test]
    fn chamfer_is_symmetric_and_zero_on_self(a in cloud(40), b in cloud(40)) {
        let ab = chamfer(&a, &b).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - chamfer(&b, &a).unwrap()).abs() <= 1e-12 * ab.max(1.0));
        prop_assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn emd_is_symmetric_and_above_its_bound(pair in (1usize..30).prop_flat_map(|n| (prop::collection::vec(vec3(1.0), n), prop::collection::vec(vec3(1.0), n)))) {
        let (a, b) = pair;
        let opts = EmdOptions::default();
        let ab = emd_with(&a, &b, &opts).unwrap();
        let ba = emd_with(&b, &a, &opts).unwrap();
        prop_assert!(ab.exact);
        prop_assert!((ab.value - ba.value).abs() < 1e-9);
        prop_assert!(ab.value + 1e-12 >= ab.lower_bound);
    }

    #[test]
    fn hungarian_returns_a_permutation(n in 1usize..12, seed in any::<u64>()) {
        let cost: Vec<f64> = (0..n * n).map(|i| ((i as u64).wrapping_mul(seed | 1) % 1000) as f64).collect();
        let mut assignment = hungarian(n, &cost);
        assignment.sort_unstable();
        prop_assert_eq!(assignment, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn surface_samples_lie_on_the_mesh(seed in any::<u64>()) {
        let mesh = icosphere(Vec3::zeros(), 0.4, 1);
        for p in sample_surface_points(&mesh, 64, seed).unwrap() {
            prop_assert!(unsigned_distance(&mesh, &p) < 1e-12);
        }
    }

    #[test]
    fn grid_file_round_trip(vals in prop::collection::vec(-1.0e3f32..1.0e3, 27), lo in vec3(1.0), ext in 0.1f64..3.0) {
        let bbox = Aabb::new(lo, lo + Vec3::repeat(ext));
        let grid = SdfGrid::new([3, 3, 3], bbox, vals).unwrap();
        let mut bytes = Vec::new();
        write_grid(&mut bytes, &grid).unwrap();
        prop_assert_eq!(read_grid(bytes.as_slice()).unwrap(), grid);
    }

    #[test]
    fn points_and_loss_log_round_trip(vals in prop::collection::vec((vec3(1.0), -1.0f64..1.0), 0..50)) {
        let samples: Vec<PointSample> = vals.iter().map(|&(p, s)| PointSample { p, s }).collect();
        let mut bytes = Vec::new();
        write_points(&mut bytes, &samples).unwrap();
        prop_assert_eq!(read_points(bytes.as_slice()).unwrap(), samples);

        let log: Vec<f64> = vals.iter().map(|v| v.1 * 1e3).collect();
        let mut bytes = Vec::new();
        write_loss_log(&mut bytes, &log).unwrap();
        let back = read_loss_log(bytes.as_slice()).unwrap();
        prop_assert!(back.iter().zip(&log).all(|(a, b)| a.to_bits() == b.to_bits()) && back.len() == log.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn marching_cubes_output_is_closed(vals in prop::collection::vec(-1.0f32..1.0, 6 * 6 * 6)) {
        // A positive shell keeps every component away from the grid boundary.
        let mut vals = vals;
        for k in 0..6 {
            for j in 0..6 {
                for i in 0..6 {
                    if [i, j, k].iter().any(|&c| c == 0 || c == 5) {
                        vals[i + 6 * (j + 6 * k)] = 1.0;
                    }
                }
            }
        }
        let grid = SdfGrid::new([6, 6, 6], Aabb::cube(1.0), vals).unwrap();
        let mesh = marching_cubes(&grid, 0.0);
        prop_assert!(mesh.is_watertight());
        prop_assert!(mesh.signed_volume() >= -1e-12);
    }
}
