mod common;

use common::*;
use nalgebra::{UnitQuaternion, Vector3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sononav::geometry::{
    angular_error, entry_error, make_entry_plane, register_landmarks, AnatomicalFrame, PlannedTrajectory,
    RigidTransform,
};
use sononav::{error_vector, Pose};

fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-r..r).prop_map(Vector3::from)
}

/// Frame, target and tool drawn from one seed, with the target tilted
/// at most 60° from Y_a so both projections are well defined.
fn errors(tool: &Pose, target: &PlannedTrajectory, frame: &AnatomicalFrame) -> sononav::ErrorVector {
    let plane = make_entry_plane(target, frame).unwrap();
    error_vector(tool, target, &plane, frame).unwrap()
}

fn scene(seed: u64) -> (AnatomicalFrame, PlannedTrajectory, Vector3<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rot = random_rotation(&mut rng);
    let frame = AnatomicalFrame::from_rotation(Vector3::new(10.0, -5.0, 30.0), &rot);
    let tilt = UnitQuaternion::from_euler_angles(0.5, 0.0, -0.4);
    let dir = rot * (tilt * Vector3::y());
    let target = PlannedTrajectory::new(frame.origin() + rot * Vector3::new(5.0, 0.0, 20.0), dir).unwrap();
    (frame, target, random_unit(&mut rng))
}

proptest! {
    #[test]
    fn entry_error_matches_oracle(seed in any::<u64>(), offset in vec3(25.0)) {
        let (frame, target, _) = scene(seed);
        let plane = make_entry_plane(&target, &frame).unwrap();
        let tool = Pose::from_tip_and_axis(target.entry_point + offset, target.direction);
        let (ex, ey, d) = entry_error(&tool, &plane);
        let (ox, oy, od) = oracle_entry_error(tool.position, target.entry_point, target.direction, frame.x_axis());
        prop_assert!((ex - ox).abs() < 1e-9 && (ey - oy).abs() < 1e-9 && (d - od).abs() < 1e-9);
    }

    #[test]
    fn depth_along_trajectory_is_ignored(seed in any::<u64>(), offset in vec3(10.0), depth in -50.0f64..50.0) {
        let (frame, target, _) = scene(seed);
        let plane = make_entry_plane(&target, &frame).unwrap();
        let shallow = Pose::from_tip_and_axis(target.entry_point + offset, target.direction);
        let deep = Pose::from_tip_and_axis(target.entry_point + offset + target.direction * depth, target.direction);
        let (a, b) = (entry_error(&shallow, &plane), entry_error(&deep, &plane));
        prop_assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
    }

    #[test]
    fn angular_error_matches_oracle(seed in any::<u64>(), tilt in vec3(0.6)) {
        let (frame, target, _) = scene(seed);
        let axis = UnitQuaternion::from_scaled_axis(tilt) * target.direction;
        let tool = Pose::from_tip_and_axis(target.entry_point, axis);
        let (phi, delta, theta) = angular_error(&tool, &target, &frame).unwrap();
        let (ophi, odelta, otheta) = oracle_angular_error(axis, target.direction, frame.x_axis(), frame.y_axis(), frame.z_axis());
        prop_assert!((phi - ophi).abs() < 1e-8, "phi {} vs {}", phi, ophi);
        prop_assert!((delta - odelta).abs() < 1e-8, "delta {} vs {}", delta, odelta);
        prop_assert!((theta - otheta).abs() < 1e-8);
        prop_assert!((0.0..=180.0).contains(&theta));
    }

    #[test]
    fn errors_are_invariant_under_rigid_motion(seed in any::<u64>(), offset in vec3(15.0), tilt in vec3(0.5), shift in vec3(300.0)) {
        let (frame, target, _) = scene(seed);
        let tool = Pose::from_tip_and_axis(target.entry_point + offset, UnitQuaternion::from_scaled_axis(tilt) * target.direction);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
        let t = RigidTransform::new(random_rotation(&mut rng), shift);
        let a = errors(&tool, &target, &frame);
        let b = errors(&tool.transformed(&t), &target.transformed(&t), &frame.transformed(&t));
        for (x, y) in [(a.e_x, b.e_x), (a.e_y, b.e_y), (a.e_phi, b.e_phi), (a.e_delta, b.e_delta), (a.theta, b.theta), (a.d, b.d)] {
            prop_assert!((x - y).abs() < 1e-7, "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn perfect_alignment_is_zero(seed in any::<u64>(), depth in -40.0f64..40.0) {
        let (frame, target, _) = scene(seed);
        let tool = Pose::from_tip_and_axis(target.entry_point + target.direction * depth, target.direction);
        let e = errors(&tool, &target, &frame);
        prop_assert!(e.d < 1e-9 && e.theta < 1e-6 && e.e_phi.abs() < 1e-6 && e.e_delta.abs() < 1e-6, "{:?}", e);
    }
}

#[test]
fn composed_rotation_splits_into_plane_angles() {
    let frame = AnatomicalFrame::identity();
    let target = PlannedTrajectory::new(Vector3::zeros(), Vector3::y()).unwrap();
    let rot = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), 4f64.to_radians())
        * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 3f64.to_radians());
    let axis = rot * Vector3::y();
    let (phi, delta, theta) = angular_error(&Pose::from_tip_and_axis(Vector3::zeros(), axis), &target, &frame).unwrap();
    let brute = axis.dot(&Vector3::y()).clamp(-1.0, 1.0).acos().to_degrees();
    assert!((theta - brute).abs() < 1e-9);
    assert!((phi.abs() - 3.0).abs() < 0.05, "phi {phi}");
    assert!((delta.abs() - 4.0).abs() < 0.05, "delta {delta}");
}

proptest! {
    #[test]
    fn theta_is_the_geodesic_angle(a in vec3(1.0), b in vec3(1.0)) {
        prop_assume!(a.norm() > 0.1 && b.norm() > 0.1);
        let (a, b) = (a.normalize(), b.normalize());
        let frame = AnatomicalFrame::identity();
        let target = PlannedTrajectory::new(Vector3::zeros(), b).unwrap();
        if let Ok((_, _, theta)) = angular_error(&Pose::from_tip_and_axis(Vector3::zeros(), a), &target, &frame) {
            // chord-length form, independent of both acos and atan2
            let chord = 2.0 * ((a - b).norm() / 2.0).asin().to_degrees();
            prop_assert!((theta - chord).abs() < 1e-9, "{} vs {}", theta, chord);
        }
    }

    #[test]
    fn registration_round_trip_is_identity(seed in any::<u64>(), n in 3usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = RigidTransform::new(random_rotation(&mut rng), random_unit(&mut rng) * 200.0);
        let p: Vec<Vector3<f64>> = (0..n).map(|_| random_unit(&mut rng) * 80.0).collect();
        let tp: Vec<Vector3<f64>> = p.iter().map(|x| t.apply_point(x)).collect();
        let forward = register_landmarks(&p, &tp).unwrap().transform;
        let backward = register_landmarks(&tp, &p).unwrap().transform;
        let (rot, trans) = forward.compose(&backward).magnitude();
        prop_assert!(rot < 1e-9 && trans < 1e-9, "{} rad, {} mm", rot, trans);
    }
}
