//! Register image-space landmarks to tracker space.

use nalgebra::{Unit, Vector3};
use sononav::geometry::{register_landmarks, RigidTransform};

fn main() -> anyhow::Result<()> {
    let truth = RigidTransform::from_axis_angle(
        &Unit::new_normalize(Vector3::new(1.0, 2.0, 0.5)),
        0.7,
        Vector3::new(120.0, -35.0, 60.0),
    );
    let landmarks = [
        Vector3::new(0.0, 0.0, 0.0),
        Vector3::new(30.0, 0.0, 5.0),
        Vector3::new(0.0, 45.0, -3.0),
        Vector3::new(12.0, 20.0, 40.0),
        Vector3::new(-18.0, 8.0, 22.0),
    ];
    let tracked: Vec<_> = landmarks.iter().map(|p| truth.apply_point(p)).collect();

    let reg = register_landmarks(&landmarks, &tracked)?;
    let (rot_err, trans_err) = reg.transform.compose(&truth.inverse()).magnitude();
    println!("FRE rms {:.2e} mm", reg.fre_rms);
    println!("recovered transform off by {:.2e} rad, {:.2e} mm", rot_err, trans_err);
    Ok(())
}
