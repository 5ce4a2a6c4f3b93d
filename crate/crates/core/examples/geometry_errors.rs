//! Decompose a tool pose into the 4-DOF alignment error against a plan.

use nalgebra::{UnitQuaternion, Vector3};
use sononav::geometry::{error_vector, make_entry_plane, AnatomicalFrame, PlannedTrajectory, Pose};

fn main() -> anyhow::Result<()> {
    let frame = AnatomicalFrame::identity();
    let target = PlannedTrajectory::new(Vector3::new(-22.0, 0.0, 35.0), Vector3::new(0.25, 1.0, -0.15))?;
    let plane = make_entry_plane(&target, &frame)?;

    // Tip 1.5 mm off along the plane's x direction, tool tilted 3° about Z_a.
    let tip = target.entry_point + plane.in_plane_x * 1.5;
    let tilt = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 3f64.to_radians());
    let tool = Pose::from_tip_and_axis(tip, tilt * target.direction);

    let e = error_vector(&tool, &target, &plane, &frame)?;
    println!("entry:   e_x {:+.3} mm  e_y {:+.3} mm  d {:.3} mm", e.e_x, e.e_y, e.d);
    println!(
        "angular: e_phi {:+.3}°  e_delta {:+.3}°  theta {:.3}°",
        e.e_phi, e.e_delta, e.theta
    );
    Ok(())
}
