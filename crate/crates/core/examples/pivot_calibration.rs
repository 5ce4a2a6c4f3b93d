//! Recover a tool-tip offset from poses pivoting about a fixed point.

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sononav::geometry::{pivot_calibrate, Pose};

fn main() -> anyhow::Result<()> {
    let tip = Vector3::new(2.0, -1.0, 180.0);
    let pivot = Vector3::new(40.0, 10.0, -5.0);
    let noise = Normal::new(0.0, 0.1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);

    let poses: Vec<Pose> = (0..500)
        .map(|_| {
            let r = UnitQuaternion::from_euler_angles(
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-3.1..3.1),
            );
            let jitter = Vector3::from_fn(|_, _| noise.sample(&mut rng));
            Pose::new(pivot - r * tip + jitter, r)
        })
        .collect();

    let cal = pivot_calibrate(&poses)?;
    println!(
        "tip offset  {:.3?} (true {:?})",
        cal.tip_offset.as_slice(),
        tip.as_slice()
    );
    println!("pivot point {:.3?}", cal.pivot_point.as_slice());
    println!(
        "tip error   {:.4} mm, rms residual {:.4} mm, cond {:.1}",
        (cal.tip_offset - tip).norm(),
        cal.rms_residual,
        cal.condition_number
    );
    Ok(())
}
