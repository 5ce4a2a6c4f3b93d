use nalgebra::{DMatrix, DVector, Vector3};

use super::{GeometryError, Pose};

/// Fewest poses accepted by [`pivot_calibrate`].
pub const MIN_PIVOT_SAMPLES: usize = 10;

/// Largest accepted condition number of the stacked pivot system.
pub const MAX_PIVOT_CONDITION: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotCalibration {
    /// Tip offset in the tool frame, mm.
    pub tip_offset: Vector3<f64>,
    /// Fixed pivot point in world coordinates, mm.
    pub pivot_point: Vector3<f64>,
    /// RMS of `|R_i·t + p_i − pivot|` over all poses, mm.
    pub rms_residual: f64,
    pub condition_number: f64,
}

/// Least-squares pivot calibration.
///
/// Solves `R_i·tip + p_i = pivot` for all poses as one stacked `3N × 6`
/// system. The poses must pivot about a fixed point with enough rotation
/// about at least two independent axes; otherwise the system is rejected as
/// ill-conditioned.
pub fn pivot_calibrate(poses: &[Pose]) -> Result<PivotCalibration, GeometryError> {
    if poses.len() < MIN_PIVOT_SAMPLES {
        return Err(GeometryError::TooFewSamples {
            needed: MIN_PIVOT_SAMPLES,
            got: poses.len(),
        });
    }
    for p in poses {
        p.validate()?;
    }

    let rows = 3 * poses.len();
    let mut a = DMatrix::<f64>::zeros(rows, 6);
    let mut b = DVector::<f64>::zeros(rows);
    for (i, pose) in poses.iter().enumerate() {
        let r = pose.orientation.to_rotation_matrix();
        let base = 3 * i;
        a.view_mut((base, 0), (3, 3)).copy_from(r.matrix());
        a.view_mut((base, 3), (3, 3))
            .copy_from(&(-nalgebra::Matrix3::<f64>::identity()));
        b.rows_mut(base, 3).copy_from(&(-pose.position));
    }

    let svd = a.clone().svd(true, true);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_PIVOT_CONDITION {
        return Err(GeometryError::IllConditioned(condition));
    }
    let x = svd
        .solve(&b, 0.0)
        .map_err(|_| GeometryError::IllConditioned(condition))?;

    let tip_offset = Vector3::new(x[0], x[1], x[2]);
    let pivot_point = Vector3::new(x[3], x[4], x[5]);
    let sum_sq: f64 = poses
        .iter()
        .map(|p| (p.orientation * tip_offset + p.position - pivot_point).norm_squared())
        .sum();
    Ok(PivotCalibration {
        tip_offset,
        pivot_point,
        rms_residual: (sum_sq / poses.len() as f64).sqrt(),
        condition_number: condition,
    })
}
