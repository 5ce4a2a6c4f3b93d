use nalgebra::{Matrix3, Matrix4, Quaternion, UnitQuaternion, Vector3};

use super::{GeometryError, RigidTransform};

/// Rank tolerance on the source scatter matrix, relative to its largest
/// eigenvalue.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Registration {
    /// Maps source points onto target points.
    pub transform: RigidTransform,
    /// Root-mean-square fiducial registration error, mm.
    pub fre_rms: f64,
}

fn centroid(points: &[Vector3<f64>]) -> Vector3<f64> {
    points.iter().sum::<Vector3<f64>>() / points.len() as f64
}

/// Closed-form rigid registration of corresponding point sets using the
/// unit-quaternion absolute orientation method (no scaling).
pub fn register_landmarks(source: &[Vector3<f64>], target: &[Vector3<f64>]) -> Result<Registration, GeometryError> {
    if source.len() != target.len() {
        return Err(GeometryError::LengthMismatch(source.len(), target.len()));
    }
    if source.len() < 3 {
        return Err(GeometryError::TooFewPoints(source.len()));
    }
    if source.iter().chain(target).any(|p| p.iter().any(|c| !c.is_finite())) {
        return Err(GeometryError::NonFinite);
    }

    let sc = centroid(source);
    let tc = centroid(target);

    let mut scatter = Matrix3::<f64>::zeros();
    let mut m = Matrix3::<f64>::zeros();
    for (s, t) in source.iter().zip(target) {
        let s = s - sc;
        let t = t - tc;
        scatter += s * s.transpose();
        m += s * t.transpose();
    }

    let mut eig = scatter.symmetric_eigen().eigenvalues.as_slice().to_vec();
    eig.sort_by(|a, b| b.total_cmp(a));
    if eig[0] <= 0.0 || eig[1] <= RANK_TOLERANCE * eig[0] {
        return Err(GeometryError::CollinearDegenerate);
    }

    let (sxx, sxy, sxz) = (m[(0, 0)], m[(0, 1)], m[(0, 2)]);
    let (syx, syy, syz) = (m[(1, 0)], m[(1, 1)], m[(1, 2)]);
    let (szx, szy, szz) = (m[(2, 0)], m[(2, 1)], m[(2, 2)]);
    #[rustfmt::skip]
    let n = Matrix4::new(
        sxx + syy + szz, syz - szy,       szx - sxz,        sxy - syx,
        syz - szy,       sxx - syy - szz, sxy + syx,        szx + sxz,
        szx - sxz,       sxy + syx,       -sxx + syy - szz, syz + szy,
        sxy - syx,       szx + sxz,       syz + szy,        -sxx - syy + szz,
    );
    let eigen = n.symmetric_eigen();
    let best = eigen.eigenvalues.imax();
    let v = eigen.eigenvectors.column(best);
    let rotation = UnitQuaternion::from_quaternion(Quaternion::new(v[0], v[1], v[2], v[3]));
    let transform = RigidTransform::new(rotation, tc - rotation * sc);

    let sum_sq: f64 = source
        .iter()
        .zip(target)
        .map(|(s, t)| (transform.apply_point(s) - t).norm_squared())
        .sum();
    Ok(Registration {
        transform,
        fre_rms: (sum_sq / source.len() as f64).sqrt(),
    })
}
