//! Pose error decomposition between a tracked tool and a planned trajectory.
//!
//! Everything here is expressed in world coordinates (millimeters) with
//! orientations as unit quaternions. The error vector has two translational
//! components measured on the entry plane and two angular components measured
//! as projected-axis angles on the axial and sagittal planes of the anatomical
//! frame.

mod calibration;
mod registration;

pub use calibration::{pivot_calibrate, PivotCalibration, MIN_PIVOT_SAMPLES};
pub use registration::{register_landmarks, Registration};

use nalgebra::{Isometry3, Translation3, Unit, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when validating unit vectors, quaternions and triads.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Angle (radians) under which the target direction counts as parallel to the
/// mediolateral axis when building the entry plane basis.
pub const PARALLEL_TOLERANCE_RAD: f64 = 1e-6;

/// Minimum norm of a projected axis before the projected angle is undefined.
pub const PROJECTION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("quaternion norm {0} is not 1 within tolerance")]
    NonUnitQuaternion(f64),
    #[error("vector norm {0} is not 1 within tolerance")]
    NonUnitVector(f64),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("axes do not form a right-handed orthonormal triad")]
    NotOrthonormal,
    #[error("{axis} projects to a vector of norm {norm:e} on the {plane} plane")]
    ProjectionDegenerate {
        axis: &'static str,
        plane: &'static str,
        norm: f64,
    },
    #[error("pivot calibration needs at least {needed} poses, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("pivot system is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("point lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("registration needs at least 3 point pairs, got {0}")]
    TooFewPoints(usize),
    #[error("source points are collinear or coincident")]
    CollinearDegenerate,
}

fn check_finite(v: &Vector3<f64>) -> Result<(), GeometryError> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::NonFinite)
    }
}

fn check_unit(v: &Vector3<f64>) -> Result<(), GeometryError> {
    check_finite(v)?;
    let n = v.norm();
    if (n - 1.0).abs() <= UNIT_TOLERANCE {
        Ok(())
    } else {
        Err(GeometryError::NonUnitVector(n))
    }
}

/// Position and orientation of the tracked tool.
///
/// `orientation` rotates tool-frame vectors into world coordinates; the
/// tool's pointing axis is the tool-frame `+Z` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseRepr", into = "PoseRepr")]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

#[derive(Serialize, Deserialize)]
struct PoseRepr {
    position: [f64; 3],
    /// `[w, x, y, z]`
    orientation: [f64; 4],
}

impl From<Pose> for PoseRepr {
    fn from(p: Pose) -> Self {
        let q = p.orientation.quaternion();
        PoseRepr {
            position: [p.position.x, p.position.y, p.position.z],
            orientation: [q.w, q.i, q.j, q.k],
        }
    }
}

impl TryFrom<PoseRepr> for Pose {
    type Error = GeometryError;

    fn try_from(r: PoseRepr) -> Result<Self, Self::Error> {
        let [w, x, y, z] = r.orientation;
        let q = nalgebra::Quaternion::new(w, x, y, z);
        let n = q.norm();
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(GeometryError::NonUnitQuaternion(n));
        }
        let position = Vector3::from(r.position);
        check_finite(&position)?;
        // Stored coefficients are kept bit-for-bit so logs round-trip exactly.
        Ok(Pose {
            position,
            orientation: UnitQuaternion::new_unchecked(q),
        })
    }
}

impl Pose {
    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self { position, orientation }
    }

    /// Pose whose tip sits at `tip` and whose pointing axis is `axis`
    /// (shortest-arc rotation from tool `+Z`).
    pub fn from_tip_and_axis(tip: Vector3<f64>, axis: Vector3<f64>) -> Self {
        let z = Vector3::z();
        let a = axis.normalize();
        let orientation = UnitQuaternion::rotation_between(&z, &a).unwrap_or_else(|| {
            // antiparallel: any half turn about an axis orthogonal to z
            UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI)
        });
        Self::new(tip, orientation)
    }

    /// Pointing axis in world coordinates.
    pub fn axis(&self) -> Vector3<f64> {
        self.orientation * Vector3::z()
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        check_finite(&self.position)?;
        let n = self.orientation.quaternion().norm();
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(GeometryError::NonUnitQuaternion(n));
        }
        Ok(())
    }

    pub fn transformed(&self, t: &RigidTransform) -> Pose {
        Pose {
            position: t.apply_point(&self.position),
            orientation: t.rotation * self.orientation,
        }
    }
}

/// Planned screw trajectory: entry point on the bone and the unit direction
/// pointing into the bone.
///
/// Deserialization normalizes a direction that is not already unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryRepr")]
pub struct PlannedTrajectory {
    pub entry_point: Vector3<f64>,
    pub direction: Vector3<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryRepr {
    entry_point: Vector3<f64>,
    direction: Vector3<f64>,
}

impl TryFrom<TrajectoryRepr> for PlannedTrajectory {
    type Error = GeometryError;

    fn try_from(r: TrajectoryRepr) -> Result<Self, Self::Error> {
        let t = PlannedTrajectory {
            entry_point: r.entry_point,
            direction: r.direction,
        };
        match t.validate() {
            Ok(()) => Ok(t),
            Err(_) => PlannedTrajectory::new(r.entry_point, r.direction),
        }
    }
}

impl PlannedTrajectory {
    /// Normalizes `direction`.
    pub fn new(entry_point: Vector3<f64>, direction: Vector3<f64>) -> Result<Self, GeometryError> {
        check_finite(&entry_point)?;
        check_finite(&direction)?;
        let n = direction.norm();
        if n == 0.0 {
            return Err(GeometryError::NonUnitVector(0.0));
        }
        Ok(Self {
            entry_point,
            direction: direction / n,
        })
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        check_finite(&self.entry_point)?;
        check_unit(&self.direction)
    }

    pub fn transformed(&self, t: &RigidTransform) -> PlannedTrajectory {
        PlannedTrajectory {
            entry_point: t.apply_point(&self.entry_point),
            direction: t.rotation * self.direction,
        }
    }
}

/// Patient anatomical coordinate system: X mediolateral, Y caudiocranial,
/// Z anteroposterior. Fixed for a whole session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameRepr", into = "FrameRepr")]
pub struct AnatomicalFrame {
    origin: Vector3<f64>,
    x: Vector3<f64>,
    y: Vector3<f64>,
    z: Vector3<f64>,
}

#[derive(Serialize, Deserialize)]
struct FrameRepr {
    origin: [f64; 3],
    x_axis: [f64; 3],
    y_axis: [f64; 3],
    z_axis: [f64; 3],
}

impl From<AnatomicalFrame> for FrameRepr {
    fn from(f: AnatomicalFrame) -> Self {
        FrameRepr {
            origin: f.origin.into(),
            x_axis: f.x.into(),
            y_axis: f.y.into(),
            z_axis: f.z.into(),
        }
    }
}

impl TryFrom<FrameRepr> for AnatomicalFrame {
    type Error = GeometryError;

    fn try_from(r: FrameRepr) -> Result<Self, Self::Error> {
        AnatomicalFrame::new(r.origin.into(), r.x_axis.into(), r.y_axis.into(), r.z_axis.into())
    }
}

impl Default for AnatomicalFrame {
    fn default() -> Self {
        Self::identity()
    }
}

impl AnatomicalFrame {
    pub fn new(origin: Vector3<f64>, x: Vector3<f64>, y: Vector3<f64>, z: Vector3<f64>) -> Result<Self, GeometryError> {
        check_finite(&origin)?;
        for axis in [&x, &y, &z] {
            check_unit(axis)?;
        }
        let orthogonal =
            x.dot(&y).abs() <= UNIT_TOLERANCE && y.dot(&z).abs() <= UNIT_TOLERANCE && z.dot(&x).abs() <= UNIT_TOLERANCE;
        let right_handed = (x.cross(&y) - z).norm() <= UNIT_TOLERANCE;
        if !(orthogonal && right_handed) {
            return Err(GeometryError::NotOrthonormal);
        }
        Ok(Self { origin, x, y, z })
    }

    /// World-aligned frame at the origin.
    pub fn identity() -> Self {
        Self {
            origin: Vector3::zeros(),
            x: Vector3::x(),
            y: Vector3::y(),
            z: Vector3::z(),
        }
    }

    /// Frame whose axes are the columns of `rotation`.
    pub fn from_rotation(origin: Vector3<f64>, rotation: &UnitQuaternion<f64>) -> Self {
        Self {
            origin,
            x: rotation * Vector3::x(),
            y: rotation * Vector3::y(),
            z: rotation * Vector3::z(),
        }
    }

    pub fn origin(&self) -> Vector3<f64> {
        self.origin
    }
    /// Mediolateral axis.
    pub fn x_axis(&self) -> Vector3<f64> {
        self.x
    }
    /// Caudiocranial axis.
    pub fn y_axis(&self) -> Vector3<f64> {
        self.y
    }
    /// Anteroposterior axis.
    pub fn z_axis(&self) -> Vector3<f64> {
        self.z
    }

    pub fn transformed(&self, t: &RigidTransform) -> AnatomicalFrame {
        AnatomicalFrame {
            origin: t.apply_point(&self.origin),
            x: t.rotation * self.x,
            y: t.rotation * self.y,
            z: t.rotation * self.z,
        }
    }
}

/// Plane through the planned entry point, normal to the planned direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryPlane {
    pub center: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub in_plane_x: Vector3<f64>,
    pub in_plane_y: Vector3<f64>,
    /// Set when the direction was parallel to the mediolateral axis and the
    /// caudiocranial axis was projected instead.
    pub fallback_axis: bool,
}

/// Builds the entry plane for `target`.
///
/// `in_plane_x` is the mediolateral axis projected onto the plane; when the
/// target is parallel to it the caudiocranial axis is used and
/// [`EntryPlane::fallback_axis`] is set. `in_plane_y = normal × in_plane_x`.
pub fn make_entry_plane(target: &PlannedTrajectory, frame: &AnatomicalFrame) -> Result<EntryPlane, GeometryError> {
    target.validate()?;
    let n = target.direction;
    let project = |v: Vector3<f64>| v - n * n.dot(&v);

    let parallel = n.cross(&frame.x).norm() < PARALLEL_TOLERANCE_RAD.sin();
    let seed = if parallel { frame.y } else { frame.x };
    let in_plane_x = project(seed).normalize();
    let in_plane_y = n.cross(&in_plane_x);
    Ok(EntryPlane {
        center: target.entry_point,
        normal: n,
        in_plane_x,
        in_plane_y,
        fallback_axis: parallel,
    })
}

/// Tip offset on the entry plane as `(e_x, e_y, d)` in millimeters.
pub fn entry_error(tool: &Pose, plane: &EntryPlane) -> (f64, f64, f64) {
    let offset = tool.position - plane.center;
    let e_x = offset.dot(&plane.in_plane_x);
    let e_y = offset.dot(&plane.in_plane_y);
    (e_x, e_y, e_x.hypot(e_y))
}

/// Signed angle (radians) from `from` to `to` about the normal of a plane
/// spanned by `(u, v)`, both vectors given as 2D coordinates in that basis.
fn signed_planar_angle(from: Vector2<f64>, to: Vector2<f64>) -> f64 {
    let cross = from.x * to.y - from.y * to.x;
    cross.atan2(from.dot(&to))
}

fn project_2d(
    v: &Vector3<f64>,
    u: &Vector3<f64>,
    w: &Vector3<f64>,
    axis: &'static str,
    plane: &'static str,
) -> Result<Vector2<f64>, GeometryError> {
    let p = Vector2::new(v.dot(u), v.dot(w));
    let norm = p.norm();
    if norm < PROJECTION_TOLERANCE {
        return Err(GeometryError::ProjectionDegenerate { axis, plane, norm });
    }
    Ok(p)
}

/// Angular error `(e_phi, e_delta, theta)` in degrees.
///
/// `e_phi` is the signed angle from the target's projection to the tool's
/// projection on the axial plane (right-hand rule about Z_a); `e_delta` is the
/// same on the sagittal plane (about X_a). `theta` is the total angle between
/// the two axes.
pub fn angular_error(
    tool: &Pose,
    target: &PlannedTrajectory,
    frame: &AnatomicalFrame,
) -> Result<(f64, f64, f64), GeometryError> {
    let tool_axis = tool.axis();
    let dir = target.direction;

    let tool_axial = project_2d(&tool_axis, &frame.x, &frame.y, "tool axis", "axial")?;
    let target_axial = project_2d(&dir, &frame.x, &frame.y, "target direction", "axial")?;
    let tool_sagittal = project_2d(&tool_axis, &frame.y, &frame.z, "tool axis", "sagittal")?;
    let target_sagittal = project_2d(&dir, &frame.y, &frame.z, "target direction", "sagittal")?;

    let e_phi = signed_planar_angle(target_axial, tool_axial).to_degrees();
    let e_delta = signed_planar_angle(target_sagittal, tool_sagittal).to_degrees();
    // atan2 form: acos loses ~1e-6 deg near 0 and 180
    let theta = tool_axis.cross(&dir).norm().atan2(tool_axis.dot(&dir)).to_degrees();
    Ok((e_phi, e_delta, theta))
}

/// The full 4-DOF error plus its two composites.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorVector {
    pub e_x: f64,
    pub e_y: f64,
    pub e_phi: f64,
    pub e_delta: f64,
    pub d: f64,
    pub theta: f64,
}

impl ErrorVector {
    /// Builds the vector, deriving `d` from the entry components.
    pub fn new(e_x: f64, e_y: f64, e_phi: f64, e_delta: f64, theta: f64) -> Self {
        Self {
            e_x,
            e_y,
            e_phi,
            e_delta,
            d: e_x.hypot(e_y),
            theta,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.e_x, self.e_y, self.e_phi, self.e_delta, self.d, self.theta]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Computes entry and angular error in one pass.
pub fn error_vector(
    tool: &Pose,
    target: &PlannedTrajectory,
    plane: &EntryPlane,
    frame: &AnatomicalFrame,
) -> Result<ErrorVector, GeometryError> {
    let (e_x, e_y, d) = entry_error(tool, plane);
    let (e_phi, e_delta, theta) = angular_error(tool, target, frame)?;
    Ok(ErrorVector {
        e_x,
        e_y,
        e_phi,
        e_delta,
        d,
        theta,
    })
}

/// Rotation followed by translation: `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(UnitQuaternion::identity(), Vector3::zeros())
    }

    pub fn from_axis_angle(axis: &Unit<Vector3<f64>>, angle: f64, translation: Vector3<f64>) -> Self {
        Self::new(UnitQuaternion::from_axis_angle(axis, angle), translation)
    }

    pub fn apply_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let inv = self.rotation.inverse();
        RigidTransform {
            rotation: inv,
            translation: -(inv * self.translation),
        }
    }

    /// Rotation angle (radians) and translation norm of this transform.
    pub fn magnitude(&self) -> (f64, f64) {
        (self.rotation.angle(), self.translation.norm())
    }

    pub fn to_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.translation), self.rotation)
    }
}
