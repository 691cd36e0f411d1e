//! Rigid transforms, quaternion utilities, timestamped trajectories and
//! per-row pose tables.
//!
//! A [`Pose`] named `a_from_b` maps coordinates expressed in frame `b` into
//! frame `a`: `x_a = R x_b + t`.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use crate::error::{Error, Result};
use crate::spline::NaturalCubicSpline;

pub type Vec3 = Vector3<f64>;
pub type Rotation = UnitQuaternion<f64>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Rotation,
    pub translation: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(rotation: Rotation, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    pub fn identity() -> Self {
        Self::new(Rotation::identity(), Vec3::zeros())
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(Rotation::identity(), Vec3::new(x, y, z))
    }

    pub fn from_rotation(rotation: Rotation) -> Self {
        Self::new(rotation, Vec3::zeros())
    }

    /// Builds a pose from raw quaternion components, normalizing them.
    pub fn from_components(q: [f64; 4], t: [f64; 3]) -> Result<Self> {
        let [w, x, y, z] = q;
        let quat = Quaternion::new(w, x, y, z);
        let norm = quat.norm();
        if !(norm.is_finite() && norm > 1e-12) || t.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "invalid pose components q={q:?} t={t:?}"
            )));
        }
        Ok(Self::new(Rotation::from_quaternion(quat), Vec3::new(t[0], t[1], t[2])))
    }

    /// `self ∘ other`: applies `other`, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let r_inv = self.rotation.inverse();
        Pose::new(r_inv, -(r_inv * self.translation))
    }

    #[inline]
    pub fn transform_point(&self, x: &Vec3) -> Vec3 {
        self.rotation * x + self.translation
    }

    /// Rotation with the `w >= 0` representative of the double cover.
    pub fn canonical(&self) -> Pose {
        Pose::new(canonical(self.rotation), self.translation)
    }

    /// Largest of the rotation geodesic angle (rad) and translation distance (m)
    /// to `other`. Convenient for tolerance checks.
    pub fn distance(&self, other: &Pose) -> (f64, f64) {
        (
            self.rotation.angle_to(&other.rotation),
            (self.translation - other.translation).norm(),
        )
    }
}

/// `a_from_b = invert(world_from_a) ∘ world_from_b`.
pub fn relative_pose(world_from_a: &Pose, world_from_b: &Pose) -> Pose {
    world_from_a.inverse().compose(world_from_b)
}

/// Picks the `w >= 0` member of `{q, -q}`.
pub fn canonical(q: Rotation) -> Rotation {
    if q.w < 0.0 {
        Rotation::new_unchecked(-q.into_inner())
    } else {
        q
    }
}

/// Returns `q` or `-q`, whichever lies in the same hemisphere as `reference`.
pub fn same_hemisphere(q: Rotation, reference: &Rotation) -> Rotation {
    if q.coords.dot(&reference.coords) < 0.0 {
        Rotation::new_unchecked(-q.into_inner())
    } else {
        q
    }
}

/// Shortest-arc spherical interpolation; falls back to normalized lerp when
/// the two rotations are nearly identical.
pub fn slerp(a: &Rotation, b: &Rotation, s: f64) -> Rotation {
    let b = same_hemisphere(*b, a);
    let cos = a.coords.dot(&b.coords).min(1.0);
    if cos > 1.0 - 1e-12 {
        let v = a.coords * (1.0 - s) + b.coords * s;
        return Rotation::from_quaternion(Quaternion::from(v));
    }
    let theta = cos.acos();
    let sin = theta.sin();
    let wa = ((1.0 - s) * theta).sin() / sin;
    let wb = (s * theta).sin() / sin;
    Rotation::from_quaternion(Quaternion::from(a.coords * wa + b.coords * wb))
}

/// Pose interpolation: linear on translation, slerp on rotation.
pub fn interpolate_pose(a: &Pose, b: &Pose, s: f64) -> Pose {
    Pose::new(
        slerp(&a.rotation, &b.rotation, s),
        a.translation * (1.0 - s) + b.translation * s,
    )
}

/// Rotation `exp(omega)` for an axis-angle vector.
pub fn exp_so3(omega: &Vec3) -> Rotation {
    Rotation::from_scaled_axis(*omega)
}

/// Axis-angle vector of a rotation, angle in `[0, pi]`.
pub fn log_so3(q: &Rotation) -> Vec3 {
    canonical(*q).scaled_axis()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StampedPose {
    pub time: f64,
    pub pose: Pose,
}

/// Timestamped poses (seconds) with strictly increasing times.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    samples: Vec<StampedPose>,
}

impl Trajectory {
    pub fn new(samples: Vec<StampedPose>) -> Result<Self> {
        if let Some(i) = samples.windows(2).position(|w| w[1].time <= w[0].time) {
            return Err(Error::NonMonotonicTimestamps { index: i + 1 });
        }
        Ok(Self { samples })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, Pose)>) -> Result<Self> {
        Self::new(
            pairs
                .into_iter()
                .map(|(time, pose)| StampedPose { time, pose })
                .collect(),
        )
    }

    pub fn samples(&self) -> &[StampedPose] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.time)
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.time, self.samples.last()?.time))
    }

    /// Builds the cubic-spline interpolant. Needs at least four samples.
    pub fn spline(&self) -> Result<TrajectorySpline> {
        TrajectorySpline::new(self)
    }

    /// Spline-interpolates the trajectory at each query time.
    pub fn interpolate(&self, query_times: &[f64]) -> Result<Vec<Pose>> {
        let spline = self.spline()?;
        query_times.iter().map(|&t| spline.pose_at(t)).collect()
    }
}

/// Natural cubic splines on translation and on hemisphere-aligned
/// quaternion components (renormalized after evaluation).
#[derive(Clone, Debug)]
pub struct TrajectorySpline {
    translation: [NaturalCubicSpline; 3],
    rotation: [NaturalCubicSpline; 4],
    start: f64,
    end: f64,
}

impl TrajectorySpline {
    pub const MIN_SAMPLES: usize = 4;

    pub fn new(traj: &Trajectory) -> Result<Self> {
        let samples = traj.samples();
        if samples.len() < Self::MIN_SAMPLES {
            return Err(Error::InsufficientSamples {
                needed: Self::MIN_SAMPLES,
                got: samples.len(),
            });
        }
        let times: Vec<f64> = traj.times().collect();
        let quats = hemisphere_aligned(samples.iter().map(|s| s.pose.rotation));

        let translation_axis = |k: usize| -> Result<NaturalCubicSpline> {
            let v: Vec<f64> = samples.iter().map(|s| s.pose.translation[k]).collect();
            NaturalCubicSpline::new(&times, &v)
        };
        // coords order is (x, y, z, w)
        let rotation_axis = |k: usize| -> Result<NaturalCubicSpline> {
            let v: Vec<f64> = quats.iter().map(|q| q.coords[k]).collect();
            NaturalCubicSpline::new(&times, &v)
        };
        Ok(Self {
            translation: [translation_axis(0)?, translation_axis(1)?, translation_axis(2)?],
            rotation: [
                rotation_axis(0)?,
                rotation_axis(1)?,
                rotation_axis(2)?,
                rotation_axis(3)?,
            ],
            start: times[0],
            end: times[times.len() - 1],
        })
    }

    pub fn span(&self) -> (f64, f64) {
        (self.start, self.end)
    }

    pub fn pose_at(&self, t: f64) -> Result<Pose> {
        if !(t >= self.start && t <= self.end) {
            return Err(Error::QueryOutOfRange {
                time: t,
                start: self.start,
                end: self.end,
            });
        }
        let tr = Vec3::new(
            self.translation[0].eval(t),
            self.translation[1].eval(t),
            self.translation[2].eval(t),
        );
        let q = Quaternion::new(
            self.rotation[3].eval(t),
            self.rotation[0].eval(t),
            self.rotation[1].eval(t),
            self.rotation[2].eval(t),
        );
        Ok(Pose::new(canonical(Rotation::from_quaternion(q)), tr))
    }

    /// Time derivative of the translation spline.
    pub fn velocity_at(&self, t: f64) -> Vec3 {
        Vec3::new(
            self.translation[0].derivative(t),
            self.translation[1].derivative(t),
            self.translation[2].derivative(t),
        )
    }

    pub fn translation_splines(&self) -> &[NaturalCubicSpline; 3] {
        &self.translation
    }

    pub fn rotation_splines(&self) -> &[NaturalCubicSpline; 4] {
        &self.rotation
    }
}

/// Flips signs so that consecutive quaternions have non-negative dot product.
pub fn hemisphere_aligned(rotations: impl IntoIterator<Item = Rotation>) -> Vec<Rotation> {
    let mut out: Vec<Rotation> = Vec::new();
    for q in rotations {
        let q = match out.last() {
            Some(prev) => same_hemisphere(q, prev),
            None => q,
        };
        out.push(q);
    }
    out
}

/// Per-image-row transforms `row0_from_row[r]`; entry 0 is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct RowPoseTable {
    rows: Vec<Pose>,
}

impl RowPoseTable {
    /// Wraps a table, checking that row 0 is the identity within 1e-12.
    pub fn new(rows: Vec<Pose>) -> Result<Self> {
        if let Some(first) = rows.first() {
            let (ang, dist) = first.distance(&Pose::identity());
            if ang > 1e-12 || dist > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "row 0 pose must be identity (angle {ang:e}, offset {dist:e})"
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Re-expresses per-row world poses relative to row 0.
    pub fn from_world_poses(world_from_row: &[Pose]) -> Self {
        let Some(first) = world_from_row.first() else {
            return Self { rows: Vec::new() };
        };
        let mut rows: Vec<Pose> = world_from_row.iter().map(|p| relative_pose(first, p)).collect();
        rows[0] = Pose::identity();
        Self { rows }
    }

    pub fn identity(rows: usize) -> Self {
        Self {
            rows: vec![Pose::identity(); rows],
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Pose] {
        &self.rows
    }

    pub fn get(&self, row: usize) -> &Pose {
        &self.rows[row]
    }

    /// Pose at a fractional table row: slerp/lerp between neighbours,
    /// clamped to the table ends.
    pub fn at(&self, row: f64) -> Pose {
        let last = self.rows.len() - 1;
        if row <= 0.0 {
            return self.rows[0];
        }
        if row >= last as f64 {
            return self.rows[last];
        }
        let i = row.floor() as usize;
        let s = row - i as f64;
        if s == 0.0 {
            self.rows[i]
        } else {
            interpolate_pose(&self.rows[i], &self.rows[i + 1], s)
        }
    }
}
