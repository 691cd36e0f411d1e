//! Baseline row-pose models.

use crate::camera::ReadoutClock;
use crate::error::{Error, Result};
use crate::se3::{exp_so3, log_so3, Pose, RowPoseTable, Vec3};

/// Rigid-body velocity, expressed in the row-0 camera frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Twist {
    /// rad/s
    pub angular: Vec3,
    /// m/s
    pub linear: Vec3,
}

impl Twist {
    pub fn new(angular: Vec3, linear: Vec3) -> Self {
        Self { angular, linear }
    }

    pub fn is_finite(&self) -> bool {
        self.angular.iter().chain(self.linear.iter()).all(|v| v.is_finite())
    }

    /// Pose reached after moving with this twist for `dt` seconds.
    pub fn pose_after(&self, dt: f64) -> Pose {
        Pose::new(exp_so3(&(self.angular * dt)), self.linear * dt)
    }
}

/// Constant-velocity row poses: row `r` gets `exp(angular t_r)` and
/// `linear t_r`, with `t_r` the readout offset of image row `r`.
pub fn constant_velocity_rowposes(twist: &Twist, clock: &ReadoutClock, rows: usize) -> Result<RowPoseTable> {
    if !twist.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite twist {twist:?}")));
    }
    let period = clock.image_row_period();
    let mut poses: Vec<Pose> = (0..rows).map(|r| twist.pose_after(r as f64 * period)).collect();
    if let Some(first) = poses.first_mut() {
        *first = Pose::identity();
    }
    RowPoseTable::new(poses)
}

/// The "no correction" table.
pub fn identity_rowposes(rows: usize) -> RowPoseTable {
    RowPoseTable::identity(rows)
}

/// Least-squares constant-velocity fit to a row-pose table.
///
/// Minimizes `sum_r |log(R_r) - w t_r|^2 + |p_r - v t_r|^2` over the twist
/// `(w, v)`; the fit passes through the identity at row 0.
pub fn fit_constant_velocity(table: &RowPoseTable, clock: &ReadoutClock) -> Twist {
    let period = clock.image_row_period();
    let mut sum_tt = 0.0;
    let mut ang = Vec3::zeros();
    let mut lin = Vec3::zeros();
    for (r, pose) in table.rows().iter().enumerate().skip(1) {
        let t = r as f64 * period;
        sum_tt += t * t;
        ang += log_so3(&pose.rotation) * t;
        lin += pose.translation * t;
    }
    if sum_tt == 0.0 {
        return Twist::default();
    }
    Twist::new(ang / sum_tt, lin / sum_tt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clock() -> ReadoutClock {
        ReadoutClock::new(29.4737e-6, 1024, 256, 0.0).unwrap()
    }

    #[test]
    fn zero_twist_is_identity() {
        let t = constant_velocity_rowposes(&Twist::default(), &clock(), 256).unwrap();
        assert!(t.rows().iter().all(|p| *p == Pose::identity()));
    }

    #[test]
    fn angular_about_z_closed_form() {
        let w = 3.0;
        let t = constant_velocity_rowposes(&Twist::new(Vec3::new(0.0, 0.0, w), Vec3::zeros()), &clock(), 256).unwrap();
        for r in [1usize, 17, 255] {
            let expected = w * r as f64 * 4.0 * 29.4737e-6;
            let q = t.get(r).rotation;
            assert!((q.angle() - expected).abs() < 1e-12);
            let axis = q.axis().unwrap();
            assert!((axis.z - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_only_grows_linearly_and_scales() {
        let v = Vec3::new(0.5, -0.2, 0.1);
        let a = constant_velocity_rowposes(&Twist::new(Vec3::zeros(), v), &clock(), 64).unwrap();
        let b = constant_velocity_rowposes(&Twist::new(Vec3::zeros(), v * 2.0), &clock(), 64).unwrap();
        for r in 0..64 {
            assert_eq!(a.get(r).rotation, crate::se3::Rotation::identity());
            assert_eq!(b.get(r).translation, a.get(r).translation * 2.0);
            let expected = v * (r as f64 * clock().image_row_period());
            assert!((a.get(r).translation - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn identity_table_sizes() {
        assert_eq!(identity_rowposes(0).len(), 0);
        assert_eq!(identity_rowposes(5).len(), 5);
    }

    #[test]
    fn fit_recovers_exact_constant_velocity() {
        let twist = Twist::new(Vec3::new(0.3, -1.0, 0.4), Vec3::new(0.5, 0.1, -0.3));
        let table = constant_velocity_rowposes(&twist, &clock(), 256).unwrap();
        let fit = fit_constant_velocity(&table, &clock());
        assert!((fit.angular - twist.angular).norm() < 1e-9);
        assert!((fit.linear - twist.linear).norm() < 1e-9);
    }
}
