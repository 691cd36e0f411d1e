//! Two-view midpoint triangulation between a rolling-shutter row and a
//! global-shutter view.

use crate::camera::{Intrinsics, Pixel};
use crate::error::{Error, Result};
use crate::se3::{Pose, Vec3};

/// Minimum angle between the two viewing rays.
pub const MIN_RAY_ANGLE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangulation {
    /// Point in the RS-row camera frame, meters.
    pub point: Vec3,
    /// `point.z`
    pub depth: f64,
    /// Closest distance between the two rays, meters.
    pub residual: f64,
}

/// Midpoint of the shortest segment between the RS ray through `u_rs` and
/// the GS0 ray through `u_gs0`.
///
/// `gs0_from_rsrow` maps RS-row coordinates into the GS0 camera frame, so
/// its translation is the RS camera center seen from GS0. For a rectified
/// pair with the RS camera 0.1 m to the right of GS0 this is
/// `Pose::from_translation(0.1, 0.0, 0.0)`.
pub fn triangulate(
    u_gs0: &Pixel,
    u_rs: &Pixel,
    gs0_from_rsrow: &Pose,
    k_rs: &Intrinsics,
    k_gs0: &Intrinsics,
) -> Result<Triangulation> {
    let rs_from_gs0 = gs0_from_rsrow.inverse();
    let a = k_rs.ray(u_rs);
    let origin = rs_from_gs0.translation;
    let b = rs_from_gs0.rotation * k_gs0.ray(u_gs0);

    let n = a.cross(&b);
    let angle = (n.norm() / (a.norm() * b.norm())).min(1.0).asin();
    if !(angle >= MIN_RAY_ANGLE) {
        return Err(Error::DegenerateRays { angle });
    }

    // closest points of s a and origin + t b; the cross-product form avoids
    // the cancellation in |a|^2 |b|^2 - (a.b)^2 for narrow ray angles
    let nn = n.norm_squared();
    let s = origin.cross(&b).dot(&n) / nn;
    let t = origin.cross(&a).dot(&n) / nn;
    let p_rs = a * s;
    let p_gs = origin + b * t;
    let point = (p_rs + p_gs) * 0.5;
    if !(point.z > 0.0) {
        return Err(Error::NegativeDepth { depth: point.z });
    }
    Ok(Triangulation {
        point,
        depth: point.z,
        residual: (p_rs - p_gs).norm(),
    })
}
