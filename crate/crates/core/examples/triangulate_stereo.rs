//! Depth from one rolling-shutter row and a rigidly mounted global-shutter
//! camera.
//!
//! cargo run --example triangulate_stereo

use rollshutter::geometry::triangulate;
use rollshutter::se3::{exp_so3, Vec3};
use rollshutter::{Intrinsics, Pixel, Pose};

fn main() -> rollshutter::Result<()> {
    let k = Intrinsics::new(100.0, 100.0, 160.0, 128.0, 320, 256)?;

    // rectified pair, RS camera 0.1 m right of GS0
    let rig = Pose::from_translation(0.1, 0.0, 0.0);
    let t = triangulate(&Pixel::new(165.0, 128.0), &Pixel::new(160.0, 128.0), &rig, &k, &k)?;
    println!("rectified: depth {} m, residual {:e} m", t.depth, t.residual);

    // the row was captured while the camera moved: fold the row pose in
    let row0_from_row = Pose::new(exp_so3(&Vec3::new(0.0, 0.01, 0.0)), Vec3::new(0.02, 0.0, 0.0));
    let gs0_from_row = rig.compose(&row0_from_row);
    let x = Vec3::new(0.3, -0.2, 4.0);
    let u_rs = k.project(&x)?;
    let u_gs0 = k.project(&gs0_from_row.transform_point(&x))?;
    let t = triangulate(&u_gs0, &u_rs, &gs0_from_row, &k, &k)?;
    println!(
        "moving row: recovered {:?}, error {:e} m",
        t.point.as_slice(),
        (t.point - x).norm()
    );

    match triangulate(&u_rs, &u_rs, &Pose::identity(), &k, &k) {
        Err(e) => println!("zero baseline: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
