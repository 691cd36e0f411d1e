//! Interpolates a sparse motion-capture trajectory at per-row capture times
//! and turns it into a row-pose table.
//!
//! cargo run --example spline_interpolation

use rollshutter::dataset::row_pose_table;
use rollshutter::synthetic::{sample_trajectory, sequence_motion};
use rollshutter::ReadoutClock;

fn main() -> rollshutter::Result<()> {
    // 120 Hz ground truth over one second
    let traj = sample_trajectory(sequence_motion, 0.0, 1.0, 120.0);
    let spline = traj.spline()?;
    println!("trajectory: {} samples over {:?} s", traj.len(), spline.span());

    let t = 0.4321;
    let pose = spline.pose_at(t)?;
    println!(
        "pose at {t} s: t = {:.4?}, angle = {:.4} rad",
        pose.translation.as_slice(),
        pose.rotation.angle()
    );
    println!("velocity at {t} s: {:.4?} m/s", spline.velocity_at(t).as_slice());

    let clock = ReadoutClock::new(29.4737e-6, 1024, 256, 0.5)?;
    let (table, times) = row_pose_table(&spline, &clock, 256)?;
    let last = table.get(255);
    println!(
        "row 255 read {:.3} ms after row 0; row0_from_row255 moves {:.3} mm and turns {:.4} deg",
        (times[255] - times[0]) * 1e3,
        last.translation.norm() * 1e3,
        last.rotation.angle().to_degrees()
    );

    match spline.pose_at(2.0) {
        Err(e) => println!("query past the end: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
