//! Builds a rotation-only row-pose table from IMU gyro samples.
//!
//! cargo run --example gyro_rowposes

use rollshutter::imu::{
    integrate_rowposes, per_row_interpolate, rotate_to_camera, GyroIntegration, ImuExtrinsics, ImuFrame, ImuSample,
    ImuSeries,
};
use rollshutter::se3::{Rotation, Vec3};
use rollshutter::ReadoutClock;

fn main() -> rollshutter::Result<()> {
    // 200 Hz IMU turning about its own x axis with a little wobble
    let samples = (0..40)
        .map(|i| {
            let t = i as f64 * 0.005;
            ImuSample {
                time: t,
                gyro: Vec3::new(1.0 + 0.3 * (20.0 * t).sin(), 0.0, 0.1),
                accel: Vec3::new(0.0, 0.0, 9.81),
            }
        })
        .collect();
    let imu = ImuSeries::new(samples, ImuFrame::Imu)?;

    // IMU x axis is the camera y axis
    let ext = ImuExtrinsics {
        cam_from_imu: Rotation::from_axis_angle(&Vec3::z_axis(), std::f64::consts::FRAC_PI_2),
    };
    let cam = rotate_to_camera(&imu, &ext)?;

    let clock = ReadoutClock::new(29.4737e-6, 1024, 256, 0.05)?;
    let rows = per_row_interpolate(&cam, &clock, 256)?;
    println!("row 128 gyro (camera frame): {:.4?} rad/s", rows[128].gyro.as_slice());

    let bias = Vec3::new(0.0, 0.0, 0.1);
    let table = integrate_rowposes(&cam, &clock, 256, &GyroIntegration { bias, substeps: 4 })?;
    let last = table.get(255).rotation;
    println!(
        "row 255 relative to row 0: {:.4} deg about {:.3?}",
        last.angle().to_degrees(),
        last.axis().map(|a| a.into_inner()).unwrap_or_default().as_slice()
    );
    Ok(())
}
