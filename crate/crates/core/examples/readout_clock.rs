//! Row timing of a downscaled rolling-shutter sensor, with and without a
//! scanline lookup table.
//!
//! cargo run --example readout_clock

use rollshutter::eval::sig6;
use rollshutter::{Grid, Pixel, ReadoutClock, ScanlineLut};

fn main() -> rollshutter::Result<()> {
    let full = ReadoutClock::new(29.4737e-6, 1024, 1024, 0.0)?;
    println!("full-sensor readout: {} us", sig6(full.frame_readout() * 1e6));

    // 1024 sensor rows delivered as a 320x256 image
    let clock = ReadoutClock::new(29.4737e-6, 1024, 256, 10.0)?;
    println!("image row period: {} us", sig6(clock.image_row_period() * 1e6));
    for v in [0.0, 100.0, 255.0] {
        println!("image row {v:>5}: t = {:.6} s", clock.time_of_image_row(v));
    }

    // lens distortion bends rows: the sensor row depends on the column too
    let lut = ScanlineLut::new(
        Grid::from_fn(320, 256, |u, v| {
            let du = (u as f64 - 160.0) / 160.0;
            3.96 * v as f64 + 6.0 * du * du
        }),
        1024,
    )?;
    for u in [Pixel::new(160.0, 128.0), Pixel::new(0.0, 128.0)] {
        let t = clock.row_time(Some(&lut), &u, 320)?;
        println!("pixel ({}, {}) with LUT: t = {:.6} s", u.x, u.y, t);
    }
    Ok(())
}
