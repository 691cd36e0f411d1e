//! Renders a rolling-shutter frame from a global-shutter view under smooth
//! motion, then corrects it back to the row-0 pose and checks the result
//! against the exact ground truth.
//!
//! cargo run --example synthesize_and_correct [out_dir]

use rollshutter::eval::sig6;
use rollshutter::geometry::{
    correction_map, epe, fill_holes, identity_rowposes, render_corrected, synthesize_rs, DEFAULT_FILL_RADIUS,
};
use rollshutter::io::write_gray;
use rollshutter::synthetic::{self, PolynomialMotion};
use rollshutter::{Intrinsics, ReadoutClock};

fn main() -> rollshutter::Result<()> {
    let k = Intrinsics::new(300.0, 300.0, 160.0, 128.0, 320, 256)?;
    let clock = ReadoutClock::new(29.4737e-6, 1024, 256, 0.0)?;
    let mut rng = synthetic::rng(42);

    let gs = synthetic::texture(&mut rng, 320, 256);
    let depth = synthetic::random_smooth_depth(&mut rng, &k);
    let table = PolynomialMotion::random(&mut rng, 2.0, 0.8).row_table(&clock, 256);

    let synth = synthesize_rs(&gs, &depth, &table, &k, &clock, None)?;
    println!(
        "synthesized RS frame, {} of pixels valid",
        sig6(synth.gt_map.valid_fraction())
    );

    let map = correction_map(&synth.frame, &table)?;
    let e = epe(&map, &synth.gt_map)?;
    let e_id = epe(&correction_map(&synth.frame, &identity_rowposes(256))?, &synth.gt_map)?;
    println!("EPE with the true row poses: {} px", sig6(e.mean_px));
    println!("EPE with no correction:      {} px", sig6(e_id.mean_px));

    let splat = render_corrected(&synth.frame, &map)?;
    let filled = fill_holes(&splat.image, &splat.filled, DEFAULT_FILL_RADIUS)?;
    println!("splat left {} holes", splat.hole_count());

    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir)?;
        write_gray(format!("{dir}/gs.png"), &gs)?;
        write_gray(format!("{dir}/rs.png"), &synth.frame.image)?;
        write_gray(format!("{dir}/corrected.png"), &filled.image)?;
        println!("images written to {dir}");
    }
    Ok(())
}
