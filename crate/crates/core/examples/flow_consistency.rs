//! Forward/backward flow check between an RS frame and the GS0 camera.
//!
//! cargo run --example flow_consistency

use rollshutter::geometry::{bidirectional_filter, synthesize_rs};
use rollshutter::synthetic::{self, PolynomialMotion};
use rollshutter::{Intrinsics, Pose, ReadoutClock};

fn main() -> rollshutter::Result<()> {
    let k = Intrinsics::new(120.0, 120.0, 80.0, 60.0, 160, 120)?;
    let clock = ReadoutClock::new(29.4737e-6, 480, 120, 0.0)?;
    let mut rng = synthetic::rng(3);
    let gs = synthetic::texture(&mut rng, 160, 120);
    let depth = synthetic::random_plane_depth(&mut rng, &k);
    let table = PolynomialMotion::random(&mut rng, 1.0, 0.5).row_table(&clock, 120);
    let synth = synthesize_rs(&gs, &depth, &table, &k, &clock, None)?;

    let rig = Pose::from_translation(0.1, 0.0, 0.0);
    let (fwd, mut bwd) = synthetic::analytic_flow(&synth.frame, &table, &rig, &k)?;
    let count = |m: &rollshutter::Grid<bool>| m.as_slice().iter().filter(|b| **b).count();

    let clean = bidirectional_filter(&fwd, &bwd, 1.0)?;
    println!("consistent pixels: {} / {}", count(&clean), clean.len());

    // corrupt a block of backward flow, as an occlusion would
    for y in 40..70 {
        for x in 40..90 {
            bwd.get_mut(x, y)[0] += 4.0;
        }
    }
    let masked = bidirectional_filter(&fwd, &bwd, 1.0)?;
    println!("after corruption:  {} / {}", count(&masked), masked.len());
    Ok(())
}
