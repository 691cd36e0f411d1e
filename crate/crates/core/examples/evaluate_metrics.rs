//! Per-sequence EPE, improvement ratio and ATE with similarity alignment.
//!
//! cargo run --example evaluate_metrics

use rollshutter::eval::{aggregate_epe, ate_sim3, improvement_ratio, sig6};
use rollshutter::geometry::{
    constant_velocity_rowposes, correction_map, epe, fit_constant_velocity, identity_rowposes, synthesize_rs,
};
use rollshutter::se3::{exp_so3, Vec3};
use rollshutter::synthetic::{self, PolynomialMotion};
use rollshutter::{Intrinsics, Pose, ReadoutClock, Trajectory};

fn main() -> rollshutter::Result<()> {
    let k = Intrinsics::new(150.0, 150.0, 80.0, 60.0, 160, 120)?;
    let clock = ReadoutClock::new(29.4737e-6, 480, 120, 0.0)?;
    let mut rng = synthetic::rng(8);

    // constant-velocity correction against doing nothing, over five frames
    let (mut before, mut after) = (Vec::new(), Vec::new());
    for _ in 0..5 {
        let gs = synthetic::texture(&mut rng, 160, 120);
        let depth = synthetic::random_plane_depth(&mut rng, &k);
        let truth = PolynomialMotion::random(&mut rng, 2.0, 0.5).row_table(&clock, 120);
        let s = synthesize_rs(&gs, &depth, &truth, &k, &clock, None)?;
        let cv = constant_velocity_rowposes(&fit_constant_velocity(&truth, &clock), &clock, 120)?;
        before.push(epe(&correction_map(&s.frame, &identity_rowposes(120))?, &s.gt_map)?);
        after.push(epe(&correction_map(&s.frame, &cv)?, &s.gt_map)?);
    }
    let ratio = improvement_ratio(
        &before.iter().map(|r| r.mean_px).collect::<Vec<_>>(),
        &after.iter().map(|r| r.mean_px).collect::<Vec<_>>(),
    )?;
    println!("EPE uncorrected: {} px", sig6(aggregate_epe(before).mean_px));
    println!("EPE constant velocity: {} px", sig6(aggregate_epe(after).mean_px));
    println!(
        "improvement ratio: {} ({}/{})",
        sig6(ratio.ratio),
        ratio.improved_count,
        ratio.total
    );

    // a monocular estimate: right shape, wrong scale and frame, some noise
    let gt = Trajectory::from_pairs((0..100).map(|i| {
        let t = i as f64 * 0.1;
        (t, Pose::from_translation(t.sin(), (0.7 * t).cos(), 0.1 * t))
    }))?;
    let r = exp_so3(&Vec3::new(0.2, -0.4, 1.0));
    let est = Trajectory::from_pairs(gt.samples().iter().enumerate().map(|(i, s)| {
        let wobble = 0.01 * (i as f64 * 1.3).sin();
        (
            s.time,
            Pose::from_rotation(r).compose(&Pose::new(
                s.pose.rotation,
                s.pose.translation * 0.4 + Vec3::repeat(wobble),
            )),
        )
    }))?;
    let ate = ate_sim3(&est, &gt, None)?;
    println!(
        "ATE {} m over {} pairs (scale {})",
        sig6(ate.rmse_m),
        ate.pairs,
        sig6(ate.alignment.scale)
    );
    Ok(())
}
