//! Seeded generators for synthetic scenes, smooth camera motion and exact
//! optical flow. Used by the tests, the examples and `rollshutter synthesize`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::camera::{Intrinsics, Pixel, ReadoutClock};
use crate::dataset::row_pose_table;
use crate::error::Result;
use crate::geometry::flow::sample_flow;
use crate::geometry::frame::{pi_project, RsFrame};
use crate::geometry::maps::{DepthMap, FlowField};
use crate::geometry::synth::synthesize_rs;
use crate::grid::{GrayImage, Grid};
use crate::imu::ImuExtrinsics;
use crate::io::config::Calibration;
use crate::io::{flo, text, write_gray};
use crate::se3::{exp_so3, Pose, RowPoseTable, StampedPose, Trajectory, Vec3};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sum of random oriented sinusoids in `[0, 255]`.
pub fn texture(rng: &mut impl Rng, width: usize, height: usize) -> GrayImage {
    let waves: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let freq = rng.random_range(0.05..0.6);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let amp = rng.random_range(0.3..1.0);
            (angle, freq, phase, amp)
        })
        .collect();
    let total: f64 = waves.iter().map(|w| w.3).sum();
    Grid::from_fn(width, height, |x, y| {
        let s: f64 = waves
            .iter()
            .map(|&(a, f, p, amp)| amp * ((x as f64 * a.cos() + y as f64 * a.sin()) * f + p).sin())
            .sum();
        (127.5 + 127.5 * s / total) as f32
    })
}

/// Depth of a tilted plane `n . X = offset` seen through `k`.
pub fn plane_depth(k: &Intrinsics, normal: Vec3, offset: f64) -> DepthMap {
    let dense = Grid::from_fn(k.width, k.height, |x, y| {
        let ray = k.ray(&Pixel::new(x as f64, y as f64));
        offset / normal.dot(&ray)
    });
    DepthMap::from_dense(&dense)
}

pub fn random_plane_depth(rng: &mut impl Rng, k: &Intrinsics) -> DepthMap {
    let tilt = Vec3::new(rng.random_range(-0.25..0.25), rng.random_range(-0.25..0.25), 1.0).normalize();
    plane_depth(k, tilt, rng.random_range(2.0..5.0))
}

/// Smooth random depth in roughly `[1.5, 6]` m built from low-frequency waves.
pub fn random_smooth_depth(rng: &mut impl Rng, k: &Intrinsics) -> DepthMap {
    let base = rng.random_range(2.5..4.0);
    let waves: Vec<(f64, f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.random_range(0.005..0.03),
                rng.random_range(0.005..0.03),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.1..0.35),
            )
        })
        .collect();
    let dense = Grid::from_fn(k.width, k.height, |x, y| {
        base + waves
            .iter()
            .map(|&(fx, fy, p, a)| a * (x as f64 * fx + y as f64 * fy + p).sin())
            .sum::<f64>()
    });
    DepthMap::from_dense(&dense)
}

/// Polynomial motion `x(t) = a t + b t^2 + c t^3` in rotation vector and
/// translation; the cubic term gives non-zero jerk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolynomialMotion {
    pub rotation: [Vec3; 3],
    pub translation: [Vec3; 3],
}

impl PolynomialMotion {
    pub fn random(rng: &mut impl Rng, angular_rate: f64, linear_rate: f64) -> Self {
        let mut v = |scale: f64| {
            Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ) * scale
        };
        // coefficients sized so each term is comparable over a 30 ms readout
        let t = 0.03;
        Self {
            rotation: [v(angular_rate), v(angular_rate / t), v(angular_rate / (t * t))],
            translation: [v(linear_rate), v(linear_rate / t), v(linear_rate / (t * t))],
        }
    }

    fn eval(c: &[Vec3; 3], t: f64) -> Vec3 {
        c[0] * t + c[1] * (t * t) + c[2] * (t * t * t)
    }

    /// `row0_from_row` after `dt` seconds of motion.
    pub fn pose_after(&self, dt: f64) -> Pose {
        Pose::new(
            exp_so3(&Self::eval(&self.rotation, dt)),
            Self::eval(&self.translation, dt),
        )
    }

    pub fn row_table(&self, clock: &ReadoutClock, rows: usize) -> RowPoseTable {
        let period = clock.image_row_period();
        let mut poses: Vec<Pose> = (0..rows).map(|r| self.pose_after(r as f64 * period)).collect();
        if let Some(p) = poses.first_mut() {
            *p = Pose::identity();
        }
        RowPoseTable::new(poses).expect("row 0 is identity")
    }
}

/// Samples `world_from_cam(t)` on `[start, end]` at `rate` Hz.
pub fn sample_trajectory(world_from_cam: impl Fn(f64) -> Pose, start: f64, end: f64, rate: f64) -> Trajectory {
    let n = ((end - start) * rate).ceil() as usize;
    let samples = (0..=n)
        .map(|i| {
            let time = start + i as f64 / rate;
            StampedPose {
                time,
                pose: world_from_cam(time),
            }
        })
        .collect();
    Trajectory::new(samples).expect("increasing sample times")
}

/// Exact RS-to-GS0 and GS0-to-RS flow for a frame with known depth.
///
/// Forward flow at RS pixel `u` is the projection of its 3-D point into the
/// GS0 camera minus `u`. Backward flow at GS0 pixel `g` inverts the forward
/// field by fixed-point iteration on its bilinear interpolant. Pixels without
/// a correspondence hold NaN.
pub fn analytic_flow(
    frame: &RsFrame,
    rowposes: &RowPoseTable,
    gs0_from_rs: &Pose,
    k_gs0: &Intrinsics,
) -> Result<(FlowField, FlowField)> {
    let (w, h) = (frame.width(), frame.height());
    let k = &frame.intrinsics;
    let mut fwd = Grid::filled(w, h, [f64::NAN; 2]);
    for y in 0..h {
        for x in 0..w {
            let Some(d) = frame.depth.get(x, y) else { continue };
            let u = Pixel::new(x as f64, y as f64);
            let gs0_from_row = gs0_from_rs.compose(&frame.row_pose(rowposes, &u)?);
            let x_gs0 = gs0_from_row.transform_point(&k.backproject(&u, d)?);
            if let Ok(g) = k_gs0.project(&x_gs0) {
                *fwd.get_mut(x, y) = [g.x - u.x, g.y - u.y];
            }
        }
    }

    let mut bwd = Grid::filled(w, h, [f64::NAN; 2]);
    for y in 0..h {
        for x in 0..w {
            let g = Pixel::new(x as f64, y as f64);
            let mut u = g;
            let mut found = None;
            for _ in 0..30 {
                let Some(f) = sample_flow(&fwd, u.x, u.y).filter(|f| f[0].is_finite() && f[1].is_finite()) else {
                    break;
                };
                let next = g - Pixel::new(f[0], f[1]);
                if (next - u).norm() < 1e-9 {
                    found = Some(next);
                    break;
                }
                u = next;
            }
            if let Some(u) = found {
                *bwd.get_mut(x, y) = [u.x - g.x, u.y - g.y];
            }
        }
    }
    Ok((fwd, bwd))
}

/// Reprojects pixel `u` of depth `d` from the row frame to GS0, for tests.
pub fn to_gs0(u: &Pixel, d: f64, gs0_from_row: &Pose, k_rs: &Intrinsics, k_gs0: &Intrinsics) -> Option<Pixel> {
    let x = gs0_from_row.transform_point(&k_rs.backproject(u, d).ok()?);
    let p = k_gs0.project(&x).ok()?;
    // pi_project covers the same-intrinsics case
    debug_assert!(k_rs != k_gs0 || (pi_project(u, d, gs0_from_row, k_rs).ok()? - p).norm() < 1e-9);
    Some(p)
}

/// Layout of a synthetic sequence written by [`write_sequence`].
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSequence {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Extra manifest frames timed after the trajectory ends.
    pub uncovered_frames: usize,
    pub frame_period: f64,
    pub seed: u64,
}

impl Default for SyntheticSequence {
    fn default() -> Self {
        Self {
            name: "synthetic".into(),
            width: 64,
            height: 48,
            frames: 3,
            uncovered_frames: 0,
            frame_period: 0.05,
            seed: 0,
        }
    }
}

/// Calibration used by [`write_sequence`]: square pixels, a 4x sensor
/// downscale and GS0 mounted 0.1 m to the left of the RS camera.
pub fn sequence_calibration(width: usize, height: usize) -> Calibration {
    let f = 0.8 * width as f64;
    let k =
        Intrinsics::new(f, f, width as f64 / 2.0, height as f64 / 2.0, width, height).expect("positive focal length");
    Calibration {
        intrinsics: k,
        gs0_intrinsics: k,
        clock: ReadoutClock::new(29.4737e-6, 4 * height, height, 0.0).expect("valid clock"),
        gs0_from_rs: Pose::new(exp_so3(&Vec3::new(0.0, 0.005, 0.0)), Vec3::new(0.1, 0.0, 0.0)),
        imu: ImuExtrinsics::default(),
        lut_path: None,
    }
}

/// Smooth `world_from_rs` motion with varying angular and linear velocity.
pub fn sequence_motion(t: f64) -> Pose {
    Pose::new(
        exp_so3(&Vec3::new(
            0.3 * (2.1 * t).sin(),
            0.4 * (1.7 * t).sin(),
            0.2 * (2.9 * t).cos(),
        )),
        Vec3::new(0.5 * (1.3 * t).sin(), 0.2 * t * t, 0.3 * (0.9 * t).cos()),
    )
}

/// Writes a complete synthetic sequence (calibration, 200 Hz trajectory, RS
/// images, exact flow, manifest) into `dir` and returns the manifest path.
///
/// Each frame views its own random textured plane. RS images are rendered
/// with the row poses the dataset pipeline will interpolate from the
/// written trajectory, so regenerated ground truth matches them.
pub fn write_sequence(dir: &Path, layout: &SyntheticSequence) -> Result<PathBuf> {
    let calib = sequence_calibration(layout.width, layout.height);
    let k = &calib.intrinsics;
    fs::create_dir_all(dir.join("rs"))?;
    fs::create_dir_all(dir.join("flow"))?;
    fs::write(dir.join("calib.cfg"), calib.to_config_string())?;

    let first = 0.05;
    let end = first + layout.frames as f64 * layout.frame_period + 0.05;
    let traj = sample_trajectory(sequence_motion, 0.0, end, 200.0);
    text::write_trajectory(dir.join("groundtruth.txt"), &traj)?;
    let spline = traj.spline()?;

    let mut manifest = format!(
        "sequence = {}\ncalibration = calib.cfg\ntrajectory = groundtruth.txt\n",
        layout.name
    );
    let mut rng = rng(layout.seed);
    for i in 0..layout.frames + layout.uncovered_frames {
        let id = format!("{i:06}");
        let covered = i < layout.frames;
        let time = if covered {
            first + i as f64 * layout.frame_period
        } else {
            end + 1.0 + i as f64
        };
        let rs_path = format!("rs/{id}.png");
        let fwd_path = format!("flow/{id}_fwd.flo");
        let bwd_path = format!("flow/{id}_bwd.flo");
        let gs = texture(&mut rng, layout.width, layout.height);
        let depth = random_plane_depth(&mut rng, k);
        if covered {
            let clock = calib.clock.with_frame_start(time);
            let (table, _) = row_pose_table(&spline, &clock, layout.height)?;
            let synth = synthesize_rs(&gs, &depth, &table, k, &clock, None)?;
            let (fwd, bwd) = analytic_flow(&synth.frame, &table, &calib.gs0_from_rs, &calib.gs0_intrinsics)?;
            write_gray(dir.join(&rs_path), &synth.frame.image)?;
            flo::write(dir.join(&fwd_path), &fwd)?;
            flo::write(dir.join(&bwd_path), &bwd)?;
        } else {
            let nan = Grid::filled(layout.width, layout.height, [f64::NAN; 2]);
            write_gray(dir.join(&rs_path), &gs)?;
            flo::write(dir.join(&fwd_path), &nan)?;
            flo::write(dir.join(&bwd_path), &nan)?;
        }
        let _ = writeln!(manifest, "frame = {id} {time} {rs_path} {fwd_path} {bwd_path}");
    }
    let path = dir.join("manifest.cfg");
    fs::write(&path, manifest)?;
    Ok(path)
}
