//! Rolling-shutter image synthesis from a global-shutter view.

use crate::camera::{Intrinsics, Pixel, ReadoutClock, ScanlineLut, MIN_Z};
use crate::error::Result;
use crate::geometry::frame::RsFrame;
use crate::geometry::maps::{CoordinateMap, DepthMap, Target};
use crate::grid::{GrayImage, Grid};
use crate::se3::RowPoseTable;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthesisOptions {
    pub max_iterations: usize,
    /// Reprojection residual (px) at which the inverse warp is accepted.
    pub tolerance_px: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            tolerance_px: 1e-10,
        }
    }
}

/// Output of [`synthesize_rs`].
#[derive(Clone, Debug)]
pub struct SynthesizedFrame {
    pub frame: RsFrame,
    /// Exact row-0 target of every RS pixel (the global-shutter pixel it was
    /// sampled from).
    pub gt_map: CoordinateMap,
}

/// Renders the rolling-shutter view of a global-shutter image taken at the
/// row-0 pose.
///
/// For RS pixel `u` with row pose `T = row0_from_row`, finds the GS pixel `g`
/// whose back-projected point `X(g)` satisfies `project(T^-1 X(g)) = u` by
/// fixed-point iteration, then samples intensity and depth at `g`. Pixels
/// whose iteration leaves the GS image, hits missing depth or does not
/// converge are marked invalid.
pub fn synthesize_rs(
    gs_image: &GrayImage,
    gs_depth: &DepthMap,
    rowposes: &RowPoseTable,
    intrinsics: &Intrinsics,
    clock: &ReadoutClock,
    lut: Option<&ScanlineLut>,
) -> Result<SynthesizedFrame> {
    synthesize_rs_with(
        gs_image,
        gs_depth,
        rowposes,
        intrinsics,
        clock,
        lut,
        SynthesisOptions::default(),
    )
}

pub fn synthesize_rs_with(
    gs_image: &GrayImage,
    gs_depth: &DepthMap,
    rowposes: &RowPoseTable,
    intrinsics: &Intrinsics,
    clock: &ReadoutClock,
    lut: Option<&ScanlineLut>,
    options: SynthesisOptions,
) -> Result<SynthesizedFrame> {
    let (w, h) = gs_image.dims();
    // Validates every dimension up front; image and depth are filled below.
    let mut frame = RsFrame::new(
        Grid::filled(w, h, 0.0),
        DepthMap::invalid(gs_depth.width(), gs_depth.height()),
        *intrinsics,
        *clock,
        lut.cloned(),
    )?;
    frame.check_table(rowposes)?;

    let mut gt = CoordinateMap::invalid(w, h);
    for y in 0..h {
        for x in 0..w {
            let u = Pixel::new(x as f64, y as f64);
            let row_from_row0 = frame.row_pose(rowposes, &u)?.inverse();
            let Some(sol) = invert_warp(&u, gs_depth, intrinsics, &options, |p| row_from_row0.transform_point(p))
            else {
                continue;
            };
            let Some(intensity) = gs_image.sample_bilinear(sol.gs_pixel.x, sol.gs_pixel.y) else {
                continue;
            };
            *frame.image.get_mut(x, y) = intensity as f32;
            frame.depth.set(x, y, Some(sol.rs_depth));
            gt.set(
                x,
                y,
                Some(Target {
                    pixel: sol.gs_pixel,
                    depth: Some(sol.gs_depth),
                }),
            );
        }
    }
    Ok(SynthesizedFrame { frame, gt_map: gt })
}

struct WarpSolution {
    gs_pixel: Pixel,
    gs_depth: f64,
    rs_depth: f64,
}

fn invert_warp(
    u: &Pixel,
    gs_depth: &DepthMap,
    k: &Intrinsics,
    options: &SynthesisOptions,
    to_rs: impl Fn(&crate::se3::Vec3) -> crate::se3::Vec3,
) -> Option<WarpSolution> {
    let mut g = *u;
    for _ in 0..=options.max_iterations {
        let d = gs_depth.sample_bilinear(g.x, g.y)?;
        let x_rs = to_rs(&(k.ray(&g) * d));
        if !(x_rs.z > MIN_Z) {
            return None;
        }
        let p = k.project(&x_rs).ok()?;
        let r = u - p;
        if r.norm() <= options.tolerance_px {
            return Some(WarpSolution {
                gs_pixel: g,
                gs_depth: d,
                rs_depth: x_rs.z,
            });
        }
        g += r;
    }
    None
}
