//! Forward splatting of a corrected frame and hole filling.

use crate::error::{Error, Result};
use crate::geometry::frame::RsFrame;
use crate::geometry::maps::CoordinateMap;
use crate::grid::{GrayImage, Grid};

/// Default neighbourhood radius for [`fill_holes`].
pub const DEFAULT_FILL_RADIUS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Splat {
    pub image: GrayImage,
    /// `true` where some source pixel landed.
    pub filled: Grid<bool>,
    /// Row-major index of the source pixel that won each target.
    pub source: Grid<Option<usize>>,
    /// Depth of the winning source in the target frame.
    pub depth: Grid<f64>,
}

impl Splat {
    pub fn hole_count(&self) -> usize {
        self.filled.as_slice().iter().filter(|f| !**f).count()
    }
}

/// Forward-splats each valid source pixel to the nearest integer target with
/// a depth test. Ties on depth go to the earlier source in row-major order.
///
/// The z-buffer uses the target depth carried by the map when present and
/// falls back to the source depth otherwise.
pub fn render_corrected(frame: &RsFrame, map: &CoordinateMap) -> Result<Splat> {
    frame.image.check_dims(map.grid(), "frame/map")?;
    let (w, h) = frame.image.dims();
    let mut image = Grid::filled(w, h, 0.0f32);
    let mut source = Grid::filled(w, h, None);
    let mut zbuf = Grid::filled(w, h, f64::INFINITY);

    for y in 0..h {
        for x in 0..w {
            let Some(target) = map.get(x, y) else { continue };
            let tx = target.pixel.x.round();
            let ty = target.pixel.y.round();
            if !(tx >= 0.0 && ty >= 0.0 && tx < w as f64 && ty < h as f64) {
                continue;
            }
            let (tx, ty) = (tx as usize, ty as usize);
            let z = target.depth.or_else(|| frame.depth.get(x, y)).unwrap_or(f64::MAX);
            if z < *zbuf.get(tx, ty) {
                *zbuf.get_mut(tx, ty) = z;
                *image.get_mut(tx, ty) = *frame.image.get(x, y);
                *source.get_mut(tx, ty) = Some(y * w + x);
            }
        }
    }
    Ok(Splat {
        image,
        filled: source.map(|s| s.is_some()),
        source,
        depth: zbuf,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Filled {
    pub image: GrayImage,
    /// `false` only for holes that had no filled neighbour within the radius.
    pub filled: Grid<bool>,
}

/// Inverse-distance-weighted fill of every hole from the originally filled
/// pixels within `radius_px`.
pub fn fill_holes(image: &GrayImage, filled: &Grid<bool>, radius_px: f64) -> Result<Filled> {
    image.check_dims(filled, "image/fill mask")?;
    if !(radius_px >= 1.0) {
        return Err(Error::InvalidParameter(format!("fill radius {radius_px} < 1")));
    }
    let (w, h) = image.dims();
    let reach = radius_px.floor() as isize;
    let r2 = radius_px * radius_px;
    let mut out = image.clone();
    let mut out_mask = filled.clone();
    for y in 0..h {
        for x in 0..w {
            if *filled.get(x, y) {
                continue;
            }
            let mut acc = 0.0;
            let mut wsum = 0.0;
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    let d2 = (dx * dx + dy * dy) as f64;
                    if d2 == 0.0 || d2 > r2 {
                        continue;
                    }
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let (nx, ny) = (nx as usize, ny as usize);
                    if *filled.get(nx, ny) {
                        let wgt = 1.0 / d2.sqrt();
                        acc += wgt * f64::from(*image.get(nx, ny));
                        wsum += wgt;
                    }
                }
            }
            if wsum > 0.0 {
                *out.get_mut(x, y) = (acc / wsum) as f32;
                *out_mask.get_mut(x, y) = true;
            }
        }
    }
    Ok(Filled {
        image: out,
        filled: out_mask,
    })
}
