//! File formats: PFM float maps, Middlebury flow, 8-bit grayscale images,
//! key-value configs, text trajectories and IMU CSV.

pub mod config;
pub mod flo;
pub mod pfm;
pub mod text;

use std::path::Path;

use crate::error::Result;
use crate::grid::{GrayImage, Grid};

/// Loads any PNG or PGM as 8-bit grayscale.
pub fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let img = image::open(path)?.to_luma8();
    let (w, h) = img.dimensions();
    Grid::from_vec(
        w as usize,
        h as usize,
        img.into_raw().into_iter().map(f32::from).collect(),
    )
}

/// Saves as 8-bit grayscale; the format follows the extension (`.png`, `.pgm`).
/// Values are rounded and clamped to `[0, 255]`.
pub fn write_gray(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    let raw: Vec<u8> = img
        .as_slice()
        .iter()
        .map(|&v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, raw)
        .expect("buffer length matches dimensions");
    buf.save(path)?;
    Ok(())
}

/// 0/255 mask image.
pub fn write_mask(path: impl AsRef<Path>, mask: &Grid<bool>) -> Result<()> {
    write_gray(path, &mask.map(|&b| if b { 255.0 } else { 0.0 }))
}
