//! Pinhole intrinsics, the rolling-shutter readout clock and the scanline
//! lookup table.
//!
//! Pixel convention: `(u, v)` with `u` the column and `v` the row, origin at
//! the center of the top-left pixel.

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::se3::Vec3;

pub type Pixel = Vector2<f64>;

/// Smallest camera-frame `z` accepted by [`Intrinsics::project`].
pub const MIN_Z: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.fx > 0.0
            && self.fy > 0.0
            && self.fx.is_finite()
            && self.fy.is_finite()
            && self.cx >= 0.0
            && self.cy >= 0.0
            && self.cx < self.width as f64
            && self.cy < self.height as f64;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid intrinsics {self:?}")))
        }
    }

    pub fn project(&self, x: &Vec3) -> Result<Pixel> {
        if !(x.z > MIN_Z) {
            return Err(Error::BehindCamera { z: x.z });
        }
        Ok(Pixel::new(self.fx * x.x / x.z + self.cx, self.fy * x.y / x.z + self.cy))
    }

    pub fn backproject(&self, u: &Pixel, depth: f64) -> Result<Vec3> {
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(Error::NonPositiveDepth { depth });
        }
        Ok(self.ray(u) * depth)
    }

    /// Unnormalized viewing ray `K^-1 [u; 1]` (unit `z`).
    #[inline]
    pub fn ray(&self, u: &Pixel) -> Vec3 {
        Vec3::new((u.x - self.cx) / self.fx, (u.y - self.cy) / self.fy, 1.0)
    }

    pub fn contains(&self, u: &Pixel) -> bool {
        u.x >= 0.0 && u.y >= 0.0 && u.x <= self.width as f64 - 1.0 && u.y <= self.height as f64 - 1.0
    }
}

/// Row readout timing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadoutClock {
    /// Time between consecutive sensor rows, seconds.
    pub row_period: f64,
    pub sensor_rows: usize,
    /// Rows of the (possibly downscaled) image.
    pub image_rows: usize,
    /// Capture time of sensor row 0, seconds.
    pub frame_start: f64,
}

impl ReadoutClock {
    pub fn new(row_period: f64, sensor_rows: usize, image_rows: usize, frame_start: f64) -> Result<Self> {
        let c = Self {
            row_period,
            sensor_rows,
            image_rows,
            frame_start,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.row_period > 0.0 && self.row_period.is_finite())
            || self.image_rows == 0
            || self.image_rows > self.sensor_rows
            || !self.frame_start.is_finite()
        {
            return Err(Error::InvalidParameter(format!("invalid readout clock {self:?}")));
        }
        Ok(())
    }

    pub fn with_frame_start(&self, frame_start: f64) -> Self {
        Self { frame_start, ..*self }
    }

    /// Sensor rows per image row.
    pub fn row_scale(&self) -> f64 {
        self.sensor_rows as f64 / self.image_rows as f64
    }

    /// Readout time between consecutive image rows.
    pub fn image_row_period(&self) -> f64 {
        self.row_scale() * self.row_period
    }

    /// Time to read the whole sensor.
    pub fn frame_readout(&self) -> f64 {
        self.sensor_rows as f64 * self.row_period
    }

    pub fn sensor_row_of_image_row(&self, v: f64) -> f64 {
        v * self.row_scale()
    }

    /// Fractional image row of a sensor row, i.e. the row-pose table index.
    pub fn image_row_of_sensor_row(&self, sensor_row: f64) -> f64 {
        sensor_row / self.row_scale()
    }

    pub fn time_of_sensor_row(&self, sensor_row: f64) -> f64 {
        self.frame_start + sensor_row * self.row_period
    }

    /// Capture time of image row `v` without a LUT.
    pub fn time_of_image_row(&self, v: f64) -> f64 {
        self.time_of_sensor_row(self.sensor_row_of_image_row(v))
    }

    /// Capture time of pixel `u`. With a LUT the sensor row is looked up,
    /// otherwise it is `v * sensor_rows / image_rows`.
    pub fn row_time(&self, lut: Option<&ScanlineLut>, u: &Pixel, width: usize) -> Result<f64> {
        Ok(self.time_of_sensor_row(self.sensor_row(lut, u, width)?))
    }

    /// Sensor row of pixel `u` (fractional).
    pub fn sensor_row(&self, lut: Option<&ScanlineLut>, u: &Pixel, width: usize) -> Result<f64> {
        let out_of_bounds = || Error::OutOfBounds {
            u: u.x,
            v: u.y,
            width,
            height: self.image_rows,
        };
        if !(u.x >= 0.0 && u.y >= 0.0 && u.x <= width as f64 - 1.0 && u.y <= self.image_rows as f64 - 1.0) {
            return Err(out_of_bounds());
        }
        match lut {
            Some(lut) => lut.sample(u).ok_or_else(out_of_bounds),
            None => Ok(self.sensor_row_of_image_row(u.y)),
        }
    }
}

/// Per-pixel original sensor row (fractional) of a rectified image.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanlineLut {
    table: Grid<f64>,
}

impl ScanlineLut {
    pub fn new(table: Grid<f64>, sensor_rows: usize) -> Result<Self> {
        if let Some(bad) = table
            .as_slice()
            .iter()
            .find(|&&r| !(r >= 0.0 && r < sensor_rows as f64))
        {
            return Err(Error::InvalidParameter(format!(
                "scanline {bad} outside [0, {sensor_rows})"
            )));
        }
        Ok(Self { table })
    }

    /// No-distortion table: `lut(u, v) = v * sensor_rows / rows`.
    pub fn identity(rows: usize, cols: usize, sensor_rows: usize) -> Self {
        let scale = sensor_rows as f64 / rows as f64;
        Self {
            table: Grid::from_fn(cols, rows, |_, v| v as f64 * scale),
        }
    }

    pub fn table(&self) -> &Grid<f64> {
        &self.table
    }

    pub fn width(&self) -> usize {
        self.table.width()
    }

    pub fn height(&self) -> usize {
        self.table.height()
    }

    pub fn at(&self, u: usize, v: usize) -> f64 {
        *self.table.get(u, v)
    }

    /// Bilinear lookup at a sub-pixel position.
    pub fn sample(&self, u: &Pixel) -> Option<f64> {
        self.table.sample_bilinear(u.x, u.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k() -> Intrinsics {
        Intrinsics::new(100.0, 100.0, 160.0, 128.0, 320, 256).unwrap()
    }

    #[test]
    fn project_examples() {
        assert_eq!(
            k().project(&Vec3::new(0.0, 0.0, 1.0)).unwrap(),
            Pixel::new(160.0, 128.0)
        );
        assert_eq!(
            k().project(&Vec3::new(2.0, 0.0, 2.0)).unwrap(),
            Pixel::new(260.0, 128.0)
        );
        assert!(matches!(
            k().project(&Vec3::new(1.0, 0.0, 0.0)),
            Err(Error::BehindCamera { .. })
        ));
        assert!(k().project(&Vec3::new(1.0, 0.0, -2.0)).is_err());
    }

    #[test]
    fn backproject_examples() {
        assert_eq!(
            k().backproject(&Pixel::new(160.0, 128.0), 5.0).unwrap(),
            Vec3::new(0.0, 0.0, 5.0)
        );
        assert_eq!(
            k().backproject(&Pixel::new(260.0, 128.0), 2.0).unwrap(),
            Vec3::new(2.0, 0.0, 2.0)
        );
        assert!(matches!(
            k().backproject(&Pixel::new(1.0, 1.0), 0.0),
            Err(Error::NonPositiveDepth { .. })
        ));
    }

    proptest! {
        #[test]
        fn project_backproject_roundtrip(u in 0.0f64..319.0, v in 0.0f64..255.0, d in 0.1f64..10.0) {
            let px = Pixel::new(u, v);
            let back = k().project(&k().backproject(&px, d).unwrap()).unwrap();
            prop_assert!((back - px).norm() < 1e-9);
        }

        #[test]
        fn row_time_monotone_without_lut(a in 0.0f64..255.0, b in 0.0f64..255.0) {
            let c = ReadoutClock::new(29.4737e-6, 1024, 256, 0.0).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let t_lo = c.row_time(None, &Pixel::new(3.0, lo), 320).unwrap();
            let t_hi = c.row_time(None, &Pixel::new(3.0, hi), 320).unwrap();
            prop_assert!(t_lo <= t_hi);
        }
    }

    #[test]
    fn row_time_examples() {
        let c = ReadoutClock::new(29.4737e-6, 1024, 256, 0.0).unwrap();
        assert_eq!(c.row_time(None, &Pixel::new(0.0, 0.0), 320).unwrap(), 0.0);
        assert_eq!(c.row_time(None, &Pixel::new(0.0, 1.0), 320).unwrap(), 4.0 * 29.4737e-6);
        assert_eq!(c.frame_readout(), 1024.0 * 29.4737e-6);
        let full = ReadoutClock::new(29.4737e-6, 1024, 1024, 0.0).unwrap();
        assert_eq!(full.frame_readout(), c.frame_readout());
        assert!(matches!(
            c.row_time(None, &Pixel::new(0.0, 256.0), 320),
            Err(Error::OutOfBounds { .. })
        ));
        let lut = ScanlineLut::identity(256, 320, 1024);
        let t = c.row_time(Some(&lut), &Pixel::new(17.0, 9.0), 320).unwrap();
        assert_eq!(t, 36.0 * 29.4737e-6);
    }

    #[test]
    fn identity_lut_examples() {
        let lut = ScanlineLut::identity(256, 320, 1024);
        assert_eq!(lut.at(5, 0), 0.0);
        assert_eq!(lut.at(5, 255), 1020.0);
        let same = ScanlineLut::identity(64, 8, 64);
        assert!((0..64).all(|v| same.at(3, v) == v as f64));
    }

    #[test]
    fn lut_validation() {
        assert!(ScanlineLut::new(Grid::filled(2, 2, 1024.0), 1024).is_err());
        assert!(ScanlineLut::new(Grid::filled(2, 2, 1023.5), 1024).is_ok());
    }
}
