use crate::camera::{Intrinsics, Pixel, ReadoutClock, ScanlineLut};
use crate::error::{Error, Result};
use crate::geometry::maps::{CoordinateMap, DepthMap, Target};
use crate::grid::{GrayImage, Grid};
use crate::se3::{Pose, RowPoseTable, Vec3};

/// A rolling-shutter image with its per-pixel depth and timing.
#[derive(Clone, Debug)]
pub struct RsFrame {
    pub image: GrayImage,
    pub depth: DepthMap,
    pub intrinsics: Intrinsics,
    pub clock: ReadoutClock,
    pub lut: Option<ScanlineLut>,
}

impl RsFrame {
    pub fn new(
        image: GrayImage,
        depth: DepthMap,
        intrinsics: Intrinsics,
        clock: ReadoutClock,
        lut: Option<ScanlineLut>,
    ) -> Result<Self> {
        let frame = Self {
            image,
            depth,
            intrinsics,
            clock,
            lut,
        };
        frame.validate()?;
        Ok(frame)
    }

    fn validate(&self) -> Result<()> {
        let (w, h) = self.image.dims();
        let mut problems = Vec::new();
        if (self.depth.width(), self.depth.height()) != (w, h) {
            problems.push(format!("depth {}x{}", self.depth.width(), self.depth.height()));
        }
        if (self.intrinsics.width, self.intrinsics.height) != (w, h) {
            problems.push(format!(
                "intrinsics {}x{}",
                self.intrinsics.width, self.intrinsics.height
            ));
        }
        if self.clock.image_rows != h {
            problems.push(format!("clock image_rows {}", self.clock.image_rows));
        }
        if let Some(lut) = &self.lut {
            if (lut.width(), lut.height()) != (w, h) {
                problems.push(format!("lut {}x{}", lut.width(), lut.height()));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "image {w}x{h} vs {}",
                problems.join(", ")
            )))
        }
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }

    /// Row-pose table index (fractional image row) of pixel `u`.
    pub fn table_row(&self, u: &Pixel) -> Result<f64> {
        let sensor = self.clock.sensor_row(self.lut.as_ref(), u, self.width())?;
        Ok(self.clock.image_row_of_sensor_row(sensor))
    }

    /// `row0_from_row` transform for pixel `u`.
    pub fn row_pose(&self, rowposes: &RowPoseTable, u: &Pixel) -> Result<Pose> {
        Ok(rowposes.at(self.table_row(u)?))
    }

    pub(crate) fn check_table(&self, rowposes: &RowPoseTable) -> Result<()> {
        if rowposes.len() != self.height() {
            return Err(Error::DimensionMismatch(format!(
                "row-pose table has {} rows, frame has {}",
                rowposes.len(),
                self.height()
            )));
        }
        Ok(())
    }
}

/// Moves pixel `u` at depth `d` through `transform` and reprojects it:
/// `K T (d K^-1 [u; 1])`.
pub fn pi_project(u: &Pixel, depth: f64, transform: &Pose, k: &Intrinsics) -> Result<Pixel> {
    Ok(pi_project_with_depth(u, depth, transform, k)?.0)
}

/// [`pi_project`] that also returns the transformed point's depth.
pub fn pi_project_with_depth(u: &Pixel, depth: f64, transform: &Pose, k: &Intrinsics) -> Result<(Pixel, f64)> {
    let x: Vec3 = transform.transform_point(&k.backproject(u, depth)?);
    Ok((k.project(&x)?, x.z))
}

/// Maps every valid-depth pixel into the row-0 frame using its own row
/// pose. Pixels without depth or that land behind the camera are invalid.
pub fn correction_map(frame: &RsFrame, rowposes: &RowPoseTable) -> Result<CoordinateMap> {
    frame.check_table(rowposes)?;
    let (w, h) = (frame.width(), frame.height());
    let k = &frame.intrinsics;
    let mut targets = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let u = Pixel::new(x as f64, y as f64);
            let target = match frame.depth.get(x, y) {
                Some(d) => {
                    let pose = frame.row_pose(rowposes, &u)?;
                    pi_project_with_depth(&u, d, &pose, k)
                        .ok()
                        .map(|(pixel, depth)| Target {
                            pixel,
                            depth: Some(depth),
                        })
                }
                None => None,
            };
            targets.push(target);
        }
    }
    Ok(CoordinateMap::new(Grid::from_vec(w, h, targets)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::motion::{constant_velocity_rowposes, identity_rowposes, Twist};
    use crate::se3::Rotation;

    fn k() -> Intrinsics {
        Intrinsics::new(100.0, 100.0, 160.0, 128.0, 320, 256).unwrap()
    }

    fn small_frame() -> RsFrame {
        let k = Intrinsics::new(40.0, 40.0, 12.0, 8.0, 24, 16).unwrap();
        let clock = ReadoutClock::new(29.4737e-6, 64, 16, 0.0).unwrap();
        let depth = DepthMap::from_dense(&Grid::from_fn(24, 16, |x, y| {
            if (x + y) % 7 == 0 {
                0.0
            } else {
                1.5 + 0.05 * x as f64
            }
        }));
        RsFrame::new(Grid::filled(24, 16, 0.0), depth, k, clock, None).unwrap()
    }

    #[test]
    fn pi_project_examples() {
        let u = Pixel::new(260.0, 128.0);
        assert!((pi_project(&u, 3.7, &Pose::identity(), &k()).unwrap() - u).norm() < 1e-12);
        let shifted = pi_project(&u, 2.0, &Pose::from_translation(0.1, 0.0, 0.0), &k()).unwrap();
        assert!((shifted - Pixel::new(265.0, 128.0)).norm() < 1e-12);

        let theta: f64 = 0.3;
        let rz = Pose::from_rotation(Rotation::from_axis_angle(&Vec3::z_axis(), theta));
        let r = 50.0;
        for d in [0.5, 2.0, 40.0] {
            let p = pi_project(&Pixel::new(160.0 + r, 128.0), d, &rz, &k()).unwrap();
            let expected = Pixel::new(160.0 + r * theta.cos(), 128.0 + r * theta.sin());
            assert!((p - expected).norm() < 1e-9);
        }
    }

    #[test]
    fn pi_project_errors() {
        let u = Pixel::new(10.0, 10.0);
        assert!(matches!(
            pi_project(&u, 0.0, &Pose::identity(), &k()),
            Err(Error::NonPositiveDepth { .. })
        ));
        assert!(matches!(
            pi_project(&u, 1.0, &Pose::from_translation(0.0, 0.0, -2.0), &k()),
            Err(Error::BehindCamera { .. })
        ));
    }

    #[test]
    fn static_table_gives_identity_map() {
        let f = small_frame();
        let map = correction_map(&f, &identity_rowposes(16)).unwrap();
        for y in 0..16 {
            for x in 0..24 {
                match f.depth.get(x, y) {
                    Some(_) => assert!((map.pixel(x, y).unwrap() - Pixel::new(x as f64, y as f64)).norm() < 1e-12),
                    None => assert!(map.get(x, y).is_none()),
                }
            }
        }
    }

    #[test]
    fn per_pixel_oracle_loop() {
        let f = small_frame();
        let twist = Twist::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 1.0));
        let table = constant_velocity_rowposes(&twist, &f.clock, 16).unwrap();
        let map = correction_map(&f, &table).unwrap();
        for y in 0..16 {
            for x in 0..24 {
                let Some(d) = f.depth.get(x, y) else { continue };
                let t = table.get(y);
                let u = Pixel::new(x as f64, y as f64);
                let expected = pi_project(&u, d, t, &f.intrinsics).unwrap();
                assert!((map.pixel(x, y).unwrap() - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_translation_is_uniform_pi_project() {
        let f = small_frame();
        let shift = Pose::from_translation(0.05, -0.01, 0.02);
        let mut rows = vec![shift; 16];
        rows[0] = Pose::identity();
        // row 0 must be identity, so compare rows >= 1 only
        let table = RowPoseTable::new(rows).unwrap();
        let map = correction_map(&f, &table).unwrap();
        for y in 1..16 {
            for x in 0..24 {
                let Some(d) = f.depth.get(x, y) else { continue };
                let expected = pi_project(&Pixel::new(x as f64, y as f64), d, &shift, &f.intrinsics).unwrap();
                assert!((map.pixel(x, y).unwrap() - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn table_length_must_match() {
        let f = small_frame();
        assert!(matches!(
            correction_map(&f, &identity_rowposes(15)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn frame_dimension_checks() {
        let k = Intrinsics::new(40.0, 40.0, 12.0, 8.0, 24, 16).unwrap();
        let clock = ReadoutClock::new(1e-5, 64, 16, 0.0).unwrap();
        let bad = RsFrame::new(Grid::filled(24, 16, 0.0), DepthMap::invalid(24, 15), k, clock, None);
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
    }
}
