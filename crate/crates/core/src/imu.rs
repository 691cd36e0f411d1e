//! IMU ingestion, rotation into the camera frame, per-row resampling and a
//! gyro-integration row-pose estimator.
//!
//! The estimator is rotation-only. Accelerometer samples are carried and
//! resampled per row but not integrated: translation from double
//! integration needs an initial velocity and gravity estimate that a single
//! frame does not provide.

use crate::camera::ReadoutClock;
use crate::error::{Error, Result};
use crate::se3::{exp_so3, Pose, Rotation, RowPoseTable, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuSample {
    /// seconds
    pub time: f64,
    /// rad/s
    pub gyro: Vec3,
    /// m/s^2
    pub accel: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImuFrame {
    Imu,
    Camera,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImuSeries {
    samples: Vec<ImuSample>,
    frame: ImuFrame,
}

/// Rotation taking IMU-frame vectors into the camera frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ImuExtrinsics {
    pub cam_from_imu: Rotation,
}

/// Gyro and accelerometer values at one image row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RowImu {
    pub time: f64,
    pub gyro: Vec3,
    pub accel: Vec3,
}

impl ImuSeries {
    pub fn new(samples: Vec<ImuSample>, frame: ImuFrame) -> Result<Self> {
        if let Some(i) = samples.windows(2).position(|w| w[1].time <= w[0].time) {
            return Err(Error::NonMonotonicTimestamps { index: i + 1 });
        }
        if let Some(s) = samples
            .iter()
            .find(|s| !s.time.is_finite() || s.gyro.iter().chain(s.accel.iter()).any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidParameter(format!(
                "non-finite IMU sample at t={}",
                s.time
            )));
        }
        Ok(Self { samples, frame })
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    pub fn frame(&self) -> ImuFrame {
        self.frame
    }

    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.time, self.samples.last()?.time))
    }

    fn coverage_gap(&self, time: f64) -> Error {
        let (start, end) = self.span().unwrap_or((f64::NAN, f64::NAN));
        Error::CoverageGap { time, start, end }
    }

    /// Linearly interpolated `(gyro, accel)` at `t`.
    pub fn interpolate_at(&self, t: f64) -> Result<(Vec3, Vec3)> {
        let s = &self.samples;
        let (start, end) = self.span().ok_or_else(|| self.coverage_gap(t))?;
        if !(t >= start && t <= end) {
            return Err(self.coverage_gap(t));
        }
        let i = s.partition_point(|x| x.time <= t);
        if i == s.len() {
            let last = &s[s.len() - 1];
            return Ok((last.gyro, last.accel));
        }
        let (a, b) = (&s[i - 1], &s[i]);
        if t == a.time {
            return Ok((a.gyro, a.accel));
        }
        let f = (t - a.time) / (b.time - a.time);
        Ok((a.gyro + (b.gyro - a.gyro) * f, a.accel + (b.accel - a.accel) * f))
    }
}

/// Rotates gyro and accelerometer vectors into the camera frame.
pub fn rotate_to_camera(series: &ImuSeries, ext: &ImuExtrinsics) -> Result<ImuSeries> {
    if series.frame == ImuFrame::Camera {
        return Err(Error::AlreadyInCameraFrame);
    }
    let samples = series
        .samples
        .iter()
        .map(|s| ImuSample {
            time: s.time,
            gyro: ext.cam_from_imu * s.gyro,
            accel: ext.cam_from_imu * s.accel,
        })
        .collect();
    Ok(ImuSeries {
        samples,
        frame: ImuFrame::Camera,
    })
}

/// IMU values linearly interpolated at the capture time of each image row.
pub fn per_row_interpolate(series: &ImuSeries, clock: &ReadoutClock, rows: usize) -> Result<Vec<RowImu>> {
    (0..rows)
        .map(|r| {
            let time = clock.time_of_image_row(r as f64);
            let (gyro, accel) = series.interpolate_at(time)?;
            Ok(RowImu { time, gyro, accel })
        })
        .collect()
}

/// Anything that can report body angular velocity at a time.
pub trait AngularRateSource {
    /// Time range over which [`rate_at`](Self::rate_at) succeeds.
    fn coverage(&self) -> Option<(f64, f64)>;
    fn rate_at(&self, t: f64) -> Result<Vec3>;
}

impl AngularRateSource for ImuSeries {
    fn coverage(&self) -> Option<(f64, f64)> {
        self.span()
    }

    fn rate_at(&self, t: f64) -> Result<Vec3> {
        Ok(self.interpolate_at(t)?.0)
    }
}

/// Closure-backed rate source, mostly for analytic motion.
pub struct RateFn<F> {
    pub start: f64,
    pub end: f64,
    pub rate: F,
}

impl<F: Fn(f64) -> Vec3> AngularRateSource for RateFn<F> {
    fn coverage(&self) -> Option<(f64, f64)> {
        Some((self.start, self.end))
    }

    fn rate_at(&self, t: f64) -> Result<Vec3> {
        if !(t >= self.start && t <= self.end) {
            return Err(Error::CoverageGap {
                time: t,
                start: self.start,
                end: self.end,
            });
        }
        Ok((self.rate)(t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GyroIntegration {
    /// Constant gyro bias subtracted before integration, rad/s.
    pub bias: Vec3,
    /// Midpoint sub-steps per image row step.
    pub substeps: usize,
}

impl Default for GyroIntegration {
    fn default() -> Self {
        Self {
            bias: Vec3::zeros(),
            substeps: 1,
        }
    }
}

/// Rotation-only row poses from camera-frame gyro data.
pub fn gyro_integrate_rowposes(series: &ImuSeries, clock: &ReadoutClock, rows: usize) -> Result<RowPoseTable> {
    if series.frame != ImuFrame::Camera {
        return Err(Error::InvalidParameter(
            "gyro integration expects a camera-frame series".into(),
        ));
    }
    integrate_rowposes(series, clock, rows, &GyroIntegration::default())
}

/// Midpoint-rule integration `R[r+1] = R[r] exp(w(t_mid) dt)` from row 0,
/// renormalized after every step.
pub fn integrate_rowposes(
    source: &impl AngularRateSource,
    clock: &ReadoutClock,
    rows: usize,
    options: &GyroIntegration,
) -> Result<RowPoseTable> {
    if rows == 0 {
        return Ok(RowPoseTable::identity(0));
    }
    if options.substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be >= 1".into()));
    }
    let t0 = clock.time_of_image_row(0.0);
    let t_last = clock.time_of_image_row((rows - 1) as f64);
    let (start, end) = source.coverage().unwrap_or((f64::NAN, f64::NAN));
    for t in [t0, t_last] {
        if !(t >= start && t <= end) {
            return Err(Error::CoverageGap { time: t, start, end });
        }
    }

    let mut poses = Vec::with_capacity(rows);
    let mut rot = Rotation::identity();
    poses.push(Pose::identity());
    for r in 1..rows {
        let ta = clock.time_of_image_row((r - 1) as f64);
        let tb = clock.time_of_image_row(r as f64);
        let h = (tb - ta) / options.substeps as f64;
        for k in 0..options.substeps {
            let mid = ta + (k as f64 + 0.5) * h;
            let omega = source.rate_at(mid)? - options.bias;
            rot = Rotation::new_normalize((rot * exp_so3(&(omega * h))).into_inner());
        }
        poses.push(Pose::from_rotation(rot));
    }
    RowPoseTable::new(poses)
}
