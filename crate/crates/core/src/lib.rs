//! Rolling-shutter camera geometry.
//!
//! Row-wise pose models, rolling-shutter synthesis and correction to the
//! row-0 frame, triangulation against a global-shutter view, IMU per-row
//! processing, ground-truth dataset generation and the EPE / improvement
//! ratio / ATE metrics.
//!
//! Start with the runnable programs in `examples/`; each covers one
//! capability end to end.

// `!(x >= y)` is used deliberately so NaN fails range checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod grid;
pub mod imu;
pub mod io;
pub mod se3;
pub mod spline;
pub mod synthetic;

pub use camera::{Intrinsics, Pixel, ReadoutClock, ScanlineLut};
pub use error::{Error, Result};
pub use grid::{GrayImage, Grid};
pub use se3::{Pose, RowPoseTable, Trajectory};
