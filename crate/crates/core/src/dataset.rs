//! Ground-truth generation for real rolling-shutter sequences.
//!
//! A sequence manifest lists RS frames with their flow to a rigidly mounted
//! global-shutter camera (GS0). For each frame the motion-capture trajectory
//! gives the row-pose table, flow plus the rig extrinsics give depth by
//! triangulation, and correction to row 0 gives the ground-truth map and the
//! corrected image.
//!
//! Manifest format (`key = value`, paths relative to the manifest):
//!
//! ```text
//! sequence = seq01
//! calibration = calib.cfg
//! trajectory = groundtruth.txt    # world_from_rs, timestamp tx ty tz qx qy qz qw
//! valid_fraction_threshold = 0.25
//! flow_tolerance_px = 1.0
//! frame = 000000 1.2500 rs/000000.png flow/000000_fwd.flo flow/000000_bwd.flo
//! ```
//!
//! Forward flow maps RS pixels into GS0, backward flow maps GS0 pixels into RS.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::camera::{Pixel, ScanlineLut};
use crate::error::{Error, Result};
use crate::geometry::flow::bidirectional_filter;
use crate::geometry::frame::{correction_map, RsFrame};
use crate::geometry::maps::{CoordinateMap, DepthMap, FlowField};
use crate::geometry::render::{fill_holes, render_corrected, DEFAULT_FILL_RADIUS};
use crate::geometry::triangulate::triangulate;
use crate::grid::{GrayImage, Grid};
use crate::io::config::{Calibration, KeyValues};
use crate::io::{flo, pfm, read_gray, text, write_gray};
use crate::se3::{RowPoseTable, Trajectory, TrajectorySpline};

pub const DEFAULT_VALID_FRACTION_THRESHOLD: f64 = 0.25;
pub const DEFAULT_FLOW_TOLERANCE_PX: f64 = 1.0;

/// Name of the marker written when an export stops on an I/O error.
pub const INCOMPLETE_MARKER: &str = "INCOMPLETE";

#[derive(Clone, Debug, PartialEq)]
pub struct FrameEntry {
    pub id: String,
    /// Capture time of row 0, seconds.
    pub timestamp: f64,
    pub rs_image: PathBuf,
    pub flow_fwd: PathBuf,
    pub flow_bwd: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationOptions {
    pub flow_tolerance_px: f64,
    pub valid_fraction_threshold: f64,
    pub fill_radius_px: f64,
    /// Drop triangulations whose rays pass farther apart than this, meters.
    pub max_ray_residual: Option<f64>,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self {
            flow_tolerance_px: DEFAULT_FLOW_TOLERANCE_PX,
            valid_fraction_threshold: DEFAULT_VALID_FRACTION_THRESHOLD,
            fill_radius_px: DEFAULT_FILL_RADIUS,
            max_ray_residual: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceManifest {
    pub name: String,
    pub calibration: Calibration,
    pub trajectory: PathBuf,
    pub imu: Option<PathBuf>,
    pub frames: Vec<FrameEntry>,
    pub options: GenerationOptions,
}

impl SequenceManifest {
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        let mut frames = Vec::new();
        for line in kv.get_all("frame") {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 {
                return Err(Error::Config(format!(
                    "`frame` needs `<id> <timestamp> <rs image> <fwd flow> <bwd flow>`, got {line:?}"
                )));
            }
            let timestamp = f[1]
                .parse()
                .map_err(|_| Error::Config(format!("frame {}: bad timestamp {:?}", f[0], f[1])))?;
            frames.push(FrameEntry {
                id: f[0].to_owned(),
                timestamp,
                rs_image: kv.resolve(f[2]),
                flow_fwd: kv.resolve(f[3]),
                flow_bwd: kv.resolve(f[4]),
            });
        }
        let defaults = GenerationOptions::default();
        Ok(Self {
            name: kv.require("sequence")?.to_owned(),
            calibration: Calibration::from_config(kv)?,
            trajectory: kv
                .get_path("trajectory")
                .ok_or_else(|| Error::Config("missing key `trajectory`".into()))?,
            imu: kv.get_path("imu"),
            frames,
            options: GenerationOptions {
                flow_tolerance_px: kv.parse_key("flow_tolerance_px")?.unwrap_or(defaults.flow_tolerance_px),
                valid_fraction_threshold: kv
                    .parse_key("valid_fraction_threshold")?
                    .unwrap_or(defaults.valid_fraction_threshold),
                fill_radius_px: kv.parse_key("fill_radius_px")?.unwrap_or(defaults.fill_radius_px),
                max_ray_residual: kv.parse_key("max_ray_residual")?,
            },
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_config(&KeyValues::read(path)?)
    }
}

/// A manifest with its trajectory spline and scanline table loaded.
#[derive(Clone, Debug)]
pub struct Sequence {
    pub manifest: SequenceManifest,
    pub trajectory: Trajectory,
    pub spline: TrajectorySpline,
    pub lut: Option<ScanlineLut>,
}

impl Sequence {
    pub fn load(manifest: SequenceManifest) -> Result<Self> {
        let trajectory = text::read_trajectory(&manifest.trajectory)?;
        let spline = trajectory.spline()?;
        let lut = match &manifest.calibration.lut_path {
            Some(p) => Some(pfm::read_lut(p, manifest.calibration.clock.sensor_rows)?),
            None => None,
        };
        Ok(Self {
            manifest,
            trajectory,
            spline,
            lut,
        })
    }

    /// Row-pose table and row capture times for a frame whose row 0 is read
    /// at `frame_time`.
    pub fn row_poses(&self, frame_time: f64) -> Result<(RowPoseTable, Vec<f64>)> {
        let clock = self.manifest.calibration.clock.with_frame_start(frame_time);
        row_pose_table(&self.spline, &clock, clock.image_rows)
    }
}

/// Spline-interpolated `row0_from_row` poses at the capture time of each
/// image row, plus those times. Fails with `QueryOutOfRange` when the readout
/// window leaves the trajectory span.
pub fn row_pose_table(
    spline: &TrajectorySpline,
    clock: &crate::camera::ReadoutClock,
    rows: usize,
) -> Result<(RowPoseTable, Vec<f64>)> {
    let times: Vec<f64> = (0..rows).map(|r| clock.time_of_image_row(r as f64)).collect();
    let world = times.iter().map(|&t| spline.pose_at(t)).collect::<Result<Vec<_>>>()?;
    Ok((RowPoseTable::from_world_poses(&world), times))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrameStats {
    pub pixels: usize,
    pub flow_consistent: usize,
    pub triangulated: usize,
    pub degenerate_rays: usize,
    pub behind_camera: usize,
    pub residual_rejected: usize,
    pub max_residual: f64,
}

impl FrameStats {
    /// Share of pixels with triangulated depth.
    pub fn valid_fraction(&self) -> f64 {
        if self.pixels == 0 {
            0.0
        } else {
            self.triangulated as f64 / self.pixels as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundTruthFrame {
    pub depth: DepthMap,
    pub rowposes: RowPoseTable,
    pub gt_map: CoordinateMap,
    pub gs1_image: GrayImage,
    /// Pixels of `gs1_image` that hold a value after hole filling.
    pub gs1_valid: Grid<bool>,
    pub stats: FrameStats,
    /// Valid fraction below the configured threshold.
    pub flagged: bool,
}

/// Ground truth from in-memory inputs.
pub fn generate_ground_truth(
    rs_image: GrayImage,
    rowposes: RowPoseTable,
    calibration: &Calibration,
    lut: Option<&ScanlineLut>,
    flow_fwd: &FlowField,
    flow_bwd: &FlowField,
    options: &GenerationOptions,
) -> Result<GroundTruthFrame> {
    rs_image.check_dims(flow_fwd, "image/forward flow")?;
    let mask = bidirectional_filter(flow_fwd, flow_bwd, options.flow_tolerance_px)?;
    let (w, h) = rs_image.dims();
    let mut frame = RsFrame::new(
        rs_image,
        DepthMap::invalid(w, h),
        calibration.intrinsics,
        calibration.clock,
        lut.cloned(),
    )?;
    frame.check_table(&rowposes)?;

    let mut stats = FrameStats {
        pixels: w * h,
        ..Default::default()
    };
    let mut depth = DepthMap::invalid(w, h);
    for y in 0..h {
        for x in 0..w {
            if !*mask.get(x, y) {
                continue;
            }
            stats.flow_consistent += 1;
            let u = Pixel::new(x as f64, y as f64);
            let f = flow_fwd.get(x, y);
            let u_gs0 = Pixel::new(u.x + f[0], u.y + f[1]);
            let gs0_from_row = calibration.gs0_from_rs.compose(&frame.row_pose(&rowposes, &u)?);
            match triangulate(
                &u_gs0,
                &u,
                &gs0_from_row,
                &calibration.intrinsics,
                &calibration.gs0_intrinsics,
            ) {
                Ok(t) => {
                    if options.max_ray_residual.is_some_and(|m| t.residual > m) {
                        stats.residual_rejected += 1;
                        continue;
                    }
                    stats.max_residual = stats.max_residual.max(t.residual);
                    stats.triangulated += 1;
                    depth.set(x, y, Some(t.depth));
                }
                Err(Error::DegenerateRays { .. }) => stats.degenerate_rays += 1,
                Err(Error::NegativeDepth { .. }) => stats.behind_camera += 1,
                Err(e) => return Err(e),
            }
        }
    }

    frame.depth = depth;
    let gt_map = correction_map(&frame, &rowposes)?;
    let splat = render_corrected(&frame, &gt_map)?;
    let filled = fill_holes(&splat.image, &splat.filled, options.fill_radius_px)?;
    let flagged = stats.valid_fraction() < options.valid_fraction_threshold;
    Ok(GroundTruthFrame {
        depth: frame.depth,
        rowposes,
        gt_map,
        gs1_image: filled.image,
        gs1_valid: filled.filled,
        stats,
        flagged,
    })
}

/// Ground truth for frame `index` of a loaded sequence.
pub fn generate_frame(
    seq: &Sequence,
    index: usize,
    flow_fwd: &FlowField,
    flow_bwd: &FlowField,
) -> Result<GroundTruthFrame> {
    let entry = seq.manifest.frames.get(index).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "frame index {index} out of range ({} frames)",
            seq.manifest.frames.len()
        ))
    })?;
    let (rowposes, _) = seq.row_poses(entry.timestamp)?;
    let image = read_gray(&entry.rs_image)?;
    generate_ground_truth(
        image,
        rowposes,
        &seq.manifest.calibration,
        seq.lut.as_ref(),
        flow_fwd,
        flow_bwd,
        &seq.manifest.options,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub enum FrameOutcome {
    Kept { valid_fraction: f64, flagged: bool },
    Dropped { reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameRecord {
    pub id: String,
    pub outcome: FrameOutcome,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DatasetSummary {
    pub sequence: String,
    pub frames: Vec<FrameRecord>,
}

impl DatasetSummary {
    pub fn frames_in(&self) -> usize {
        self.frames.len()
    }

    pub fn kept(&self) -> usize {
        self.frames
            .iter()
            .filter(|f| matches!(f.outcome, FrameOutcome::Kept { .. }))
            .count()
    }

    pub fn dropped(&self) -> usize {
        self.frames_in() - self.kept()
    }

    pub fn flagged(&self) -> usize {
        self.frames
            .iter()
            .filter(|f| matches!(f.outcome, FrameOutcome::Kept { flagged: true, .. }))
            .count()
    }

    /// `frame_id,status,reason,valid_fraction,flagged`
    pub fn to_csv(&self) -> String {
        let mut s = String::from("frame_id,status,reason,valid_fraction,flagged\n");
        for f in &self.frames {
            match &f.outcome {
                FrameOutcome::Kept {
                    valid_fraction,
                    flagged,
                } => {
                    let _ = writeln!(
                        s,
                        "{},kept,,{},{}",
                        f.id,
                        crate::eval::sig6(*valid_fraction),
                        u8::from(*flagged)
                    );
                }
                FrameOutcome::Dropped { reason } => {
                    let _ = writeln!(s, "{},dropped,{reason},,", f.id);
                }
            }
        }
        s
    }
}

fn is_io(e: &Error) -> bool {
    matches!(e, Error::Io(_) | Error::Image(_) | Error::Csv(_) | Error::Format { .. })
}

/// Writes `out_dir/<sequence>/<frame id>/{rs.png, gs1.png, depth.pfm,
/// gtmap.pfm, rowposes.txt}` for every frame plus `summary.csv`.
///
/// Frames whose readout leaves the trajectory, or whose geometry fails, are
/// dropped with the error class as reason. An I/O or format error stops the
/// export and leaves an `INCOMPLETE` marker in the sequence directory.
pub fn export_dataset(manifest: &SequenceManifest, out_dir: impl AsRef<Path>) -> Result<DatasetSummary> {
    let seq_dir = out_dir.as_ref().join(&manifest.name);
    fs::create_dir_all(&seq_dir)?;
    let marker = seq_dir.join(INCOMPLETE_MARKER);
    let result = export_into(manifest, &seq_dir);
    match &result {
        Err(e) if is_io(e) => {
            fs::write(&marker, format!("{e}\n"))?;
        }
        Ok(_) if marker.exists() => fs::remove_file(&marker)?,
        _ => {}
    }
    result
}

fn export_into(manifest: &SequenceManifest, seq_dir: &Path) -> Result<DatasetSummary> {
    let seq = Sequence::load(manifest.clone())?;
    let mut summary = DatasetSummary {
        sequence: manifest.name.clone(),
        frames: Vec::new(),
    };
    for (index, entry) in manifest.frames.iter().enumerate() {
        let outcome = match export_frame(&seq, index, entry, seq_dir) {
            Ok(gt) => FrameOutcome::Kept {
                valid_fraction: gt.stats.valid_fraction(),
                flagged: gt.flagged,
            },
            Err(e) if is_io(&e) => return Err(e),
            Err(e) => FrameOutcome::Dropped {
                reason: e.class().to_owned(),
            },
        };
        summary.frames.push(FrameRecord {
            id: entry.id.clone(),
            outcome,
        });
    }
    fs::write(seq_dir.join("summary.csv"), summary.to_csv())?;
    Ok(summary)
}

fn export_frame(seq: &Sequence, index: usize, entry: &FrameEntry, seq_dir: &Path) -> Result<GroundTruthFrame> {
    let (_, times) = seq.row_poses(entry.timestamp)?;
    let fwd = flo::read(&entry.flow_fwd)?;
    let bwd = flo::read(&entry.flow_bwd)?;
    let gt = generate_frame(seq, index, &fwd, &bwd)?;
    let dir = seq_dir.join(&entry.id);
    fs::create_dir_all(&dir)?;
    fs::copy(&entry.rs_image, dir.join("rs.png"))?;
    write_gray(dir.join("gs1.png"), &gt.gs1_image)?;
    pfm::write_depth(dir.join("depth.pfm"), &gt.depth)?;
    pfm::write_coordinate_map(dir.join("gtmap.pfm"), &gt.gt_map)?;
    text::write_rowposes(dir.join("rowposes.txt"), &gt.rowposes, &times)?;
    Ok(gt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{Intrinsics, ReadoutClock};
    use crate::geometry::maps::epe;
    use crate::geometry::synth::synthesize_rs;
    use crate::imu::ImuExtrinsics;
    use crate::se3::{Pose, Rotation, Vec3};
    use crate::synthetic;

    fn calibration(w: usize, h: usize) -> Calibration {
        let k = Intrinsics::new(60.0, 60.0, w as f64 / 2.0, h as f64 / 2.0, w, h).unwrap();
        Calibration {
            intrinsics: k,
            gs0_intrinsics: k,
            clock: ReadoutClock::new(29.4737e-6, 4 * h, h, 0.0).unwrap(),
            gs0_from_rs: Pose::new(
                Rotation::from_scaled_axis(Vec3::new(0.0, 0.01, 0.0)),
                Vec3::new(0.12, 0.0, 0.0),
            ),
            imu: ImuExtrinsics::default(),
            lut_path: None,
        }
    }

    struct Scene {
        calib: Calibration,
        rs: RsFrame,
        table: RowPoseTable,
        gt_map: CoordinateMap,
        fwd: FlowField,
        bwd: FlowField,
    }

    fn scene(seed: u64, moving: bool) -> Scene {
        let (w, h) = (48, 32);
        let calib = calibration(w, h);
        let mut rng = synthetic::rng(seed);
        let gs = synthetic::texture(&mut rng, w, h);
        let depth = synthetic::random_plane_depth(&mut rng, &calib.intrinsics);
        let table = if moving {
            synthetic::PolynomialMotion::random(&mut rng, 0.5, 0.3).row_table(&calib.clock, h)
        } else {
            RowPoseTable::identity(h)
        };
        let synth = synthesize_rs(&gs, &depth, &table, &calib.intrinsics, &calib.clock, None).unwrap();
        let (fwd, bwd) =
            synthetic::analytic_flow(&synth.frame, &table, &calib.gs0_from_rs, &calib.gs0_intrinsics).unwrap();
        Scene {
            calib,
            rs: synth.frame,
            table,
            gt_map: synth.gt_map,
            fwd,
            bwd,
        }
    }

    #[test]
    fn recovers_synthetic_depth_and_map() {
        let s = scene(11, true);
        let gt = generate_ground_truth(
            s.rs.image.clone(),
            s.table.clone(),
            &s.calib,
            None,
            &s.fwd,
            &s.bwd,
            &GenerationOptions::default(),
        )
        .unwrap();
        assert!(gt.stats.triangulated > s.rs.depth.valid_count() / 2);
        assert!(gt.stats.max_residual < 1e-9);
        for y in 0..s.rs.height() {
            for x in 0..s.rs.width() {
                if let (Some(a), Some(b)) = (gt.depth.get(x, y), s.rs.depth.get(x, y)) {
                    assert!((a - b).abs() < 1e-6, "depth at ({x},{y}): {a} vs {b}");
                }
            }
        }
        let e = epe(&gt.gt_map, &s.gt_map).unwrap();
        assert!(e.max_px < 1e-6, "{e:?}");
        assert!(!gt.flagged);
    }

    #[test]
    fn zero_motion_copies_valid_pixels() {
        let s = scene(12, false);
        let gt = generate_ground_truth(
            s.rs.image.clone(),
            s.table.clone(),
            &s.calib,
            None,
            &s.fwd,
            &s.bwd,
            &GenerationOptions::default(),
        )
        .unwrap();
        let mut checked = 0;
        for y in 0..s.rs.height() {
            for x in 0..s.rs.width() {
                if gt.depth.get(x, y).is_some() {
                    assert_eq!(gt.gs1_image.get(x, y), s.rs.image.get(x, y));
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn inconsistent_flow_is_masked() {
        let s = scene(13, true);
        let opts = GenerationOptions::default();
        let run = |fwd: &FlowField| {
            generate_ground_truth(s.rs.image.clone(), s.table.clone(), &s.calib, None, fwd, &s.bwd, &opts).unwrap()
        };
        let clean = run(&s.fwd);
        let mut corrupted = s.fwd.clone();
        let mut hit = 0;
        for y in (0..s.rs.height()).step_by(3) {
            for x in (0..s.rs.width()).step_by(5) {
                if clean.depth.get(x, y).is_some() {
                    corrupted.get_mut(x, y)[0] += 5.0;
                    hit += 1;
                }
            }
        }
        let dirty = run(&corrupted);
        assert_eq!(clean.stats.flow_consistent - dirty.stats.flow_consistent, hit);
        assert_eq!(clean.stats.triangulated - dirty.stats.triangulated, hit);
        assert!(dirty.stats.valid_fraction() < clean.stats.valid_fraction());
    }

    #[test]
    fn low_coverage_is_flagged() {
        let s = scene(14, true);
        let nan = Grid::filled(s.rs.width(), s.rs.height(), [f64::NAN; 2]);
        let gt = generate_ground_truth(
            s.rs.image.clone(),
            s.table.clone(),
            &s.calib,
            None,
            &nan,
            &s.bwd,
            &GenerationOptions::default(),
        )
        .unwrap();
        assert_eq!(gt.stats.triangulated, 0);
        assert!(gt.flagged);
    }

    #[test]
    fn manifest_parsing() {
        let text = "\
sequence = s1
fx = 60
fy = 60
cx = 24
cy = 16
width = 48
height = 32
row_period_us = 29.4737
sensor_rows = 128
trajectory = gt.txt
frame = 0001 1.5 rs/1.png f/1_fwd.flo f/1_bwd.flo
frame = 0002 1.6 rs/2.png f/2_fwd.flo f/2_bwd.flo
";
        let m = SequenceManifest::from_config(&KeyValues::parse(text).unwrap()).unwrap();
        assert_eq!(m.name, "s1");
        assert_eq!(m.frames.len(), 2);
        assert_eq!(m.frames[1].timestamp, 1.6);
        assert_eq!(m.options.valid_fraction_threshold, DEFAULT_VALID_FRACTION_THRESHOLD);
        let bad = text.replace("1.6 rs/2.png", "rs/2.png");
        assert!(SequenceManifest::from_config(&KeyValues::parse(&bad).unwrap()).is_err());
    }
}
