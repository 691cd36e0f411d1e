//! The `rollshutter` command-line tool.
//!
//! Every subcommand reads plain files and writes plain files; reports are
//! CSV with numbers printed to six significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::camera::ScanlineLut;
use crate::dataset::{export_dataset, generate_ground_truth, GenerationOptions, SequenceManifest};
use crate::error::{Error, Result};
use crate::eval::{aggregate_epe, ate_sim3, improvement_ratio, sig6};
use crate::geometry::frame::{correction_map, RsFrame};
use crate::geometry::maps::{epe, CoordinateMap, EpeReport};
use crate::geometry::render::{fill_holes, render_corrected, DEFAULT_FILL_RADIUS};
use crate::geometry::synth::synthesize_rs;
use crate::imu::{integrate_rowposes, rotate_to_camera, GyroIntegration};
use crate::io::config::{parse_floats, Calibration, KeyValues};
use crate::io::{flo, pfm, read_gray, text, write_gray, write_mask};
use crate::se3::Vec3;
use crate::synthetic;

#[derive(Debug, Parser)]
#[command(name = "rollshutter", version, about = "Rolling-shutter geometry toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic rolling-shutter frame with exact ground truth.
    Synthesize(SynthesizeArgs),
    /// Correct a rolling-shutter frame to its row-0 pose.
    Correct(CorrectArgs),
    /// Generate a ground-truth dataset from a sequence manifest.
    GenGt(GenGtArgs),
    /// End-point error of coordinate maps against ground truth.
    EvaluateEpe(EpeArgs),
    /// Absolute trajectory error after similarity alignment.
    EvaluateAte(AteArgs),
    /// Rotation-only row poses from gyroscope data.
    ImuRowposes(ImuArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DepthModel {
    Plane,
    Smooth,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    /// Calibration file; scene keys `seed`, `angular_rate`, `linear_rate`,
    /// `gs_image` and `gs_depth` are optional.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "plane")]
    pub depth_model: DepthModel,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Rolling-shutter image (PNG/PGM).
    #[arg(long)]
    pub image: PathBuf,
    /// Per-pixel RS depth (PFM, 0 = invalid).
    #[arg(long)]
    pub depth: PathBuf,
    #[arg(long)]
    pub rowposes: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FILL_RADIUS)]
    pub fill_radius: f64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenGtArgs {
    /// Sequence manifest, or a calibration file in single-frame mode.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Single-frame mode: RS-to-GS0 flow (.flo).
    #[arg(long, requires_all = ["flow_bwd", "image", "rowposes"])]
    pub flow_fwd: Option<PathBuf>,
    /// Single-frame mode: GS0-to-RS flow (.flo).
    #[arg(long, requires = "flow_fwd")]
    pub flow_bwd: Option<PathBuf>,
    /// Single-frame mode: the RS image.
    #[arg(long, requires = "flow_fwd")]
    pub image: Option<PathBuf>,
    /// Single-frame mode: row poses of the frame.
    #[arg(long, requires = "flow_fwd")]
    pub rowposes: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EpeArgs {
    /// Predicted maps, one per frame.
    #[arg(long, required = true, num_args = 1..)]
    pub pred: Vec<PathBuf>,
    /// Ground-truth maps in the same order.
    #[arg(long, required = true, num_args = 1..)]
    pub gt: Vec<PathBuf>,
    /// Uncorrected-input maps for the improvement ratio.
    #[arg(long, num_args = 1.., conflicts_with = "identity_baseline")]
    pub baseline: Vec<PathBuf>,
    /// Use the identity map (no correction) as the baseline.
    #[arg(long)]
    pub identity_baseline: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AteArgs {
    /// Estimated trajectories; the report lists each and their mean.
    #[arg(long, required = true, num_args = 1..)]
    pub est: Vec<PathBuf>,
    #[arg(long)]
    pub gt: PathBuf,
    /// Association tolerance in seconds; defaults to half the estimate's
    /// median sample spacing.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ImuArgs {
    /// Calibration with `cam_from_imu`.
    #[arg(long)]
    pub config: PathBuf,
    /// IMU CSV `timestamp,wx,wy,wz,ax,ay,az` in the IMU frame.
    #[arg(long)]
    pub imu: PathBuf,
    /// Capture time of image row 0, seconds.
    #[arg(long)]
    pub frame_time: f64,
    /// Gyro bias `wx,wy,wz` in rad/s, camera frame.
    #[arg(long)]
    pub bias: Option<String>,
    #[arg(long, default_value_t = 4)]
    pub substeps: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs a parsed command, writing the human-readable summary to `out`.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<()> {
    let summary = match cli.command {
        Command::Synthesize(a) => synthesize(&a)?,
        Command::Correct(a) => correct(&a)?,
        Command::GenGt(a) => gen_gt(&a)?,
        Command::EvaluateEpe(a) => evaluate_epe(&a)?,
        Command::EvaluateAte(a) => evaluate_ate(&a)?,
        Command::ImuRowposes(a) => imu_rowposes(&a)?,
    };
    out.write_all(summary.as_bytes())?;
    Ok(())
}

/// Parses `args` and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.class());
            e.exit_code()
        }
    }
}

fn load_lut(calib: &Calibration) -> Result<Option<ScanlineLut>> {
    calib
        .lut_path
        .as_ref()
        .map(|p| pfm::read_lut(p, calib.clock.sensor_rows))
        .transpose()
}

fn write_report(path: Option<&Path>, csv: &str) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, csv)?;
    }
    Ok(())
}

fn synthesize(a: &SynthesizeArgs) -> Result<String> {
    let kv = KeyValues::read(&a.config)?;
    let calib = Calibration::from_config(&kv)?;
    let lut = load_lut(&calib)?;
    let k = &calib.intrinsics;
    let mut rng = synthetic::rng(kv.parse_key("seed")?.unwrap_or(0));

    let gs_image = match kv.get_path("gs_image") {
        Some(p) => read_gray(p)?,
        None => synthetic::texture(&mut rng, k.width, k.height),
    };
    let gs_depth = match kv.get_path("gs_depth") {
        Some(p) => pfm::read_depth(p)?,
        None => match a.depth_model {
            DepthModel::Plane => synthetic::random_plane_depth(&mut rng, k),
            DepthModel::Smooth => synthetic::random_smooth_depth(&mut rng, k),
        },
    };
    let motion = synthetic::PolynomialMotion::random(
        &mut rng,
        kv.parse_key("angular_rate")?.unwrap_or(1.0),
        kv.parse_key("linear_rate")?.unwrap_or(0.5),
    );
    let table = motion.row_table(&calib.clock, k.height);
    let synth = synthesize_rs(&gs_image, &gs_depth, &table, k, &calib.clock, lut.as_ref())?;
    let (fwd, bwd) = synthetic::analytic_flow(&synth.frame, &table, &calib.gs0_from_rs, &calib.gs0_intrinsics)?;

    fs::create_dir_all(&a.out)?;
    let times: Vec<f64> = (0..k.height).map(|r| calib.clock.time_of_image_row(r as f64)).collect();
    write_gray(a.out.join("gs.png"), &gs_image)?;
    pfm::write_depth(a.out.join("gs_depth.pfm"), &gs_depth)?;
    write_gray(a.out.join("rs.png"), &synth.frame.image)?;
    pfm::write_depth(a.out.join("rs_depth.pfm"), &synth.frame.depth)?;
    pfm::write_coordinate_map(a.out.join("gtmap.pfm"), &synth.gt_map)?;
    text::write_rowposes(a.out.join("rowposes.txt"), &table, &times)?;
    flo::write(a.out.join("flow_fwd.flo"), &fwd)?;
    flo::write(a.out.join("flow_bwd.flo"), &bwd)?;
    let mut cfg = calib.clone();
    cfg.lut_path = cfg.lut_path.map(|p| fs::canonicalize(&p).unwrap_or(p));
    fs::write(a.out.join("calib.cfg"), cfg.to_config_string())?;

    Ok(format!(
        "synthesized {}x{} frame, valid_fraction {}\n",
        k.width,
        k.height,
        sig6(synth.gt_map.valid_fraction())
    ))
}

fn correct(a: &CorrectArgs) -> Result<String> {
    let calib = Calibration::read(&a.config)?;
    let lut = load_lut(&calib)?;
    let frame = RsFrame::new(
        read_gray(&a.image)?,
        pfm::read_depth(&a.depth)?,
        calib.intrinsics,
        calib.clock,
        lut,
    )?;
    let table = text::read_rowposes(&a.rowposes)?;
    let map = correction_map(&frame, &table)?;
    let splat = render_corrected(&frame, &map)?;
    let filled = fill_holes(&splat.image, &splat.filled, a.fill_radius)?;

    fs::create_dir_all(&a.out)?;
    write_gray(a.out.join("gs1.png"), &filled.image)?;
    write_mask(a.out.join("gs1_mask.png"), &filled.filled)?;
    pfm::write_coordinate_map(a.out.join("map.pfm"), &map)?;

    let pixels = (frame.width() * frame.height()) as f64;
    let holes_after = filled.filled.as_slice().iter().filter(|f| !**f).count();
    let csv = format!(
        "valid_fraction,splat_holes,holes_after_fill\n{},{},{}\n",
        sig6(map.valid_count() as f64 / pixels),
        splat.hole_count(),
        holes_after
    );
    write_report(a.report.as_deref(), &csv)?;
    Ok(csv)
}

fn gen_gt(a: &GenGtArgs) -> Result<String> {
    if let (Some(fwd), Some(bwd), Some(image), Some(rowposes)) = (&a.flow_fwd, &a.flow_bwd, &a.image, &a.rowposes) {
        return gen_gt_frame(a, fwd, bwd, image, rowposes);
    }
    let manifest = SequenceManifest::read(&a.config)?;
    let summary = export_dataset(&manifest, &a.out)?;
    let csv = summary.to_csv();
    write_report(a.report.as_deref(), &csv)?;
    Ok(format!(
        "sequence {}: {} frames in, {} kept, {} dropped, {} flagged\n",
        summary.sequence,
        summary.frames_in(),
        summary.kept(),
        summary.dropped(),
        summary.flagged()
    ))
}

fn gen_gt_frame(a: &GenGtArgs, fwd: &Path, bwd: &Path, image: &Path, rowposes: &Path) -> Result<String> {
    let calib = Calibration::read(&a.config)?;
    let lut = load_lut(&calib)?;
    let gt = generate_ground_truth(
        read_gray(image)?,
        text::read_rowposes(rowposes)?,
        &calib,
        lut.as_ref(),
        &flo::read(fwd)?,
        &flo::read(bwd)?,
        &GenerationOptions::default(),
    )?;
    fs::create_dir_all(&a.out)?;
    write_gray(a.out.join("gs1.png"), &gt.gs1_image)?;
    pfm::write_depth(a.out.join("depth.pfm"), &gt.depth)?;
    pfm::write_coordinate_map(a.out.join("gtmap.pfm"), &gt.gt_map)?;
    let st = &gt.stats;
    let csv = format!(
        "valid_fraction,flow_consistent,triangulated,degenerate_rays,behind_camera,max_residual_m,flagged\n\
         {},{},{},{},{},{},{}\n",
        sig6(st.valid_fraction()),
        st.flow_consistent,
        st.triangulated,
        st.degenerate_rays,
        st.behind_camera,
        sig6(st.max_residual),
        u8::from(gt.flagged)
    );
    write_report(a.report.as_deref(), &csv)?;
    Ok(csv)
}

fn epe_all(pred: &[PathBuf], gt: &[CoordinateMap]) -> Result<Vec<EpeReport>> {
    pred.iter()
        .zip(gt)
        .map(|(p, g)| epe(&pfm::read_coordinate_map(p)?, g))
        .collect()
}

fn evaluate_epe(a: &EpeArgs) -> Result<String> {
    if a.pred.len() != a.gt.len() {
        return Err(Error::LengthMismatch {
            left: a.pred.len(),
            right: a.gt.len(),
        });
    }
    let gt: Vec<CoordinateMap> = a.gt.iter().map(pfm::read_coordinate_map).collect::<Result<_>>()?;
    let seq = aggregate_epe(epe_all(&a.pred, &gt)?);

    let baseline = if a.identity_baseline {
        Some(
            gt.iter()
                .map(|g| epe(&CoordinateMap::identity(g.width(), g.height()), g))
                .collect::<Result<Vec<_>>>()?,
        )
    } else if !a.baseline.is_empty() {
        if a.baseline.len() != gt.len() {
            return Err(Error::LengthMismatch {
                left: a.baseline.len(),
                right: gt.len(),
            });
        }
        Some(epe_all(&a.baseline, &gt)?)
    } else {
        None
    };

    let mut csv = String::from("frame,mean_px,median_px,max_px,valid_count");
    csv.push_str(if baseline.is_some() {
        ",baseline_mean_px\n"
    } else {
        "\n"
    });
    for (i, r) in seq.per_frame.iter().enumerate() {
        let _ = write!(
            csv,
            "{i},{},{},{},{}",
            sig6(r.mean_px),
            sig6(r.median_px),
            sig6(r.max_px),
            r.valid_count
        );
        if let Some(b) = &baseline {
            let _ = write!(csv, ",{}", sig6(b[i].mean_px));
        }
        csv.push('\n');
    }
    let _ = writeln!(
        csv,
        "sequence,{},{},,{}{}",
        sig6(seq.mean_px),
        sig6(seq.median_px),
        seq.valid_count,
        if baseline.is_some() { "," } else { "" }
    );
    if let Some(b) = &baseline {
        let epe_in: Vec<f64> = b.iter().map(|r| r.mean_px).collect();
        let epe_out: Vec<f64> = seq.per_frame.iter().map(|r| r.mean_px).collect();
        let ratio = improvement_ratio(&epe_in, &epe_out)?;
        let _ = writeln!(
            csv,
            "# improvement_ratio,{},{},{}",
            sig6(ratio.ratio),
            ratio.improved_count,
            ratio.total
        );
    }
    write_report(a.report.as_deref(), &csv)?;
    Ok(csv)
}

fn evaluate_ate(a: &AteArgs) -> Result<String> {
    let gt = text::read_trajectory(&a.gt)?;
    let mut csv = String::from("trajectory,rmse_m,scale,pairs\n");
    let mut sum = 0.0;
    for p in &a.est {
        let r = ate_sim3(&text::read_trajectory(p)?, &gt, a.tolerance)?;
        sum += r.rmse_m;
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            p.display(),
            sig6(r.rmse_m),
            sig6(r.alignment.scale),
            r.pairs
        );
    }
    let _ = writeln!(csv, "mean,{},,", sig6(sum / a.est.len() as f64));
    write_report(a.report.as_deref(), &csv)?;
    Ok(csv)
}

fn imu_rowposes(a: &ImuArgs) -> Result<String> {
    let calib = Calibration::read(&a.config)?;
    let series = rotate_to_camera(&text::read_imu_csv(&a.imu)?, &calib.imu)?;
    let bias = match &a.bias {
        None => Vec3::zeros(),
        Some(s) => match parse_floats("bias", s)?.as_slice() {
            [x, y, z] => Vec3::new(*x, *y, *z),
            v => return Err(Error::InvalidParameter(format!("bias needs 3 values, got {}", v.len()))),
        },
    };
    let clock = calib.clock.with_frame_start(a.frame_time);
    let rows = calib.intrinsics.height;
    let table = integrate_rowposes(
        &series,
        &clock,
        rows,
        &GyroIntegration {
            bias,
            substeps: a.substeps,
        },
    )?;
    let times: Vec<f64> = (0..rows).map(|r| clock.time_of_image_row(r as f64)).collect();
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    text::write_rowposes(&a.out, &table, &times)?;
    Ok(format!(
        "{} row poses, last-row rotation {} rad\n",
        rows,
        sig6(table.get(rows - 1).rotation.angle())
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_subcommands() {
        Cli::try_parse_from(["rollshutter", "gen-gt", "--config", "m.cfg", "--out", "o"]).unwrap();
        let c = Cli::try_parse_from([
            "rollshutter",
            "evaluate-epe",
            "--pred",
            "a.pfm",
            "b.pfm",
            "--gt",
            "a_gt.pfm",
            "b_gt.pfm",
            "--identity-baseline",
        ])
        .unwrap();
        match c.command {
            Command::EvaluateEpe(a) => assert_eq!(a.pred.len(), 2),
            _ => panic!(),
        }
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(main_with_args(["rollshutter", "bogus"], &mut o, &mut e), 2);
        assert_eq!(main_with_args(["rollshutter", "correct"], &mut o, &mut e), 2);
        assert_eq!(main_with_args(["rollshutter", "--help"], &mut o, &mut e), 0);
    }

    #[test]
    fn missing_files_report_error_class() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = main_with_args(
            [
                "rollshutter",
                "evaluate-ate",
                "--est",
                "/nonexistent/a.txt",
                "--gt",
                "/nonexistent/b.txt",
            ],
            &mut o,
            &mut e,
        );
        assert_eq!(code, 1);
        assert!(String::from_utf8(e).unwrap().starts_with("error[Io]"));
    }
}
