//! Text trajectories (`timestamp tx ty tz qx qy qz qw`), row-pose tables in
//! the same format, and IMU CSV (`timestamp,wx,wy,wz,ax,ay,az`).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::imu::{ImuFrame, ImuSample, ImuSeries};
use crate::se3::{Pose, RowPoseTable, StampedPose, Trajectory, Vec3};

pub fn parse_trajectory(text: &str, path: &Path) -> Result<Trajectory> {
    let mut samples = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::format(path, format!("line {}: bad number", n + 1)))?;
        if v.len() != 8 {
            return Err(Error::format(
                path,
                format!("line {}: expected 8 fields, got {}", n + 1, v.len()),
            ));
        }
        let pose = Pose::from_components([v[7], v[4], v[5], v[6]], [v[1], v[2], v[3]])
            .map_err(|e| Error::format(path, format!("line {}: {e}", n + 1)))?;
        samples.push(StampedPose { time: v[0], pose });
    }
    Trajectory::new(samples).map_err(|e| Error::format(path, e.to_string()))
}

pub fn format_trajectory(traj: &Trajectory) -> String {
    let mut s = String::from("# timestamp tx ty tz qx qy qz qw\n");
    for sp in traj.samples() {
        push_pose_line(&mut s, sp.time, &sp.pose);
    }
    s
}

fn push_pose_line(s: &mut String, time: f64, pose: &Pose) {
    let p = pose.canonical();
    let (t, q) = (p.translation, p.rotation);
    let _ = writeln!(s, "{time} {} {} {} {} {} {} {}", t.x, t.y, t.z, q.i, q.j, q.k, q.w);
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    parse_trajectory(&fs::read_to_string(path)?, path)
}

pub fn write_trajectory(path: impl AsRef<Path>, traj: &Trajectory) -> Result<()> {
    fs::write(path, format_trajectory(traj))?;
    Ok(())
}

/// Row poses with their capture times, one line per image row.
pub fn format_rowposes(table: &RowPoseTable, row_times: &[f64]) -> String {
    let mut s = String::from("# row-time tx ty tz qx qy qz qw (row0_from_row)\n");
    for (pose, t) in table.rows().iter().zip(row_times) {
        push_pose_line(&mut s, *t, pose);
    }
    s
}

pub fn write_rowposes(path: impl AsRef<Path>, table: &RowPoseTable, row_times: &[f64]) -> Result<()> {
    if table.len() != row_times.len() {
        return Err(Error::LengthMismatch {
            left: table.len(),
            right: row_times.len(),
        });
    }
    fs::write(path, format_rowposes(table, row_times))?;
    Ok(())
}

pub fn read_rowposes(path: impl AsRef<Path>) -> Result<RowPoseTable> {
    let path = path.as_ref();
    let traj = read_trajectory(path)?;
    RowPoseTable::new(traj.samples().iter().map(|s| s.pose).collect()).map_err(|e| Error::format(path, e.to_string()))
}

pub fn parse_imu_csv(reader: impl std::io::Read, path: &Path) -> Result<ImuSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let expected = ["timestamp", "wx", "wy", "wz", "ax", "ay", "az"];
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::format(
            path,
            format!("expected header {}, got {:?}", expected.join(","), headers),
        ));
    }
    let mut samples = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::format(path, format!("record {}: bad number", n + 1)))?;
        if v.len() != 7 {
            return Err(Error::format(path, format!("record {}: expected 7 fields", n + 1)));
        }
        samples.push(ImuSample {
            time: v[0],
            gyro: Vec3::new(v[1], v[2], v[3]),
            accel: Vec3::new(v[4], v[5], v[6]),
        });
    }
    ImuSeries::new(samples, ImuFrame::Imu).map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_imu_csv(path: impl AsRef<Path>) -> Result<ImuSeries> {
    let path = path.as_ref();
    parse_imu_csv(fs::File::open(path)?, path)
}

pub fn write_imu_csv(path: impl AsRef<Path>, series: &ImuSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["timestamp", "wx", "wy", "wz", "ax", "ay", "az"])?;
    for s in series.samples() {
        w.write_record([s.time, s.gyro.x, s.gyro.y, s.gyro.z, s.accel.x, s.accel.y, s.accel.z].map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se3::Rotation;

    #[test]
    fn parses_tum_lines() {
        let text = "# comment\n0.0 1 2 3 0 0 0 1\n\n0.5 1 2 3.5 0 0 0.7071067811865476 0.7071067811865476\n";
        let t = parse_trajectory(text, Path::new("t.txt")).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.samples()[0].pose.translation, Vec3::new(1.0, 2.0, 3.0));
        assert!((t.samples()[1].pose.rotation.angle() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn trajectory_text_roundtrip_is_exact() {
        let t = Trajectory::from_pairs((0..5).map(|i| {
            let f = i as f64 * 0.1;
            (
                f,
                Pose::new(
                    Rotation::from_scaled_axis(Vec3::new(f, -0.3, 0.2 * f)),
                    Vec3::new(f.sin(), 0.1, -f),
                ),
            )
        }))
        .unwrap();
        let back = parse_trajectory(&format_trajectory(&t), Path::new("m")).unwrap();
        for (a, b) in t.samples().iter().zip(back.samples()) {
            assert_eq!(a.time, b.time);
            assert_eq!(a.pose.translation, b.pose.translation);
            assert!(a.pose.rotation.angle_to(&b.pose.rotation) < 1e-15);
        }
    }

    #[test]
    fn bad_trajectory_lines() {
        assert!(parse_trajectory("0 1 2 3", Path::new("x")).is_err());
        assert!(parse_trajectory("0 1 2 3 0 0 0 x", Path::new("x")).is_err());
        assert!(parse_trajectory("1 0 0 0 0 0 0 1\n0 0 0 0 0 0 0 1", Path::new("x")).is_err());
    }

    #[test]
    fn imu_csv() {
        let text = "timestamp,wx,wy,wz,ax,ay,az\n0.0,0.1,0.2,0.3,0,-9.81,0\n0.005,0.1,0.2,0.3,0,-9.81,0\n";
        let s = parse_imu_csv(text.as_bytes(), Path::new("imu.csv")).unwrap();
        assert_eq!(s.samples().len(), 2);
        assert_eq!(s.samples()[1].gyro, Vec3::new(0.1, 0.2, 0.3));
        assert_eq!(s.frame(), ImuFrame::Imu);
        assert!(parse_imu_csv("t,wx\n0,1\n".as_bytes(), Path::new("x")).is_err());
    }
}
