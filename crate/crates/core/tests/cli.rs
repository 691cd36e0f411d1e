use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rollshutter::io::text;
use rollshutter::se3::{Pose, Rotation, Vec3};
use rollshutter::synthetic::{write_sequence, SyntheticSequence};
use rollshutter::Trajectory;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rollshutter"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const CALIB: &str = "\
fx = 60
fy = 60
cx = 40
cy = 30
width = 80
height = 60
row_period_us = 29.4737
sensor_rows = 240
gs0_from_rs = 0.1 0 0 0 0 0 1
seed = 5
angular_rate = 1.5
linear_rate = 0.4
";

#[test]
fn synthesize_correct_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("scene.cfg"), CALIB).unwrap();
    let syn = d.join("syn");
    ok(&["synthesize", "--config", s(&d.join("scene.cfg")), "--out", s(&syn)]);
    for f in [
        "rs.png",
        "gs.png",
        "rs_depth.pfm",
        "gtmap.pfm",
        "rowposes.txt",
        "flow_fwd.flo",
        "calib.cfg",
    ] {
        assert!(syn.join(f).is_file(), "{f}");
    }

    let cor = d.join("cor");
    let report = d.join("correct.csv");
    ok(&[
        "correct",
        "--config",
        s(&syn.join("calib.cfg")),
        "--image",
        s(&syn.join("rs.png")),
        "--depth",
        s(&syn.join("rs_depth.pfm")),
        "--rowposes",
        s(&syn.join("rowposes.txt")),
        "--out",
        s(&cor),
        "--report",
        s(&report),
    ]);
    assert!(cor.join("gs1.png").is_file());
    assert!(fs::read_to_string(&report).unwrap().starts_with("valid_fraction,"));

    let epe_report = d.join("epe.csv");
    ok(&[
        "evaluate-epe",
        "--pred",
        s(&cor.join("map.pfm")),
        "--gt",
        s(&syn.join("gtmap.pfm")),
        "--identity-baseline",
        "--report",
        s(&epe_report),
    ]);
    let csv = fs::read_to_string(&epe_report).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let mean: f64 = row[1].parse().unwrap();
    let baseline: f64 = row[5].parse().unwrap();
    assert!(mean < 1e-6, "{csv}");
    assert!(baseline > 0.1, "{csv}");
    assert!(csv.contains("# improvement_ratio,1,1,1"), "{csv}");

    // ground truth for the same frame from its flow pair
    let gt_dir = d.join("gt");
    let out = ok(&[
        "gen-gt",
        "--config",
        s(&syn.join("calib.cfg")),
        "--image",
        s(&syn.join("rs.png")),
        "--rowposes",
        s(&syn.join("rowposes.txt")),
        "--flow-fwd",
        s(&syn.join("flow_fwd.flo")),
        "--flow-bwd",
        s(&syn.join("flow_bwd.flo")),
        "--out",
        s(&gt_dir),
    ]);
    let fields: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert!(fields[0].parse::<f64>().unwrap() > 0.5, "{out}");
    assert_eq!(fields[6], "0");
    let gen = d.join("gen.csv");
    ok(&[
        "evaluate-epe",
        "--pred",
        s(&gt_dir.join("gtmap.pfm")),
        "--gt",
        s(&syn.join("gtmap.pfm")),
        "--report",
        s(&gen),
    ]);
    let row: Vec<String> = fs::read_to_string(&gen)
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(str::to_owned)
        .collect();
    // flow is stored as f32, so recovered depth carries ~1e-6 relative noise
    assert!(row[1].parse::<f64>().unwrap() < 1e-3, "{row:?}");
}

#[test]
fn imu_rowposes_constant_rate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("calib.cfg"), CALIB).unwrap();
    let mut imu = String::from("timestamp,wx,wy,wz,ax,ay,az\n");
    for i in 0..=40 {
        imu.push_str(&format!("{},0,0,0.5,0,-9.81,0\n", i as f64 * 0.005));
    }
    fs::write(d.join("imu.csv"), imu).unwrap();
    let out = d.join("poses/rows.txt");
    ok(&[
        "imu-rowposes",
        "--config",
        s(&d.join("calib.cfg")),
        "--imu",
        s(&d.join("imu.csv")),
        "--frame-time",
        "0.05",
        "--out",
        s(&out),
    ]);
    let table = text::read_rowposes(&out).unwrap();
    assert_eq!(table.len(), 60);
    let expected = 0.5 * 59.0 * 4.0 * 29.4737e-6;
    let got = table.get(59).rotation.angle();
    // rowposes text carries full f64 precision
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}

#[test]
fn evaluate_ate_reports_each_run_and_mean() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gt = Trajectory::from_pairs((0..30).map(|i| {
        let t = i as f64 * 0.1;
        (t, Pose::from_translation(t.sin(), (2.0 * t).cos(), 0.3 * t))
    }))
    .unwrap();
    let sim = |p: &Pose| {
        let r = Rotation::from_axis_angle(&Vec3::z_axis(), 0.4);
        Pose::new(p.rotation, r * p.translation * 2.0 + Vec3::new(1.0, 2.0, 3.0))
    };
    let est = Trajectory::from_pairs(gt.samples().iter().map(|sp| (sp.time, sim(&sp.pose)))).unwrap();
    text::write_trajectory(d.join("gt.txt"), &gt).unwrap();
    text::write_trajectory(d.join("est.txt"), &est).unwrap();
    let csv = ok(&[
        "evaluate-ate",
        "--est",
        s(&d.join("est.txt")),
        s(&d.join("gt.txt")),
        "--gt",
        s(&d.join("gt.txt")),
    ]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "trajectory,rmse_m,scale,pairs");
    for l in &lines[1..3] {
        let f: Vec<&str> = l.split(',').collect();
        assert!(f[1].parse::<f64>().unwrap() < 1e-9, "{l}");
        assert_eq!(f[3], "30");
    }
    assert_eq!(lines[1].split(',').nth(2), Some("0.5"));
    assert!(lines[3].starts_with("mean,"));
}

#[test]
fn gen_gt_writes_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let manifest = write_sequence(
        &d.join("src"),
        &SyntheticSequence {
            frames: 2,
            uncovered_frames: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let out = ok(&[
        "gen-gt",
        "--config",
        s(&manifest),
        "--out",
        s(&d.join("out")),
        "--report",
        s(&d.join("gt.csv")),
    ]);
    assert!(out.contains("3 frames in, 2 kept, 1 dropped"), "{out}");
    let csv = fs::read_to_string(d.join("gt.csv")).unwrap();
    assert!(csv.contains("000002,dropped,QueryOutOfRange"), "{csv}");
    assert!(d.join("out/synthetic/000001/gtmap.pfm").is_file());
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["correct", "--config", "x"]).status.code(), Some(2));
    assert_eq!(
        run(&["gen-gt", "--config", "c", "--out", "o", "--flow-fwd", "f.flo"])
            .status
            .code(),
        Some(2)
    );
    let missing = run(&[
        "evaluate-ate",
        "--est",
        "/nonexistent/e.txt",
        "--gt",
        "/nonexistent/g.txt",
    ]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error[Io]"));

    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "fx = 1\n").unwrap();
    let bad = run(&[
        "imu-rowposes",
        "--config",
        s(&dir.path().join("bad.cfg")),
        "--imu",
        "i.csv",
        "--frame-time",
        "0",
        "--out",
        "o.txt",
    ]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error[Config]"));
}
