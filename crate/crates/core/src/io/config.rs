//! Plain `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Keys may repeat (manifests use
//! a repeated `frame` key); [`KeyValues::get`] returns the last occurrence.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::camera::{Intrinsics, ReadoutClock};
use crate::error::{Error, Result};
use crate::imu::ImuExtrinsics;
use crate::se3::{Pose, Rotation};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues {
    /// Key, value and the directory of the file the entry came from.
    entries: Vec<(String, String, PathBuf)>,
    /// Directory of the top-level file.
    base_dir: PathBuf,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", n + 1)));
            }
            entries.push((k.to_owned(), v.trim().to_owned(), PathBuf::new()));
        }
        Ok(Self {
            entries,
            base_dir: PathBuf::new(),
        })
    }

    /// Reads a file. A `calibration = <path>` entry pulls that file's keys in
    /// first, so keys in the including file take precedence.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut kv = Self::parse(&text)?;
        kv.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for e in &mut kv.entries {
            e.2.clone_from(&kv.base_dir);
        }
        if let Some(inc) = kv.get("calibration") {
            let inc_path = kv.resolve(inc);
            if inc_path == path {
                return Err(Error::Config("config includes itself".into()));
            }
            let mut merged = Self::read(&inc_path)?;
            merged.entries.append(&mut kv.entries);
            merged.base_dir = kv.base_dir;
            kv = merged;
        }
        Ok(kv)
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    /// Resolves `p` against the top-level file's directory.
    pub fn resolve(&self, p: &str) -> PathBuf {
        resolve_in(&self.base_dir, p)
    }

    /// Path-valued key, resolved against the directory of the file that
    /// defined it (an included calibration keeps its own relative paths).
    pub fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.0 == key)
            .map(|e| resolve_in(&e.2, &e.1))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|e| e.0 == key).map(|e| e.1.as_str())
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries.iter().filter(move |e| e.0 == key).map(|e| e.1.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    pub fn parse_key<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Config(format!("`{key}`: cannot parse {v:?}")))
            })
            .transpose()
    }

    pub fn require_parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse_key(key)?
            .ok_or_else(|| Error::Config(format!("missing key `{key}`")))
    }

    pub fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_floats(key, v)).transpose()
    }
}

fn resolve_in(dir: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    }
}

pub(crate) fn parse_floats(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("`{key}`: bad number {s:?}")))
        })
        .collect()
}

/// Camera, clock and rig calibration.
///
/// Keys: `fx fy cx cy width height row_period_us sensor_rows` (required);
/// `frame_start` (s); `gs0_fx gs0_fy gs0_cx gs0_cy` (defaults to the RS
/// intrinsics); `gs0_from_rs = tx ty tz qx qy qz qw`;
/// `cam_from_imu = qx qy qz qw`; `lut = <path to PFM>`.
#[derive(Clone, Debug, PartialEq)]
pub struct Calibration {
    pub intrinsics: Intrinsics,
    pub gs0_intrinsics: Intrinsics,
    pub clock: ReadoutClock,
    pub gs0_from_rs: Pose,
    pub imu: ImuExtrinsics,
    pub lut_path: Option<PathBuf>,
}

impl Calibration {
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        let width: usize = kv.require_parsed("width")?;
        let height: usize = kv.require_parsed("height")?;
        let intrinsics = Intrinsics::new(
            kv.require_parsed("fx")?,
            kv.require_parsed("fy")?,
            kv.require_parsed("cx")?,
            kv.require_parsed("cy")?,
            width,
            height,
        )?;
        let gs0_intrinsics = Intrinsics::new(
            kv.parse_key("gs0_fx")?.unwrap_or(intrinsics.fx),
            kv.parse_key("gs0_fy")?.unwrap_or(intrinsics.fy),
            kv.parse_key("gs0_cx")?.unwrap_or(intrinsics.cx),
            kv.parse_key("gs0_cy")?.unwrap_or(intrinsics.cy),
            width,
            height,
        )?;
        let row_period_us: f64 = kv.require_parsed("row_period_us")?;
        let clock = ReadoutClock::new(
            row_period_us * 1e-6,
            kv.require_parsed("sensor_rows")?,
            height,
            kv.parse_key("frame_start")?.unwrap_or(0.0),
        )?;
        let gs0_from_rs = match kv.floats("gs0_from_rs")? {
            None => Pose::identity(),
            Some(v) if v.len() == 7 => Pose::from_components([v[6], v[3], v[4], v[5]], [v[0], v[1], v[2]])?,
            Some(v) => {
                return Err(Error::Config(format!(
                    "`gs0_from_rs` needs 7 numbers (tx ty tz qx qy qz qw), got {}",
                    v.len()
                )))
            }
        };
        let cam_from_imu = match kv.floats("cam_from_imu")? {
            None => Rotation::identity(),
            Some(v) if v.len() == 4 => Pose::from_components([v[3], v[0], v[1], v[2]], [0.0; 3])?.rotation,
            Some(v) => {
                return Err(Error::Config(format!(
                    "`cam_from_imu` needs 4 numbers (qx qy qz qw), got {}",
                    v.len()
                )))
            }
        };
        Ok(Self {
            intrinsics,
            gs0_intrinsics,
            clock,
            gs0_from_rs,
            imu: ImuExtrinsics { cam_from_imu },
            lut_path: kv.get_path("lut"),
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_config(&KeyValues::read(path)?)
    }

    /// Text form accepted by [`Calibration::from_config`].
    pub fn to_config_string(&self) -> String {
        let k = &self.intrinsics;
        let g = &self.gs0_intrinsics;
        let p = self.gs0_from_rs.canonical();
        let q = crate::se3::canonical(self.imu.cam_from_imu);
        let mut s = format!(
            "fx = {}\nfy = {}\ncx = {}\ncy = {}\nwidth = {}\nheight = {}\n\
             row_period_us = {}\nsensor_rows = {}\nframe_start = {}\n\
             gs0_fx = {}\ngs0_fy = {}\ngs0_cx = {}\ngs0_cy = {}\n\
             gs0_from_rs = {} {} {} {} {} {} {}\ncam_from_imu = {} {} {} {}\n",
            k.fx,
            k.fy,
            k.cx,
            k.cy,
            k.width,
            k.height,
            self.clock.row_period * 1e6,
            self.clock.sensor_rows,
            self.clock.frame_start,
            g.fx,
            g.fy,
            g.cx,
            g.cy,
            p.translation.x,
            p.translation.y,
            p.translation.z,
            p.rotation.i,
            p.rotation.j,
            p.rotation.k,
            p.rotation.w,
            q.i,
            q.j,
            q.k,
            q.w,
        );
        if let Some(l) = &self.lut_path {
            s.push_str(&format!("lut = {}\n", l.display()));
        }
        s
    }
}
