//! Portable float map (PFM) reading and writing.
//!
//! Rows are stored bottom-to-top on disk; [`Pfm::data`] is top-to-bottom,
//! row-major, channel-interleaved. Files are written little-endian
//! (negative scale).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::camera::{Pixel, ScanlineLut};
use crate::error::{Error, Result};
use crate::geometry::maps::{CoordinateMap, DepthMap, Target};
use crate::grid::Grid;

#[derive(Clone, Debug, PartialEq)]
pub struct Pfm {
    pub width: usize,
    pub height: usize,
    /// 1 or 3
    pub channels: usize,
    pub data: Vec<f32>,
}

impl Pfm {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidParameter(format!(
                "PFM supports 1 or 3 channels, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::DimensionMismatch(format!(
                "{} floats for {width}x{height}x{channels}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let tag = if self.channels == 3 { "PF" } else { "Pf" };
        let mut out = format!("{tag}\n{} {}\n-1.0\n", self.width, self.height).into_bytes();
        let row_len = self.width * self.channels;
        out.reserve(self.data.len() * 4);
        for row in (0..self.height).rev() {
            for v in &self.data[row * row_len..(row + 1) * row_len] {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let err = |m: &str| Error::format(path, m);
        let mut pos = 0;
        let mut token = || -> Result<String> {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(err("truncated header"));
            }
            let t = std::str::from_utf8(&bytes[start..pos]).map_err(|_| err("non-ASCII header"))?;
            Ok(t.to_owned())
        };
        let channels = match token()?.as_str() {
            "PF" => 3,
            "Pf" => 1,
            other => return Err(err(&format!("bad magic {other:?}"))),
        };
        let width: usize = token()?.parse().map_err(|_| err("bad width"))?;
        let height: usize = token()?.parse().map_err(|_| err("bad height"))?;
        let scale: f64 = token()?.parse().map_err(|_| err("bad scale"))?;
        if scale == 0.0 || !scale.is_finite() {
            return Err(err("bad scale"));
        }
        // exactly one whitespace byte separates the header from the data
        let data_start = pos + 1;
        let n = width * height * channels;
        let body = bytes
            .get(data_start..data_start + n * 4)
            .ok_or_else(|| err("truncated data"))?;
        let little = scale < 0.0;
        let row_len = width * channels;
        let mut data = vec![0f32; n];
        for (i, chunk) in body.chunks_exact(4).enumerate() {
            let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
            let v = if little {
                f32::from_le_bytes(raw)
            } else {
                f32::from_be_bytes(raw)
            };
            let file_row = i / row_len;
            let col = i % row_len;
            data[(height - 1 - file_row) * row_len + col] = v;
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_bytes(&fs::read(path)?, path)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    fn expect_channels(&self, channels: usize, path: &Path) -> Result<()> {
        if self.channels == channels {
            Ok(())
        } else {
            Err(Error::format(
                path,
                format!("expected {channels}-channel PFM, found {}", self.channels),
            ))
        }
    }
}

/// Single-channel depth; invalid pixels are written as 0.
pub fn write_depth(path: impl AsRef<Path>, depth: &DepthMap) -> Result<()> {
    let data = depth.to_dense().as_slice().iter().map(|&d| d as f32).collect();
    Pfm::new(depth.width(), depth.height(), 1, data)?.write(path)
}

pub fn read_depth(path: impl AsRef<Path>) -> Result<DepthMap> {
    let path = path.as_ref();
    let pfm = Pfm::read(path)?;
    pfm.expect_channels(1, path)?;
    let dense = Grid::from_vec(pfm.width, pfm.height, pfm.data.iter().map(|&v| f64::from(v)).collect())?;
    Ok(DepthMap::from_dense(&dense))
}

/// Three channels per pixel: `u`, `v`, validity (1 or 0).
pub fn write_coordinate_map(path: impl AsRef<Path>, map: &CoordinateMap) -> Result<()> {
    let mut data = Vec::with_capacity(map.width() * map.height() * 3);
    for t in map.grid().as_slice() {
        match t {
            Some(t) => data.extend_from_slice(&[t.pixel.x as f32, t.pixel.y as f32, 1.0]),
            None => data.extend_from_slice(&[0.0, 0.0, 0.0]),
        }
    }
    Pfm::new(map.width(), map.height(), 3, data)?.write(path)
}

pub fn read_coordinate_map(path: impl AsRef<Path>) -> Result<CoordinateMap> {
    let path = path.as_ref();
    let pfm = Pfm::read(path)?;
    pfm.expect_channels(3, path)?;
    let targets = pfm
        .data
        .chunks_exact(3)
        .map(|c| {
            (c[2] > 0.5).then(|| Target {
                pixel: Pixel::new(f64::from(c[0]), f64::from(c[1])),
                depth: None,
            })
        })
        .collect();
    Ok(CoordinateMap::new(Grid::from_vec(pfm.width, pfm.height, targets)?))
}

pub fn write_lut(path: impl AsRef<Path>, lut: &ScanlineLut) -> Result<()> {
    let data = lut.table().as_slice().iter().map(|&v| v as f32).collect();
    Pfm::new(lut.width(), lut.height(), 1, data)?.write(path)
}

pub fn read_lut(path: impl AsRef<Path>, sensor_rows: usize) -> Result<ScanlineLut> {
    let path = path.as_ref();
    let pfm = Pfm::read(path)?;
    pfm.expect_channels(1, path)?;
    let table = Grid::from_vec(pfm.width, pfm.height, pfm.data.iter().map(|&v| f64::from(v)).collect())?;
    ScanlineLut::new(table, sensor_rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn bytes_roundtrip(w in 1usize..6, h in 1usize..6, three in any::<bool>(), seed in any::<u32>()) {
            let c = if three { 3 } else { 1 };
            let data: Vec<f32> = (0..w * h * c).map(|i| (i as f32 + seed as f32) * 0.37 - 4.0).collect();
            let pfm = Pfm::new(w, h, c, data).unwrap();
            let back = Pfm::from_bytes(&pfm.to_bytes(), Path::new("mem")).unwrap();
            prop_assert_eq!(back, pfm);
        }
    }

    #[test]
    fn rows_are_bottom_to_top_on_disk() {
        let pfm = Pfm::new(1, 2, 1, vec![1.0, 2.0]).unwrap();
        let bytes = pfm.to_bytes();
        let header = b"Pf\n1 2\n-1.0\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..header.len() + 4], &2.0f32.to_le_bytes());
    }

    #[test]
    fn reads_big_endian() {
        let mut bytes = b"Pf\n2 1\n1.0\n".to_vec();
        bytes.extend_from_slice(&1.5f32.to_be_bytes());
        bytes.extend_from_slice(&(-3.0f32).to_be_bytes());
        let pfm = Pfm::from_bytes(&bytes, Path::new("mem")).unwrap();
        assert_eq!(pfm.data, vec![1.5, -3.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Pfm::from_bytes(b"P6\n1 1\n-1\n0000", Path::new("x")).is_err());
        assert!(Pfm::from_bytes(b"Pf\n2 2\n-1\n0000", Path::new("x")).is_err());
    }

    #[test]
    fn coordinate_map_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.pfm");
        let mut m = CoordinateMap::identity(4, 3).offset(Pixel::new(0.25, -1.5));
        m.set(2, 1, None);
        write_coordinate_map(&p, &m).unwrap();
        let back = read_coordinate_map(&p).unwrap();
        assert_eq!(back.valid_count(), 11);
        assert_eq!(back.pixel(3, 2), Some(Pixel::new(3.25, 0.5)));
        assert!(back.get(2, 1).is_none());
        assert!(read_depth(&p).is_err());
    }
}
