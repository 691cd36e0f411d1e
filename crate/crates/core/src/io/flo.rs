//! Middlebury `.flo` optical flow files: `PIEH` magic, little-endian `i32`
//! width and height, then row-major `f32` `(u, v)` pairs.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::maps::FlowField;
use crate::grid::Grid;

pub const MAGIC: &[u8; 4] = b"PIEH";

pub fn encode(flow: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + flow.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for [u, v] in flow.as_slice() {
        out.extend_from_slice(&(*u as f32).to_le_bytes());
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<FlowField> {
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(Error::format(path, "missing PIEH magic"));
    }
    let dim = |i: usize| i32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
    let (w, h) = (dim(4), dim(8));
    if w <= 0 || h <= 0 {
        return Err(Error::format(path, format!("bad dimensions {w}x{h}")));
    }
    let (w, h) = (w as usize, h as usize);
    let body = bytes
        .get(12..12 + w * h * 8)
        .ok_or_else(|| Error::format(path, "truncated flow data"))?;
    let values: Vec<[f64; 2]> = body
        .chunks_exact(8)
        .map(|c| {
            [
                f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])),
                f64::from(f32::from_le_bytes([c[4], c[5], c[6], c[7]])),
            ]
        })
        .collect();
    Grid::from_vec(w, h, values)
}

pub fn read(path: impl AsRef<Path>) -> Result<FlowField> {
    let path = path.as_ref();
    decode(&fs::read(path)?, path)
}

pub fn write(path: impl AsRef<Path>, flow: &FlowField) -> Result<()> {
    fs::write(path, encode(flow))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_roundtrip() {
        let flow = Grid::from_fn(3, 2, |x, y| [x as f64 + 0.5, -(y as f64)]);
        let bytes = encode(&flow);
        assert_eq!(&bytes[..4], b"PIEH");
        // the magic reads as the float 202021.25
        assert_eq!(f32::from_le_bytes(*b"PIEH"), 202021.25);
        assert_eq!(bytes.len(), 12 + 3 * 2 * 8);
        assert_eq!(&bytes[4..8], &3i32.to_le_bytes());
        assert_eq!(&bytes[12..16], &0.5f32.to_le_bytes());
        assert_eq!(decode(&bytes, Path::new("mem")).unwrap(), flow);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"PIEX\x01\0\0\0\x01\0\0\0", Path::new("x")).is_err());
        assert!(decode(b"PIEH\x02\0\0\0\x01\0\0\0\0\0\0\0", Path::new("x")).is_err());
    }
}
