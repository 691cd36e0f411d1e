//! Dense row-major 2-D storage shared by images, depth maps, flow fields
//! and coordinate maps.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} grid",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> &T {
        &self.data[y * self.width + x]
    }

    #[inline]
    pub fn get_mut(&mut self, x: usize, y: usize) -> &mut T {
        &mut self.data[y * self.width + x]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn same_dims<U>(&self, other: &Grid<U>) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_dims<U>(&self, other: &Grid<U>, what: &str) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }

    /// True when `(x, y)` lies inside the pixel-center hull `[0, w-1] x [0, h-1]`.
    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x <= (self.width as f64 - 1.0) && y <= (self.height as f64 - 1.0)
    }
}

/// Bilinear interpolation weights and corner coordinates for a position
/// inside the pixel-center hull.
#[inline]
pub(crate) fn bilinear_corners(width: usize, height: usize, x: f64, y: f64) -> Option<[(usize, usize, f64); 4]> {
    if !(x >= 0.0 && y >= 0.0 && x <= width as f64 - 1.0 && y <= height as f64 - 1.0) {
        return None;
    }
    let x0 = (x.floor() as usize).min(width.saturating_sub(2));
    let y0 = (y.floor() as usize).min(height.saturating_sub(2));
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    Some([
        (x0, y0, (1.0 - fx) * (1.0 - fy)),
        (x1, y0, fx * (1.0 - fy)),
        (x0, y1, (1.0 - fx) * fy),
        (x1, y1, fx * fy),
    ])
}

impl Grid<f32> {
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        let corners = bilinear_corners(self.width, self.height, x, y)?;
        Some(
            corners
                .iter()
                .map(|&(cx, cy, w)| w * f64::from(*self.get(cx, cy)))
                .sum(),
        )
    }
}

impl Grid<f64> {
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        let corners = bilinear_corners(self.width, self.height, x, y)?;
        Some(corners.iter().map(|&(cx, cy, w)| w * *self.get(cx, cy)).sum())
    }
}

/// 8-bit-range grayscale image stored as floats.
pub type GrayImage = Grid<f32>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_reproduces_pixels_and_midpoints() {
        let g = Grid::from_fn(3, 2, |x, y| (x + 10 * y) as f64);
        assert_eq!(g.sample_bilinear(2.0, 1.0), Some(12.0));
        assert_eq!(g.sample_bilinear(0.5, 0.5), Some(5.5));
        assert_eq!(g.sample_bilinear(2.01, 0.0), None);
        assert_eq!(g.sample_bilinear(-0.01, 0.0), None);
    }

    #[test]
    fn from_vec_rejects_wrong_length() {
        assert!(Grid::from_vec(2, 2, vec![0u8; 3]).is_err());
    }
}
