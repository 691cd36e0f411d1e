use crate::camera::Pixel;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Metric depth per pixel. Invalid entries are stored as `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    values: Grid<Option<f64>>,
}

impl DepthMap {
    pub fn new(values: Grid<Option<f64>>) -> Result<Self> {
        if let Some(bad) = values
            .as_slice()
            .iter()
            .flatten()
            .find(|d| !(d.is_finite() && **d > 0.0))
        {
            return Err(Error::NonPositiveDepth { depth: *bad });
        }
        Ok(Self { values })
    }

    /// Dense map; non-positive or non-finite values become invalid.
    pub fn from_dense(depth: &Grid<f64>) -> Self {
        Self {
            values: depth.map(|&d| (d.is_finite() && d > 0.0).then_some(d)),
        }
    }

    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            values: Grid::filled(width, height, None),
        }
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn grid(&self) -> &Grid<Option<f64>> {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        *self.values.get(x, y)
    }

    pub fn set(&mut self, x: usize, y: usize, depth: Option<f64>) {
        *self.values.get_mut(x, y) = depth.filter(|d| d.is_finite() && *d > 0.0);
    }

    pub fn valid_count(&self) -> usize {
        self.values.as_slice().iter().filter(|d| d.is_some()).count()
    }

    /// Bilinear depth; all four neighbours must be valid.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> Option<f64> {
        let corners = crate::grid::bilinear_corners(self.width(), self.height(), x, y)?;
        let mut acc = 0.0;
        for (cx, cy, w) in corners {
            match self.get(cx, cy) {
                Some(d) => acc += w * d,
                None if w == 0.0 => {}
                None => return None,
            }
        }
        Some(acc)
    }

    /// Dense copy with invalid pixels set to 0.
    pub fn to_dense(&self) -> Grid<f64> {
        self.values.map(|d| d.unwrap_or(0.0))
    }
}

/// A correspondence target for one source pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Target {
    pub pixel: Pixel,
    /// Depth of the point in the target frame, when known.
    pub depth: Option<f64>,
}

/// Per-pixel target coordinates; `None` marks invalid pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateMap {
    targets: Grid<Option<Target>>,
}

impl CoordinateMap {
    pub fn new(targets: Grid<Option<Target>>) -> Self {
        Self { targets }
    }

    pub fn invalid(width: usize, height: usize) -> Self {
        Self::new(Grid::filled(width, height, None))
    }

    /// Every pixel maps to itself.
    pub fn identity(width: usize, height: usize) -> Self {
        Self::new(Grid::from_fn(width, height, |x, y| {
            Some(Target {
                pixel: Pixel::new(x as f64, y as f64),
                depth: None,
            })
        }))
    }

    pub fn width(&self) -> usize {
        self.targets.width()
    }

    pub fn height(&self) -> usize {
        self.targets.height()
    }

    pub fn grid(&self) -> &Grid<Option<Target>> {
        &self.targets
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<Target> {
        *self.targets.get(x, y)
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> Option<Pixel> {
        self.get(x, y).map(|t| t.pixel)
    }

    pub fn set(&mut self, x: usize, y: usize, target: Option<Target>) {
        *self.targets.get_mut(x, y) = target.filter(|t| t.pixel.x.is_finite() && t.pixel.y.is_finite());
    }

    pub fn valid_count(&self) -> usize {
        self.targets.as_slice().iter().filter(|t| t.is_some()).count()
    }

    pub fn valid_fraction(&self) -> f64 {
        if self.targets.is_empty() {
            0.0
        } else {
            self.valid_count() as f64 / self.targets.len() as f64
        }
    }

    /// Copy of the map with every valid target shifted by `delta`.
    pub fn offset(&self, delta: Pixel) -> Self {
        Self::new(self.targets.map(|t| {
            t.map(|t| Target {
                pixel: t.pixel + delta,
                ..t
            })
        }))
    }

    /// Keeps only pixels for which `keep` is true.
    pub fn masked(&self, keep: &Grid<bool>) -> Result<Self> {
        self.targets.check_dims(keep, "mask")?;
        let mut out = self.clone();
        for (t, &k) in out.targets.as_mut_slice().iter_mut().zip(keep.as_slice()) {
            if !k {
                *t = None;
            }
        }
        Ok(out)
    }
}

/// Dense per-pixel displacement `(du, dv)`.
pub type FlowField = Grid<[f64; 2]>;

/// End-point error statistics over jointly valid pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpeReport {
    pub mean_px: f64,
    pub median_px: f64,
    pub max_px: f64,
    pub valid_count: usize,
}

/// Mean Euclidean distance between predicted and ground-truth targets.
pub fn epe(pred: &CoordinateMap, gt: &CoordinateMap) -> Result<EpeReport> {
    pred.targets.check_dims(&gt.targets, "epe")?;
    let mut errors: Vec<f64> = pred
        .targets
        .as_slice()
        .iter()
        .zip(gt.targets.as_slice())
        .filter_map(|(p, g)| Some((p.as_ref()?.pixel - g.as_ref()?.pixel).norm()))
        .collect();
    if errors.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let n = errors.len();
    let mean_px = errors.iter().sum::<f64>() / n as f64;
    errors.sort_by(f64::total_cmp);
    let median_px = if n % 2 == 1 {
        errors[n / 2]
    } else {
        0.5 * (errors[n / 2 - 1] + errors[n / 2])
    };
    Ok(EpeReport {
        mean_px,
        median_px,
        max_px: errors[n - 1],
        valid_count: n,
    })
}
