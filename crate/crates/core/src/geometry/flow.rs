//! Forward/backward optical-flow consistency.

use crate::error::Result;
use crate::geometry::maps::FlowField;
use crate::grid::{bilinear_corners, Grid};

/// Bilinearly sampled flow vector, `None` outside the pixel-center hull.
pub fn sample_flow(flow: &FlowField, x: f64, y: f64) -> Option<[f64; 2]> {
    let corners = bilinear_corners(flow.width(), flow.height(), x, y)?;
    let mut out = [0.0; 2];
    for (cx, cy, w) in corners {
        let f = flow.get(cx, cy);
        out[0] += w * f[0];
        out[1] += w * f[1];
    }
    Some(out)
}

/// Keeps pixel `u` when its forward target `p = u + fwd(u)` lies inside the
/// second image and `|fwd(u) + bwd(p)| <= tol_px`.
pub fn bidirectional_filter(fwd: &FlowField, bwd: &FlowField, tol_px: f64) -> Result<Grid<bool>> {
    fwd.check_dims(bwd, "forward/backward flow")?;
    let tol2 = tol_px * tol_px;
    Ok(Grid::from_fn(fwd.width(), fwd.height(), |x, y| {
        let f = fwd.get(x, y);
        if !(f[0].is_finite() && f[1].is_finite()) {
            return false;
        }
        let px = x as f64 + f[0];
        let py = y as f64 + f[1];
        match sample_flow(bwd, px, py) {
            Some(b) => {
                let ex = f[0] + b[0];
                let ey = f[1] + b[1];
                ex * ex + ey * ey <= tol2
            }
            None => false,
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn count(mask: &Grid<bool>) -> usize {
        mask.as_slice().iter().filter(|&&b| b).count()
    }

    #[test]
    fn perfect_consistency_keeps_in_image_pixels() {
        let fwd = Grid::filled(10, 6, [2.0, -1.0]);
        let bwd = Grid::filled(10, 6, [-2.0, 1.0]);
        let m = bidirectional_filter(&fwd, &bwd, 1e-9).unwrap();
        // targets must land in x <= 9, y >= 0
        for y in 0..6 {
            for x in 0..10 {
                assert_eq!(*m.get(x, y), x <= 7 && y >= 1, "({x},{y})");
            }
        }
    }

    #[test]
    fn inconsistent_flow_is_rejected() {
        let fwd = Grid::filled(10, 6, [5.0, 0.0]);
        let m = bidirectional_filter(&fwd, &Grid::filled(10, 6, [0.0, 0.0]), 1.0).unwrap();
        assert_eq!(count(&m), 0);
    }

    #[test]
    fn half_pixel_error_within_tolerance() {
        let fwd = Grid::filled(10, 6, [5.0, 0.0]);
        let bwd = Grid::filled(10, 6, [-4.5, 0.0]);
        let m = bidirectional_filter(&fwd, &bwd, 1.0).unwrap();
        assert_eq!(count(&m), 5 * 6);
        let m = bidirectional_filter(&fwd, &bwd, 0.49).unwrap();
        assert_eq!(count(&m), 0);
    }

    #[test]
    fn mismatched_dims() {
        let r = bidirectional_filter(&Grid::filled(3, 3, [0.0; 2]), &Grid::filled(3, 4, [0.0; 2]), 1.0);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }
}
