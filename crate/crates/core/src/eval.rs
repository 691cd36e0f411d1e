//! Evaluation metrics: per-sequence EPE, the improvement ratio and absolute
//! trajectory error after similarity alignment.

use nalgebra::{Matrix3, SVD};

use crate::error::{Error, Result};
use crate::geometry::maps::EpeReport;
use crate::se3::{Rotation, Trajectory, Vec3};

/// EPE over a list of frames.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceEpe {
    pub per_frame: Vec<EpeReport>,
    /// Mean of the per-frame means.
    pub mean_px: f64,
    /// Median of the per-frame means.
    pub median_px: f64,
    pub valid_count: usize,
}

pub fn aggregate_epe(per_frame: Vec<EpeReport>) -> SequenceEpe {
    let n = per_frame.len();
    let mut means: Vec<f64> = per_frame.iter().map(|r| r.mean_px).collect();
    means.sort_by(f64::total_cmp);
    let (mean_px, median_px) = if n == 0 {
        (0.0, 0.0)
    } else {
        let median = if n % 2 == 1 {
            means[n / 2]
        } else {
            0.5 * (means[n / 2 - 1] + means[n / 2])
        };
        (means.iter().sum::<f64>() / n as f64, median)
    };
    SequenceEpe {
        valid_count: per_frame.iter().map(|r| r.valid_count).sum(),
        per_frame,
        mean_px,
        median_px,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioReport {
    pub improved_count: usize,
    pub total: usize,
    pub ratio: f64,
}

/// Fraction of frames whose EPE strictly decreased. Ties are not improvements.
pub fn improvement_ratio(epe_in: &[f64], epe_out: &[f64]) -> Result<RatioReport> {
    if epe_in.len() != epe_out.len() {
        return Err(Error::LengthMismatch {
            left: epe_in.len(),
            right: epe_out.len(),
        });
    }
    let total = epe_in.len();
    let improved_count = epe_in.iter().zip(epe_out).filter(|(i, o)| o < i).count();
    let ratio = if total == 0 {
        0.0
    } else {
        improved_count as f64 / total as f64
    };
    Ok(RatioReport {
        improved_count,
        total,
        ratio,
    })
}

/// Similarity transform `y = scale * R x + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sim3 {
    pub scale: f64,
    pub rotation: Rotation,
    pub translation: Vec3,
}

impl Sim3 {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            rotation: Rotation::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.rotation * x * self.scale + self.translation
    }
}

/// Closed-form least-squares similarity taking `src` onto `dst` (Umeyama).
pub fn umeyama(src: &[Vec3], dst: &[Vec3]) -> Result<Sim3> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch {
            left: src.len(),
            right: dst.len(),
        });
    }
    let n = src.len();
    if n < 3 {
        return Err(Error::DegenerateGeometry(format!("{n} point pairs, need at least 3")));
    }
    let inv_n = 1.0 / n as f64;
    let mu_s = src.iter().sum::<Vec3>() * inv_n;
    let mu_d = dst.iter().sum::<Vec3>() * inv_n;

    let mut cov = Matrix3::zeros();
    let mut scatter = Matrix3::zeros();
    let mut var_s = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let sc = s - mu_s;
        let dc = d - mu_d;
        cov += dc * sc.transpose();
        scatter += sc * sc.transpose();
        var_s += sc.norm_squared();
    }
    cov *= inv_n;
    var_s *= inv_n;

    let spread = SVD::new(scatter, false, false).singular_values;
    // singular values are sorted in decreasing order
    if !(spread[1] > 1e-12 * spread[0].max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateGeometry("points are collinear".into()));
    }

    let svd = SVD::new(cov, true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    let mut sign = Matrix3::identity();
    if (u.determinant() * v_t.determinant()) < 0.0 {
        sign[(2, 2)] = -1.0;
    }
    let r = u * sign * v_t;
    let d = svd.singular_values;
    let scale = (d[0] * sign[(0, 0)] + d[1] * sign[(1, 1)] + d[2] * sign[(2, 2)]) / var_s;
    let rotation = Rotation::from_matrix(&r);
    let translation = mu_d - rotation * mu_s * scale;
    Ok(Sim3 {
        scale,
        rotation,
        translation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AteReport {
    pub rmse_m: f64,
    /// Maps the estimate onto the ground truth.
    pub alignment: Sim3,
    pub pairs: usize,
}

/// Pairs each estimated sample with the nearest ground-truth timestamp
/// within `tolerance` seconds.
pub fn associate(est: &Trajectory, gt: &Trajectory, tolerance: f64) -> Vec<(usize, usize)> {
    let gt_times: Vec<f64> = gt.times().collect();
    let mut pairs = Vec::new();
    for (i, s) in est.samples().iter().enumerate() {
        let j = gt_times.partition_point(|&t| t < s.time);
        let best = [j.checked_sub(1), (j < gt_times.len()).then_some(j)]
            .into_iter()
            .flatten()
            .min_by(|&a, &b| (gt_times[a] - s.time).abs().total_cmp(&(gt_times[b] - s.time).abs()));
        if let Some(k) = best {
            if (gt_times[k] - s.time).abs() <= tolerance {
                pairs.push((i, k));
            }
        }
    }
    pairs
}

/// Half the median sample spacing of `traj`.
pub fn default_association_tolerance(traj: &Trajectory) -> f64 {
    let mut d: Vec<f64> = traj.samples().windows(2).map(|w| w[1].time - w[0].time).collect();
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    0.5 * d[d.len() / 2]
}

/// RMSE of position residuals after aligning `est` to `gt` with a
/// similarity transform. `tolerance` defaults to half the estimate's
/// frame period.
pub fn ate_sim3(est: &Trajectory, gt: &Trajectory, tolerance: Option<f64>) -> Result<AteReport> {
    let tol = tolerance.unwrap_or_else(|| default_association_tolerance(est));
    let pairs = associate(est, gt, tol);
    let src: Vec<Vec3> = pairs.iter().map(|&(i, _)| est.samples()[i].pose.translation).collect();
    let dst: Vec<Vec3> = pairs.iter().map(|&(_, j)| gt.samples()[j].pose.translation).collect();
    let alignment = umeyama(&src, &dst)?;
    let sq: f64 = src
        .iter()
        .zip(&dst)
        .map(|(s, d)| (alignment.apply(s) - d).norm_squared())
        .sum();
    Ok(AteReport {
        rmse_m: (sq / src.len() as f64).sqrt(),
        alignment,
        pairs: src.len(),
    })
}

/// Formats like C's `%.6g`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding can carry into the next decade (e.g. 999999.7)
    let rounded: f64 = format!("{:.5e}", x).parse().unwrap_or(x);
    let exp = if rounded.abs() >= 10f64.powi(exp + 1) {
        exp + 1
    } else {
        exp
    };
    if !(-5..6).contains(&exp) {
        let s = format!("{:.5e}", x);
        let (mant, e) = s.split_once('e').expect("exponent present");
        let mant = trim_zeros(mant);
        let e: i32 = e.parse().expect("integer exponent");
        format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
