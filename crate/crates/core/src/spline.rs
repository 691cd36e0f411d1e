//! Natural cubic splines on non-uniform knots.

use crate::error::{Error, Result};

/// Piecewise cubic with zero second derivative at both ends.
///
/// Segment `i` covers `[knots[i], knots[i + 1]]` and evaluates
/// `y_i + b_i dx + c_i dx^2 + d_i dx^3`.
#[derive(Clone, Debug)]
pub struct NaturalCubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl NaturalCubicSpline {
    /// Fits the spline. Knots must be strictly increasing; at least two are required.
    pub fn new(knots: &[f64], values: &[f64]) -> Result<Self> {
        let n = knots.len();
        if values.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: values.len(),
            });
        }
        if n < 2 {
            return Err(Error::InsufficientSamples { needed: 2, got: n });
        }
        if let Some(i) = knots.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotonicTimestamps { index: i + 1 });
        }

        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n - 1).map(|i| (values[i + 1] - values[i]) / h[i]).collect();

        // Second derivatives m_1..m_{n-2}; m_0 = m_{n-1} = 0.
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for j in 0..k {
                let i = j + 1;
                diag[j] = 2.0 * (h[i - 1] + h[i]);
                upper[j] = h[i];
                rhs[j] = 6.0 * (slope[i] - slope[i - 1]);
            }
            // Thomas algorithm; the system is strictly diagonally dominant.
            for j in 1..k {
                let w = h[j] / diag[j - 1];
                diag[j] -= w * upper[j - 1];
                rhs[j] -= w * rhs[j - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for j in (0..k - 1).rev() {
                m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
            }
        }

        let mut b = Vec::with_capacity(n - 1);
        let mut c = Vec::with_capacity(n - 1);
        let mut d = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            b.push(slope[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0);
            c.push(m[i] / 2.0);
            d.push((m[i + 1] - m[i]) / (6.0 * h[i]));
        }
        Ok(Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            b,
            c,
            d,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn span(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    /// Segment containing `x`, or `Err(k)` when `x` is exactly knot `k`.
    fn locate(&self, x: f64) -> std::result::Result<usize, usize> {
        match self.knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(k) => Err(k),
            Err(0) => Ok(0),
            Err(i) => Ok((i - 1).min(self.knots.len() - 2)),
        }
    }

    /// Value at `x`. Knot positions return the stored sample bit-exactly;
    /// outside the span the end cubics are extrapolated.
    pub fn eval(&self, x: f64) -> f64 {
        match self.locate(x) {
            Err(k) => self.values[k],
            Ok(i) => {
                let dx = x - self.knots[i];
                self.values[i] + dx * (self.b[i] + dx * (self.c[i] + dx * self.d[i]))
            }
        }
    }

    /// First derivative at `x`; at an interior knot the right-hand segment is used.
    pub fn derivative(&self, x: f64) -> f64 {
        let i = match self.locate(x) {
            Ok(i) => i,
            Err(k) => k.min(self.knots.len() - 2),
        };
        let dx = x - self.knots[i];
        self.b[i] + dx * (2.0 * self.c[i] + 3.0 * dx * self.d[i])
    }

    /// One-sided first derivatives `(left, right)` at interior knot `k`.
    pub fn knot_derivatives(&self, k: usize) -> (f64, f64) {
        assert!(k > 0 && k + 1 < self.knots.len(), "interior knot expected");
        let h = self.knots[k] - self.knots[k - 1];
        let i = k - 1;
        let left = self.b[i] + h * (2.0 * self.c[i] + 3.0 * h * self.d[i]);
        (left, self.b[k])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Gaussian elimination on the full (n x n) natural-spline system,
    /// independent of the tridiagonal sweep above.
    #[allow(clippy::needless_range_loop)]
    fn second_derivatives_dense(x: &[f64], y: &[f64]) -> Vec<f64> {
        let n = x.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        a[0][0] = 1.0;
        a[n - 1][n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            a[i][i - 1] = h0;
            a[i][i] = 2.0 * (h0 + h1);
            a[i][i + 1] = h1;
            a[i][n] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for row in 0..n {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for k in col..=n {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
        (0..n).map(|i| a[i][n] / a[i][i]).collect()
    }

    fn eval_from_moments(x: &[f64], y: &[f64], m: &[f64], t: f64) -> f64 {
        let i = x.windows(2).position(|w| t <= w[1]).unwrap();
        let h = x[i + 1] - x[i];
        let a = (x[i + 1] - t) / h;
        let b = (t - x[i]) / h;
        a * y[i] + b * y[i + 1] + ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0
    }

    #[test]
    fn collinear_data_is_linear() {
        let s = NaturalCubicSpline::new(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.eval(1.5), 1.5);
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0.0, 1.0, 2.0, 3.0];
        let m = second_derivatives_dense(&x, &y);
        assert!((eval_from_moments(&x, &y, &m, 1.5) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn matches_dense_oracle_on_irregular_knots() {
        let x = [0.0, 0.3, 0.35, 1.1, 2.0, 2.2, 3.7];
        let y = [1.0, -0.5, 0.25, 2.0, 1.5, -1.0, 0.0];
        let s = NaturalCubicSpline::new(&x, &y).unwrap();
        let m = second_derivatives_dense(&x, &y);
        for k in 0..=370 {
            let t = k as f64 * 0.01;
            assert!((s.eval(t) - eval_from_moments(&x, &y, &m, t)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn knots_reproduced_exactly_and_derivative_continuous() {
        let x = [0.0, 0.5, 1.3, 2.0, 2.1];
        let y = [3.0, -1.0, 0.7, 0.1, 5.0];
        let s = NaturalCubicSpline::new(&x, &y).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(s.eval(*xi), *yi);
        }
        for k in 1..x.len() - 1 {
            let (l, r) = s.knot_derivatives(k);
            assert!((l - r).abs() < 1e-9);
        }
    }

    #[test]
    fn two_knots_is_a_line() {
        let s = NaturalCubicSpline::new(&[1.0, 3.0], &[2.0, 6.0]).unwrap();
        assert_eq!(s.eval(2.0), 4.0);
        assert_eq!(s.derivative(2.5), 2.0);
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(matches!(
            NaturalCubicSpline::new(&[0.0, 0.0, 1.0], &[0.0; 3]),
            Err(Error::NonMonotonicTimestamps { index: 1 })
        ));
        assert!(NaturalCubicSpline::new(&[0.0], &[0.0]).is_err());
    }
}
