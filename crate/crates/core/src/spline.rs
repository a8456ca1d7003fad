//! Piecewise cubic interpolants used to turn residual yields into a drift.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Piecewise cubic in local coordinates: on `[x_i, x_{i+1}]`,
/// `p(x) = c0 + c1 d + c2 d² + c3 d³` with `d = x − x_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCubic {
    pub knots: Vec<f64>,
    pub coeffs: Vec<[f64; 4]>,
}

/// End condition / shape policy for [`interpolate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplineKind {
    /// C² cubic spline, clamped slope on the left, not-a-knot on the right.
    /// Reproduces quadratics exactly.
    #[default]
    ClampedNotAKnot,
    /// Fritsch–Carlson monotone Hermite interpolant (C¹ only) with the same
    /// clamped left slope.
    Pchip,
}

impl PiecewiseCubic {
    fn segment(&self, x: f64) -> usize {
        let n = self.coeffs.len();
        match self.knots.partition_point(|&k| k <= x) {
            0 => 0,
            i if i > n => n - 1,
            i => i - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let d = x - self.knots[i];
        let [a, b, c, e] = self.coeffs[i];
        a + d * (b + d * (c + d * e))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let d = x - self.knots[i];
        let [_, b, c, e] = self.coeffs[i];
        b + d * (2.0 * c + 3.0 * d * e)
    }

    /// The derivative as a piecewise polynomial on the same knots.
    pub fn differentiate(&self) -> PiecewiseCubic {
        PiecewiseCubic {
            knots: self.knots.clone(),
            coeffs: self.coeffs.iter().map(|&[_, b, c, e]| [b, 2.0 * c, 3.0 * e, 0.0]).collect(),
        }
    }
}

fn hermite(knots: &[f64], y: &[f64], slopes: &[f64]) -> PiecewiseCubic {
    let coeffs = knots
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let h = w[1] - w[0];
            let delta = (y[i + 1] - y[i]) / h;
            let (s0, s1) = (slopes[i], slopes[i + 1]);
            [y[i], s0, (3.0 * delta - 2.0 * s0 - s1) / h, (s0 + s1 - 2.0 * delta) / (h * h)]
        })
        .collect();
    PiecewiseCubic { knots: knots.to_vec(), coeffs }
}

fn check_nodes(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Validation("spline abscissae and values differ in length".into()));
    }
    if x.len() < 3 {
        return Err(Error::Validation(format!("spline needs at least 3 nodes, got {}", x.len())));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Validation("spline nodes must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn clamped_not_a_knot(x: &[f64], y: &[f64], left_slope: f64) -> Result<PiecewiseCubic> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    a[(0, 0)] = 1.0;
    rhs[0] = left_slope;
    for i in 1..n - 1 {
        a[(i, i - 1)] = h[i];
        a[(i, i)] = 2.0 * (h[i - 1] + h[i]);
        a[(i, i + 1)] = h[i - 1];
        rhs[i] = 3.0 * (h[i] * d[i - 1] + h[i - 1] * d[i]);
    }
    // Continuous third derivative at x_{n-2}.
    let (p, q) = (n - 3, n - 2);
    let (wp, wq) = (1.0 / (h[p] * h[p]), 1.0 / (h[q] * h[q]));
    a[(n - 1, p)] = wp;
    a[(n - 1, q)] = wp - wq;
    a[(n - 1, n - 1)] = -wq;
    rhs[n - 1] = 2.0 * (wp * d[p] - wq * d[q]);
    let slopes = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("spline system is singular".into()))?;
    Ok(hermite(x, y, slopes.as_slice()))
}

fn pchip(x: &[f64], y: &[f64], left_slope: f64) -> PiecewiseCubic {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut s = vec![0.0; n];
    s[0] = left_slope;
    for i in 1..n - 1 {
        if d[i - 1] * d[i] > 0.0 {
            let (w1, w2) = (2.0 * h[i] + h[i - 1], h[i] + 2.0 * h[i - 1]);
            s[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    // Shape-preserving three-point end slope.
    let (h0, h1, d0, d1) = (h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    let mut end = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if end * d0 <= 0.0 {
        end = 0.0;
    } else if d0 * d1 < 0.0 && end.abs() > 3.0 * d0.abs() {
        end = 3.0 * d0;
    }
    s[n - 1] = end;
    hermite(x, y, &s)
}

/// Interpolates `(x, y)` with a prescribed slope at `x[0]`.
pub fn interpolate(x: &[f64], y: &[f64], left_slope: f64, kind: SplineKind) -> Result<PiecewiseCubic> {
    check_nodes(x, y)?;
    match kind {
        SplineKind::ClampedNotAKnot => clamped_not_a_knot(x, y, left_slope),
        SplineKind::Pchip => Ok(pchip(x, y, left_slope)),
    }
}
