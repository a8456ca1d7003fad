//! The deterministic part `χ(t) = r₀ + ∫₀ᵗ ν` of the short rate.

use crate::error::{Error, Result};
use crate::spline::PiecewiseCubic;

/// How `χ` continues past the last knot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    /// Hold the terminal value; `ν = 0` beyond the last knot.
    Constant,
    /// Keep evaluating the last polynomial piece.
    Polynomial,
}

/// Piecewise-cubic `χ(t)` on `[t₀, ∞)`, continuous; `ν = χ'` may jump at
/// knots.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftCurve {
    pieces: PiecewiseCubic,
    /// `∫_{t₀}^{knot_i} χ` at every knot.
    primitive_at_knots: Vec<f64>,
    pub r0: f64,
    pub extrapolation: Extrapolation,
}

fn poly_integral(c: &[f64; 4], d: f64) -> f64 {
    d * (c[0] + d * (c[1] / 2.0 + d * (c[2] / 3.0 + d * c[3] / 4.0)))
}

impl DriftCurve {
    /// Builds a curve from polynomial pieces, checking `χ` for continuity at
    /// the interior knots.
    pub fn from_pieces(pieces: PiecewiseCubic, extrapolation: Extrapolation) -> Result<Self> {
        let k = &pieces.knots;
        let c = &pieces.coeffs;
        if k.len() < 2 || c.len() != k.len() - 1 {
            return Err(Error::Validation("drift needs n+1 knots for n pieces".into()));
        }
        if k.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("drift knots must be strictly increasing".into()));
        }
        if c.iter().flatten().chain(k).any(|v| !v.is_finite()) {
            return Err(Error::Validation("drift coefficients must be finite".into()));
        }
        let mut primitive_at_knots = vec![0.0];
        for i in 0..c.len() {
            let h = k[i + 1] - k[i];
            let [a, b, cc, d] = c[i];
            primitive_at_knots.push(primitive_at_knots[i] + poly_integral(&c[i], h));
            if i + 1 < c.len() {
                let end = a + h * (b + h * (cc + h * d));
                if (end - c[i + 1][0]).abs() > 1e-9 * (1.0 + end.abs()) {
                    return Err(Error::Validation(format!("drift is discontinuous at t = {}", k[i + 1])));
                }
            }
        }
        let r0 = c[0][0];
        Ok(DriftCurve { pieces, primitive_at_knots, r0, extrapolation })
    }

    /// `χ ≡ r₀` (zero drift).
    pub fn constant(r0: f64) -> Self {
        DriftCurve::from_pieces(
            PiecewiseCubic { knots: vec![0.0, 1.0], coeffs: vec![[r0, 0.0, 0.0, 0.0]] },
            Extrapolation::Constant,
        )
        .expect("constant drift is valid")
    }

    /// `χ(t) = r₀ + ν t` for all `t >= 0`.
    pub fn linear(r0: f64, nu: f64) -> Self {
        DriftCurve::from_pieces(
            PiecewiseCubic { knots: vec![0.0, 1.0], coeffs: vec![[r0, nu, 0.0, 0.0]] },
            Extrapolation::Polynomial,
        )
        .expect("linear drift is valid")
    }

    pub fn start(&self) -> f64 {
        self.pieces.knots[0]
    }

    pub fn end(&self) -> f64 {
        *self.pieces.knots.last().expect("at least two knots")
    }

    pub fn knots(&self) -> &[f64] {
        &self.pieces.knots
    }

    pub fn pieces(&self) -> &PiecewiseCubic {
        &self.pieces
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !t.is_finite() || t < self.start() {
            return Err(Error::Validation(format!(
                "time {t} is before the drift start {}",
                self.start()
            )));
        }
        Ok(())
    }

    fn held(&self, t: f64) -> bool {
        self.extrapolation == Extrapolation::Constant && t > self.end()
    }

    /// `χ(t)`.
    pub fn chi(&self, t: f64) -> f64 {
        if self.held(t) {
            self.pieces.eval(self.end())
        } else {
            self.pieces.eval(t)
        }
    }

    /// `ν(t) = χ'(t)`.
    pub fn nu(&self, t: f64) -> f64 {
        if self.held(t) {
            0.0
        } else {
            self.pieces.derivative(t)
        }
    }

    /// `∫_{t₀}^t χ(s) ds`.
    fn primitive(&self, t: f64) -> f64 {
        let k = &self.pieces.knots;
        let n = self.pieces.coeffs.len();
        if self.held(t) {
            return self.primitive_at_knots[n] + self.chi(self.end()) * (t - self.end());
        }
        let i = match k.partition_point(|&x| x <= t) {
            0 => 0,
            j if j > n => n - 1,
            j => j - 1,
        };
        self.primitive_at_knots[i] + poly_integral(&self.pieces.coeffs[i], t - k[i])
    }

    /// `∫_a^b χ(s) ds`, exact for the polynomial pieces.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        self.check_time(a)?;
        self.check_time(b)?;
        Ok(self.primitive(b) - self.primitive(a))
    }

    /// `η(t, T) = ∫_t^T [χ(s) − χ(t)] ds`.
    pub fn eta(&self, t: f64, maturity: f64) -> Result<f64> {
        if maturity < t {
            return Err(Error::Validation(format!("maturity {maturity} precedes t = {t}")));
        }
        self.check_time(t)?;
        self.check_time(maturity)?;
        // Integrate χ − χ(t) piece by piece so a flat curve gives exactly 0.
        let chi_t = self.chi(t);
        let k = &self.pieces.knots;
        let n = self.pieces.coeffs.len();
        let poly_end = if self.extrapolation == Extrapolation::Constant {
            maturity.min(self.end())
        } else {
            maturity
        };
        let mut total = 0.0;
        for i in 0..n {
            let lo = if i == 0 { f64::NEG_INFINITY } else { k[i] };
            let hi = if i + 1 == n { f64::INFINITY } else { k[i + 1] };
            let (a, b) = (t.max(lo), poly_end.min(hi));
            if b > a {
                let mut c = self.pieces.coeffs[i];
                c[0] -= chi_t;
                total += poly_integral(&c, b - k[i]) - poly_integral(&c, a - k[i]);
            }
        }
        if self.held(maturity) {
            let from = t.max(self.end());
            total += (self.chi(self.end()) - chi_t) * (maturity - from);
        }
        Ok(total)
    }

    /// `lim_{s→∞} χ(s)`, if finite.
    pub fn chi_limit(&self) -> Result<f64> {
        match self.extrapolation {
            Extrapolation::Constant => Ok(self.chi(self.end())),
            Extrapolation::Polynomial => {
                let last = self.pieces.coeffs.last().expect("at least one piece");
                if last[1] == 0.0 && last[2] == 0.0 && last[3] == 0.0 {
                    Ok(last[0])
                } else {
                    Err(Error::Admissibility(
                        "χ grows without bound, so the long-maturity yield diverges; a constant \
                         nonzero drift is not admissible"
                            .into(),
                    ))
                }
            }
        }
    }
}

/// `η(t, T)` for `drift`.
pub fn eta(drift: &DriftCurve, t: f64, maturity: f64) -> Result<f64> {
    drift.eta(t, maturity)
}
