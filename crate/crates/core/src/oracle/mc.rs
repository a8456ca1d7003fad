//! Monte Carlo bond prices from folded Brownian paths.
//!
//! The half-line motion is `|W|` and the two-barrier motion is the triangle
//! wave `h(W)` of period `2L`; both have the law of the reflected process.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::OracleModel;
use crate::drift::DriftCurve;
use crate::error::{Error, Result};

const BLOCK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub steps_per_year: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { n_paths: 100_000, steps_per_year: 250, seed: 1, antithetic: false }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths < 100 {
            return Err(Error::Validation(format!("n_paths must be at least 100, got {}", self.n_paths)));
        }
        if self.steps_per_year == 0 {
            return Err(Error::Validation("steps_per_year must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub price: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Triangle wave of period `2l` with `h(w) = |w|` on `[−l, l]`.
pub fn triangle_wave(w: f64, l: f64) -> f64 {
    (w - 2.0 * l * (w / (2.0 * l)).round()).abs()
}

#[derive(Clone, Copy)]
enum PathRule {
    /// Unrestricted `W`, mapped through the fold.
    Fold,
    /// The state itself is reflected after every step.
    Reflect,
}

fn position(state: f64, model: OracleModel, rule: PathRule) -> f64 {
    match (rule, model) {
        (PathRule::Reflect, _) => state,
        (PathRule::Fold, OracleModel::Semi) => state.abs(),
        (PathRule::Fold, OracleModel::Interval { l }) => triangle_wave(state, l),
    }
}

fn advance(state: f64, dw: f64, model: OracleModel, rule: PathRule) -> f64 {
    match (rule, model) {
        (PathRule::Fold, _) => state + dw,
        (PathRule::Reflect, OracleModel::Semi) => (state + dw).abs(),
        (PathRule::Reflect, OracleModel::Interval { l }) => triangle_wave(state + dw, l),
    }
}

fn simulate(
    z: f64,
    t: f64,
    maturity: f64,
    sigma: f64,
    drift: &DriftCurve,
    mc: &McConfig,
    model: OracleModel,
    rule: PathRule,
) -> Result<McEstimate> {
    mc.validate()?;
    if !(sigma >= 0.0 && maturity > t) {
        return Err(Error::Validation(format!("need sigma >= 0 and T > t, got {sigma}, {t}, {maturity}")));
    }
    let chi0 = drift.chi(t);
    let x0 = if sigma > 0.0 { (z - chi0) / sigma } else { 0.0 };
    let inside = match model {
        OracleModel::Semi => x0 >= 0.0,
        OracleModel::Interval { l } => x0 >= 0.0 && x0 <= l,
    };
    if !inside {
        return Err(Error::Domain(format!("start point x = {x0} lies outside the domain")));
    }
    let tau = maturity - t;
    let n_steps = ((tau * mc.steps_per_year as f64).ceil() as usize).max(1);
    let dt = tau / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let chi: Vec<f64> = (0..=n_steps).map(|k| drift.chi(t + k as f64 * dt)).collect();
    let chi_integral: f64 =
        dt * (0.5 * (chi[0] + chi[n_steps]) + chi[1..n_steps].iter().sum::<f64>());

    // Discount of one path from its Gaussian increments, with sign `s`.
    let path = |normals: &[f64], s: f64| -> f64 {
        let mut state = x0;
        let mut acc = 0.5 * position(state, model, rule);
        for (k, &g) in normals.iter().enumerate() {
            state = advance(state, s * g * sqrt_dt, model, rule);
            let w = if k + 1 == n_steps { 0.5 } else { 1.0 };
            acc += w * position(state, model, rule);
        }
        (-(sigma * acc * dt + chi_integral)).exp()
    };

    let n_samples = if mc.antithetic { mc.n_paths.div_ceil(2) } else { mc.n_paths };
    let n_blocks = n_samples.div_ceil(BLOCK);
    let sums: Vec<(f64, f64)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(b as u64);
            let count = BLOCK.min(n_samples - b * BLOCK);
            let mut normals = vec![0.0; n_steps];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for g in normals.iter_mut() {
                    *g = StandardNormal.sample(&mut rng);
                }
                let v = if mc.antithetic {
                    0.5 * (path(&normals, 1.0) + path(&normals, -1.0))
                } else {
                    path(&normals, 1.0)
                };
                s1 += v;
                s2 += v * v;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = n_samples as f64;
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(McEstimate { price: mean, std_error: (var / n).sqrt(), n_samples })
}

/// Monte Carlo price with the reflection realized by folding an
/// unrestricted Brownian motion; trapezoidal discounting on the time grid.
pub fn mc_price(
    z: f64,
    t: f64,
    maturity: f64,
    sigma: f64,
    drift: &DriftCurve,
    mc: &McConfig,
    model: OracleModel,
) -> Result<McEstimate> {
    simulate(z, t, maturity, sigma, drift, mc, model, PathRule::Fold)
}

/// Same as [`mc_price`] but reflecting the state after every step.
pub fn mc_price_reflected(
    z: f64,
    t: f64,
    maturity: f64,
    sigma: f64,
    drift: &DriftCurve,
    mc: &McConfig,
    model: OracleModel,
) -> Result<McEstimate> {
    simulate(z, t, maturity, sigma, drift, mc, model, PathRule::Reflect)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_wave_folds_into_the_box() {
        let l = 2.0;
        for &(w, h) in &[(0.5, 0.5), (-0.5, 0.5), (2.5, 1.5), (4.2, 0.2), (-5.0, 1.0), (6.0, 2.0)] {
            assert!((triangle_wave(w, l) - h).abs() < 1e-12, "{w}");
        }
    }

    #[test]
    fn zero_volatility_is_deterministic() {
        // With σ = 0 the short rate is χ ≡ z.
        let drift = DriftCurve::constant(0.03);
        let mc = McConfig { n_paths: 200, ..Default::default() };
        let e = mc_price(0.03, 0.0, 4.0, 0.0, &drift, &mc, OracleModel::Semi).unwrap();
        assert!((e.price - (-0.12f64).exp()).abs() < 1e-14);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn seeded_runs_repeat_and_antithetic_helps() {
        let drift = DriftCurve::constant(-0.05);
        let mc = McConfig { n_paths: 20_000, steps_per_year: 50, seed: 7, antithetic: false };
        let a = mc_price(0.0, 0.0, 5.0, 0.04, &drift, &mc, OracleModel::Semi).unwrap();
        let b = mc_price(0.0, 0.0, 5.0, 0.04, &drift, &mc, OracleModel::Semi).unwrap();
        assert_eq!(a, b);
        let anti = mc_price(0.0, 0.0, 5.0, 0.04, &drift, &McConfig { antithetic: true, ..mc }, OracleModel::Semi)
            .unwrap();
        assert!(anti.std_error < a.std_error);
        assert!((anti.price - a.price).abs() < 3.0 * (a.std_error.hypot(anti.std_error)));
    }

    #[test]
    fn rejects_bad_inputs() {
        let drift = DriftCurve::constant(0.0);
        let mc = McConfig { n_paths: 50, ..Default::default() };
        assert!(mc_price(0.01, 0.0, 1.0, 0.04, &drift, &mc, OracleModel::Semi).unwrap_err().is_validation());
        let mc = McConfig::default();
        assert!(matches!(
            mc_price(-0.01, 0.0, 1.0, 0.04, &drift, &mc, OracleModel::Semi),
            Err(Error::Domain(_))
        ));
    }
}
