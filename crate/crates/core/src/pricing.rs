//! Zero-coupon bond prices and yields from the eigenfunction expansions.

use std::f64::consts::PI;

use crate::airy::{ai, ai_pair};
use crate::drift::DriftCurve;
use crate::error::{Error, Result};
use crate::spectral::{GroundState, IntervalSpectrum, RobinSpectrum, SemiSpectrum};

/// Below this time to maturity the level cap is raised to
/// [`SHORT_MATURITY_LEVELS`].
pub const SHORT_MATURITY: f64 = 0.1;
pub const SHORT_MATURITY_LEVELS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelKind {
    #[default]
    Semi,
    Interval,
    Robin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricingConfig {
    pub n_levels: usize,
    /// Stop once the next-term envelope drops below this fraction of the sum.
    pub tail_tolerance: f64,
    pub model: ModelKind,
}

impl Default for PricingConfig {
    fn default() -> Self {
        PricingConfig { n_levels: 300, tail_tolerance: 1e-12, model: ModelKind::Semi }
    }
}

impl PricingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_levels == 0 {
            return Err(Error::Validation("n_levels must be at least 1".into()));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance <= 1e-6) {
            return Err(Error::Validation(format!(
                "tail_tolerance must lie in (0, 1e-6], got {}",
                self.tail_tolerance
            )));
        }
        Ok(())
    }
}

/// A yield for time to maturity `maturity` (years), as a decimal rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldPoint {
    pub maturity: f64,
    pub yield_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceEstimate {
    pub price: f64,
    pub terms_used: usize,
    /// Estimated truncation error of `price`.
    pub tail_bound: f64,
    /// Whether the tail tolerance was met before the level cap.
    pub converged: bool,
}

impl PriceEstimate {
    pub fn yield_for(&self, tau: f64) -> f64 {
        -self.price.ln() / tau
    }
}

/// Decay constant of the series tail, `β τ (3π/2)^{2/3}`.
pub fn gamma_series(beta: f64, tau: f64) -> f64 {
    beta * tau * (1.5 * PI).powf(2.0 / 3.0)
}

fn level_cap(cfg: &PricingConfig, tau: f64, available: usize) -> usize {
    let wanted = if tau < SHORT_MATURITY {
        cfg.n_levels.max(SHORT_MATURITY_LEVELS)
    } else {
        cfg.n_levels
    };
    wanted.min(available)
}

struct SeriesSum {
    sum: f64,
    used: usize,
    bound: f64,
    converged: bool,
}

/// Sums `term(k)` for `k < cap`, stopping once `envelope(k+1)` falls below
/// `tol·|sum|`. An unconverged alternating tail is replaced by the midpoint
/// of the last two partial sums.
fn sum_series<T, E>(cap: usize, term: T, envelope: E, tol: f64) -> SeriesSum
where
    T: Fn(usize) -> f64,
    E: Fn(usize) -> f64,
{
    let mut sum = 0.0;
    let mut last = 0.0;
    for k in 0..cap {
        last = term(k);
        sum += last;
        if k + 1 < cap {
            let env = envelope(k + 1);
            if env < tol * sum.abs() {
                return SeriesSum { sum, used: k + 1, bound: env, converged: true };
            }
        }
    }
    SeriesSum { sum: sum - 0.5 * last, used: cap, bound: 0.5 * last.abs(), converged: false }
}

/// Asymptotic size of the `n`-th series term before decay,
/// `uₙ = (−1)^{n+1} √(2/(3n))`.
pub fn tail_asymptote(n: usize) -> f64 {
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    sign * (2.0 / (3.0 * n as f64)).sqrt()
}

/// Sum of an alternating series by repeated averaging of the last
/// `depth + 1` partial sums.
pub fn accelerated_alternating_sum(terms: &[f64], depth: usize) -> f64 {
    let mut partial = Vec::with_capacity(depth + 1);
    let mut s = 0.0;
    let start = terms.len().saturating_sub(depth + 1);
    for (i, t) in terms.iter().enumerate() {
        s += t;
        if i >= start {
            partial.push(s);
        }
    }
    while partial.len() > 1 {
        partial = partial.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    partial.first().copied().unwrap_or(0.0)
}

/// Local-amplitude envelope of a term whose eigenfunction has amplitude `amp0`
/// at the turning region `u = −e`, evaluated at `u = y − e`.
fn envelope(coef_amp: f64, e: f64, y: f64, decay: f64) -> f64 {
    let ratio = (e.max(1.0) / (e - y).max(1.0)).powf(0.25);
    coef_amp * ratio * decay
}

fn check_horizon(t: f64, maturity: f64) -> Result<f64> {
    if !(t.is_finite() && maturity.is_finite()) || maturity < t {
        return Err(Error::Validation(format!("need t <= T, got t = {t}, T = {maturity}")));
    }
    Ok(maturity - t)
}

/// Half-line model price of the zero-coupon bond.
pub fn bond_price_semi(
    z: f64,
    t: f64,
    maturity: f64,
    spectrum: &SemiSpectrum,
    drift: &DriftCurve,
    cfg: &PricingConfig,
) -> Result<PriceEstimate> {
    cfg.validate()?;
    let tau = check_horizon(t, maturity)?;
    let chi = drift.chi(t);
    let y = spectrum.params.airy_argument(z, chi);
    if !(y >= 0.0) {
        return Err(Error::Domain(format!(
            "short rate {z} lies below the reflecting level χ(t) = {chi}"
        )));
    }
    let eta = drift.eta(t, maturity)?;
    let beta = spectrum.params.beta;
    let lv = &spectrum.levels;
    let cap = level_cap(cfg, tau, lv.len());
    let s = sum_series(
        cap,
        |k| lv[k].weight * ai(y - lv[k].e) * (-beta * lv[k].e * tau).exp(),
        |k| {
            let amp = (lv[k].weight * lv[k].ai_at_zero).abs();
            envelope(amp, lv[k].e, y, (-beta * lv[k].e * tau).exp())
        },
        cfg.tail_tolerance,
    );
    let scale = (-eta - chi * tau).exp();
    Ok(PriceEstimate {
        price: scale * s.sum,
        terms_used: s.used,
        tail_bound: scale * s.bound,
        converged: s.converged,
    })
}

/// Individual series terms `vₙ` of the half-line price (without the common
/// discount factor), for diagnostics.
pub fn semi_series_terms(z: f64, chi: f64, tau: f64, spectrum: &SemiSpectrum) -> Vec<f64> {
    let y = spectrum.params.airy_argument(z, chi);
    let beta = spectrum.params.beta;
    spectrum
        .levels
        .iter()
        .map(|l| l.weight * ai(y - l.e) * (-beta * l.e * tau).exp())
        .collect()
}

/// Two-barrier (box) model price.
pub fn bond_price_interval(
    z: f64,
    t: f64,
    maturity: f64,
    spectrum: &IntervalSpectrum,
    drift: &DriftCurve,
    cfg: &PricingConfig,
) -> Result<PriceEstimate> {
    cfg.validate()?;
    let tau = check_horizon(t, maturity)?;
    let chi = drift.chi(t);
    let p = spectrum.params;
    let x = (z - chi) / p.sigma;
    if !(x >= 0.0 && x <= spectrum.l * (1.0 + 1e-14)) {
        return Err(Error::Domain(format!(
            "x = {x} lies outside the box [0, {}]",
            spectrum.l
        )));
    }
    let eta = drift.eta(t, maturity)?;
    let y = p.alpha * x;
    let lv = &spectrum.levels;
    let cap = level_cap(cfg, tau, lv.len());
    let s = sum_series(
        cap,
        |k| lv[k].b * lv[k].phi(y - lv[k].e).0 * (-p.beta * lv[k].e * tau).exp(),
        |k| {
            let amp = (lv[k].b * lv[k].phi0).abs().max((lv[k].b * lv[k].phi_l).abs());
            envelope(amp, lv[k].e, y, (-p.beta * lv[k].e * tau).exp())
        },
        cfg.tail_tolerance,
    );
    let scale = (-eta - chi * tau).exp();
    Ok(PriceEstimate {
        price: scale * s.sum,
        terms_used: s.used,
        tail_bound: scale * s.bound,
        converged: s.converged,
    })
}

/// Price with the reflecting barrier on the short rate at `r_*` and constant
/// drift, as encoded in `spectrum`.
pub fn bond_price_robin(
    z: f64,
    t: f64,
    maturity: f64,
    spectrum: &RobinSpectrum,
    cfg: &PricingConfig,
) -> Result<PriceEstimate> {
    cfg.validate()?;
    let tau = check_horizon(t, maturity)?;
    if !(z >= spectrum.r_star) {
        return Err(Error::Domain(format!(
            "short rate {z} lies below the barrier r* = {}",
            spectrum.r_star
        )));
    }
    let y = z / spectrum.params.beta;
    let g = spectrum.gamma_r;
    let lv = &spectrum.levels;
    let cap = level_cap(cfg, tau, lv.len());
    let s = sum_series(
        cap,
        |k| lv[k].d * ai(y - lv[k].e) * (-lv[k].lambda * tau).exp(),
        |k| {
            let (a, ap) = ai_pair(spectrum.y_star - lv[k].e);
            let e = lv[k].e - spectrum.y_star;
            let amp = lv[k].d.abs() * (a * a + ap * ap / e.abs().max(1.0)).sqrt();
            envelope(amp, e, y - spectrum.y_star, (-lv[k].lambda * tau).exp())
        },
        cfg.tail_tolerance,
    );
    let scale = (-g * y).exp();
    Ok(PriceEstimate {
        price: scale * s.sum,
        terms_used: s.used,
        tail_bound: scale * s.bound,
        converged: s.converged,
    })
}

/// A spectrum together with what it needs to price.
#[derive(Debug, Clone, Copy)]
pub enum PricingModel<'a> {
    Semi(&'a SemiSpectrum, &'a DriftCurve),
    Interval(&'a IntervalSpectrum, &'a DriftCurve),
    Robin(&'a RobinSpectrum),
}

impl PricingModel<'_> {
    pub fn price(&self, z: f64, t: f64, maturity: f64, cfg: &PricingConfig) -> Result<PriceEstimate> {
        match *self {
            PricingModel::Semi(s, d) => bond_price_semi(z, t, maturity, s, d, cfg),
            PricingModel::Interval(s, d) => bond_price_interval(z, t, maturity, s, d, cfg),
            PricingModel::Robin(s) => bond_price_robin(z, t, maturity, s, cfg),
        }
    }
}

/// Yields `−ln P / (T − t)` for times to maturity `maturities`. Each point
/// fails independently.
pub fn yield_curve(
    z: f64,
    t: f64,
    maturities: &[f64],
    model: &PricingModel<'_>,
    cfg: &PricingConfig,
) -> Vec<Result<YieldPoint>> {
    maturities
        .iter()
        .map(|&m| {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Validation(format!("maturity must be positive, got {m}")));
            }
            let p = model.price(z, t, t + m, cfg)?;
            if !(p.price > 0.0) {
                return Err(Error::Accuracy(format!(
                    "non-positive price {} at maturity {m}",
                    p.price
                )));
            }
            Ok(YieldPoint { maturity: m, yield_value: p.yield_for(m) })
        })
        .collect()
}

/// Long-maturity yield `χ_∞ + E₁`.
pub fn asymptotic_yield<S: GroundState>(spectrum: &S, drift: &DriftCurve, t: f64) -> Result<f64> {
    let _ = drift.eta(t, t)?;
    Ok(drift.chi_limit()? + spectrum.ground_energy())
}
