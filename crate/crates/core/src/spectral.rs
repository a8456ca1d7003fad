//! Discrete eigensystems of `-½∂²ₓ + σx` with reflecting boundaries.
//!
//! Three geometries:
//!
//! * [`SemiSpectrum`]: half-line `x >= 0`, Neumann at 0. Eigenfunctions
//!   `aₙ Ai(αx − eₙ)` with `eₙ = −ξₙ`.
//! * [`IntervalSpectrum`]: box `0 <= x <= L`, Neumann at both ends.
//!   Eigenfunctions `aₙ φₙ` with `φ = Ai(u) − Q Bi(u)`, `u = αx − e`.
//! * [`RobinSpectrum`]: reflecting barrier on the short rate itself with a
//!   constant drift, giving a mixed condition `Ai'(y* − e) = γ Ai(y* − e)`.
//!
//! Energies are `Eₙ = β eₙ` in every case.

use std::f64::consts::PI;

use crate::airy::{
    ai, ai_pair, ai_prime_zeros, ai_zeros, airy_scaled, exp_weighted_ai_many, laplace_ai,
    scorer_gi_prime_many,
};
use crate::error::{Error, Result};
use crate::quad::{integrate_panels, QuadTol};
use crate::roots::brent;

/// Volatility `σ` and the derived scales `α = (2σ)^{1/3}`, `β = σ/α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Validation(format!("sigma must be positive, got {sigma}")));
        }
        let alpha = (2.0 * sigma).cbrt();
        Ok(ModelParams { sigma, alpha, beta: sigma / alpha })
    }

    /// Parameters from `β`, using `σ = √(2β³)`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Validation(format!("beta must be positive, got {beta}")));
        }
        Self::new((2.0 * beta * beta * beta).sqrt())
    }

    /// Maps a short rate to the dimensionless Airy argument `(z − χ)/β`.
    pub fn airy_argument(&self, z: f64, chi: f64) -> f64 {
        (z - chi) / self.beta
    }
}

/// Energy of the lowest level, `E₁ = β e₁`.
pub trait GroundState {
    fn ground_energy(&self) -> f64;
}

// ---------------------------------------------------------------- half-line

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiLevel {
    /// `eₙ = −ξₙ`.
    pub e: f64,
    /// Normalization of `Ai(αx − eₙ)` in `x`.
    pub a: f64,
    /// Overlap of the normalized eigenfunction with the unit claim.
    pub c: f64,
    /// `cₙ aₙ = π Gi'(ξₙ) / (|ξₙ| Ai(ξₙ))`; independent of `σ`.
    pub weight: f64,
    pub ai_at_zero: f64,
    pub gi_prime_at_zero: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiSpectrum {
    pub params: ModelParams,
    pub levels: Vec<SemiLevel>,
}

fn semi_level(params: &ModelParams, xi: f64, ai_xi: f64, gip: f64) -> SemiLevel {
    let e = -xi;
    let a = (params.alpha / (e * ai_xi * ai_xi)).sqrt();
    SemiLevel {
        e,
        a,
        c: PI / params.alpha * a * ai_xi * gip,
        weight: PI * gip / (e * ai_xi),
        ai_at_zero: ai_xi,
        gi_prime_at_zero: gip,
    }
}

impl SemiSpectrum {
    /// Builds levels from precomputed zeros `ξₙ` of `Ai'`.
    pub fn from_zeros(params: ModelParams, xi: &[f64]) -> Result<Self> {
        let gip = scorer_gi_prime_many(xi)?;
        let levels = xi
            .iter()
            .zip(&gip)
            .map(|(&x, &g)| semi_level(&params, x, ai(x), g))
            .collect();
        Ok(SemiSpectrum { params, levels })
    }

    /// Same zeros, different volatility. Only `aₙ` and `cₙ` change.
    pub fn rescaled(&self, params: ModelParams) -> SemiSpectrum {
        let levels = self
            .levels
            .iter()
            .map(|l| semi_level(&params, -l.e, l.ai_at_zero, l.gi_prime_at_zero))
            .collect();
        SemiSpectrum { params, levels }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `Eₙ = β eₙ` for level `n` (1-based).
    pub fn energy(&self, n: usize) -> f64 {
        self.params.beta * self.levels[n - 1].e
    }

    /// Normalized eigenfunction `ψₙ(x)`, `n` 1-based.
    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        let l = &self.levels[n - 1];
        l.a * ai(self.params.alpha * x - l.e)
    }

    /// Overlaps `∫₀^∞ ψₙ(x) Y(x) dx` of the first `n_max` levels with a
    /// claim `Y`, by quadrature.
    pub fn claim_coefficients<F: Fn(f64) -> f64>(&self, claim: F, n_max: usize) -> Result<Vec<f64>> {
        let alpha = self.params.alpha;
        self.levels
            .iter()
            .take(n_max)
            .enumerate()
            .map(|(i, l)| {
                // Ai(u) is below 1e-30 past u = 30; panels follow the local
                // oscillation length of the eigenfunction.
                let x_end = (l.e + 30.0) / alpha;
                let wave = PI / l.e.sqrt().max(1.0) / alpha;
                let n_panels = ((x_end / (0.25 * wave)).ceil() as usize).max(8);
                let breaks: Vec<f64> =
                    (0..=n_panels).map(|k| x_end * k as f64 / n_panels as f64).collect();
                let v = integrate_panels(
                    |x| self.eigenfunction(i + 1, x) * claim(x),
                    &breaks,
                    QuadTol { abs: 1e-13, rel: 1e-11 },
                )?;
                Ok(v.value)
            })
            .collect()
    }
}

impl GroundState for SemiSpectrum {
    fn ground_energy(&self) -> f64 {
        self.energy(1)
    }
}

pub fn build_semi_spectrum(sigma: f64, n_levels: usize) -> Result<SemiSpectrum> {
    let params = ModelParams::new(sigma)?;
    if n_levels == 0 {
        return Err(Error::Validation("n_levels must be at least 1".into()));
    }
    SemiSpectrum::from_zeros(params, &ai_prime_zeros(n_levels)?)
}

// ---------------------------------------------------------------- interval

/// End of the box at which `Q = Ai'/Bi'` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxEnd {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalLevel {
    pub e: f64,
    /// `Q(0, eₙ) = Ai'(−eₙ)/Bi'(−eₙ)`, possibly `±inf` when `Bi'(−eₙ) = 0`.
    pub q0: f64,
    pub a: f64,
    pub b: f64,
    pub phi0: f64,
    pub phi_l: f64,
    /// Scaled `Q` at `reference`: `Q = q_scaled · e^{−2 s_ref}`.
    q_scaled: f64,
    s_ref: f64,
    reference: BoxEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSpectrum {
    pub params: ModelParams,
    pub l: f64,
    pub levels: Vec<IntervalLevel>,
}

/// WKB level spacing `π / (√e − √(e − αL)₊)`.
fn predicted_spacing(alpha_l: f64, e: f64) -> f64 {
    let e = e.max(1e-12);
    PI / (e.sqrt() - (e - alpha_l).max(0.0).sqrt())
}

/// Cross product `Ai'(−e)Bi'(αL−e) − Ai'(αL−e)Bi'(−e)` times a positive
/// scale factor, together with the size of the Airy pairs entering it.
fn interval_determinant(alpha_l: f64, e: f64) -> (f64, f64) {
    let p = airy_scaled(-e);
    let q = airy_scaled(alpha_l - e);
    let damp = (-2.0 * (q.s - p.s)).exp();
    let t1 = p.ai_prime * q.bi_prime;
    let t2 = q.ai_prime * p.bi_prime * damp;
    let scale = p.ai.hypot(p.ai_prime) * q.bi.hypot(q.bi_prime)
        + q.ai.hypot(q.ai_prime) * p.bi.hypot(p.bi_prime) * damp;
    (t1 - t2, scale)
}

fn interval_level(params: &ModelParams, l: f64, e: f64, gi_left: f64, gi_right: f64) -> IntervalLevel {
    let alpha_l = params.alpha * l;
    let p = airy_scaled(-e);
    let q = airy_scaled(alpha_l - e);
    // Reference at the end with the larger |Bi'|; there φ = 1/(π Bi') exactly
    // by the Wronskian, and at the far end Q·Bi stays representable.
    let log_bip = |v: &crate::airy::ScaledAiry| v.s + v.bi_prime.abs().ln();
    let (reference, r, o) = if log_bip(&q) >= log_bip(&p) {
        (BoxEnd::Right, q, p)
    } else {
        (BoxEnd::Left, p, q)
    };
    let q_scaled = r.ai_prime / r.bi_prime;
    let phi_ref = (-r.s).exp() / (PI * r.bi_prime);
    let phi_other = (o.ai - q_scaled * o.bi * (2.0 * (o.s - r.s)).exp()) * (-o.s).exp();
    let (phi0, phi_l) = match reference {
        BoxEnd::Right => (phi_other, phi_ref),
        BoxEnd::Left => (phi_ref, phi_other),
    };
    let norm = e * phi0 * phi0 + (alpha_l - e) * phi_l * phi_l;
    IntervalLevel {
        e,
        q0: p.ai_prime / p.bi_prime,
        a: (params.alpha / norm).sqrt(),
        b: PI * (phi0 * gi_left - phi_l * gi_right) / norm,
        phi0,
        phi_l,
        q_scaled,
        s_ref: r.s,
        reference,
    }
}

impl IntervalLevel {
    /// `(φ(u), φ'(u))` at `u = αx − e`.
    pub fn phi(&self, u: f64) -> (f64, f64) {
        let v = airy_scaled(u);
        let down = (-v.s).exp();
        let k = self.q_scaled * (v.s - 2.0 * self.s_ref).exp();
        (v.ai * down - k * v.bi, v.ai_prime * down - k * v.bi_prime)
    }

    pub fn reference_end(&self) -> BoxEnd {
        self.reference
    }
}

impl IntervalSpectrum {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn alpha_l(&self) -> f64 {
        self.params.alpha * self.l
    }

    pub fn energy(&self, n: usize) -> f64 {
        self.params.beta * self.levels[n - 1].e
    }

    /// Normalized eigenfunction `ψₙ(x)`, `n` 1-based.
    pub fn eigenfunction(&self, n: usize, x: f64) -> f64 {
        let lv = &self.levels[n - 1];
        lv.a * lv.phi(self.params.alpha * x - lv.e).0
    }

    /// `∂ₓψₙ(x)`.
    pub fn eigenfunction_derivative(&self, n: usize, x: f64) -> f64 {
        let lv = &self.levels[n - 1];
        lv.a * self.params.alpha * lv.phi(self.params.alpha * x - lv.e).1
    }
}

impl GroundState for IntervalSpectrum {
    fn ground_energy(&self) -> f64 {
        self.energy(1)
    }
}

fn scan_interval_roots(alpha_l: f64, n_levels: usize, e_max: f64) -> Result<Vec<f64>> {
    let mut roots = Vec::with_capacity(n_levels.min(1 << 16));
    let mut e = 0.0;
    let (mut d, _) = interval_determinant(alpha_l, e);
    while roots.len() < n_levels && e < e_max {
        let step = (0.5 * predicted_spacing(alpha_l, e)).min(0.1);
        let next = (e + step).min(e_max);
        let (dn, _) = interval_determinant(alpha_l, next);
        if dn == 0.0 {
            roots.push(next);
        } else if d != 0.0 && d.signum() != dn.signum() {
            let r = brent(|x| interval_determinant(alpha_l, x).0, e, next, 1e-15 * next.max(1.0))?;
            roots.push(r);
        }
        e = next;
        d = dn;
    }
    for w in roots.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let gap = w[1] - w[0];
        if gap > 2.0 * predicted_spacing(alpha_l, mid) {
            return Err(Error::Root(format!(
                "level gap {gap} between {} and {} exceeds twice the predicted spacing",
                w[0], w[1]
            )));
        }
    }
    for &r in &roots {
        // Root precision is ~1e-15·e and dD/de grows like √e.
        let (d, scale) = interval_determinant(alpha_l, r);
        if d.abs() > 1e-10 * scale.max(1e-300) * r.max(1.0).sqrt() {
            return Err(Error::Accuracy(format!("interval level {r} has residual {d:e}")));
        }
    }
    Ok(roots)
}

fn interval_from_roots(params: ModelParams, l: f64, roots: Vec<f64>) -> Result<IntervalSpectrum> {
    if let Some(&bad) = roots.iter().find(|&&e| e <= 0.0) {
        return Err(Error::Accuracy(format!("non-positive interval level {bad}")));
    }
    let alpha_l = params.alpha * l;
    let mut args: Vec<f64> = roots.iter().map(|&e| -e).collect();
    args.extend(roots.iter().map(|&e| alpha_l - e));
    let gi = scorer_gi_prime_many(&args)?;
    let n = roots.len();
    let levels = roots
        .iter()
        .enumerate()
        .map(|(i, &e)| interval_level(&params, l, e, gi[i], gi[n + i]))
        .collect();
    Ok(IntervalSpectrum { params, l, levels })
}

fn check_box(sigma: f64, l: f64) -> Result<ModelParams> {
    let params = ModelParams::new(sigma)?;
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::Validation(format!("box width L must be positive, got {l}")));
    }
    Ok(params)
}

/// First `n_levels` levels of the box `[0, L]`.
pub fn build_interval_spectrum(sigma: f64, l: f64, n_levels: usize) -> Result<IntervalSpectrum> {
    let params = check_box(sigma, l)?;
    if n_levels == 0 {
        return Err(Error::Validation("n_levels must be at least 1".into()));
    }
    let roots = scan_interval_roots(params.alpha * l, n_levels, f64::INFINITY)?;
    interval_from_roots(params, l, roots)
}

/// All levels of the box `[0, L]` with `eₙ <= e_max`.
pub fn build_interval_spectrum_to(sigma: f64, l: f64, e_max: f64) -> Result<IntervalSpectrum> {
    let params = check_box(sigma, l)?;
    let roots = scan_interval_roots(params.alpha * l, usize::MAX, e_max)?;
    if roots.is_empty() {
        return Err(Error::Validation(format!("no interval level below e = {e_max}")));
    }
    interval_from_roots(params, l, roots)
}

/// Level count matching the resolution of `n` half-line levels: every
/// interval level with `e <= |ξₙ|`.
pub fn build_interval_spectrum_matching(sigma: f64, l: f64, n: usize) -> Result<IntervalSpectrum> {
    let e_max = -ai_prime_zeros(n)?[n - 1];
    build_interval_spectrum_to(sigma, l, e_max)
}

// ------------------------------------------------------------------- Robin

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinLevel {
    pub e: f64,
    pub d: f64,
    /// Decay rate `λₙ = β(γ² + eₙ)`.
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobinSpectrum {
    pub params: ModelParams,
    pub nu: f64,
    pub r_star: f64,
    pub gamma_r: f64,
    pub y_star: f64,
    pub levels: Vec<RobinLevel>,
}

impl RobinSpectrum {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Roots `w` of `Ai'(w) = γ Ai(w)`, ordered by decreasing `w`.
pub fn robin_roots(gamma: f64, n_levels: usize) -> Result<Vec<f64>> {
    let xi = ai_prime_zeros(n_levels)?;
    if gamma == 0.0 {
        return Ok(xi);
    }
    let zeta = ai_zeros(n_levels)?;
    let f = |w: f64| {
        let (a, ap) = ai_pair(w);
        ap - gamma * a
    };
    (0..n_levels)
        .map(|i| {
            let (lo, hi) = if gamma > 0.0 {
                (zeta[i], xi[i])
            } else if i > 0 {
                (xi[i], zeta[i - 1])
            } else {
                // Ai'/Ai falls like −√w on the positive axis; walk up until
                // it drops below γ.
                let mut hi = xi[0] + 1.0;
                while f(hi) * f(xi[0]) > 0.0 {
                    hi += 1.0 + hi.abs();
                    if hi > 1e6 {
                        return Err(Error::Root(format!("no lowest Robin level for γ = {gamma}")));
                    }
                }
                (xi[0], hi)
            };
            let w = brent(f, lo, hi, 1e-15 * lo.abs().max(1.0))?;
            let (a, ap) = ai_pair(w);
            let resid = ap - gamma * a;
            if resid.abs() > 1e-10 {
                return Err(Error::Accuracy(format!("Robin root {w} has residual {resid:e}")));
            }
            Ok(w)
        })
        .collect()
}

/// Levels for a reflecting barrier at the short rate `r_star` under constant
/// drift `nu`.
pub fn build_robin_spectrum(sigma: f64, nu: f64, r_star: f64, n_levels: usize) -> Result<RobinSpectrum> {
    let params = ModelParams::new(sigma)?;
    if n_levels == 0 {
        return Err(Error::Validation("n_levels must be at least 1".into()));
    }
    if !nu.is_finite() || !r_star.is_finite() {
        return Err(Error::Validation("nu and r_star must be finite".into()));
    }
    let gamma = nu / (2.0 * sigma.powi(4)).cbrt();
    let y_star = r_star / params.beta;
    let w = robin_roots(gamma, n_levels)?;
    let e: Vec<f64> = w.iter().map(|&w| y_star - w).collect();
    let shift: Vec<f64> = e.iter().map(|&e| e - y_star).collect();
    let partial = exp_weighted_ai_many(gamma, &shift)?;
    let full = laplace_ai(gamma)?;
    let levels = e
        .iter()
        .zip(&w)
        .zip(&partial)
        .map(|((&e, &w), &i)| {
            let denom = e - y_star + gamma * gamma;
            if denom.abs() < 1e-12 {
                return Err(Error::Singular(format!(
                    "normalization vanishes at e = {e}; perturb nu slightly"
                )));
            }
            let a = ai(w);
            Ok(RobinLevel {
                e,
                d: (gamma * e).exp() * (i + full) / (denom * a * a),
                lambda: params.beta * (gamma * gamma + e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RobinSpectrum { params, nu, r_star, gamma_r: gamma, y_star, levels })
}
