//! Real-argument Airy functions and the Airy/Scorer integrals the spectral
//! expansions are built from.
//!
//! Evaluation scheme:
//!
//! * `|y| >= 8`: Poincaré asymptotic expansions (oscillatory form for
//!   negative `y`), accurate to roughly `exp(-2ζ) < 1e-13`.
//! * `|y| < 8`: exact Taylor propagation of the Airy ODE `f'' = y f` in unit
//!   steps. `Ai` on the positive axis is propagated backwards from the
//!   asymptotic value at `y = 8` (the stable direction for a decaying
//!   solution); everything else is propagated from the exact values at 0.
//!
//! For `y > 0` the kernel works with exponentially scaled values
//! `Ai·e^{ζ}` and `Bi·e^{-ζ}`, `ζ = (2/3) y^{3/2}`, so that products like
//! `Q·Bi(y)` in the interval eigenfunctions never overflow.

use std::f64::consts::{FRAC_1_PI, FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_panels, QuadTol};
use crate::roots::safeguarded_newton;

pub const AI0: f64 = 0.355_028_053_887_817_24;
pub const AIP0: f64 = -0.258_819_403_792_806_8;
pub const BI0: f64 = 0.614_926_627_446_000_7;
pub const BIP0: f64 = 0.448_288_357_353_826_36;

const ASYMPTOTIC_CUTOFF: f64 = 8.0;
const SQRT_PI: f64 = 1.772_453_850_905_516;
/// Above this argument `Bi` is not representable in `f64`.
pub const BI_OVERFLOW: f64 = 104.8;

/// `Ai, Ai', Bi, Bi'` at a single argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValues {
    pub y: f64,
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
}

impl AiryValues {
    pub fn wronskian(&self) -> f64 {
        self.ai * self.bi_prime - self.ai_prime * self.bi
    }
}

/// Exponentially scaled Airy values.
///
/// For `y > 0`: `ai = Ai(y)·e^{s}`, `bi = Bi(y)·e^{-s}` (same for the
/// derivatives) with `s = (2/3) y^{3/2}`. For `y <= 0`, `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledAiry {
    pub y: f64,
    pub s: f64,
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
}

impl ScaledAiry {
    pub fn unscaled_ai(&self) -> (f64, f64) {
        let k = (-self.s).exp();
        (self.ai * k, self.ai_prime * k)
    }
}

pub(crate) fn scale_exponent(y: f64) -> f64 {
    if y > 0.0 {
        2.0 / 3.0 * y * y.sqrt()
    } else {
        0.0
    }
}

/// One Taylor step of a solution of `f'' = y f` from `y0` by `h`.
fn taylor_step(y0: f64, f: f64, fp: f64, h: f64) -> (f64, f64) {
    if h == 0.0 {
        return (f, fp);
    }
    // Terms t_k = a_k h^k with a_{k+2} = (y0 a_k + a_{k-1}) / ((k+2)(k+1)).
    let h2 = h * h;
    let h3 = h2 * h;
    let (mut tm1, mut t0, mut t1) = (0.0, f, fp * h);
    let mut sum = t0 + t1;
    let mut dsum = t1;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let t2 = (y0 * t0 * h2 + tm1 * h3) / ((kf + 2.0) * (kf + 1.0));
        sum += t2;
        dsum += (kf + 2.0) * t2;
        tm1 = t0;
        t0 = t1;
        t1 = t2;
        k += 1;
        let small = 1e-17 * (sum.abs() + dsum.abs() + f64::MIN_POSITIVE);
        if k > 4 && tm1.abs() + t0.abs() + t1.abs() < small {
            break;
        }
        if k > 400 {
            break;
        }
    }
    (sum, dsum / h)
}

fn propagate(y0: f64, f: f64, fp: f64, y1: f64) -> (f64, f64) {
    let n = (y1 - y0).abs().ceil().max(1.0) as usize;
    let h = (y1 - y0) / n as f64;
    let (mut f, mut fp) = (f, fp);
    for i in 0..n {
        let y = y0 + i as f64 * h;
        (f, fp) = taylor_step(y, f, fp, h);
    }
    (f, fp)
}

struct AsymptoticCoefficients {
    u: Vec<f64>,
    v: Vec<f64>,
}

fn coefficients() -> &'static AsymptoticCoefficients {
    static COEFFS: OnceLock<AsymptoticCoefficients> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let n = 60;
        let mut u = vec![1.0f64; n];
        let mut v = vec![1.0f64; n];
        for k in 1..n {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
        }
        AsymptoticCoefficients { u, v }
    })
}

/// Sum `Σ sign^k c_k ζ^{-k}` truncated at the smallest term.
fn asym_sum(c: &[f64], zeta: f64, alternating: bool) -> f64 {
    let mut sum = 0.0;
    let mut p = 1.0;
    let mut prev = f64::INFINITY;
    for (k, &ck) in c.iter().enumerate() {
        let term = ck * p;
        if term.abs() > prev {
            break;
        }
        sum += if alternating && k % 2 == 1 { -term } else { term };
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        prev = term.abs();
        p /= zeta;
    }
    sum
}

/// Even/odd split sums `Σ (-1)^k c_{2k} ζ^{-2k}` and `Σ (-1)^k c_{2k+1} ζ^{-2k-1}`.
fn asym_split(c: &[f64], zeta: f64) -> (f64, f64) {
    let (mut even, mut odd) = (0.0, 0.0);
    let mut p = 1.0;
    let mut prev = f64::INFINITY;
    for (k, &ck) in c.iter().enumerate() {
        let term = ck * p;
        if term.abs() > prev {
            break;
        }
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even += sign * term;
        } else {
            odd += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
        prev = term.abs();
        p /= zeta;
    }
    (even, odd)
}

fn asym_positive(y: f64) -> ScaledAiry {
    let c = coefficients();
    let q = y.sqrt().sqrt();
    let s = scale_exponent(y);
    ScaledAiry {
        y,
        s,
        ai: asym_sum(&c.u, s, true) / (2.0 * SQRT_PI * q),
        ai_prime: -q * asym_sum(&c.v, s, true) / (2.0 * SQRT_PI),
        bi: asym_sum(&c.u, s, false) / (SQRT_PI * q),
        bi_prime: q * asym_sum(&c.v, s, false) / SQRT_PI,
    }
}

fn asym_negative(y: f64) -> ScaledAiry {
    let c = coefficients();
    let x = -y;
    let q = x.sqrt().sqrt();
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (sn, cs) = (zeta - FRAC_PI_4).sin_cos();
    let (ue, uo) = asym_split(&c.u, zeta);
    let (ve, vo) = asym_split(&c.v, zeta);
    ScaledAiry {
        y,
        s: 0.0,
        ai: (cs * ue + sn * uo) / (SQRT_PI * q),
        ai_prime: q * (sn * ve - cs * vo) / SQRT_PI,
        bi: (-sn * ue + cs * uo) / (SQRT_PI * q),
        bi_prime: q * (cs * ve + sn * vo) / SQRT_PI,
    }
}

fn ai_asym_negative(y: f64) -> f64 {
    let c = coefficients();
    let x = -y;
    let q = x.sqrt().sqrt();
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (sn, cs) = (zeta - FRAC_PI_4).sin_cos();
    let (ue, uo) = asym_split(&c.u, zeta);
    (cs * ue + sn * uo) / (SQRT_PI * q)
}

/// `Ai` pair for `0 < y < 8` by backward propagation from the asymptotic
/// value at the cutoff.
fn ai_pair_positive_interior(y: f64) -> (f64, f64) {
    if y <= 1.5 {
        return propagate(0.0, AI0, AIP0, y);
    }
    let anchor = asym_positive(ASYMPTOTIC_CUTOFF);
    let (f, fp) = anchor.unscaled_ai();
    propagate(ASYMPTOTIC_CUTOFF, f, fp, y)
}

/// Exponentially scaled `Ai, Ai', Bi, Bi'` for any finite `y`.
pub fn airy_scaled(y: f64) -> ScaledAiry {
    if y >= ASYMPTOTIC_CUTOFF {
        return asym_positive(y);
    }
    if y <= -ASYMPTOTIC_CUTOFF {
        return asym_negative(y);
    }
    let (bi, bip) = propagate(0.0, BI0, BIP0, y);
    if y > 0.0 {
        let s = scale_exponent(y);
        let (ai, aip) = ai_pair_positive_interior(y);
        let (up, down) = (s.exp(), (-s).exp());
        ScaledAiry { y, s, ai: ai * up, ai_prime: aip * up, bi: bi * down, bi_prime: bip * down }
    } else {
        let (ai, aip) = propagate(0.0, AI0, AIP0, y);
        ScaledAiry { y, s: 0.0, ai, ai_prime: aip, bi, bi_prime: bip }
    }
}

/// `Ai, Ai', Bi, Bi'` at `y`.
///
/// Fails with [`Error::Range`] when `Bi(y)` overflows (`y` above about 104.8)
/// and with [`Error::Validation`] for non-finite input. `Ai` underflows to 0
/// without error.
pub fn airy_eval(y: f64) -> Result<AiryValues> {
    if !y.is_finite() {
        return Err(Error::Validation(format!("Airy argument must be finite, got {y}")));
    }
    let sc = airy_scaled(y);
    let (ai, ai_prime) = sc.unscaled_ai();
    let grow = sc.s.exp();
    let (bi, bi_prime) = (sc.bi * grow, sc.bi_prime * grow);
    if !bi.is_finite() || !bi_prime.is_finite() {
        return Err(Error::Range(format!("Bi({y}) overflows f64")));
    }
    Ok(AiryValues { y, ai, ai_prime, bi, bi_prime })
}

/// `Ai(y)` alone; cheaper than [`airy_eval`] for large negative `y`.
pub fn ai(y: f64) -> f64 {
    if y <= -ASYMPTOTIC_CUTOFF {
        ai_asym_negative(y)
    } else {
        ai_pair(y).0
    }
}

/// `(Ai(y), Ai'(y))`.
pub fn ai_pair(y: f64) -> (f64, f64) {
    if y >= ASYMPTOTIC_CUTOFF {
        asym_positive(y).unscaled_ai()
    } else if y <= -ASYMPTOTIC_CUTOFF {
        let sc = asym_negative(y);
        (sc.ai, sc.ai_prime)
    } else if y > 0.0 {
        ai_pair_positive_interior(y)
    } else {
        propagate(0.0, AI0, AIP0, y)
    }
}

/// Leading-order asymptotic form of `Ai(y)` (no correction terms).
pub fn ai_leading_asymptotic(y: f64) -> f64 {
    if y > 0.0 {
        let s = scale_exponent(y);
        (-s).exp() / (2.0 * SQRT_PI * y.powf(0.25))
    } else {
        let x = -y;
        (2.0 / 3.0 * x.powf(1.5) + FRAC_PI_4).sin() / (SQRT_PI * x.powf(0.25))
    }
}

/// Leading-order asymptotic form of `Gi'(y)` for `y -> -∞`.
pub fn gi_prime_leading_asymptotic(y: f64) -> f64 {
    let x = -y;
    x.powf(0.25) / SQRT_PI * (2.0 / 3.0 * x.powf(1.5) + FRAC_PI_4).sin()
}

// ---------------------------------------------------------------- zeros

/// Zeros of `Ai'` (`xi`) and `Ai` (`zeta`), both negative and decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct AiryZeroTable {
    pub xi: Vec<f64>,
    pub zeta: Vec<f64>,
    pub count: usize,
}

impl AiryZeroTable {
    pub fn new(count: usize) -> Result<Self> {
        Ok(AiryZeroTable { xi: ai_prime_zeros(count)?, zeta: ai_zeros(count)?, count })
    }
}

/// Large-`n` guess for the `n`-th zero of `Ai'`.
pub fn ai_prime_zero_guess(n: usize) -> f64 {
    let t = 3.0 * PI / 8.0 * (4.0 * n as f64 - 3.0);
    let t2 = 1.0 / (t * t);
    -t.powf(2.0 / 3.0) * (1.0 - 7.0 / 48.0 * t2 + 35.0 / 288.0 * t2 * t2)
}

/// Large-`n` guess for the `n`-th zero of `Ai`.
pub fn ai_zero_guess(n: usize) -> f64 {
    let t = 3.0 * PI / 8.0 * (4.0 * n as f64 - 1.0);
    let t2 = 1.0 / (t * t);
    -t.powf(2.0 / 3.0) * (1.0 + 5.0 / 48.0 * t2 - 5.0 / 36.0 * t2 * t2)
}

fn refine_zero<F: Fn(f64) -> (f64, f64)>(
    fdf: F,
    guess: f64,
    what: &str,
    n: usize,
) -> Result<f64> {
    let spacing = PI / guess.abs().max(1.0).sqrt();
    let lo = guess - 0.35 * spacing;
    let hi = (guess + 0.35 * spacing).min(-1e-3);
    let root = safeguarded_newton(&fdf, lo, hi, 1e-15 * guess.abs())
        .map_err(|e| Error::Root(format!("failed to bracket zero {n} of {what}: {e}")))?;
    let residual = fdf(root).0;
    if residual.abs() > 1e-10 {
        return Err(Error::Accuracy(format!(
            "zero {n} of {what} has residual {residual:e}"
        )));
    }
    Ok(root)
}

/// First `n_max` zeros `ξ_n` of `Ai'`.
pub fn ai_prime_zeros(n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::Validation("zero count must be positive".into()));
    }
    (1..=n_max)
        .map(|n| {
            refine_zero(
                |w| {
                    let (a, ap) = ai_pair(w);
                    (ap, w * a)
                },
                ai_prime_zero_guess(n),
                "Ai'",
                n,
            )
        })
        .collect()
}

/// First `n_max` zeros `ζ_n` of `Ai`.
pub fn ai_zeros(n_max: usize) -> Result<Vec<f64>> {
    if n_max == 0 {
        return Err(Error::Validation("zero count must be positive".into()));
    }
    (1..=n_max)
        .map(|n| refine_zero(ai_pair, ai_zero_guess(n), "Ai", n))
        .collect()
}

// ------------------------------------------------------------- integrals

fn seg_tol() -> QuadTol {
    QuadTol { abs: 1e-15, rel: 1e-13 }
}

/// Breakpoints on `[a, b]` at every quarter oscillation of the Airy
/// functions on the negative axis (`ζ(|w|)` a multiple of `π/2`).
fn oscillation_breaks(a: f64, b: f64) -> Vec<f64> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut pts = vec![lo];
    if lo < 0.0 {
        let z_lo = scale_exponent(-lo);
        let z_hi = if hi < 0.0 { scale_exponent(-hi) } else { 0.0 };
        let j_start = (z_lo / FRAC_PI_2).floor() as i64;
        let j_end = (z_hi / FRAC_PI_2).ceil() as i64;
        for j in (j_end.max(1)..=j_start).rev() {
            let w = -(1.5 * j as f64 * FRAC_PI_2).powf(2.0 / 3.0);
            if w > lo && w < hi.min(0.0) {
                pts.push(w);
            }
        }
    }
    if hi > 0.0 && lo < 0.0 {
        pts.push(0.0);
    }
    // Unit panels on the positive side.
    let mut w = pts.last().copied().unwrap_or(lo).max(0.0).floor() + 1.0;
    while w < hi {
        if w > lo {
            pts.push(w);
        }
        w += 1.0;
    }
    pts.push(hi);
    pts.dedup();
    if a > b {
        pts.reverse();
    }
    pts
}

fn oscillatory_integral<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let breaks = oscillation_breaks(a, b);
    // Error estimates add up over panels, and far out the phase ζ carries a
    // rounding noise of about ζ·ε; budget for both, relative to the size of
    // the integrand (quarter-period breaks never sit on a node).
    let amp = breaks.iter().map(|&w| f(w).abs()).fold(1.0, f64::max);
    let tol = seg_tol();
    let zeta_max = scale_exponent(-a.min(b));
    let noise = f64::EPSILON * zeta_max * (b - a).abs();
    let tol = QuadTol { abs: amp * (tol.abs * breaks.len() as f64 + noise), ..tol };
    Ok(integrate_panels(f, &breaks, tol)?.value)
}

/// `∫_p^0 f(w) dw` for every `p` in `points` (all `<= 0`), accumulated
/// along the sorted points so the total cost is one pass over the range.
fn cumulative_to_zero<F: FnMut(f64) -> f64>(mut f: F, points: &[f64]) -> Result<Vec<f64>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[j].total_cmp(&points[i]));
    let mut out = vec![0.0; points.len()];
    let mut acc = 0.0;
    let mut at = 0.0;
    for idx in order {
        let p = points[idx];
        if p > 0.0 {
            return Err(Error::Validation(format!("cumulative integral expects p <= 0, got {p}")));
        }
        acc += oscillatory_integral(&mut f, p, at)?;
        at = p;
        out[idx] = acc;
    }
    Ok(out)
}

/// `∫_y^∞ Ai(w) dw`.
pub fn ai_integral_from(y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Validation(format!("integration bound must be finite, got {y}")));
    }
    if y < 0.0 {
        return Ok(1.0 / 3.0 + oscillatory_integral(ai, y, 0.0)?);
    }
    // Beyond y_end the integrand has dropped by e^{-45}; the remainder is
    // added from ∫_w^∞ Ai ≈ Ai(w)/√w.
    let z_end = scale_exponent(y) + 45.0;
    let y_end = (1.5 * z_end).powf(2.0 / 3.0);
    let body = integrate_panels(ai, &oscillation_breaks(y, y_end), QuadTol { abs: 0.0, rel: 1e-13 })?;
    let tail = ai(y_end) / y_end.sqrt();
    Ok(body.value + tail)
}

/// `∫_0^y Bi(w) dw` for `y` of either sign.
pub fn bi_integral_on(y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Validation(format!("integration bound must be finite, got {y}")));
    }
    if y > BI_OVERFLOW {
        return Err(Error::Range(format!("Bi overflows on [0, {y}]")));
    }
    let bi = |w: f64| {
        let sc = airy_scaled(w);
        sc.bi * sc.s.exp()
    };
    oscillatory_integral(bi, 0.0, y)
}

fn bi_value(w: f64) -> f64 {
    let sc = airy_scaled(w);
    sc.bi * sc.s.exp()
}

fn gi_prime_from_integrals(v: &AiryValues, a_int: f64, b_int: f64) -> Result<f64> {
    let w = v.wronskian();
    if (w - FRAC_1_PI).abs() > 1e-8 {
        return Err(Error::Accuracy(format!(
            "Wronskian at {} is {w}, expected 1/π",
            v.y
        )));
    }
    Ok(((1.0 / 3.0 + a_int) * v.bi_prime - b_int * v.ai_prime) / (PI * w))
}

/// `Gi'(y)` for `y > 0` from the rotated-contour form of the Scorer integral,
/// `Gi(x) = π⁻¹ ∫_0^∞ sin(t³/3 + x t) dt` with `t = s·e^{iπ/6}`.
pub fn scorer_gi_prime_contour(x: f64) -> Result<f64> {
    let kappa = 3f64.sqrt() / 2.0 * x;
    // Integrand is below e^{-50} of its scale once s³/3 + x s/2 > 50.
    let mut s_end = (150.0f64).powf(1.0 / 3.0);
    if x > 0.0 {
        s_end = s_end.min(100.0 / x + 1.0);
    }
    let tol = QuadTol { abs: 1e-15, rel: 1e-13 };
    let damp = |s: f64| s * (-s * s * s / 3.0 - 0.5 * x * s).exp();
    let n_panels = (kappa * s_end / FRAC_PI_2).ceil().max(4.0) as usize;
    let breaks: Vec<f64> = (0..=n_panels).map(|i| s_end * i as f64 / n_panels as f64).collect();
    let kr = integrate_panels(|s| damp(s) * (kappa * s).cos(), &breaks, tol)?.value;
    let ki = integrate_panels(|s| damp(s) * (kappa * s).sin(), &breaks, tol)?.value;
    Ok((0.5 * kr - 3f64.sqrt() / 2.0 * ki) / PI)
}

/// Derivative of the Scorer function `Gi`.
///
/// For `y <= 0` this uses `π Gi'(y) = {[1/3 + 𝒜]Bi'(y) − ℬ Ai'(y)} / W` with
/// `𝒜 = ∫_y^0 Ai`, `ℬ = ∫_y^0 Bi` and `W` the (checked) Wronskian.
/// For `y > 0` it uses [`scorer_gi_prime_contour`].
pub fn scorer_gi_prime(y: f64) -> Result<f64> {
    if !y.is_finite() {
        return Err(Error::Validation(format!("Scorer argument must be finite, got {y}")));
    }
    if y > 0.0 {
        return scorer_gi_prime_contour(y);
    }
    let v = airy_eval(y)?;
    let a_int = oscillatory_integral(ai, y, 0.0)?;
    let b_int = oscillatory_integral(bi_value, y, 0.0)?;
    gi_prime_from_integrals(&v, a_int, b_int)
}

/// [`scorer_gi_prime`] at many points, sharing the oscillatory integrals.
pub fn scorer_gi_prime_many(points: &[f64]) -> Result<Vec<f64>> {
    let neg: Vec<f64> = points.iter().map(|&p| p.min(0.0)).collect();
    let a_int = cumulative_to_zero(ai, &neg)?;
    let b_int = cumulative_to_zero(bi_value, &neg)?;
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if p > 0.0 {
                scorer_gi_prime_contour(p)
            } else {
                gi_prime_from_integrals(&airy_eval(p)?, a_int[i], b_int[i])
            }
        })
        .collect()
}

/// `Ĩ(γ) = ∫_0^∞ e^{γw} Ai(w) dw` from its Mellin-transform power series
/// `(1/3) Σ (γ/3^{1/3})^n / Γ(n/3 + 1)`.
pub fn laplace_ai(gamma: f64) -> Result<f64> {
    if !gamma.is_finite() {
        return Err(Error::Validation(format!("γ must be finite, got {gamma}")));
    }
    const GAMMA_4_3: f64 = 0.892_979_511_569_249_2;
    const GAMMA_5_3: f64 = 0.902_745_292_950_933_6;
    let x = gamma / 3f64.cbrt();
    let g3 = gamma * gamma * gamma;
    // Three interleaved residue classes, each with term_{n+3} = term_n γ³/(n+3).
    let mut terms = [1.0, x / GAMMA_4_3, x * x / GAMMA_5_3];
    let mut sum = terms.iter().sum::<f64>();
    let mut max_term = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let mut n = 0usize;
    loop {
        for (r, t) in terms.iter_mut().enumerate() {
            *t *= g3 / (n + r + 3) as f64;
            sum += *t;
            max_term = max_term.max(t.abs());
        }
        n += 3;
        let ratio = g3.abs() / (n + 3) as f64;
        let last: f64 = terms.iter().map(|t| t.abs()).sum();
        // Past the peak the ratio is below 1/2, so each class's tail is at
        // most its last term; the total tail is bounded by `last`.
        if ratio < 0.5 && last < 1e-16 * sum.abs() {
            break;
        }
        if n > 100_000 {
            return Err(Error::Range(format!("Laplace series did not converge at γ = {gamma}")));
        }
    }
    if max_term * 1e-16 > 1e-10 * sum.abs() {
        return Err(Error::Range(format!(
            "Laplace series loses precision at γ = {gamma} (cancellation)"
        )));
    }
    Ok(sum / 3.0)
}

fn exp_weighted_signed(gamma: f64, y: f64) -> Result<f64> {
    oscillatory_integral(|w| (gamma * w).exp() * ai(w), -y, 0.0)
}

/// `I(γ, y) = ∫_{-y}^0 e^{γw} Ai(w) dw`, `y >= 0`.
pub fn exp_weighted_ai(gamma: f64, y: f64) -> Result<f64> {
    if y < 0.0 || !y.is_finite() || !gamma.is_finite() {
        return Err(Error::Validation(format!("exp_weighted_ai expects y >= 0, got {y}")));
    }
    exp_weighted_signed(gamma, y)
}

/// `I(γ, y)` for several `y`, signed so that a negative `y` gives
/// `-∫_0^{-y}`. Shares integration work along the sorted arguments.
pub(crate) fn exp_weighted_ai_many(gamma: f64, ys: &[f64]) -> Result<Vec<f64>> {
    let f = |w: f64| (gamma * w).exp() * ai(w);
    let neg: Vec<f64> = ys.iter().map(|&y| (-y).min(0.0)).collect();
    let mut out = cumulative_to_zero(f, &neg)?;
    for (o, &y) in out.iter_mut().zip(ys) {
        if y < 0.0 {
            *o = exp_weighted_signed(gamma, y)?;
        }
    }
    Ok(out)
}

/// Direct quadrature of `∫_0^∞ e^{γw} Ai(w) dw`; independent of [`laplace_ai`].
pub fn laplace_ai_quadrature(gamma: f64) -> Result<f64> {
    // The integrand peaks near w = γ² and decays like exp(γw − ζ(w)).
    let peak = if gamma > 0.0 { gamma * gamma } else { 0.0 };
    let mut end = peak + 4.0;
    while gamma * end - scale_exponent(end) > -60.0 {
        end += 2.0;
    }
    let breaks: Vec<f64> = (0..=(end.ceil() as usize)).map(|i| i as f64).collect();
    Ok(integrate_panels(|w| (gamma * w - scale_exponent(w)).exp() * airy_scaled(w).ai, &breaks, QuadTol { abs: 1e-15, rel: 1e-13 })?.value)
}

/// Plain adaptive quadrature of `∫_a^b f` for tests and oracles.
pub fn plain_integral<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    Ok(integrate(f, a, b, QuadTol::default())?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn maclaurin_ai(y: f64) -> (f64, f64) {
        // Independent power series Ai = c1 f − c2 g.
        let (c1, c2) = (AI0, -AIP0);
        let y3 = y * y * y;
        let (mut f, mut g) = (1.0, y);
        let (mut tf, mut tg) = (1.0, y);
        let (mut fp, mut gp) = (0.0, 1.0);
        let (mut tfp, mut tgp) = (y * y / 2.0, 1.0);
        fp += tfp;
        for k in 1..80 {
            let kf = k as f64;
            tf *= y3 / ((3.0 * kf - 1.0) * 3.0 * kf);
            tg *= y3 / (3.0 * kf * (3.0 * kf + 1.0));
            tgp *= y3 / ((3.0 * kf - 2.0) * 3.0 * kf);
            tfp *= y3 / (3.0 * kf * (3.0 * kf + 2.0));
            f += tf;
            g += tg;
            gp += tgp;
            fp += tfp;
        }
        (c1 * f - c2 * g, c1 * fp - c2 * gp)
    }

    #[test]
    fn values_at_origin() {
        let v = airy_eval(0.0).unwrap();
        assert!((v.ai - 0.355_028_053_9).abs() < 1e-10);
        assert!((v.ai_prime + 0.258_819_403_8).abs() < 1e-10);
        assert!((v.wronskian() - FRAC_1_PI).abs() < 1e-15);
    }

    #[test]
    fn maclaurin_cross_check_small_arguments() {
        for &y in &[-2.5, -1.0, -0.3, 0.4, 1.0, 2.0] {
            let (a, ap) = ai_pair(y);
            let (ma, map) = maclaurin_ai(y);
            assert!((a - ma).abs() < 1e-13, "Ai({y})");
            assert!((ap - map).abs() < 1e-13, "Ai'({y})");
        }
    }

    #[test]
    fn reference_values() {
        let cases = [
            (1.0, 0.135_292_416_312_881_47, 1.207_423_594_952_871_5),
            (-1.0, 0.535_560_883_292_352_2, 0.103_997_389_496_944_68),
            (5.0, 1.083_444_281_360_743_3e-4, 657.792_044_171_171_3),
            (-5.0, 0.350_761_009_024_114_2, -0.138_369_134_901_600_83),
            (10.0, 1.104_753_255_289_865_4e-10, 4.556_411_535_482_265_4e8),
            (-10.0, 0.040_241_238_486_441_955, -0.314_679_829_643_838_8),
        ];
        for (y, a, b) in cases {
            let v = airy_eval(y).unwrap();
            assert!(((v.ai - a) / a).abs() < 1e-10, "Ai({y}) = {} vs {a}", v.ai);
            assert!(((v.bi - b) / b).abs() < 1e-10, "Bi({y}) = {} vs {b}", v.bi);
        }
    }

    #[test]
    fn crossover_overlap() {
        for &y in &[ASYMPTOTIC_CUTOFF, -ASYMPTOTIC_CUTOFF, 9.0, -9.0] {
            let asym = if y > 0.0 { asym_positive(y) } else { asym_negative(y) };
            // Taylor route: from 0 for Bi (and Ai when negative); Ai for
            // positive y from a far asymptotic anchor at 12.
            let (bi, bip) = propagate(0.0, BI0, BIP0, y);
            let (ai, aip) = if y > 0.0 {
                let far = asym_positive(12.0).unscaled_ai();
                propagate(12.0, far.0, far.1, y)
            } else {
                propagate(0.0, AI0, AIP0, y)
            };
            let (s_up, s_down) = (asym.s.exp(), (-asym.s).exp());
            let rel = |x: f64, r: f64| ((x - r) / r).abs();
            assert!(rel(ai * s_up, asym.ai) < 1e-11, "Ai overlap at {y}");
            assert!(rel(aip * s_up, asym.ai_prime) < 1e-11, "Ai' overlap at {y}");
            assert!(rel(bi * s_down, asym.bi) < 1e-11, "Bi overlap at {y}");
            assert!(rel(bip * s_down, asym.bi_prime) < 1e-11, "Bi' overlap at {y}");
        }
    }

    #[test]
    fn wronskian_on_grid() {
        let mut y = -10.0;
        while y <= 10.0 {
            let w = airy_eval(y).unwrap().wronskian();
            assert!(((w - FRAC_1_PI) * PI).abs() < 1e-10, "W({y}) = {w}");
            y += 0.137;
        }
    }

    #[test]
    fn ode_residual_by_finite_differences() {
        let h = 1e-4;
        let mut y = -8.0;
        while y <= 8.0 {
            let f = |x: f64| airy_eval(x).unwrap();
            let (m, c, p) = (f(y - h), f(y), f(y + h));
            let ai2 = (p.ai - 2.0 * c.ai + m.ai) / (h * h);
            let bi2 = (p.bi - 2.0 * c.bi + m.bi) / (h * h);
            assert!((ai2 - y * c.ai).abs() <= 1e-5 * (y * c.ai).abs().max(1.0), "Ai'' at {y}");
            assert!((bi2 - y * c.bi).abs() <= 1e-5 * (y * c.bi).abs().max(1.0), "Bi'' at {y}");
            y += 0.25;
        }
    }

    #[test]
    fn bi_overflow_is_an_error() {
        assert!(matches!(airy_eval(150.0), Err(Error::Range(_))));
        assert!(matches!(airy_eval(f64::NAN), Err(Error::Validation(_))));
        let v = airy_eval(100.0).unwrap();
        assert!(v.bi.is_finite() && v.ai > 0.0);
        assert_eq!(ai(1000.0), 0.0);
    }

    #[test]
    fn positive_tail_matches_leading_term() {
        // The bare leading term is off by the first correction 5/(72ζ).
        let zeta = scale_exponent(10.0);
        let ratio = ai(10.0) / ai_leading_asymptotic(10.0);
        assert!((ratio / (1.0 - 5.0 / (72.0 * zeta)) - 1.0).abs() < 1e-3);
        assert!((ratio - 1.0).abs() < 4e-3);
    }

    #[test]
    fn first_zeros() {
        let xi = ai_prime_zeros(2).unwrap();
        assert!((xi[0] + 1.018_792_971_6).abs() < 1e-9);
        assert!((xi[1] + 3.248_197_582_2).abs() < 1e-9);
        let zeta = ai_zeros(1).unwrap();
        assert!((zeta[0] + 2.338_107_410_5).abs() < 1e-9);
        assert!(xi[0] > zeta[0] && zeta[0] > xi[1]);
    }

    #[test]
    fn zero_table_residuals_and_interlacing() {
        let t = AiryZeroTable::new(300).unwrap();
        for n in 0..300 {
            assert!(ai_pair(t.xi[n]).1.abs() <= 1e-10);
            assert!(ai(t.zeta[n]).abs() <= 1e-10);
            assert!(t.xi[n] > t.zeta[n]);
            if n + 1 < 300 {
                assert!(t.zeta[n] > t.xi[n + 1]);
            }
        }
        let guess = -((3.0 * PI / 8.0) * (4.0 * 100.0 - 3.0)).powf(2.0 / 3.0);
        assert!((t.xi[99] / guess - 1.0).abs() < 1e-4);
    }

    #[test]
    fn integral_of_ai_over_half_line() {
        assert!((ai_integral_from(0.0).unwrap() - 1.0 / 3.0).abs() < 1e-10);
        assert!(ai_integral_from(30.0).unwrap() < 1e-40);
        assert!(ai_integral_from(30.0).unwrap() > 0.0);
    }

    #[test]
    fn bi_integral_matches_simpson() {
        let q = bi_integral_on(-2.0).unwrap();
        let s = -crate::quad::simpson(bi_value, -2.0, 0.0, 20_000);
        assert!((q - s).abs() < 1e-9);
        assert_eq!(bi_integral_on(0.0).unwrap(), 0.0);
        assert!(matches!(bi_integral_on(200.0), Err(Error::Range(_))));
    }

    #[test]
    fn scorer_routes_agree_on_the_negative_axis() {
        for &y in &[-0.5, -1.0, -2.0, -3.5] {
            let by_integrals = scorer_gi_prime(y).unwrap();
            let by_contour = scorer_gi_prime_contour(y).unwrap();
            assert!((by_integrals - by_contour).abs() < 1e-10, "Gi'({y})");
        }
        // Gi'(0) = Bi'(0)/3.
        assert!((scorer_gi_prime_contour(0.0).unwrap() - BIP0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn int3_identity_at_minus_one() {
        // (1/π) ∫_0^y Bi = Bi' Gi − Bi Gi' with Gi from the contour integral.
        let y = -1.0;
        let gi = {
            let kappa = 3f64.sqrt() / 2.0 * y;
            let damp = |s: f64| (-s * s * s / 3.0 - 0.5 * y * s).exp();
            let kr = plain_integral(|s| damp(s) * (kappa * s).cos(), 0.0, 8.0).unwrap();
            let ki = plain_integral(|s| damp(s) * (kappa * s).sin(), 0.0, 8.0).unwrap();
            // Gi = π⁻¹ Im(e^{iπ/6} K).
            (0.5 * kr + 3f64.sqrt() / 2.0 * ki) / PI
        };
        let v = airy_eval(y).unwrap();
        let gip = scorer_gi_prime(y).unwrap();
        let lhs = bi_integral_on(y).unwrap() / PI;
        let rhs = v.bi_prime * gi - v.bi * gip;
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn scorer_large_argument_behaviour() {
        let y = -20.0;
        let g = scorer_gi_prime(y).unwrap();
        let lead = gi_prime_leading_asymptotic(y);
        assert!(((g - lead) / lead).abs() < 5e-3, "{g} vs {lead}");
        let x = 40.0;
        let g = scorer_gi_prime(x).unwrap();
        assert!(((g + 1.0 / (PI * x * x)) * PI * x * x).abs() < 0.01);
    }

    #[test]
    fn scorer_at_ai_prime_zeros_alternates() {
        let xi = ai_prime_zeros(10).unwrap();
        let g = scorer_gi_prime_many(&xi).unwrap();
        for (n, gp) in g.iter().enumerate() {
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(gp.signum(), expected, "n = {}", n + 1);
            let single = scorer_gi_prime(xi[n]).unwrap();
            assert!((single - gp).abs() < 1e-11);
        }
    }

    #[test]
    fn integral_cross_identity_at_first_zero() {
        let xi1 = ai_prime_zeros(1).unwrap()[0];
        let lhs = ai_integral_from(xi1).unwrap();
        let rhs = PI * ai(xi1) * scorer_gi_prime(xi1).unwrap();
        assert!((lhs - rhs).abs() < 1e-11);
    }

    #[test]
    fn laplace_transform_series_vs_quadrature() {
        assert!((laplace_ai(0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let mut g = -2.0;
        while g <= 2.0 + 1e-12 {
            let s = laplace_ai(g).unwrap();
            let q = laplace_ai_quadrature(g).unwrap();
            assert!((s - q).abs() < 1e-9, "γ = {g}: {s} vs {q}");
            g += 0.25;
        }
        assert!(laplace_ai(-40.0).is_err());
    }

    #[test]
    fn exp_weighted_reductions() {
        assert_eq!(exp_weighted_ai(0.7, 0.0).unwrap(), 0.0);
        let a2 = oscillatory_integral(ai, -2.0, 0.0).unwrap();
        assert!((exp_weighted_ai(0.0, 2.0).unwrap() - a2).abs() < 1e-14);
        let coarse = crate::quad::simpson(|w| (0.5 * w).exp() * ai(w), -3.0, 0.0, 4000);
        let fine = crate::quad::simpson(|w| (0.5 * w).exp() * ai(w), -3.0, 0.0, 8000);
        let v = exp_weighted_ai(0.5, 3.0).unwrap();
        assert!((fine - coarse).abs() < 1e-12);
        assert!((v - fine).abs() < 1e-9);
        assert!(exp_weighted_ai(0.5, -1.0).is_err());
    }
}
