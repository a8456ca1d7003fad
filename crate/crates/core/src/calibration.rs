//! Fitting `(z, β, r₀)` to an observed yield curve under zero drift,
//! residual yields, drift reconstruction and the cubic baseline.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::data::CurveTable;
use crate::drift::{DriftCurve, Extrapolation};
use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::pricing::{bond_price_semi, PricingConfig, YieldPoint, SHORT_MATURITY, SHORT_MATURITY_LEVELS};
use crate::spectral::{build_semi_spectrum, ModelParams, SemiSpectrum};
use crate::spline::{interpolate, PiecewiseCubic, SplineKind};

/// Observed zero-coupon yields at one valuation date.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCurve {
    /// `None` means maturities are already times from `t = 0`.
    pub valuation_date: Option<NaiveDate>,
    pub points: Vec<YieldPoint>,
    pub label: String,
}

impl EmpiricalCurve {
    pub fn new(valuation_date: Option<NaiveDate>, points: Vec<YieldPoint>, label: impl Into<String>) -> Result<Self> {
        if points.iter().any(|p| !p.yield_value.is_finite() || !(p.maturity > 0.0 && p.maturity.is_finite())) {
            return Err(Error::Validation("curve points must have finite yields and positive maturities".into()));
        }
        if points.windows(2).any(|w| !(w[1].maturity > w[0].maturity)) {
            return Err(Error::Validation("curve maturities must be strictly increasing".into()));
        }
        Ok(EmpiricalCurve { valuation_date, points, label: label.into() })
    }

    /// Builds a curve from a percent column of `table`, skipping blank cells.
    pub fn from_table_percent(
        table: &CurveTable,
        column: &str,
        valuation_date: Option<NaiveDate>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let values = table.column(column)?;
        let points = table
            .maturities
            .iter()
            .zip(values)
            .filter_map(|(&m, v)| v.map(|y| YieldPoint { maturity: m, yield_value: y / 100.0 }))
            .collect();
        Self::new(valuation_date, points, label)
    }

    pub fn maturities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.maturity).collect()
    }

    /// Points with maturity at least `min_maturity`.
    pub fn filtered(&self, min_maturity: f64) -> EmpiricalCurve {
        EmpiricalCurve {
            valuation_date: self.valuation_date,
            points: self.points.iter().copied().filter(|p| p.maturity >= min_maturity).collect(),
            label: self.label.clone(),
        }
    }
}

/// Search settings for [`calibrate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Starting points `(z, β, r₀)`.
    pub starts: Vec<[f64; 3]>,
    /// Lower bound on the lowest level `r₀ + β|ξ₁|`.
    pub r_min: f64,
    pub penalty: f64,
    pub initial_steps: [f64; 3],
    pub optimizer: NelderMeadOptions,
    /// Simplex restarts allowed from the best vertex of each start.
    pub max_restarts: usize,
}

/// The default nine starts: the centre of `z ∈ [−0.01, 0.02]`,
/// `β ∈ [0.02, 0.4]`, `r₀ ∈ [−0.3, 0]` and the eight quartile corners.
pub fn default_starts() -> Vec<[f64; 3]> {
    let mut starts = vec![[0.005, 0.21, -0.15]];
    for z in [-0.0025, 0.0125] {
        for beta in [0.115, 0.305] {
            for r0 in [-0.225, -0.075] {
                starts.push([z, beta, r0]);
            }
        }
    }
    starts
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            starts: default_starts(),
            r_min: 0.0,
            penalty: 1e6,
            initial_steps: [0.005, 0.05, 0.05],
            optimizer: NelderMeadOptions::default(),
            max_restarts: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub z: f64,
    pub beta: f64,
    pub r0: f64,
    /// `√(2β³)`.
    pub sigma: f64,
    pub rmse: f64,
    pub model_yields: Vec<YieldPoint>,
    pub residual_yields: Vec<YieldPoint>,
    pub converged: bool,
    pub n_restarts_used: usize,
    /// Objective value reached from each start, in start order.
    pub start_objectives: Vec<f64>,
    pub evaluations: usize,
}

impl CalibrationResult {
    /// Lowest short-rate level `r₀ + β|ξ₁|`.
    pub fn chi_1(&self) -> f64 {
        self.r0 + self.beta * XI1_ABS
    }
}

/// `|ξ₁|`, the first zero of `Ai'`.
pub const XI1_ABS: f64 = 1.018_792_971_647_471;

/// Zero-drift yields on a shared zero table, rescaled per `β`.
pub struct ZeroDriftPricer {
    base: SemiSpectrum,
    cfg: PricingConfig,
}

impl ZeroDriftPricer {
    pub fn new(maturities: &[f64], cfg: &PricingConfig) -> Result<Self> {
        cfg.validate()?;
        let short = maturities.iter().any(|&m| m < SHORT_MATURITY);
        let n = if short { cfg.n_levels.max(SHORT_MATURITY_LEVELS) } else { cfg.n_levels };
        Ok(ZeroDriftPricer { base: build_semi_spectrum(0.01, n)?, cfg: *cfg })
    }

    pub fn spectrum(&self, beta: f64) -> Result<SemiSpectrum> {
        Ok(self.base.rescaled(ModelParams::from_beta(beta)?))
    }

    pub fn yields(&self, z: f64, beta: f64, r0: f64, maturities: &[f64]) -> Result<Vec<YieldPoint>> {
        let s = self.spectrum(beta)?;
        let drift = DriftCurve::constant(r0);
        maturities
            .iter()
            .map(|&m| {
                let p = bond_price_semi(z, 0.0, m, &s, &drift, &self.cfg)?;
                if !(p.price > 0.0) {
                    return Err(Error::Accuracy(format!("non-positive price at maturity {m}")));
                }
                Ok(YieldPoint { maturity: m, yield_value: p.yield_for(m) })
            })
            .collect()
    }
}

fn objective(pricer: &ZeroDriftPricer, curve: &EmpiricalCurve, search: &SearchConfig, p: &[f64]) -> f64 {
    let (z, beta, r0) = (p[0], p[1], p[2]);
    let outside = (-beta).max(0.0) + (r0 - z).max(0.0);
    if outside > 0.0 || beta < 1e-6 || !p.iter().all(|v| v.is_finite()) {
        return 1.0 + search.penalty * outside * outside;
    }
    let model = match pricer.yields(z, beta, r0, &curve.maturities()) {
        Ok(m) => m,
        Err(_) => return 1.0,
    };
    let fit = rmse(&curve.points, &model).unwrap_or(1.0);
    let violation = (search.r_min - (r0 + beta * XI1_ABS)).max(0.0);
    fit + search.penalty * violation * violation
}

struct StartOutcome {
    x: Vec<f64>,
    value: f64,
    converged: bool,
    restarts: usize,
    evals: usize,
}

fn run_start(pricer: &ZeroDriftPricer, curve: &EmpiricalCurve, search: &SearchConfig, start: &[f64; 3]) -> StartOutcome {
    let f = |p: &[f64]| objective(pricer, curve, search, p);
    let mut best = nelder_mead(f, start, &search.initial_steps, &search.optimizer);
    let mut evals = best.evals;
    let mut restarts = 0;
    // A collapsed simplex can stall; restart with small steps until no gain.
    while restarts < search.max_restarts {
        let steps: Vec<f64> = search.initial_steps.iter().map(|s| s * 0.1).collect();
        let next = nelder_mead(f, &best.x, &steps, &search.optimizer);
        evals += next.evals;
        restarts += 1;
        let gained = best.value - next.value;
        let stop = !(gained > search.optimizer.f_tol);
        if next.value <= best.value {
            best = next;
        }
        if stop {
            break;
        }
    }
    StartOutcome { x: best.x, value: best.value, converged: best.converged, restarts, evals }
}

/// Minimizes the RMSE between zero-drift half-line yields and `curve` over
/// `(z, β, r₀)` by multi-start Nelder–Mead.
pub fn calibrate(curve: &EmpiricalCurve, cfg: &PricingConfig, search: &SearchConfig) -> Result<CalibrationResult> {
    if curve.points.len() < 4 {
        return Err(Error::Validation(format!(
            "calibration needs at least 4 points, got {}",
            curve.points.len()
        )));
    }
    if search.starts.is_empty() {
        return Err(Error::Validation("no starting points".into()));
    }
    let pricer = ZeroDriftPricer::new(&curve.maturities(), cfg)?;
    let outcomes: Vec<StartOutcome> =
        search.starts.par_iter().map(|s| run_start(&pricer, curve, search, s)).collect();

    let best = outcomes
        .iter()
        .min_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then_with(|| a.x.iter().zip(&b.x).map(|(u, v)| u.total_cmp(v)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
        })
        .expect("at least one start");
    let (z, beta, mut r0) = (best.x[0], best.x[1], best.x[2]);
    // The penalty leaves a residual violation of order 1/penalty; move r₀
    // onto the admissibility boundary.
    let violation = search.r_min - (r0 + beta * XI1_ABS);
    if violation > 0.0 && violation < 1e-6 {
        r0 += violation;
    }
    let feasible = beta > 0.0 && z >= r0 && r0 + beta * XI1_ABS >= search.r_min - 1e-15;
    if !feasible || best.value >= 1.0 {
        return Err(Error::Calibration(format!(
            "no admissible optimum; best penalized point z = {z}, beta = {beta}, r0 = {r0}, objective = {}",
            best.value
        )));
    }
    let model_yields = pricer.yields(z, beta, r0, &curve.maturities())?;
    let fit = rmse(&curve.points, &model_yields)?;
    let residual_yields = residuals(&curve.points, &model_yields);
    Ok(CalibrationResult {
        z,
        beta,
        r0,
        sigma: (2.0 * beta.powi(3)).sqrt(),
        rmse: fit,
        model_yields,
        residual_yields,
        converged: best.converged,
        n_restarts_used: best.restarts,
        start_objectives: outcomes.iter().map(|o| o.value).collect(),
        evaluations: outcomes.iter().map(|o| o.evals).sum(),
    })
}

fn residuals(empirical: &[YieldPoint], model: &[YieldPoint]) -> Vec<YieldPoint> {
    empirical
        .iter()
        .zip(model)
        .map(|(e, m)| YieldPoint { maturity: e.maturity, yield_value: e.yield_value - m.yield_value })
        .collect()
}

/// `R_r = R_e − R_m` at the curve maturities, repricing with the fitted
/// parameters so any maturity subset of the fit can be used.
pub fn residual_yield(curve: &EmpiricalCurve, result: &CalibrationResult, cfg: &PricingConfig) -> Result<Vec<YieldPoint>> {
    let maturities = curve.maturities();
    let pricer = ZeroDriftPricer::new(&maturities, cfg)?;
    let model = pricer.yields(result.z, result.beta, result.r0, &maturities)?;
    Ok(residuals(&curve.points, &model))
}

/// Drift whose `η(t, t+m) = R_r(m)·m` at every residual maturity, with
/// `χ(t) = chi_t` and zero initial slope of `η`.
pub fn reconstruct_drift(residuals: &[YieldPoint], t: f64, chi_t: f64, kind: SplineKind) -> Result<DriftCurve> {
    if residuals.len() < 3 {
        return Err(Error::Validation(format!(
            "drift reconstruction needs at least 3 maturities, got {}",
            residuals.len()
        )));
    }
    let mut s = vec![t];
    let mut eta = vec![0.0];
    for p in residuals {
        s.push(t + p.maturity);
        eta.push(p.yield_value * p.maturity);
    }
    let eta_spline = interpolate(&s, &eta, 0.0, kind)?;
    let d = eta_spline.differentiate();
    let chi = PiecewiseCubic {
        knots: d.knots,
        coeffs: d.coeffs.into_iter().map(|[a, b, c, e]| [a + chi_t, b, c, e]).collect(),
    };
    DriftCurve::from_pieces(chi, Extrapolation::Constant)
}

/// Ordinary least squares of yield on `{1, T, T², T³}`. Returns the
/// fitted yields and their RMSE.
pub fn cubic_baseline(curve: &EmpiricalCurve) -> Result<(Vec<YieldPoint>, f64)> {
    let n = curve.points.len();
    if n < 5 {
        return Err(Error::Validation(format!("cubic baseline needs at least 5 points, got {n}")));
    }
    let scale = curve.points[n - 1].maturity;
    let a = DMatrix::from_fn(n, 4, |i, j| (curve.points[i].maturity / scale).powi(j as i32));
    let b = DVector::from_iterator(n, curve.points.iter().map(|p| p.yield_value));
    let qr = a.clone().qr();
    let r = qr.r();
    let diag_max = (0..4).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..4).any(|i| r[(i, i)].abs() <= 1e-12 * diag_max) {
        return Err(Error::Singular("cubic baseline design matrix is rank deficient".into()));
    }
    let qtb = qr.q().transpose() * &b;
    let coef = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Singular("cubic baseline triangular solve failed".into()))?;
    let fitted: Vec<YieldPoint> = (a * coef)
        .iter()
        .zip(&curve.points)
        .map(|(&y, p)| YieldPoint { maturity: p.maturity, yield_value: y })
        .collect();
    let e = rmse(&curve.points, &fitted)?;
    Ok((fitted, e))
}

/// Root mean squared yield difference over matching maturities.
pub fn rmse(a: &[YieldPoint], b: &[YieldPoint]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::Validation(format!("cannot compare curves of {} and {} points", a.len(), b.len())));
    }
    let mut sum = 0.0;
    for (p, q) in a.iter().zip(b) {
        if (p.maturity - q.maturity).abs() > 1e-12 * p.maturity.abs().max(1.0) {
            return Err(Error::Validation(format!("maturity mismatch: {} vs {}", p.maturity, q.maturity)));
        }
        sum += (p.yield_value - q.yield_value).powi(2);
    }
    Ok((sum / a.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::{bond_price_semi, PricingConfig};

    fn points(ms: &[f64], ys: &[f64]) -> Vec<YieldPoint> {
        ms.iter().zip(ys).map(|(&maturity, &yield_value)| YieldPoint { maturity, yield_value }).collect()
    }

    const MATS: [f64; 9] = [0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 20.0, 30.0];

    #[test]
    fn rmse_basics() {
        let a = points(&MATS, &[0.01; 9]);
        let b = points(&MATS, &[0.0101; 9]);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        assert!((rmse(&a, &b).unwrap() - 1e-4).abs() < 1e-15);
        assert!(rmse(&a, &b[..8]).is_err());
        let mut c = b.clone();
        c[3].maturity = 3.5;
        assert!(rmse(&a, &c).unwrap_err().is_validation());
    }

    #[test]
    fn cubic_baseline_reproduces_cubics() {
        let ys: Vec<f64> = MATS.iter().map(|t| 0.001 + 0.002 * t - 1e-4 * t * t + 2e-6 * t * t * t).collect();
        let curve = EmpiricalCurve::new(None, points(&MATS, &ys), "cubic").unwrap();
        let (_, e) = cubic_baseline(&curve).unwrap();
        assert!(e <= 1e-12, "{e}");
        let short = EmpiricalCurve::new(None, points(&MATS[..4], &ys[..4]), "short").unwrap();
        assert!(cubic_baseline(&short).unwrap_err().is_validation());
    }

    #[test]
    fn zero_residuals_give_flat_drift() {
        let res = points(&[1.0, 2.0, 5.0, 10.0], &[0.0; 4]);
        let d = reconstruct_drift(&res, 0.0, -0.05, SplineKind::ClampedNotAKnot).unwrap();
        for k in 0..=40 {
            let s = k as f64 * 0.5;
            assert!((d.chi(s) + 0.05).abs() < 1e-15);
            assert!(d.nu(s).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_residuals_give_constant_nu() {
        let nu0 = 0.001;
        let res: Vec<YieldPoint> =
            MATS.iter().map(|&m| YieldPoint { maturity: m, yield_value: nu0 / 2.0 * m }).collect();
        let d = reconstruct_drift(&res, 0.0, 0.0, SplineKind::ClampedNotAKnot).unwrap();
        for k in 1..300 {
            let s = k as f64 * 0.1;
            assert!((d.nu(s) - nu0).abs() < 1e-6, "s = {s}: {}", d.nu(s));
        }
        for p in &res {
            assert!((d.eta(0.0, p.maturity).unwrap() - p.yield_value * p.maturity).abs() < 1e-14);
        }
        assert!(reconstruct_drift(&res[..2], 0.0, 0.0, SplineKind::Pchip).is_err());
    }

    #[test]
    fn rejects_bad_curves() {
        assert!(EmpiricalCurve::new(None, points(&[2.0, 1.0], &[0.0, 0.0]), "x").is_err());
        assert!(EmpiricalCurve::new(None, points(&[1.0], &[f64::NAN]), "x").is_err());
        let c = EmpiricalCurve::new(None, points(&MATS[..3], &[0.0; 3]), "x").unwrap();
        assert!(calibrate(&c, &PricingConfig::default(), &SearchConfig::default()).unwrap_err().is_validation());
    }

    #[test]
    fn synthetic_round_trip() {
        let (z, beta, r0) = (0.002, 0.15, -0.1);
        let cfg = PricingConfig::default();
        let pricer = ZeroDriftPricer::new(&MATS, &cfg).unwrap();
        let ys = pricer.yields(z, beta, r0, &MATS).unwrap();
        let curve = EmpiricalCurve::new(None, ys, "synthetic").unwrap();
        let fit = calibrate(&curve, &cfg, &SearchConfig::default()).unwrap();
        assert!(fit.rmse <= 1e-9, "rmse {}", fit.rmse);
        assert!((fit.z - z).abs() < 1e-5 && (fit.beta - beta).abs() < 1e-5 && (fit.r0 - r0).abs() < 1e-5, "{fit:?}");
        assert!((fit.sigma * fit.sigma - 2.0 * fit.beta.powi(3)).abs() < 1e-16);
        for v in &fit.start_objectives {
            assert!(fit.rmse <= *v + 1e-15);
        }
        let res = residual_yield(&curve, &fit, &cfg).unwrap();
        assert!(res.iter().all(|p| p.yield_value.abs() < 1e-8));
    }

    #[test]
    fn constant_drift_residuals_are_linear() {
        // Yields of a curve with ν ≡ ν₀ exceed the zero-drift fit by ν₀ m / 2.
        let (z, beta, r0, nu0) = (0.002, 0.15, -0.1, 0.0004);
        let cfg = PricingConfig::default();
        let pricer = ZeroDriftPricer::new(&MATS, &cfg).unwrap();
        let s = pricer.spectrum(beta).unwrap();
        let drift = DriftCurve::linear(r0, nu0);
        let pts: Vec<YieldPoint> = MATS
            .iter()
            .map(|&m| YieldPoint {
                maturity: m,
                yield_value: bond_price_semi(z, 0.0, m, &s, &drift, &cfg).unwrap().yield_for(m),
            })
            .collect();
        let curve = EmpiricalCurve::new(None, pts, "drifted").unwrap();
        let base = CalibrationResult {
            z,
            beta,
            r0,
            sigma: (2.0 * beta.powi(3)).sqrt(),
            rmse: 0.0,
            model_yields: vec![],
            residual_yields: vec![],
            converged: true,
            n_restarts_used: 0,
            start_objectives: vec![],
            evaluations: 0,
        };
        for p in residual_yield(&curve, &base, &cfg).unwrap() {
            assert!((p.yield_value - nu0 / 2.0 * p.maturity).abs() < 1e-12);
        }
    }
}
