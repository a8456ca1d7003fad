//! Crank–Nicolson solver for `ψ_τ = ½ψ_xx − (σx + χ)ψ` with Neumann ends.

use super::OracleModel;
use crate::drift::DriftCurve;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeGrid {
    /// Right end of the grid in `x = (z − χ)/σ` units; the left end is 0.
    pub x_max: f64,
    pub n_x: usize,
    pub n_t: usize,
    /// Implicit weight: 0.5 is Crank–Nicolson, 1 is fully implicit.
    pub theta: f64,
}

impl PdeGrid {
    pub fn new(x_max: f64, n_x: usize, n_t: usize) -> Self {
        PdeGrid { x_max, n_x, n_t, theta: 0.5 }
    }

    fn validate(&self) -> Result<()> {
        if self.n_x < 3 || self.n_t < 1 {
            return Err(Error::Validation(format!(
                "grid needs n_x >= 3 and n_t >= 1, got {} and {}",
                self.n_x, self.n_t
            )));
        }
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::Validation(format!("theta must lie in [0.5, 1], got {}", self.theta)));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(Error::Validation(format!("x_max must be positive, got {}", self.x_max)));
        }
        Ok(())
    }
}

/// Far-field cutoff for the half-line: start point plus eight standard
/// deviations of the Brownian motion over `tau`.
pub fn semi_line_extent(x: f64, tau: f64) -> f64 {
    x + 8.0 * tau.sqrt() + 1.0
}

/// Solves `a_i u_{i−1} + b_i u_i + c_i u_{i+1} = d_i` in place of `d`.
fn thomas(a: &[f64], b: &[f64], c: &[f64], d: &mut [f64], scratch: &mut [f64]) {
    let n = d.len();
    scratch[0] = c[0] / b[0];
    d[0] /= b[0];
    for i in 1..n {
        let m = b[i] - a[i] * scratch[i - 1];
        scratch[i] = c[i] / m;
        d[i] = (d[i] - a[i] * d[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        d[i] -= scratch[i] * d[i + 1];
    }
}

/// Four-point Lagrange interpolation on a uniform grid.
fn interpolate(u: &[f64], h: f64, x: f64) -> f64 {
    let n = u.len();
    let k = ((x / h).floor() as usize).min(n - 2);
    let i0 = k.saturating_sub(1).min(n - 4);
    let s = x / h - i0 as f64;
    let mut v = 0.0;
    for j in 0..4 {
        let mut w = 1.0;
        for m in 0..4 {
            if m != j {
                w *= (s - m as f64) / (j as f64 - m as f64);
            }
        }
        v += w * u[i0 + j];
    }
    v
}

/// One θ-scheme step for `u_τ = D u_xx + C u_x − P u`, with Neumann ends
/// via ghost nodes. `p_old`, `p_new` are the potentials at the two levels.
struct Stepper {
    n: usize,
    h: f64,
    dt: f64,
    theta: f64,
    diff: f64,
    conv: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    fn new(n: usize, h: f64, dt: f64, theta: f64, diff: f64, conv: f64) -> Self {
        Stepper {
            n,
            h,
            dt,
            theta,
            diff,
            conv,
            a: vec![0.0; n],
            b: vec![0.0; n],
            c: vec![0.0; n],
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    /// Off-diagonal weights `(lower, upper)` of the spatial operator at node `i`.
    fn weights(&self, i: usize) -> (f64, f64) {
        let d = self.diff / (self.h * self.h);
        let c = self.conv / (2.0 * self.h);
        if i == 0 {
            // Ghost node u_{-1} = u_1.
            (0.0, 2.0 * d)
        } else if i == self.n - 1 {
            (2.0 * d, 0.0)
        } else {
            (d - c, d + c)
        }
    }

    fn step(&mut self, u: &mut [f64], p_old: &dyn Fn(usize) -> f64, p_new: &dyn Fn(usize) -> f64) {
        let n = self.n;
        let d2 = 2.0 * self.diff / (self.h * self.h);
        let (th, dt) = (self.theta, self.dt);
        for i in 0..n {
            let (lo, up) = self.weights(i);
            let centre_old = -d2 - p_old(i);
            let centre_new = -d2 - p_new(i);
            let left = if i > 0 { u[i - 1] } else { 0.0 };
            let right = if i + 1 < n { u[i + 1] } else { 0.0 };
            let lu = lo * left + centre_old * u[i] + up * right;
            self.rhs[i] = u[i] + (1.0 - th) * dt * lu;
            self.a[i] = -th * dt * lo;
            self.b[i] = 1.0 - th * dt * centre_new;
            self.c[i] = -th * dt * up;
        }
        thomas(&self.a, &self.b, &self.c, &mut self.rhs, &mut self.scratch);
        u.copy_from_slice(&self.rhs);
    }
}

/// Bond price from the finite-difference solution of the pricing equation
/// in `x = (z − χ(t))/σ`, started from `ψ(·, T) = 1`.
pub fn pde_price(
    z: f64,
    t: f64,
    maturity: f64,
    sigma: f64,
    drift: &DriftCurve,
    grid: &PdeGrid,
    model: OracleModel,
) -> Result<f64> {
    grid.validate()?;
    if !(sigma > 0.0) || !(maturity > t) {
        return Err(Error::Validation(format!("need sigma > 0 and T > t, got {sigma}, {t}, {maturity}")));
    }
    let x = (z - drift.chi(t)) / sigma;
    let x_max = match model {
        OracleModel::Semi => grid.x_max,
        OracleModel::Interval { l } => l,
    };
    if !(x >= 0.0 && x <= x_max) {
        return Err(Error::Domain(format!("x = {x} lies outside the grid [0, {x_max}]")));
    }
    let tau = maturity - t;
    let h = x_max / (grid.n_x - 1) as f64;
    let dt = tau / grid.n_t as f64;
    let mut u = vec![1.0; grid.n_x];
    let mut stepper = Stepper::new(grid.n_x, h, dt, grid.theta, 0.5, 0.0);
    for k in 0..grid.n_t {
        // τ runs backwards from T.
        let chi_old = drift.chi(maturity - k as f64 * dt);
        let chi_new = drift.chi(maturity - (k + 1) as f64 * dt);
        let p_old = |i: usize| sigma * i as f64 * h + chi_old;
        let p_new = |i: usize| sigma * i as f64 * h + chi_new;
        stepper.step(&mut u, &p_old, &p_new);
    }
    Ok(interpolate(&u, h, x))
}

/// Price with the barrier on the short rate itself at `r_*` and constant
/// drift `ν`: `v_τ = ½σ² v_rr + ν v_r − r v`, `v_r = 0` at `r_*`.
pub fn pde_price_robin(z: f64, tau: f64, sigma: f64, nu: f64, r_star: f64, n_x: usize, n_t: usize) -> Result<f64> {
    let grid = PdeGrid::new(1.0, n_x, n_t);
    grid.validate()?;
    if !(sigma > 0.0 && tau > 0.0) {
        return Err(Error::Validation(format!("need sigma > 0 and tau > 0, got {sigma}, {tau}")));
    }
    if !(z >= r_star) {
        return Err(Error::Domain(format!("short rate {z} lies below the barrier {r_star}")));
    }
    let r_max = z.max(r_star) + nu.abs() * tau + 8.0 * sigma * tau.sqrt() + 0.01;
    let width = r_max - r_star;
    let h = width / (n_x - 1) as f64;
    let dt = tau / n_t as f64;
    let mut u = vec![1.0; n_x];
    let mut stepper = Stepper::new(n_x, h, dt, 0.5, 0.5 * sigma * sigma, nu);
    let p = |i: usize| r_star + i as f64 * h;
    for _ in 0..n_t {
        stepper.step(&mut u, &p, &p);
    }
    Ok(interpolate(&u, h, z - r_star))
}

/// `(P_h − P_{h/2}) / (P_{h/2} − P_{h/4})` for prices on successively halved
/// grids; close to 4 for a second-order scheme.
pub fn richardson_ratio(coarse: f64, mid: f64, fine: f64) -> f64 {
    (coarse - mid) / (mid - fine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_tridiagonal() {
        let a = [0.0, 1.0, 1.0, 1.0];
        let b = [4.0, 4.0, 4.0, 4.0];
        let c = [1.0, 1.0, 1.0, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let mut d: Vec<f64> = (0..4)
            .map(|i| {
                b[i] * x[i] + if i > 0 { a[i] * x[i - 1] } else { 0.0 } + if i < 3 { c[i] * x[i + 1] } else { 0.0 }
            })
            .collect();
        let mut s = vec![0.0; 4];
        thomas(&a, &b, &c, &mut d, &mut s);
        for i in 0..4 {
            assert!((d[i] - x[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn interpolation_is_exact_for_cubics() {
        let h = 0.1;
        let u: Vec<f64> = (0..20).map(|i| (i as f64 * h).powi(3) - 2.0 * i as f64 * h).collect();
        for &x in &[0.0, 0.05, 0.77, 1.88, 1.9] {
            assert!((interpolate(&u, h, x) - (x * x * x - 2.0 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_limit() {
        // β = 1e-3 so σ = √(2β³); the rate barely moves from z.
        let sigma = (2.0f64 * 1e-9).sqrt();
        let drift = DriftCurve::constant(0.0);
        let z = 0.03;
        let x = z / sigma;
        let grid = PdeGrid::new(semi_line_extent(x, 5.0), 4001, 500);
        let p = pde_price(z, 0.0, 5.0, sigma, &drift, &grid, OracleModel::Semi).unwrap();
        assert!((p - (-z * 5.0f64).exp()).abs() < 1e-5, "{p}");
    }

    #[test]
    fn flat_rate_without_volatility_coupling() {
        // σ tiny and x = 0: the reflected motion contributes ~σ√τ.
        let drift = DriftCurve::constant(0.02);
        let grid = PdeGrid::new(10.0, 201, 200);
        let p = pde_price(0.02, 0.0, 2.0, 1e-9, &drift, &grid, OracleModel::Semi).unwrap();
        assert!((p - (-0.04f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rejects_points_outside_the_grid() {
        let drift = DriftCurve::constant(0.0);
        let grid = PdeGrid::new(5.0, 101, 10);
        assert!(matches!(
            pde_price(-0.01, 0.0, 1.0, 0.04, &drift, &grid, OracleModel::Semi),
            Err(Error::Domain(_))
        ));
        assert!(pde_price(1.0, 0.0, 1.0, 0.04, &drift, &grid, OracleModel::Interval { l: 2.0 }).is_err());
        assert!(pde_price(0.0, 0.0, 1.0, 0.04, &drift, &PdeGrid::new(5.0, 2, 10), OracleModel::Semi)
            .unwrap_err()
            .is_validation());
    }
}
