//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Global subdivision: the panel with the largest error estimate is bisected
//! until the summed estimate drops below `max(abs_tol, rel_tol * |I|)`.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_PANELS: usize = 20_000;

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadTol {
    pub abs: f64,
    pub rel: f64,
}

impl Default for QuadTol {
    fn default() -> Self {
        QuadTol { abs: 1e-11, rel: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    Panel { a, b, value, error }
}

/// Integrate `f` over `[a, b]`. Reversed bounds give the negated integral.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: QuadTol) -> Result<Estimate> {
    integrate_panels(f, &[a, b], tol)
}

/// Integrate over consecutive `breakpoints`, seeding one panel per gap.
///
/// Useful for oscillatory integrands where the caller knows the local
/// wavelength.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    tol: QuadTol,
) -> Result<Estimate> {
    if breakpoints.len() < 2 {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let (lo, hi) = (breakpoints[0], breakpoints[breakpoints.len() - 1]);
    if breakpoints.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("non-finite integration bound".into()));
    }
    let mut panels: Vec<Panel> = breakpoints
        .windows(2)
        .filter(|w| w[0] != w[1])
        .map(|w| kronrod15(&mut f, w[0], w[1]))
        .collect();

    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature { a: lo, b: hi, error });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid == p.a || mid == p.b {
            // Panel cannot be split further in floating point.
            return Err(Error::Quadrature { a: lo, b: hi, error });
        }
        panels.push(kronrod15(&mut f, p.a, mid));
        panels.push(kronrod15(&mut f, mid, p.b));
    }
}

/// Composite Simpson rule with `n` (even) subintervals.
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n.max(2) };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
