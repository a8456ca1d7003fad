//! Cross-checks between the spectral pricers and the PDE / Monte Carlo oracles.

use holee_core::drift::DriftCurve;
use holee_core::oracle::{
    mc_price, mc_price_reflected, pde_price, richardson_ratio, McConfig, OracleModel, PdeGrid,
};
use holee_core::pricing::{bond_price_interval, bond_price_semi, PricingConfig};
use holee_core::spectral::{build_interval_spectrum, build_semi_spectrum, ModelParams};

const Z: f64 = -0.00184;
const BETA: f64 = 0.0924;
const R0: f64 = -0.05834;

#[test]
fn pde_is_second_order() {
    let p = ModelParams::from_beta(0.1).unwrap();
    let l = 5.0 / p.alpha;
    let drift = DriftCurve::constant(0.0);
    let z = p.sigma * l / 2.0;
    let price = |k: usize| {
        let grid = PdeGrid::new(l, 40 * k + 1, 10 * k);
        pde_price(z, 0.0, 10.0, p.sigma, &drift, &grid, OracleModel::Interval { l }).unwrap()
    };
    let ratio = richardson_ratio(price(1), price(2), price(4));
    assert!((3.6..=4.4).contains(&ratio), "ratio {ratio}");
}

#[test]
fn interval_pde_matches_spectral() {
    let p = ModelParams::from_beta(0.1).unwrap();
    let l = 5.0 / p.alpha;
    let s = build_interval_spectrum(p.sigma, l, 60).unwrap();
    let drift = DriftCurve::constant(-0.02);
    let z = -0.02 + p.sigma * l * 0.3;
    let spectral = bond_price_interval(z, 0.0, 10.0, &s, &drift, &PricingConfig::default()).unwrap().price;
    let grid = PdeGrid::new(l, 2001, 2000);
    let pde = pde_price(z, 0.0, 10.0, p.sigma, &drift, &grid, OracleModel::Interval { l }).unwrap();
    assert!((pde / spectral - 1.0).abs() < 1e-4, "{pde} vs {spectral}");
}

#[test]
fn pde_tracks_time_dependent_drift() {
    let p = ModelParams::from_beta(BETA).unwrap();
    let s = build_semi_spectrum(p.sigma, 300).unwrap();
    let drift = DriftCurve::linear(R0, 0.001);
    let spectral = bond_price_semi(Z, 0.0, 10.0, &s, &drift, &PricingConfig::default()).unwrap().price;
    let x = (Z - R0) / p.sigma;
    let grid = PdeGrid::new(holee_core::oracle::semi_line_extent(x, 10.0), 2000, 2000);
    let pde = pde_price(Z, 0.0, 10.0, p.sigma, &drift, &grid, OracleModel::Semi).unwrap();
    assert!((pde / spectral - 1.0).abs() < 1e-4, "{pde} vs {spectral}");
}

fn overlap(a: f64, sa: f64, b: f64, sb: f64) -> f64 {
    (a - b).abs() / sa.hypot(sb)
}

#[test]
fn modulus_and_reflected_paths_price_alike() {
    let p = ModelParams::from_beta(BETA).unwrap();
    let drift = DriftCurve::constant(R0);
    let mc = McConfig { n_paths: 100_000, steps_per_year: 50, seed: 11, antithetic: false };
    let folded = mc_price(Z, 0.0, 5.0, p.sigma, &drift, &mc, OracleModel::Semi).unwrap();
    let reflected =
        mc_price_reflected(Z, 0.0, 5.0, p.sigma, &drift, &McConfig { seed: 12, ..mc }, OracleModel::Semi).unwrap();
    let k = overlap(folded.price, folded.std_error, reflected.price, reflected.std_error);
    assert!(k < 3.0, "{folded:?} vs {reflected:?}");
}

#[test]
fn periodic_fold_matches_two_barrier_reflection_and_spectral() {
    let p = ModelParams::from_beta(BETA).unwrap();
    let l = 2.0 / p.alpha;
    let drift = DriftCurve::constant(R0);
    let z = R0 + p.sigma * l / 2.0;
    let mc = McConfig { n_paths: 100_000, steps_per_year: 50, seed: 21, antithetic: false };
    let model = OracleModel::Interval { l };
    let folded = mc_price(z, 0.0, 5.0, p.sigma, &drift, &mc, model).unwrap();
    let reflected = mc_price_reflected(z, 0.0, 5.0, p.sigma, &drift, &McConfig { seed: 22, ..mc }, model).unwrap();
    assert!(overlap(folded.price, folded.std_error, reflected.price, reflected.std_error) < 3.0);

    let s = build_interval_spectrum(p.sigma, l, 40).unwrap();
    let spectral = bond_price_interval(z, 0.0, 5.0, &s, &drift, &PricingConfig::default()).unwrap().price;
    assert!((folded.price - spectral).abs() < 3.0 * folded.std_error, "{folded:?} vs {spectral}");
}

#[test]
fn mc_is_reproducible_for_a_seed() {
    let p = ModelParams::from_beta(BETA).unwrap();
    let drift = DriftCurve::constant(R0);
    let mc = McConfig { n_paths: 10_000, steps_per_year: 20, seed: 3, antithetic: true };
    let a = mc_price(Z, 0.0, 2.0, p.sigma, &drift, &mc, OracleModel::Semi).unwrap();
    let b = mc_price(Z, 0.0, 2.0, p.sigma, &drift, &mc, OracleModel::Semi).unwrap();
    assert_eq!(a.price.to_bits(), b.price.to_bits());
}
