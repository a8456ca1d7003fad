//! Independent checks of the spectral prices: a finite-difference solver of
//! the pricing equation and Monte Carlo over folded Brownian paths.

pub mod mc;
pub mod pde;

pub use mc::{mc_price, mc_price_reflected, McConfig, McEstimate};
pub use pde::{pde_price, pde_price_robin, richardson_ratio, semi_line_extent, PdeGrid};

/// Boundary geometry of the driving Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleModel {
    /// Reflected at `x = 0`.
    Semi,
    /// Reflected at `x = 0` and `x = l`.
    Interval { l: f64 },
}
