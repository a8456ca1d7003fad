pub mod airy;
pub mod calibration;
pub mod data;
pub mod drift;
pub mod error;
pub mod oracle;
pub mod optim;
pub mod pricing;
pub mod quad;
pub mod roots;
pub mod spectral;
pub mod spline;

pub use error::{Error, Result};
