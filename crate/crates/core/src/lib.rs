//! Noncolliding q-exchangeable random walks and their lozenge-tiling
//! counterpart: exact transition laws and samplers, determinantal
//! correlation kernels, and the large-scale limit shapes.

pub mod asymptotics;
pub mod error;
pub mod format;
pub mod kernel;
pub mod linalg;
pub mod mp;
pub mod qcalc;
pub mod rng;
pub mod tilings;
pub mod validate;
pub mod walks;

pub use error::{Error, Result};
pub use qcalc::QParam;
