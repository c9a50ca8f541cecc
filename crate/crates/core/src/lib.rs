//! Probability measures on compact groups.
//!
//! Finite groups come from Cayley tables or built-in families; the circle
//! group is handled through truncated Fourier series. On top of these sit
//! convolution and divergence to the Haar (uniform) measure, right-invariant
//! distortions with exact transport, rate-distortion functions (closed form
//! for the uniform source, Blahut–Arimoto otherwise) and a convergence lab
//! for convolution powers.
//!
//! ```
//! use std::sync::Arc;
//! use haarlab::{divergence_to_uniform, FiniteGroup, GroupDistribution};
//!
//! let g = Arc::new(FiniteGroup::cyclic(6).unwrap());
//! let p = GroupDistribution::uniform_on(g, &[0, 2, 4]).unwrap();
//! assert!((divergence_to_uniform(&p) - 2f64.ln()).abs() < 1e-12);
//! ```

pub mod bessel;
pub mod cli;
pub mod distortion;
pub mod error;
pub mod fourier;
pub mod group;
pub mod io;
pub mod lab;
pub mod measure;
pub mod rd;
pub mod transport;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_ratio_10};
pub use distortion::{distortion_matrix, DistortionSpec};
pub use error::{Error, Result};
pub use fourier::FourierDensity;
pub use group::{builtin_group, subgroup_closure, FiniteGroup, GroupAction, GroupFamily, Subgroup};
pub use lab::{
    decay_bound_check, detect_obstruction, fit_rate, one_bit_floor, one_bit_floor_check, pointwise_density_check,
    rd_convergence_check, run_series, run_series_fourier, Verdict,
};
pub use measure::{
    compensation_identity_residual, divergence, divergence_to_uniform, haar_check, total_variation,
    total_variation_to_uniform, GroupDistribution,
};
pub use rd::{
    blahut_arimoto, partition_function, rd_curve, sandwich_check, uniform_rate_at, uniform_rd_curve, uniform_rd_point,
    BaOptions, BetaGrid, RDCurve, RDPoint,
};
pub use transport::transport_distance;
