//! Quadrature, univariate search and normal-distribution helpers.

pub mod normal;
pub mod optimize;
pub mod quadrature;

pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
pub use optimize::{brent_root, golden_section, Minimum};
pub use quadrature::{integrate, integrate_with_breaks, QuadOptions, QuadResult};
