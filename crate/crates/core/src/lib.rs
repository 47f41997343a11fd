//! Simulation and calibration engine for two-stage Bayesian hybrid-control
//! trials.
//!
//! At an interim look the concurrent control data are compared with the
//! historical control prior through a normalized Hellinger distance. The
//! resulting borrowing weight either shrinks the second-stage control arm or
//! moves those patients to the treatment arm, and the historical prior is
//! rescaled to the number of control patients that were not randomized.
//!
//! The numerical layers ([`distributions`], [`ess`], [`similarity`],
//! [`design`]) are generic over [`Real`]; the simulation layers use `f64`.

pub mod calibration;
pub mod cli;
pub mod design;
pub mod distributions;
pub mod engine;
pub mod error;
pub mod ess;
pub mod numerics;
pub mod samplesize;
pub mod scalar;
pub mod similarity;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Prior = distributions::PriorSpec<f64>;
pub type Prior32 = distributions::PriorSpec<f32>;
pub type Model = distributions::OutcomeModel<f64>;
pub type Model32 = distributions::OutcomeModel<f32>;
pub type Summary = distributions::DataSummary<f64>;
pub type Design = design::DesignConfig<f64>;
pub type Similarity = similarity::SimilarityConfig<f64>;
