//! Conjugate mixtures, posterior updates, Hellinger distances and posterior
//! functionals of the treatment effect.

mod delta;
mod hellinger;
mod prior;
mod update;

pub use delta::{
    delta_point_and_interval, normal_delta_cdf, prob_delta_positive, DeltaSummary,
    BINARY_INTERVAL_DRAWS,
};
pub use hellinger::{hellinger, hellinger_beta, hellinger_normal, hellinger_numeric};
pub(crate) use hellinger::{hellinger_beta_shapes, hellinger_normal_params};
pub use prior::{Component, DataSummary, Family, OutcomeModel, PriorSpec};
pub use update::posterior_update;
