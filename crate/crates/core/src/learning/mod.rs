//! Maximum-likelihood learning of the collaborative-filtering latent OSM.
//!
//! The log-likelihood gradient is the difference between sufficient
//! statistics under the data and under the model. The data side is exact
//! (hidden units at their closed-form posterior); the model side comes from
//! persistent per-user Markov chains advanced a few sweeps per update.

mod params;
mod stats;
mod train;

pub use params::CfParams;
pub use stats::{
    accumulate_stats, estimate_gradient, exact_gradient, exact_log_likelihood, exact_log_likelihoods,
    sufficient_stats, GradientEstimate, EXACT_GRADIENT_MAX_HIDDEN, EXACT_GRADIENT_MAX_ITEMS,
};
pub use train::{
    train, user_update, BlockExecutor, BlockRecord, Sequential, TrainConfig, TrainLog, Trainer, UserData,
    UserUpdate,
};
