//! Ordered Sets Model (OSM): a log-linear distribution over ordered set
//! partitions, with a latent-unit extension, split-and-merge
//! Metropolis-Hastings inference, annealed importance sampling of the
//! partition function, stochastic-gradient learning and a collaborative
//! ranking pipeline.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, threading
//! and the command-line tool live in the companion `osm` crate.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod combinatorics;
pub mod error;
pub mod latent;
pub mod learning;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod partition;
pub mod partition_fn;
pub mod pipeline;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
pub use latent::{HiddenState, LatentChain, LatentModel};
pub use model::{LinearPotentials, PairModel, PairPotentials, WorthModel};
pub use partition::OrderedPartition;
pub use rng::ChainRng;
