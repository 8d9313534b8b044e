//! File formats, parallel drivers and the command-line front end for the
//! ordered sets model implemented in `osm-core`.

pub mod checkpoint;
pub mod dump;
pub mod error;
pub mod parallel;
pub mod ratings;
pub mod report;

pub use error::{Error, Result};
pub use osm_core;
