use alloc::string::String;
use thiserror::Error;

use crate::combinatorics::BigCount;
use crate::sampler::MoveKind;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid ordered partition: {0}")]
    InvalidPartition(String),

    #[error("object count mismatch: expected {expected}, found {found}")]
    ObjectCountMismatch { expected: usize, found: usize },

    #[error("invalid bipartition of block {block}")]
    InvalidBipartition { block: usize },

    #[error("block index {index} out of range for {n_blocks} blocks")]
    NoSuchBlock { index: usize, n_blocks: usize },

    #[error("{0:?} move is infeasible in the current state")]
    Infeasible(MoveKind),

    #[error("{n} objects exceed the enumeration cap of {cap} ({states} ordered partitions)")]
    CapExceeded { n: usize, cap: usize, states: BigCount },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("hidden unit {index} out of range for {n_hidden} units")]
    NoSuchHiddenUnit { index: usize, n_hidden: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("value {0} is not representable as a finite float")]
    Overflow(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("value {value} outside the supported range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
