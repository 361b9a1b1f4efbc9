// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod interference;
pub mod network;
pub mod numerics;
pub mod objectives;
pub mod optimizers;
pub mod queueing;
pub mod scenario;

pub use error::{Error, Result};
