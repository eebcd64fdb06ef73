//! Good vs. bad query abandonment prediction from mouse cursor sessions.
//!
//! The pipeline: parse sessions ([`seqdata`]), turn them into fixed-length
//! matrices or feature vectors ([`seqdata`], [`features`]), balance the
//! training partition ([`balance`]), train a bidirectional LSTM ([`rnn`]) or
//! a random forest ([`forest`]), and score everything under nested
//! stratified cross-validation ([`eval`]). [`synth`] produces desk-scale
//! datasets with known labels; [`cli`] wires it all into one binary.

pub mod balance;
pub mod checkpoint;
pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod forest;
mod linalg;
pub mod rnn;
pub mod seeds;
pub mod seqdata;
pub mod synth;

pub use error::{Error, Result};
