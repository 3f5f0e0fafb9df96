//! Eyeblink detection for unconstrained video.
//!
//! Eye regions are tracked with a kernelized correlation filter, described per frame by
//! uniform LBP histograms and their frame-to-frame differences, and classified by a
//! multi-scale LSTM trained with an angular-margin softmax loss.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod mslstm;
pub mod pipeline;
pub mod tracker;

pub use error::{Error, Result};
