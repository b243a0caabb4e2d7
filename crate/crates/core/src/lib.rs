//! Spectral classification with convolutional neural networks.
//!
//! The crate covers the whole path from a survey catalog to a trained
//! classifier that labels each spectrum as galaxy, quasar or star:
//!
//! - [`catalog`]: catalog records, ZWARNING flag decoding, quality filtering.
//! - [`sampler`]: redshift-stratified, class-balanced dataset construction,
//!   histograms and empirical CDFs.
//! - [`preprocess`]: window reduction, impairment filtering, binning,
//!   rasterization, 8-bit normalization and PGM images.
//! - [`synth`]: labeled synthetic spectra for desk-scale experiments.
//! - [`nn`]: feature maps, layers with forward/backward passes, loss, SGD.
//! - [`arch`]: LeNet-5 / LeNet-7 topologies and the key=value config format.
//! - [`harness`]: training loop, evaluation, classification listings.
//! - [`cli`]: the `spectral-cnn` command line front end.
//!
//! Runnable walkthroughs live in `examples/`, one per capability.

pub mod arch;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod harness;
pub mod nn;
pub mod preprocess;
pub mod sampler;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
