//! Multi-objective feature selection over vital-sign signals.
//!
//! The crate covers the full pipeline: a deterministic synthetic generator of
//! chest/respiration/cardiac sessions, a 189-feature extraction catalog,
//! preprocessing, from-scratch k-NN and random-forest classifiers, an NSGA-II
//! engine with a dual-model fitness function (recognize the breathing
//! activity, suppress user identification), RFE baselines, and the evaluation
//! protocols that compare them.

pub mod baselines;
pub mod classifiers;
pub mod cli;
pub mod error;
pub mod evalproto;
pub mod features;
pub mod fitness;
pub mod nsga2;
pub mod preprocess;
pub mod seeds;
pub mod sigsynth;

pub use error::{Error, Result};
