//! HEARO: a from-scratch toolkit for training and tuning parametrized
//! fully-connected networks on routine clinical data.
//!
//! The pipeline runs end to end on the Cleveland heart-disease format:
//! ingestion and preprocessing ([`dataset`]), forward/backward propagation
//! over an L-layer network ([`network`]), batch gradient descent
//! ([`trainer`]), confusion-matrix metrics including the Matthews
//! correlation coefficient ([`metrics`]), k-fold cross-validation
//! ([`validation`]), and empirical hyperparameter search with the shipped
//! `hearo5` preset ([`tuner`]).
//!
//! Every random choice flows from explicit 64-bit seeds through the pinned
//! generator in [`rng`], so runs are reproducible bit for bit.

pub mod dataset;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod network;
pub mod rng;
pub mod trainer;
pub mod tuner;
pub mod validation;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use network::{Activation, HyperParams, Model};
