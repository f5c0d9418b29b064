//! Autoencoder-based lossy compression for wireless sensor data with a hard
//! per-reading error bound, reference codecs, fidelity metrics and an energy
//! model for multihop relaying.

#![allow(clippy::needless_range_loop)]

pub mod autoencoder;
pub mod baselines;
pub mod cli;
pub mod codec;
pub mod dataset;
pub mod energy;
pub mod metrics;
pub mod sphering;
