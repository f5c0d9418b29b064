//! Affine normalization of data vectors into the sigmoid's working range.
//!
//! Each vector is centered on its own mean, clamped to three standard
//! deviations and mapped linearly onto `[0.1, 0.9]`. The standard deviation is
//! a single scalar pooled over every centered entry of the training set.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpheringError {
    #[error("no training entries to fit the sphering scale")]
    Empty,
    #[error("training vectors need at least 2 entries, found {0}")]
    TooShort(usize),
    #[error("pooled centered entries have zero variance")]
    ZeroVariance,
    #[error("sphering scale must be positive and finite, got {0}")]
    InvalidSigma(f64),
}

/// Normalized center of the output range.
pub const CENTER: f64 = 0.5;
/// Half-width of the output range: outputs span `CENTER ± HALF_WIDTH`.
pub const HALF_WIDTH: f64 = 0.4;
/// Clamp radius in standard deviations.
pub const CLAMP_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpheringScale {
    sigma: f64,
}

impl SpheringScale {
    pub fn new(sigma: f64) -> Result<Self, SpheringError> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(Self { sigma })
        } else {
            Err(SpheringError::InvalidSigma(sigma))
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Multiplier from centered readings to normalized offsets, `0.4 / 3σ`.
    pub fn forward_gain(&self) -> f64 {
        HALF_WIDTH / (CLAMP_SIGMAS * self.sigma)
    }

    /// Multiplier back to physical units, `3σ / 0.4`.
    pub fn inverse_gain(&self) -> f64 {
        CLAMP_SIGMAS * self.sigma / HALF_WIDTH
    }

    pub fn clamp_radius(&self) -> f64 {
        CLAMP_SIGMAS * self.sigma
    }
}

/// Population standard deviation of `x - mean(x)` pooled over all vectors.
pub fn fit_sigma<V: AsRef<[f64]>>(training: &[V]) -> Result<SpheringScale, SpheringError> {
    let mut n = 0usize;
    let mut sum_sq = 0.0;
    for x in training {
        let x = x.as_ref();
        if x.len() < 2 {
            return Err(SpheringError::TooShort(x.len()));
        }
        let m = mean(x);
        sum_sq += x.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
        n += x.len();
    }
    if n == 0 {
        return Err(SpheringError::Empty);
    }
    // Centered entries have zero mean by construction.
    let sigma = (sum_sq / n as f64).sqrt();
    if sigma == 0.0 {
        return Err(SpheringError::ZeroVariance);
    }
    SpheringScale::new(sigma)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Returns the normalized vector and the mean `m` needed to invert it.
pub fn normalize(x: &[f64], scale: SpheringScale) -> (Vec<f64>, f64) {
    let m = mean(x);
    (normalize_with_mean(x, m, scale), m)
}

pub fn normalize_with_mean(x: &[f64], m: f64, scale: SpheringScale) -> Vec<f64> {
    let r = scale.clamp_radius();
    let g = scale.forward_gain();
    x.iter()
        .map(|&v| CENTER + g * (v - m).clamp(-r, r))
        .collect()
}

pub fn denormalize(d_hat: &[f64], m: f64, scale: SpheringScale) -> Vec<f64> {
    let g = scale.inverse_gain();
    d_hat.iter().map(|&d| g * (d - CENTER) + m).collect()
}
