//! Compression ratio, RMSE and R².

use std::fmt;

use thiserror::Error;

use crate::codec::{serialized_len, CompressedFrame};

/// Bits per raw reading.
pub const RAW_BITS_PER_VALUE: u64 = 32;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("reference vector is constant, R² is undefined")]
    ConstantReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccountingMode {
    /// Every serialized bit of the frame.
    FullFrame,
    /// Only the code vector, 32 bits per hidden unit.
    PayloadOnly,
}

impl fmt::Display for AccountingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::FullFrame => "full_frame",
            Self::PayloadOnly => "payload_only",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub bits_original: u64,
    pub bits_transmitted: u64,
    pub cr_percent: f64,
    pub mode: AccountingMode,
}

impl RateReport {
    pub fn new(bits_transmitted: u64, bits_original: u64, mode: AccountingMode) -> Self {
        Self {
            bits_original,
            bits_transmitted,
            cr_percent: 100.0 * bits_transmitted as f64 / bits_original as f64,
            mode,
        }
    }

    pub fn savings_percent(&self) -> f64 {
        100.0 - self.cr_percent
    }
}

/// Rate of one frame against `32 * L` raw bits.
pub fn compression_ratio(frame: &CompressedFrame, mode: AccountingMode) -> RateReport {
    let bits = match mode {
        AccountingMode::FullFrame => 8 * serialized_len(frame) as u64,
        AccountingMode::PayloadOnly => RAW_BITS_PER_VALUE * frame.hidden() as u64,
    };
    RateReport::new(bits, RAW_BITS_PER_VALUE * frame.len() as u64, mode)
}

fn check(x: &[f64], x_hat: &[f64]) -> Result<(), MetricsError> {
    if x.len() != x_hat.len() {
        return Err(MetricsError::LengthMismatch(x.len(), x_hat.len()));
    }
    if x.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

fn sse(x: &[f64], x_hat: &[f64]) -> f64 {
    x.iter().zip(x_hat).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn rmse(x: &[f64], x_hat: &[f64]) -> Result<f64, MetricsError> {
    check(x, x_hat)?;
    Ok((sse(x, x_hat) / x.len() as f64).sqrt())
}

/// `1 - SSE / SST`; negative when the reconstruction is worse than the mean.
pub fn r_squared(x: &[f64], x_hat: &[f64]) -> Result<f64, MetricsError> {
    check(x, x_hat)?;
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let sst: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    if sst == 0.0 {
        return Err(MetricsError::ConstantReference);
    }
    Ok(1.0 - sse(x, x_hat) / sst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub rmse: f64,
    /// `None` for a constant reference.
    pub r_squared: Option<f64>,
}

pub fn fidelity(x: &[f64], x_hat: &[f64]) -> Result<FidelityReport, MetricsError> {
    let rmse = rmse(x, x_hat)?;
    let r_squared = match r_squared(x, x_hat) {
        Ok(v) => Some(v),
        Err(MetricsError::ConstantReference) => None,
        Err(e) => return Err(e),
    };
    Ok(FidelityReport { rmse, r_squared })
}
