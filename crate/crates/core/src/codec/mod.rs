//! Online compression and decompression of data vectors with an optional
//! hard per-entry error bound.
//!
//! A frame carries the code vector `y`, the vector mean `m` and a residual
//! code that patches every entry whose reconstruction would miss the bound.
//! Both directions use only additions, multiplications, comparisons and the
//! sigmoid once the per-model constants are fixed.

mod residual;
mod wire;

use thiserror::Error;

pub use residual::{residual_code, residual_expand, ResidualCode};
pub use wire::{deserialize, deserialize_prefix, serialize, serialized_len, FRAME_MAGIC};

use crate::autoencoder::{sigmoid, AutoencoderParams};
use crate::sphering::CENTER;

#[derive(Debug, Error, PartialEq)]
pub enum CodecError {
    #[error("vector length {found} does not match model input size {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("input entry {index} is not finite")]
    NonFiniteInput { index: usize },
    #[error("residual code has {ones} set indicator bits but {values} values")]
    CorruptResiduals { ones: usize, values: usize },
    #[error("bad frame magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("frame truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("indicator has {ones} set bits but buffer holds {available} residual bytes")]
    PopcountMismatch { ones: usize, available: usize },
    #[error("indicator padding bits are not zero")]
    IndicatorPadding,
    #[error("frame header is L={l}, K={k}; expected L={expected_l}, K={expected_k}")]
    HeaderMismatch {
        l: usize,
        k: usize,
        expected_l: usize,
        expected_k: usize,
    },
}

/// Largest tolerated absolute reconstruction error, in the readings' units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorBound {
    Bounded(f64),
    /// Residual stage disabled.
    Unbounded,
}

impl ErrorBound {
    pub fn bounded(epsilon: f64) -> Option<Self> {
        (epsilon.is_finite() && epsilon >= 0.0).then_some(Self::Bounded(epsilon))
    }

    /// `inf` maps to [`ErrorBound::Unbounded`].
    pub fn from_f64(epsilon: f64) -> Option<Self> {
        if epsilon == f64::INFINITY {
            Some(Self::Unbounded)
        } else {
            Self::bounded(epsilon)
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            Self::Bounded(e) => *e,
            Self::Unbounded => f64::INFINITY,
        }
    }
}

/// The transmitted triple `(y, residual code, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedFrame {
    pub y: Vec<f32>,
    pub residuals: ResidualCode,
    pub mean: f32,
}

impl CompressedFrame {
    pub fn len(&self) -> usize {
        self.residuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residuals.is_empty()
    }

    pub fn hidden(&self) -> usize {
        self.y.len()
    }
}

/// Arithmetic operations executed by one call, for complexity checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounts {
    pub add: u64,
    pub sub: u64,
    pub mul: u64,
    pub cmp: u64,
    pub sigmoid: u64,
}

/// Decoder half shared by both directions so the transmitter reproduces the
/// receiver's prediction bit for bit.
fn predict(params: &AutoencoderParams, y: &[f32], mean: f32, ops: &mut OpCounts) -> Vec<f64> {
    let net = &params.network;
    let gain = params.scale.inverse_gain();
    let m = mean as f64;
    (0..net.inputs())
        .map(|l| {
            let mut acc = net.b_dec[l];
            for (k, &yk) in y.iter().enumerate() {
                acc += net.w_dec[(l, k)] * yk as f64;
            }
            ops.mul += y.len() as u64;
            ops.add += y.len() as u64;
            let d_hat = sigmoid(acc);
            ops.sigmoid += 1;
            ops.sub += 1;
            ops.mul += 1;
            ops.add += 1;
            gain * (d_hat - CENTER) + m
        })
        .collect()
}

/// Runs the transmitter side on one vector of readings.
pub fn compress(x: &[f32], params: &AutoencoderParams, bound: ErrorBound) -> Result<CompressedFrame, CodecError> {
    compress_counted(x, params, bound).map(|(f, _)| f)
}

/// [`compress`] that also reports how many operations it executed.
pub fn compress_counted(
    x: &[f32],
    params: &AutoencoderParams,
    bound: ErrorBound,
) -> Result<(CompressedFrame, OpCounts), CodecError> {
    let net = &params.network;
    let l = net.inputs();
    if x.len() != l {
        return Err(CodecError::Dimension {
            expected: l,
            found: x.len(),
        });
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(CodecError::NonFiniteInput { index });
    }
    let mut ops = OpCounts::default();
    let inv_len = 1.0 / l as f64;

    // m <- mean(x)
    let mut sum = 0.0;
    for &v in x {
        sum += v as f64;
    }
    ops.add += l as u64;
    ops.mul += 1;
    let mean = (sum * inv_len) as f32;
    let m = mean as f64;

    // d <- normalize(x, σ)
    let gain = params.scale.forward_gain();
    let radius = params.scale.clamp_radius();
    let d: Vec<f64> = x
        .iter()
        .map(|&v| CENTER + gain * (v as f64 - m).clamp(-radius, radius))
        .collect();
    ops.sub += l as u64;
    ops.cmp += 2 * l as u64;
    ops.mul += l as u64;
    ops.add += l as u64;

    // y <- F(W_enc d + b_enc)
    let y: Vec<f32> = (0..net.hidden())
        .map(|k| {
            let mut acc = net.b_enc[k];
            for (c, &dc) in d.iter().enumerate() {
                acc += net.w_enc[(k, c)] * dc;
            }
            sigmoid(acc) as f32
        })
        .collect();
    ops.mul += (l * net.hidden()) as u64;
    ops.add += (l * net.hidden()) as u64;
    ops.sigmoid += net.hidden() as u64;

    let residuals = match bound {
        ErrorBound::Unbounded => ResidualCode::empty(l),
        ErrorBound::Bounded(eps) => {
            // p <- denormalize(F(W_dec y + b_dec), m, σ)
            let p = predict(params, &y, mean, &mut ops);
            let mut code = ResidualCode::builder(l);
            for j in 0..l {
                let base = p[j] as f32;
                let miss = x[j] as f64 - base as f64;
                ops.sub += 1;
                ops.cmp += 1;
                if miss.abs() > eps {
                    code.push(j, patch(x[j], p[j]));
                }
            }
            code.finish()
        }
    };
    Ok((CompressedFrame { y, residuals, mean }, ops))
}

/// The f32 residual that makes `(p + r) as f32` land closest to `target`.
/// Starts from the rounded difference and walks adjacent f32 values while that
/// strictly helps.
fn patch(target: f32, p: f64) -> f32 {
    let out = |r: f32| (p + r as f64) as f32;
    let err = |r: f32| (out(r) as f64 - target as f64).abs();
    let mut r = (target as f64 - p) as f32;
    let mut best = err(r);
    for _ in 0..64 {
        if best == 0.0 {
            break;
        }
        let step = if (out(r) as f64) < target as f64 { r.next_up() } else { r.next_down() };
        let e = err(step);
        if e < best || (e == best && out(step) != out(r)) {
            r = step;
            best = e;
        } else {
            break;
        }
    }
    r
}

/// Runs the receiver side: decode, denormalize, add the expanded residuals.
pub fn decompress(frame: &CompressedFrame, params: &AutoencoderParams) -> Result<Vec<f32>, CodecError> {
    let l = params.inputs();
    if frame.y.len() != params.hidden() {
        return Err(CodecError::Dimension {
            expected: params.hidden(),
            found: frame.y.len(),
        });
    }
    if frame.residuals.len() != l {
        return Err(CodecError::Dimension {
            expected: l,
            found: frame.residuals.len(),
        });
    }
    let p = predict(params, &frame.y, frame.mean, &mut OpCounts::default());
    let r = residual_expand(&frame.residuals, l)?;
    Ok(p.iter()
        .zip(&r)
        .zip(frame.residuals.indicator_iter())
        .map(|((&pj, &rj), set)| if set { (pj + rj) as f32 } else { pj as f32 })
        .collect())
}

/// Bits on the wire for a frame, counted from the serialized layout.
pub fn frame_bits(frame: &CompressedFrame) -> u64 {
    8 * serialized_len(frame) as u64
}
