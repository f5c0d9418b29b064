use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AutoencoderError;
use crate::sphering::SpheringScale;

/// Logistic function, evaluated on the branch that cannot overflow.
#[inline]
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// The learned weights `θ = (W_enc, b_enc, W_dec, b_dec)` of a three-layer
/// autoencoder with `inputs` visible and `hidden` code units.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    /// `hidden x inputs`
    pub w_enc: DMatrix<f64>,
    pub b_enc: DVector<f64>,
    /// `inputs x hidden`
    pub w_dec: DMatrix<f64>,
    pub b_dec: DVector<f64>,
}

impl Network {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Self {
            w_enc: DMatrix::zeros(hidden, inputs),
            b_enc: DVector::zeros(hidden),
            w_dec: DMatrix::zeros(inputs, hidden),
            b_dec: DVector::zeros(inputs),
        }
    }

    /// Uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn glorot(inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let limit = (6.0 / (inputs + hidden) as f64).sqrt();
        let mut net = Self::zeros(inputs, hidden);
        for k in 0..hidden {
            for l in 0..inputs {
                net.w_enc[(k, l)] = rng.random_range(-limit..=limit);
            }
        }
        for l in 0..inputs {
            for k in 0..hidden {
                net.w_dec[(l, k)] = rng.random_range(-limit..=limit);
            }
        }
        net
    }

    pub fn inputs(&self) -> usize {
        self.w_enc.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.w_enc.nrows()
    }

    pub fn param_count(&self) -> usize {
        Self::count_for(self.inputs(), self.hidden())
    }

    pub fn count_for(inputs: usize, hidden: usize) -> usize {
        2 * inputs * hidden + inputs + hidden
    }

    /// Flattens to `[W_enc row-major, b_enc, W_dec row-major, b_dec]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let (l, k) = (self.inputs(), self.hidden());
        let mut out = Vec::with_capacity(self.param_count());
        for r in 0..k {
            out.extend((0..l).map(|c| self.w_enc[(r, c)]));
        }
        out.extend(self.b_enc.iter());
        for r in 0..l {
            out.extend((0..k).map(|c| self.w_dec[(r, c)]));
        }
        out.extend(self.b_dec.iter());
        out
    }

    pub fn from_flat(inputs: usize, hidden: usize, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), Self::count_for(inputs, hidden));
        let (l, k) = (inputs, hidden);
        let mut at = 0;
        let w_enc = DMatrix::from_row_slice(k, l, &flat[at..at + k * l]);
        at += k * l;
        let b_enc = DVector::from_column_slice(&flat[at..at + k]);
        at += k;
        let w_dec = DMatrix::from_row_slice(l, k, &flat[at..at + l * k]);
        at += l * k;
        let b_dec = DVector::from_column_slice(&flat[at..at + l]);
        Self {
            w_enc,
            b_enc,
            w_dec,
            b_dec,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.w_enc.iter().chain(self.b_enc.iter()).chain(self.w_dec.iter()).chain(self.b_dec.iter()).all(|v| v.is_finite())
    }

    /// `y = F(W_enc d + b_enc)`
    pub fn encode(&self, d: &[f64]) -> Result<Vec<f64>, AutoencoderError> {
        if d.len() != self.inputs() {
            return Err(AutoencoderError::Dimension {
                expected: self.inputs(),
                found: d.len(),
            });
        }
        Ok(affine_sigmoid(&self.w_enc, &self.b_enc, d))
    }

    /// `d̂ = F(W_dec y + b_dec)`
    pub fn decode(&self, y: &[f64]) -> Result<Vec<f64>, AutoencoderError> {
        if y.len() != self.hidden() {
            return Err(AutoencoderError::Dimension {
                expected: self.hidden(),
                found: y.len(),
            });
        }
        Ok(affine_sigmoid(&self.w_dec, &self.b_dec, y))
    }

    pub fn reconstruct(&self, d: &[f64]) -> Result<Vec<f64>, AutoencoderError> {
        self.decode(&self.encode(d)?)
    }
}

fn affine_sigmoid(w: &DMatrix<f64>, b: &DVector<f64>, x: &[f64]) -> Vec<f64> {
    (0..w.nrows())
        .map(|r| {
            let mut acc = b[r];
            for (c, &xc) in x.iter().enumerate() {
                acc += w[(r, c)] * xc;
            }
            sigmoid(acc)
        })
        .collect()
}

/// A trained network together with the sphering scale it was trained under:
/// everything a transmitter or receiver needs.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderParams {
    pub network: Network,
    pub scale: SpheringScale,
}

impl AutoencoderParams {
    pub fn new(network: Network, scale: SpheringScale) -> Self {
        Self { network, scale }
    }

    /// Vector length `L`.
    pub fn inputs(&self) -> usize {
        self.network.inputs()
    }

    /// Code length `K`.
    pub fn hidden(&self) -> usize {
        self.network.hidden()
    }
}
