//! The three training costs and their analytic gradients.

use nalgebra::{DMatrix, DVector};

use super::network::{sigmoid, Network};
use super::{AutoencoderError, Hyperparams};

/// Bounds applied to the mean hidden activation before taking logarithms.
pub const RHO_HAT_MIN: f64 = 1e-8;
pub const RHO_HAT_MAX: f64 = 1.0 - 1e-8;

/// `KL(ρ ‖ ρ̂)` between Bernoulli distributions, natural log.
pub fn kl_divergence(rho: f64, rho_hat: f64) -> f64 {
    let r = rho_hat.clamp(RHO_HAT_MIN, RHO_HAT_MAX);
    rho * (rho / r).ln() + (1.0 - rho) * ((1.0 - rho) / (1.0 - r)).ln()
}

fn kl_derivative(rho: f64, rho_hat: f64) -> f64 {
    let r = rho_hat.clamp(RHO_HAT_MIN, RHO_HAT_MAX);
    -rho / r + (1.0 - rho) / (1.0 - r)
}

/// Cost split into its terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    /// `(1/|D|) Σ ½‖d − d̂‖²`
    pub reconstruction: f64,
    /// `(α/2)(‖W_enc‖² + ‖W_dec‖²)`
    pub weight_decay: f64,
    /// `β Σ_k KL(ρ ‖ ρ̂_k)`
    pub sparsity: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.reconstruction + self.weight_decay + self.sparsity
    }
}

/// A batch of normalized vectors laid out as rows, plus the effective
/// regularization weights.
#[derive(Debug, Clone)]
pub struct Objective {
    data: DMatrix<f64>,
    alpha: f64,
    beta: f64,
    rho: f64,
}

struct Forward {
    hidden: DMatrix<f64>,
    output: DMatrix<f64>,
}

impl Objective {
    pub fn new<V: AsRef<[f64]>>(batch: &[V], hp: &Hyperparams) -> Result<Self, AutoencoderError> {
        let first = batch.first().ok_or(AutoencoderError::EmptyBatch)?;
        let l = first.as_ref().len();
        let mut flat = Vec::with_capacity(batch.len() * l);
        for v in batch {
            let v = v.as_ref();
            if v.len() != l {
                return Err(AutoencoderError::Dimension {
                    expected: l,
                    found: v.len(),
                });
            }
            flat.extend_from_slice(v);
        }
        let hp = hp.effective();
        Ok(Self {
            data: DMatrix::from_row_slice(batch.len(), l, &flat),
            alpha: hp.alpha,
            beta: hp.beta,
            rho: hp.rho,
        })
    }

    pub fn batch_len(&self) -> usize {
        self.data.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.data.ncols()
    }

    fn check(&self, net: &Network) -> Result<(), AutoencoderError> {
        if net.inputs() != self.inputs() {
            return Err(AutoencoderError::Dimension {
                expected: net.inputs(),
                found: self.inputs(),
            });
        }
        Ok(())
    }

    fn forward(&self, net: &Network) -> Forward {
        let mut hidden = &self.data * net.w_enc.transpose();
        add_row_bias(&mut hidden, &net.b_enc);
        hidden.apply(|v| *v = sigmoid(*v));
        let mut output = &hidden * net.w_dec.transpose();
        add_row_bias(&mut output, &net.b_dec);
        output.apply(|v| *v = sigmoid(*v));
        Forward { hidden, output }
    }

    fn breakdown(&self, net: &Network, fwd: &Forward) -> CostBreakdown {
        let n = self.batch_len() as f64;
        let reconstruction = 0.5 * (&fwd.output - &self.data).norm_squared() / n;
        let weight_decay = if self.alpha > 0.0 {
            0.5 * self.alpha * (sum_squares(&net.w_enc) + sum_squares(&net.w_dec))
        } else {
            0.0
        };
        let sparsity = if self.beta > 0.0 {
            self.beta
                * mean_activation(&fwd.hidden)
                    .iter()
                    .map(|&r| kl_divergence(self.rho, r))
                    .sum::<f64>()
        } else {
            0.0
        };
        CostBreakdown {
            reconstruction,
            weight_decay,
            sparsity,
        }
    }

    pub fn cost_breakdown(&self, net: &Network) -> Result<CostBreakdown, AutoencoderError> {
        self.check(net)?;
        Ok(self.breakdown(net, &self.forward(net)))
    }

    pub fn cost(&self, net: &Network) -> Result<f64, AutoencoderError> {
        Ok(self.cost_breakdown(net)?.total())
    }

    /// Root mean squared reconstruction error over every entry of the batch.
    pub fn rmse(&self, net: &Network) -> Result<f64, AutoencoderError> {
        self.check(net)?;
        let fwd = self.forward(net);
        let n = (self.data.nrows() * self.data.ncols()) as f64;
        Ok(((&fwd.output - &self.data).norm_squared() / n).sqrt())
    }

    /// Cost and its gradient with respect to every entry of `θ`, by
    /// backpropagation.
    pub fn cost_and_gradient(&self, net: &Network) -> Result<(f64, Network), AutoencoderError> {
        self.check(net)?;
        let fwd = self.forward(net);
        let cost = self.breakdown(net, &fwd).total();
        let n = self.batch_len() as f64;

        // Output layer: ∂/∂z2 = (d̂ − d) ⊙ d̂(1 − d̂) / n
        let mut delta_out = &fwd.output - &self.data;
        delta_out.zip_apply(&fwd.output, |g, o| *g *= o * (1.0 - o) / n);

        let mut w_dec = delta_out.transpose() * &fwd.hidden;
        let b_dec = column_sums(&delta_out);

        // Hidden layer: backpropagated error plus the sparsity pull on ρ̂_k.
        let mut delta_hid = &delta_out * &net.w_dec;
        if self.beta > 0.0 {
            let pull: Vec<f64> = mean_activation(&fwd.hidden)
                .iter()
                .map(|&r| self.beta * kl_derivative(self.rho, r) / n)
                .collect();
            for mut row in delta_hid.row_iter_mut() {
                for (k, v) in row.iter_mut().enumerate() {
                    *v += pull[k];
                }
            }
        }
        delta_hid.zip_apply(&fwd.hidden, |g, h| *g *= h * (1.0 - h));

        let mut w_enc = delta_hid.transpose() * &self.data;
        let b_enc = column_sums(&delta_hid);

        if self.alpha > 0.0 {
            w_enc += &net.w_enc * self.alpha;
            w_dec += &net.w_dec * self.alpha;
        }
        Ok((
            cost,
            Network {
                w_enc,
                b_enc,
                w_dec,
                b_dec,
            },
        ))
    }
}

fn add_row_bias(m: &mut DMatrix<f64>, b: &DVector<f64>) {
    for mut row in m.row_iter_mut() {
        for (v, bias) in row.iter_mut().zip(b.iter()) {
            *v += bias;
        }
    }
}

fn column_sums(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum()))
}

fn mean_activation(hidden: &DMatrix<f64>) -> Vec<f64> {
    let n = hidden.nrows() as f64;
    hidden.column_iter().map(|c| c.sum() / n).collect()
}

/// Entrywise sum of squares.
pub fn sum_squares(w: &DMatrix<f64>) -> f64 {
    w.iter().map(|v| v * v).sum()
}
