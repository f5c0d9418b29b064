//! Three-layer sigmoid autoencoder: forward pass, regularized costs,
//! backpropagated gradients, quasi-Newton training and grid-search model
//! selection.

mod grid;
mod io;
pub mod lbfgs;
mod network;
mod objective;

use thiserror::Error;

use crate::sphering::{fit_sigma, normalize, SpheringScale};

pub use grid::{grid_search, Grid, GridPoint, GridSearchResult};
pub use io::{read_params, write_params, ParamsFileError, PARAMS_MAGIC};
pub use network::{sigmoid, AutoencoderParams, Network};
pub use objective::{kl_divergence, sum_squares, CostBreakdown, Objective};

use lbfgs::{LbfgsConfig, NonFinite, StopReason};

#[derive(Debug, Error)]
pub enum AutoencoderError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("hidden size {hidden} must be in 1..{inputs} for compression")]
    InvalidHidden { hidden: usize, inputs: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparams(String),
    #[error("non-finite cost or gradient at iteration {0}")]
    NonFinite(usize),
    #[error("grid has an empty axis: {0}")]
    EmptyGrid(&'static str),
    #[error(transparent)]
    Folds(#[from] crate::dataset::DatasetError),
    #[error(transparent)]
    Sphering(#[from] crate::sphering::SpheringError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Reconstruction error only.
    Ae,
    /// Plus weight decay.
    Wae,
    /// Plus weight decay and KL sparsity.
    Sae,
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ae" => Ok(Self::Ae),
            "wae" => Ok(Self::Wae),
            "sae" => Ok(Self::Sae),
            _ => Err(format!("unknown variant {s:?}, expected ae|wae|sae")),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Ae => "ae",
            Self::Wae => "wae",
            Self::Sae => "sae",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub variant: Variant,
    /// Weight decay coefficient.
    pub alpha: f64,
    /// Sparsity coefficient.
    pub beta: f64,
    /// Target mean activation of each hidden unit.
    pub rho: f64,
    pub hidden: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            variant: Variant::Ae,
            alpha: 0.0,
            beta: 0.0,
            rho: 0.05,
            hidden: 10,
            max_iters: 400,
            seed: 0,
        }
    }
}

impl Hyperparams {
    /// Zeroes the coefficients the variant does not use.
    pub fn effective(&self) -> Self {
        let mut hp = *self;
        match hp.variant {
            Variant::Ae => {
                hp.alpha = 0.0;
                hp.beta = 0.0;
            }
            Variant::Wae => hp.beta = 0.0,
            Variant::Sae => {}
        }
        hp
    }

    fn validate(&self) -> Result<(), AutoencoderError> {
        let bad = |m: String| Err(AutoencoderError::InvalidHyperparams(m));
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha {} must be >= 0", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad(format!("beta {} must be >= 0", self.beta));
        }
        if self.variant == Variant::Sae && !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho {} must lie in (0, 1)", self.rho));
        }
        Ok(())
    }
}

/// Per-iteration learning curve. Entry `i` describes the parameters after
/// iteration `i + 1`. `test_rmse` is empty when no validation set was given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    pub cost: Vec<f64>,
    pub train_rmse: Vec<f64>,
    pub test_rmse: Vec<f64>,
    pub initial_cost: f64,
    pub initial_train_rmse: f64,
    pub stop: Option<StopReason>,
}

impl TrainingTrace {
    pub fn iterations(&self) -> usize {
        self.cost.len()
    }

    pub fn final_cost(&self) -> f64 {
        self.cost.last().copied().unwrap_or(self.initial_cost)
    }
}

/// Fits a network to normalized vectors by L-BFGS on the variant's cost.
/// Single-threaded and fully determined by the data and `hp`.
pub fn train<V: AsRef<[f64]>>(
    training: &[V],
    validation: &[V],
    hp: &Hyperparams,
) -> Result<(Network, TrainingTrace), AutoencoderError> {
    hp.validate()?;
    let objective = Objective::new(training, hp)?;
    let inputs = objective.inputs();
    if hp.hidden == 0 || hp.hidden >= inputs {
        return Err(AutoencoderError::InvalidHidden {
            hidden: hp.hidden,
            inputs,
        });
    }
    let held_out = if validation.is_empty() {
        None
    } else {
        Some(Objective::new(validation, hp)?)
    };

    let start = Network::glorot(inputs, hp.hidden, hp.seed);
    let mut trace = TrainingTrace {
        initial_cost: objective.cost(&start)?,
        initial_train_rmse: objective.rmse(&start)?,
        ..Default::default()
    };
    let cfg = LbfgsConfig {
        max_iters: hp.max_iters,
        ..Default::default()
    };
    let hidden = hp.hidden;
    let eval = |x: &[f64]| {
        let net = Network::from_flat(inputs, hidden, x);
        match objective.cost_and_gradient(&net) {
            Ok((c, g)) => (c, g.to_flat()),
            Err(_) => (f64::NAN, vec![f64::NAN; x.len()]),
        }
    };
    let record = |_: usize, x: &[f64], cost: f64| {
        let net = Network::from_flat(inputs, hidden, x);
        trace.cost.push(cost);
        trace.train_rmse.push(objective.rmse(&net).unwrap_or(f64::NAN));
        if let Some(v) = &held_out {
            trace.test_rmse.push(v.rmse(&net).unwrap_or(f64::NAN));
        }
    };
    let result = lbfgs::minimize(start.to_flat(), eval, &cfg, record)
        .map_err(|NonFinite { iteration }| AutoencoderError::NonFinite(iteration))?;
    trace.stop = Some(result.stop);
    Ok((Network::from_flat(inputs, hidden, &result.x), trace))
}

/// Normalizes raw readings with a scale fitted on `training`, then trains.
pub fn fit<V: AsRef<[f64]>>(
    training: &[V],
    validation: &[V],
    hp: &Hyperparams,
) -> Result<(AutoencoderParams, TrainingTrace), AutoencoderError> {
    let scale = fit_sigma(training)?;
    let tr = normalize_all(training, scale);
    let va = normalize_all(validation, scale);
    let (network, trace) = train(&tr, &va, hp)?;
    Ok((AutoencoderParams::new(network, scale), trace))
}

/// Each vector normalized around its own mean.
pub fn normalize_all<V: AsRef<[f64]>>(vectors: &[V], scale: SpheringScale) -> Vec<Vec<f64>> {
    vectors.iter().map(|v| normalize(v.as_ref(), scale).0).collect()
}
