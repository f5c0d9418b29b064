//! Reference codecs: LTC with an error bound, PAA, PCA and top-K DCT.
//! None of them carries the residual stage.

mod dct;
mod ltc;
mod paa;
mod pca;

use thiserror::Error;

pub use dct::{dct_bits, dct_compress, dct_compress_first_k, dct_decompress, DctPlan, TransformCode};
pub use ltc::{ltc_bits, ltc_compress, ltc_decompress, LtcSegment};
pub use paa::{paa_bits, paa_compress, paa_decompress};
pub use pca::{pca_fit, PcaBasis};

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("error bound must be finite and non-negative, got {0}")]
    InvalidEpsilon(f64),
    #[error("series of length {0} is too short, need at least 2")]
    TooShort(usize),
    #[error("no segments to decompress")]
    EmptySegments,
    #[error("segments cover {covered} points, expected {expected}")]
    Coverage { covered: usize, expected: usize },
    #[error("frame length {frame} is invalid for a series of length {len}")]
    InvalidFrame { frame: usize, len: usize },
    #[error("K={k} is invalid for L={l}")]
    InvalidK { k: usize, l: usize },
    #[error("need at least {needed} training vectors, got {got}")]
    TooFewVectors { needed: usize, got: usize },
    #[error("training covariance has rank {rank}, fewer than K={k}")]
    RankDeficient { rank: usize, k: usize },
    #[error("vector length {found} does not match {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("transform code has {ones} set bits but {values} values")]
    CorruptCode { ones: usize, values: usize },
}
