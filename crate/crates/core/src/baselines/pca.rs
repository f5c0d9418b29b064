use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::BaselineError;

/// Relative eigenvalue threshold below which a direction counts as null.
const RANK_TOL: f64 = 1e-10;

/// Training mean plus the top-K principal directions as orthonormal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaBasis {
    pub mean: DVector<f64>,
    pub components: DMatrix<f64>,
    /// Eigenvalues of the kept directions, descending.
    pub variances: Vec<f64>,
}

pub fn pca_fit<V: AsRef<[f64]>>(training: &[V], k: usize) -> Result<PcaBasis, BaselineError> {
    let l = training.first().map_or(0, |v| v.as_ref().len());
    if k == 0 || k > l {
        return Err(BaselineError::InvalidK { k, l });
    }
    if training.len() < k + 1 {
        return Err(BaselineError::TooFewVectors {
            needed: k + 1,
            got: training.len(),
        });
    }
    if let Some(v) = training.iter().find(|v| v.as_ref().len() != l) {
        return Err(BaselineError::Dimension {
            expected: l,
            found: v.as_ref().len(),
        });
    }
    let n = training.len();
    let data = DMatrix::from_fn(l, n, |r, c| training[c].as_ref()[r]);
    let mean = data.column_mean();
    let centered = DMatrix::from_fn(l, n, |r, c| data[(r, c)] - mean[r]);
    let cov = (&centered * centered.transpose()) / (n - 1) as f64;

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let rank = order
        .iter()
        .filter(|&&i| eig.eigenvalues[i] > RANK_TOL * top.max(f64::MIN_POSITIVE))
        .count();
    if rank < k {
        return Err(BaselineError::RankDeficient { rank, k });
    }
    let components = DMatrix::from_fn(k, l, |r, c| eig.eigenvectors[(c, order[r])]);
    let variances = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    Ok(PcaBasis {
        mean,
        components,
        variances,
    })
}

impl PcaBasis {
    pub fn inputs(&self) -> usize {
        self.components.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.components.nrows()
    }

    /// Scores of the centered vector on each component.
    pub fn compress(&self, x: &[f64]) -> Result<Vec<f64>, BaselineError> {
        if x.len() != self.inputs() {
            return Err(BaselineError::Dimension {
                expected: self.inputs(),
                found: x.len(),
            });
        }
        let centered = DVector::from_iterator(x.len(), x.iter().zip(self.mean.iter()).map(|(a, m)| a - m));
        Ok((&self.components * centered).iter().copied().collect())
    }

    pub fn decompress(&self, scores: &[f64]) -> Result<Vec<f64>, BaselineError> {
        if scores.len() != self.hidden() {
            return Err(BaselineError::Dimension {
                expected: self.hidden(),
                found: scores.len(),
            });
        }
        let s = DVector::from_column_slice(scores);
        Ok((self.components.tr_mul(&s) + &self.mean).iter().copied().collect())
    }

    /// Scores sent as f32.
    pub fn bits(&self) -> u64 {
        32 * self.hidden() as u64
    }
}
