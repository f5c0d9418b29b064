use std::f64::consts::PI;

use super::BaselineError;
use crate::codec::ResidualCode;

/// Kept coefficients (f32) with an index bitmask over `0..L`. Shares the
/// residual code's layout and contract.
pub type TransformCode = ResidualCode;

/// Orthonormal type-II DCT of a fixed length with a cached cosine table.
#[derive(Debug, Clone)]
pub struct DctPlan {
    n: usize,
    /// `basis[k * n + t]` = scale(k) * cos(pi (2t + 1) k / 2n)
    basis: Vec<f64>,
}

impl DctPlan {
    pub fn new(n: usize) -> Self {
        let nf = n as f64;
        let mut basis = Vec::with_capacity(n * n);
        for k in 0..n {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            basis.extend((0..n).map(|t| scale * (PI * (2 * t + 1) as f64 * k as f64 / (2.0 * nf)).cos()));
        }
        Self { n, basis }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        self.basis
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(b, v)| b * v).sum())
            .collect()
    }

    pub fn inverse(&self, c: &[f64]) -> Vec<f64> {
        assert_eq!(c.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (row, &ck) in self.basis.chunks_exact(self.n).zip(c) {
            if ck != 0.0 {
                for (o, b) in out.iter_mut().zip(row) {
                    *o += ck * b;
                }
            }
        }
        out
    }
}

fn check(plan: &DctPlan, x: &[f64], k: usize) -> Result<(), BaselineError> {
    if x.len() != plan.len() {
        return Err(BaselineError::Dimension {
            expected: plan.len(),
            found: x.len(),
        });
    }
    if k == 0 || k > x.len() {
        return Err(BaselineError::InvalidK { k, l: x.len() });
    }
    Ok(())
}

fn encode(coef: &[f64], mut keep: Vec<usize>) -> TransformCode {
    keep.sort_unstable();
    let mut b = ResidualCode::builder(coef.len());
    for j in keep {
        b.push(j, coef[j] as f32);
    }
    b.finish()
}

/// Keeps the K largest-magnitude coefficients; ties go to the lower index.
pub fn dct_compress(plan: &DctPlan, x: &[f64], k: usize) -> Result<TransformCode, BaselineError> {
    check(plan, x, k)?;
    let coef = plan.forward(x);
    let mut order: Vec<usize> = (0..coef.len()).collect();
    order.sort_by(|&a, &b| coef[b].abs().total_cmp(&coef[a].abs()).then(a.cmp(&b)));
    order.truncate(k);
    Ok(encode(&coef, order))
}

/// Keeps the K lowest-frequency coefficients.
pub fn dct_compress_first_k(plan: &DctPlan, x: &[f64], k: usize) -> Result<TransformCode, BaselineError> {
    check(plan, x, k)?;
    let coef = plan.forward(x);
    Ok(encode(&coef, (0..k).collect()))
}

pub fn dct_decompress(plan: &DctPlan, code: &TransformCode) -> Result<Vec<f64>, BaselineError> {
    let spectrum = crate::codec::residual_expand(code, plan.len()).map_err(|_| {
        if code.len() != plan.len() {
            BaselineError::Dimension {
                expected: plan.len(),
                found: code.len(),
            }
        } else {
            BaselineError::CorruptCode {
                ones: code.ones(),
                values: code.values().len(),
            }
        }
    })?;
    Ok(plan.inverse(&spectrum))
}

/// Kept values as f32 plus the L-bit index mask.
pub fn dct_bits(len: usize, k: usize) -> u64 {
    32 * k as u64 + len as u64
}
