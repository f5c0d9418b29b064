use super::CodecError;

/// Indicator bitmask over `0..len` (bit `j` of byte `j / 8`, LSB first) plus
/// the values at the set positions in increasing index order.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualCode {
    len: usize,
    indicator: Vec<u8>,
    values: Vec<f32>,
}

pub(crate) struct ResidualBuilder {
    code: ResidualCode,
    last: Option<usize>,
}

impl ResidualBuilder {
    pub(crate) fn push(&mut self, index: usize, value: f32) {
        debug_assert!(self.last.is_none_or(|l| l < index), "indices must increase");
        self.code.indicator[index / 8] |= 1 << (index % 8);
        self.code.values.push(value);
        self.last = Some(index);
    }

    pub(crate) fn finish(self) -> ResidualCode {
        self.code
    }
}

impl ResidualCode {
    pub fn empty(len: usize) -> Self {
        Self {
            len,
            indicator: vec![0; len.div_ceil(8)],
            values: Vec::new(),
        }
    }

    pub(crate) fn builder(len: usize) -> ResidualBuilder {
        ResidualBuilder {
            code: Self::empty(len),
            last: None,
        }
    }

    /// Builds a code from raw parts without checking that the popcount
    /// matches; [`residual_expand`] rejects inconsistent codes.
    pub fn from_parts(len: usize, indicator: Vec<u8>, values: Vec<f32>) -> Self {
        assert_eq!(indicator.len(), len.div_ceil(8), "indicator byte count");
        Self {
            len,
            indicator,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn indicator_bytes(&self) -> &[u8] {
        &self.indicator
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn contains(&self, j: usize) -> bool {
        j < self.len && self.indicator[j / 8] & (1 << (j % 8)) != 0
    }

    pub fn indicator_iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|j| self.contains(j))
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&j| self.contains(j))
    }

    /// Set indicator bits.
    pub fn ones(&self) -> usize {
        self.indicator.iter().map(|b| b.count_ones() as usize).sum()
    }
}

/// Keeps every residual with `|r_j| > epsilon`, stored as f32.
pub fn residual_code(r: &[f64], epsilon: f64) -> ResidualCode {
    let mut b = ResidualCode::builder(r.len());
    for (j, &v) in r.iter().enumerate() {
        if v.abs() > epsilon {
            b.push(j, v as f32);
        }
    }
    b.finish()
}

/// Zero vector with the stored values placed at the set indicator positions.
pub fn residual_expand(code: &ResidualCode, len: usize) -> Result<Vec<f64>, CodecError> {
    if code.len != len {
        return Err(CodecError::Dimension {
            expected: len,
            found: code.len,
        });
    }
    let ones = code.ones();
    if ones != code.values.len() {
        return Err(CodecError::CorruptResiduals {
            ones,
            values: code.values.len(),
        });
    }
    let mut out = vec![0.0; len];
    for (j, &v) in code.indices().zip(&code.values) {
        out[j] = v as f64;
    }
    Ok(out)
}
