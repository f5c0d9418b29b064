use super::BaselineError;

/// One line piece of the approximation. Consecutive segments share an
/// endpoint: `next.start_* == prev.end_*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtcSegment {
    pub start_index: usize,
    pub end_index: usize,
    pub start_value: f64,
    pub end_value: f64,
}

impl LtcSegment {
    /// Interpolated value at `t`. Exact at both endpoints.
    pub fn at(&self, t: usize) -> f64 {
        let w = (t - self.start_index) as f64 / (self.end_index - self.start_index) as f64;
        self.start_value * (1.0 - w) + self.end_value * w
    }
}

fn fits(x: &[f64], eps: f64, seg: &LtcSegment) -> bool {
    (seg.start_index + 1..=seg.end_index).all(|t| (x[t] - seg.at(t)).abs() <= eps)
}

/// Greedy swing-filter compression. From the current origin it narrows the
/// interval of feasible slopes point by point; when the interval empties it
/// closes the segment at the last feasible point and restarts from there.
pub fn ltc_compress(x: &[f64], epsilon: f64) -> Result<Vec<LtcSegment>, BaselineError> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(BaselineError::InvalidEpsilon(epsilon));
    }
    if x.len() < 2 {
        return Err(BaselineError::TooShort(x.len()));
    }
    let n = x.len();
    let mut segments = Vec::new();
    let (mut t0, mut v0) = (0usize, x[0]);
    while t0 < n - 1 {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut cone = Vec::new();
        for t in t0 + 1..n {
            let dt = (t - t0) as f64;
            let nlo = lo.max((x[t] - epsilon - v0) / dt);
            let nhi = hi.min((x[t] + epsilon - v0) / dt);
            if nlo > nhi {
                break;
            }
            (lo, hi) = (nlo, nhi);
            cone.push((t, lo, hi));
        }
        // Rounding can push an interpolated point just past the bound; check
        // every candidate with the decoder's arithmetic and back off if needed.
        // A one-step segment ending on the reading itself always fits.
        let seg = cone
            .iter()
            .rev()
            .find_map(|&(te, lo, hi)| {
                let dt = (te - t0) as f64;
                [0.5 * (lo + hi), lo, hi]
                    .into_iter()
                    .map(|s| v0 + s * dt)
                    .chain([x[te]])
                    .map(|ve| LtcSegment {
                        start_index: t0,
                        end_index: te,
                        start_value: v0,
                        end_value: ve,
                    })
                    .find(|seg| fits(x, epsilon, seg))
            })
            .unwrap_or(LtcSegment {
                start_index: t0,
                end_index: t0 + 1,
                start_value: v0,
                end_value: x[t0 + 1],
            });
        segments.push(seg);
        (t0, v0) = (seg.end_index, seg.end_value);
    }
    Ok(segments)
}

pub fn ltc_decompress(segments: &[LtcSegment], len: usize) -> Result<Vec<f64>, BaselineError> {
    let first = segments.first().ok_or(BaselineError::EmptySegments)?;
    let last = segments.last().unwrap();
    if first.start_index != 0 || last.end_index + 1 != len {
        return Err(BaselineError::Coverage {
            covered: last.end_index + 1 - first.start_index,
            expected: len,
        });
    }
    let mut out = Vec::with_capacity(len);
    out.push(first.start_value);
    for s in segments {
        if s.end_index <= s.start_index || s.start_index + 1 != out.len() {
            return Err(BaselineError::Coverage {
                covered: out.len(),
                expected: len,
            });
        }
        out.extend((s.start_index + 1..=s.end_index).map(|t| s.at(t)));
    }
    Ok(out)
}

/// Transmitted size: the first value as f32, then per segment an f32 end value
/// and a u16 length.
pub fn ltc_bits(segments: &[LtcSegment]) -> u64 {
    32 + 48 * segments.len() as u64
}
