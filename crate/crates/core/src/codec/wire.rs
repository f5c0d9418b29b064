//! Frame layout, little-endian:
//!
//! ```text
//! "CFR1" | u32 L | u32 K | f32 m | K x f32 y | ceil(L/8) indicator bytes | popcount x f32 residuals
//! ```

use super::{CodecError, CompressedFrame, ResidualCode};

pub const FRAME_MAGIC: [u8; 4] = *b"CFR1";
const HEADER: usize = 16;

pub fn serialized_len(frame: &CompressedFrame) -> usize {
    HEADER + 4 * frame.y.len() + frame.residuals.indicator_bytes().len() + 4 * frame.residuals.values().len()
}

pub fn serialize(frame: &CompressedFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(serialized_len(frame));
    out.extend_from_slice(&FRAME_MAGIC);
    out.extend_from_slice(&(frame.residuals.len() as u32).to_le_bytes());
    out.extend_from_slice(&(frame.y.len() as u32).to_le_bytes());
    out.extend_from_slice(&frame.mean.to_le_bytes());
    for y in &frame.y {
        out.extend_from_slice(&y.to_le_bytes());
    }
    out.extend_from_slice(frame.residuals.indicator_bytes());
    for r in frame.residuals.values() {
        out.extend_from_slice(&r.to_le_bytes());
    }
    out
}

/// Parses exactly one frame occupying all of `bytes`.
pub fn deserialize(bytes: &[u8], l: usize, k: usize) -> Result<CompressedFrame, CodecError> {
    let (frame, used) = deserialize_prefix(bytes, l, k)?;
    if used != bytes.len() {
        return Err(CodecError::PopcountMismatch {
            ones: frame.residuals.ones(),
            available: bytes.len() - (used - 4 * frame.residuals.ones()),
        });
    }
    Ok(frame)
}

/// Parses one frame from the front of `bytes`, returning it and the number of
/// bytes consumed. Used for streams of concatenated frames.
pub fn deserialize_prefix(bytes: &[u8], l: usize, k: usize) -> Result<(CompressedFrame, usize), CodecError> {
    let need = |n: usize| {
        if bytes.len() < n {
            Err(CodecError::Truncated {
                needed: n,
                available: bytes.len(),
            })
        } else {
            Ok(())
        }
    };
    need(4)?;
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != FRAME_MAGIC {
        return Err(CodecError::BadMagic(magic));
    }
    need(HEADER)?;
    let word = |at: usize| -> [u8; 4] { bytes[at..at + 4].try_into().unwrap() };
    let fl = u32::from_le_bytes(word(4)) as usize;
    let fk = u32::from_le_bytes(word(8)) as usize;
    if fl != l || fk != k {
        return Err(CodecError::HeaderMismatch {
            l: fl,
            k: fk,
            expected_l: l,
            expected_k: k,
        });
    }
    let mean = f32::from_le_bytes(word(12));
    let mask_len = l.div_ceil(8);
    let fixed = HEADER + 4 * k + mask_len;
    need(fixed)?;
    let y = (0..k).map(|i| f32::from_le_bytes(word(HEADER + 4 * i))).collect();
    let indicator = bytes[HEADER + 4 * k..fixed].to_vec();
    if !l.is_multiple_of(8) && indicator[mask_len - 1] >> (l % 8) != 0 {
        return Err(CodecError::IndicatorPadding);
    }
    let ones: usize = indicator.iter().map(|b| b.count_ones() as usize).sum();
    let end = fixed + 4 * ones;
    if bytes.len() < end {
        return Err(CodecError::PopcountMismatch {
            ones,
            available: bytes.len() - fixed,
        });
    }
    let values = (0..ones).map(|i| f32::from_le_bytes(word(fixed + 4 * i))).collect();
    Ok((
        CompressedFrame {
            y,
            residuals: ResidualCode::from_parts(l, indicator, values),
            mean,
        },
        end,
    ))
}
