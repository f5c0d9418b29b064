//! Parameter file: little-endian `AEC1`, `u32 L`, `u32 K`, `f32 σ`, then
//! `W_enc` (row-major K×L), `b_enc` (K), `W_dec` (row-major L×K), `b_dec` (L),
//! all `f32`.

use std::io::{Read, Write};

use thiserror::Error;

use super::{AutoencoderParams, Network};
use crate::sphering::SpheringScale;

pub const PARAMS_MAGIC: [u8; 4] = *b"AEC1";

#[derive(Debug, Error)]
pub enum ParamsFileError {
    #[error("bad magic {0:?}, expected AEC1")]
    BadMagic([u8; 4]),
    #[error("parameter file truncated")]
    Truncated,
    #[error("parameter file has {0} trailing bytes")]
    TrailingBytes(usize),
    #[error("stored sphering scale {0} is not positive")]
    BadSigma(f32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write_params(params: &AutoencoderParams, mut w: impl Write) -> std::io::Result<()> {
    let net = &params.network;
    let mut buf = Vec::with_capacity(16 + 4 * net.param_count());
    buf.extend_from_slice(&PARAMS_MAGIC);
    buf.extend_from_slice(&(net.inputs() as u32).to_le_bytes());
    buf.extend_from_slice(&(net.hidden() as u32).to_le_bytes());
    buf.extend_from_slice(&(params.scale.sigma() as f32).to_le_bytes());
    for v in net.to_flat() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&buf)
}

pub fn read_params(mut r: impl Read) -> Result<AutoencoderParams, ParamsFileError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let take = |at: &mut usize, n: usize| -> Result<&[u8], ParamsFileError> {
        let s = bytes.get(*at..*at + n).ok_or(ParamsFileError::Truncated)?;
        *at += n;
        Ok(s)
    };
    let mut at = 0;
    let magic: [u8; 4] = take(&mut at, 4)?.try_into().unwrap();
    if magic != PARAMS_MAGIC {
        return Err(ParamsFileError::BadMagic(magic));
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap()) as usize;
    let l = u32_at(take(&mut at, 4)?);
    let k = u32_at(take(&mut at, 4)?);
    let sigma = f32::from_le_bytes(take(&mut at, 4)?.try_into().unwrap());
    let scale = SpheringScale::new(sigma as f64).map_err(|_| ParamsFileError::BadSigma(sigma))?;
    let count = Network::count_for(l, k);
    let body = take(&mut at, 4 * count)?;
    let flat: Vec<f64> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    if at != bytes.len() {
        return Err(ParamsFileError::TrailingBytes(bytes.len() - at));
    }
    Ok(AutoencoderParams::new(Network::from_flat(l, k, &flat), scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> AutoencoderParams {
        AutoencoderParams::new(Network::glorot(5, 2, 1), SpheringScale::new(1.25).unwrap())
    }

    #[test]
    fn layout_and_roundtrip() {
        let p = sample();
        let mut buf = Vec::new();
        write_params(&p, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 4 * (2 * 5 * 2 + 5 + 2));
        assert_eq!(&buf[..4], b"AEC1");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 2);
        assert_eq!(f32::from_le_bytes(buf[12..16].try_into().unwrap()), 1.25);
        assert_eq!(
            f32::from_le_bytes(buf[16..20].try_into().unwrap()),
            p.network.w_enc[(0, 0)] as f32
        );
        let back = read_params(&buf[..]).unwrap();
        assert_eq!(back.inputs(), 5);
        // f32 storage: a second write is byte-identical.
        let mut again = Vec::new();
        write_params(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn corrupt_files() {
        let mut buf = Vec::new();
        write_params(&sample(), &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_params(&bad[..]), Err(ParamsFileError::BadMagic(_))));
        assert!(matches!(
            read_params(&buf[..buf.len() - 1]),
            Err(ParamsFileError::Truncated)
        ));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(read_params(&long[..]), Err(ParamsFileError::TrailingBytes(1))));
        let mut zero_sigma = buf;
        zero_sigma[12..16].copy_from_slice(&0f32.to_le_bytes());
        assert!(matches!(read_params(&zero_sigma[..]), Err(ParamsFileError::BadSigma(_))));
    }
}
