use super::BaselineError;

/// Frame means. When `frame` does not divide the length the last frame is
/// shorter and averages only the points it has.
pub fn paa_compress(x: &[f64], frame: usize) -> Result<Vec<f64>, BaselineError> {
    if frame == 0 || frame > x.len() {
        return Err(BaselineError::InvalidFrame { frame, len: x.len() });
    }
    Ok(x.chunks(frame).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect())
}

/// Expands each mean over its frame.
pub fn paa_decompress(means: &[f64], frame: usize, len: usize) -> Result<Vec<f64>, BaselineError> {
    if frame == 0 || means.len() != len.div_ceil(frame) {
        return Err(BaselineError::InvalidFrame { frame, len });
    }
    Ok((0..len).map(|t| means[t / frame]).collect())
}

pub fn paa_bits(len: usize, frame: usize) -> u64 {
    32 * len.div_ceil(frame) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_means() {
        assert_eq!(paa_compress(&[1.0, 3.0, 5.0, 7.0], 2).unwrap(), vec![2.0, 6.0]);
        assert_eq!(
            paa_decompress(&[2.0, 6.0], 2, 4).unwrap(),
            vec![2.0, 2.0, 6.0, 6.0]
        );
    }

    #[test]
    fn identity_and_global_mean() {
        let x = [4.0, -1.0, 2.5];
        assert_eq!(paa_compress(&x, 1).unwrap(), x.to_vec());
        assert_eq!(paa_compress(&x, 3).unwrap(), vec![5.5 / 3.0]);
    }

    #[test]
    fn short_last_frame() {
        let m = paa_compress(&[1.0, 2.0, 3.0, 4.0, 10.0], 2).unwrap();
        assert_eq!(m, vec![1.5, 3.5, 10.0]);
        assert_eq!(paa_decompress(&m, 2, 5).unwrap().len(), 5);
        assert_eq!(paa_bits(5, 2), 96);
    }

    #[test]
    fn invalid_frames() {
        assert!(paa_compress(&[1.0], 0).is_err());
        assert!(paa_compress(&[1.0], 2).is_err());
        assert!(paa_decompress(&[1.0, 2.0], 2, 5).is_err());
    }
}
