use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::DenseMatrix;

/// Stream slot reserved for the input batch, shared by every run.
const INPUT_RUN: u64 = u32::MAX as u64;

/// A reproducible random stream identified by `(seed, counter)`.
///
/// The counter selects a ChaCha stream, so distinct counters give
/// independent sequences and any stream can be regenerated on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub counter: u64,
}

impl RngStream {
    pub fn new(seed: u64, counter: u64) -> Self {
        Self { seed, counter }
    }

    /// Substream for the weights of `layer` in `run`.
    pub fn layer(seed: u64, run: usize, layer: usize) -> Self {
        debug_assert!((run as u64) < INPUT_RUN && (layer as u64) <= u32::MAX as u64);
        Self::new(seed, (run as u64) << 32 | layer as u64)
    }

    /// Substream for the input batch.
    pub fn input(seed: u64) -> Self {
        Self::new(seed, INPUT_RUN << 32)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.counter);
        rng
    }

    /// `len` i.i.d. standard normals.
    pub fn normals(&self, len: usize) -> Vec<f64> {
        let mut rng = self.rng();
        (0..len).map(|_| standard_normal(&mut rng)).collect()
    }
}

#[inline]
pub(crate) fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// `d × d` matrix of i.i.d. standard normals. The `1/√d` factor belongs to
/// the layer map.
pub fn sample_weights(stream: &RngStream, d: usize) -> DenseMatrix {
    DenseMatrix::from_raw(d, d, stream.normals(d * d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_stream_same_matrix() {
        let s = RngStream::new(7, 3);
        assert_eq!(sample_weights(&s, 20), sample_weights(&s, 20));
        assert_ne!(
            sample_weights(&s, 20),
            sample_weights(&RngStream::new(7, 4), 20)
        );
        assert_ne!(
            sample_weights(&s, 20),
            sample_weights(&RngStream::new(8, 3), 20)
        );
    }

    #[test]
    fn moments_at_width_1000() {
        let w = sample_weights(&RngStream::layer(1, 0, 1), 1000);
        let n = w.as_slice().len() as f64;
        let mean = w.as_slice().iter().sum::<f64>() / n;
        let var = w.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 4.0 / n.sqrt());
        assert!((var - 1.0).abs() < 0.01);
    }

    #[test]
    fn layer_streams_are_distinct() {
        let a = RngStream::layer(5, 0, 1);
        let b = RngStream::layer(5, 1, 0);
        let c = RngStream::input(5);
        assert_ne!(a.counter, b.counter);
        assert_ne!(b.counter, c.counter);
        assert_ne!(a.normals(4), b.normals(4));
    }
}
