//! Fixtures shared by the criterion benchmarks.

use intentseq_core::dataset::{COORDS_PER_FRAME, DEFAULT_SEQ_LEN};
use intentseq_core::{Matrix, Model, ModelConfig, ModelKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A standard-size model with seeded initialization.
pub fn standard_model(kind: ModelKind, seed: u64) -> Model<f32> {
    Model::init(ModelConfig::standard(kind), seed).expect("standard config is valid")
}

/// `n` windows of uniform coordinates in `[0, 1)`, shaped `15 x 66`.
pub fn random_windows(n: usize, seed: u64) -> Vec<Matrix<f32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let data = (0..DEFAULT_SEQ_LEN * COORDS_PER_FRAME)
                .map(|_| rng.random())
                .collect();
            Matrix::from_vec(DEFAULT_SEQ_LEN, COORDS_PER_FRAME, data).expect("window shape")
        })
        .collect()
}

/// Frames for a streaming benchmark.
pub fn random_frames(n: usize, seed: u64) -> Vec<[f32; COORDS_PER_FRAME]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| std::array::from_fn(|_| rng.random()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_expected_shapes() {
        let ws = random_windows(3, 1);
        assert_eq!(ws.len(), 3);
        assert!(ws.iter().all(|w| w.shape() == (15, 66)));
        assert_eq!(random_frames(4, 1).len(), 4);
        assert_eq!(standard_model(ModelKind::Gru, 0).num_params(), 33_051);
    }
}
