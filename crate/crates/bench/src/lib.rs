//! Inputs shared by the benchmarks.

use lingam::datagen::{generate, random_model};
use lingam::{DataMatrix, GeneratorConfig, GroundTruthModel, UnmixingMatrix};
use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A random dense model and `m` samples from it.
pub fn dataset(n: usize, m: usize, seed: u64) -> (GroundTruthModel, DataMatrix) {
    let model = random_model(&GeneratorConfig {
        n,
        seed,
        ..GeneratorConfig::default()
    })
    .expect("valid generator config");
    let data = generate(&model, m, &mut ChaCha8Rng::seed_from_u64(seed)).expect("m > 0");
    (model, data)
}

/// `I - B` of a random model with rows in scrambled order, as ICA would
/// return it.
pub fn scrambled_unmixing(n: usize, seed: u64) -> UnmixingMatrix {
    let (model, _) = dataset(n, n, seed);
    let w = DMatrix::identity(n, n) - model.observed_b().matrix();
    let rows: Vec<usize> = (0..n).rev().collect();
    UnmixingMatrix::new(w.select_rows(&rows)).expect("unit-triangular up to permutation")
}
