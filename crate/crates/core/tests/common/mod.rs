#![allow(dead_code)]

use lingam::GroundTruthModel;
use nalgebra::DMatrix;

/// Four-variable example: x4 drives x1 and x2, which both drive x3.
pub fn example_b() -> DMatrix<f64> {
    let mut b = DMatrix::zeros(4, 4);
    b[(0, 3)] = 1.0;
    b[(1, 3)] = 0.2;
    b[(2, 0)] = -5.0;
    b[(2, 1)] = -2.0;
    b
}

/// The example as a generator model. Causal indices are x4, x1, x2, x3.
pub fn example_model() -> GroundTruthModel {
    let mut b = DMatrix::zeros(4, 4);
    b[(1, 0)] = 1.0;
    b[(2, 0)] = 0.2;
    b[(3, 1)] = -5.0;
    b[(3, 2)] = -2.0;
    GroundTruthModel::new(
        b,
        vec![0.5, -0.3, 0.0, 1.0],
        vec![1.0, 1.0, 1.0, 1.0],
        vec![0.6, 1.6, 0.7, 1.9],
        vec![1, 2, 3, 0],
    )
    .unwrap()
}
