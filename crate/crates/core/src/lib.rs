//! Discovery of linear non-gaussian acyclic causal models (LiNGAM).
//!
//! The pipeline estimates an unmixing matrix with FastICA, resolves the
//! row permutation and scaling indeterminacies of ICA, reads off the
//! connection matrix `B`, and searches for the causal order that makes
//! `B` as close to strictly lower triangular as possible. Edges can then
//! be pruned with a bootstrap over covariance-based regressions.
//!
//! ```no_run
//! use lingam::{discover, DataMatrix, IcaConfig};
//!
//! # fn main() -> Result<(), lingam::LingamError> {
//! let data = DataMatrix::from_rows(&[vec![1.0, 2.0, 0.5], vec![0.3, 0.1, 0.9]])?;
//! let result = discover(&data, &IcaConfig::default())?;
//! println!("{}", result.b_hat.matrix());
//! # Ok(())
//! # }
//! ```

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod ica;
pub mod io;
pub mod lingam;
pub mod permutation;
pub mod pruning;
mod seed;
mod stats;

pub use data::{CenteringInfo, DataMatrix};
pub use datagen::{GeneratorConfig, GroundTruthModel};
pub use error::{LingamError, Result};
pub use ica::{fast_ica, Contrast, IcaConfig, IcaReport, UnmixingMatrix, WhiteningTransform};
pub use lingam::{
    assumption_report, compute_b, discover, discover_best_effort, independence_score, normalize_rows, ConnectionMatrix,
    DiagnosticsReport, LingamResult, Warning, WarningKind,
};
pub use permutation::{
    causal_order_search, diag_permutation_assignment, diag_permutation_exhaustive, hungarian_solve,
    triangularity_score, CausalOrder, RowPermutation,
};
pub use pruning::{bootstrap_prune, regress_on_predecessors, PruneConfig, PruneReport, Verdict};
pub use seed::derive_seed;
