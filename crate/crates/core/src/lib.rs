//! Sparse wavelet representations under lp error: streaming greedy selection,
//! Haar dynamic programs with approximation guarantees, best-basis search,
//! adaptive quantization and exhaustive reference solvers.

pub mod best_basis;
pub mod error;
pub mod greedy;
pub mod haar;
pub mod image2d;
pub mod norm;
pub mod oracle;
pub mod quant;
pub mod repr;
pub mod signal;
pub mod wavelet;

pub use best_basis::{best_basis_select, enumerate_cuts, Block, CutSolution, Inner};
pub use error::{Error, Result};
pub use greedy::{greedy_select, universal_select, GreedySelector, ScoredCoefficient};
pub use haar::{fptas, fptas_finegrain, hybrid, rest_optimal, FptasConfig, FptasStats, Rounding, Schedule};
pub use norm::{lp_error, LpNorm, Weights};
pub use repr::{Representation, Term};
pub use wavelet::{
    basis_norm, basis_vector, cascade_forward, cascade_inverse, CoefficientVector, FilterBank, Kind,
    LevelNorms, Scaling, StreamingCascade, WaveletIndex,
};
