//! Filter banks, periodic cascade transforms and basis-vector utilities.

mod basis;
mod cascade;
mod filter;
mod index;
mod stream;

pub use basis::{basis_norm, LevelNorms};
pub use cascade::{basis_vector, cascade_forward, cascade_inverse, CoefficientVector, Scaling};
pub(crate) use cascade::{analysis_step, synthesis_step};
pub use filter::FilterBank;
pub(crate) use index::level_of_pos;
pub use index::{Kind, WaveletIndex};
pub use stream::StreamingCascade;
