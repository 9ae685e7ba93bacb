//! Minimal dense-tensor math with reverse-mode automatic differentiation.
//!
//! Everything is double precision and row-major. A forward pass records
//! primitive operations on a [`Tape`]; [`Tape::backward`] replays them in
//! reverse to fill parameter gradients. Tapes are rebuilt per forward pass
//! (define-by-run), which is what makes dynamic-length entity sequences
//! cheap to handle.

pub mod adam;
pub mod categorical;
pub mod checkpoint;
pub mod gradcheck;
pub mod params;
pub mod tape;
pub mod tensor;

pub use adam::{clip_global_norm, Adam, AdamHyper};
pub use categorical::Categorical;
pub use gradcheck::finite_difference_check;
pub use params::{Gradients, LearnGroup, MlpParams, ParamId, ParamSet, Parameter};
pub use tape::{Tape, Var};
pub use tensor::Tensor;
