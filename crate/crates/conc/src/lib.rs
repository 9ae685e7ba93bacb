//! Concentration networks for reinforcement learning in large-scale
//! multi-agent systems.
//!
//! A concentration network (ConcNet) aggregates a variable-length sequence of
//! entity observations by scoring, ranking, pruning to the top `d_c` entities,
//! and downsampling — a hard-attention alternative to softmax attention whose
//! score function is trained through an auxiliary *motivational subnetwork*
//! that regresses motivational indices (state value, survival countdown).
//!
//! The crate contains:
//! - [`autodiff`]: a minimal dense-tensor library with reverse-mode
//!   differentiation, categorical-distribution utilities and an Adam
//!   optimizer with per-group learning rates.
//! - [`env`]: the entity-oriented environment contract (per-entity
//!   observation records, stochastic observation function) plus a synthetic
//!   planted-entity testbed.
//! - [`dca`]: the Decentralized Collective Assault simulator — continuous 2D
//!   two-team combat with terrain-scaled fan weapons and observation
//!   interference.
//! - [`redai`]: the scripted opponent (k-means grouping, group association,
//!   Hungarian target assignment).
//! - [`concnet`]: the concentration network and its variants (Single, Dual,
//!   Conc-SA, Conc-ARO, Conc-4Hist, independent critic head).
//! - [`baselines`]: PlainNet (zero-padded MLP) and Soft-SA comparison
//!   policies.
//! - [`trainer`]: the concentration policy gradient loop (Monte-Carlo value
//!   targets, survival countdown targets, GAE, clipped PPO with dual
//!   learning rates).
//! - [`harness`]: experiment configuration, training/eval/sweep/probe entry
//!   points and file outputs.

pub mod autodiff;
pub mod baselines;
pub mod concnet;
pub mod dca;
pub mod env;
pub mod harness;
pub mod redai;
pub mod trainer;

mod error;

pub use error::{Error, Result};
pub use autodiff::tensor::Tensor;
