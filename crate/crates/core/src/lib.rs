#![cfg_attr(not(feature = "std"), no_std)]
//! Low-rank plus sparse decomposition of infrared image sequences with
//! directional difference priors, for small-target detection.
//!
//! A sequence cube `Y` (rows × cols × frames) is split into a background
//! `F = B ×₃ A`, where `A` is a temporal factor and `B` a spatial factor,
//! and a sparse target cube `T`. The spatial factor is regularized through
//! reweighted sparsity of its row differences (grouped over the rank axis)
//! and column differences (elementwise); the temporal factor through a
//! quadratic penalty on its frame-to-frame differences. A structure-tensor
//! saliency map protects target energy while `T` is shrunk.
//!
//! Modules, bottom-up:
//!
//! - [`tensor`]: dense 3-way cubes, matrices, unfolding and mode products.
//! - [`diff`]: periodic difference operators and their circulant spectra.
//! - [`fft`]: the complex FFT used to diagonalize those operators.
//! - [`prox`]: soft thresholding, fiber group shrinkage, reweighting.
//! - [`saliency`]: structure tensor, coherence map and enhancement factor.
//! - [`solver`]: the alternating minimization with its inner ADMM loop.
//! - [`pipeline`]: cube windowing, segmentation and detection records.
//! - [`metrics`]: SCR, BSF, SCR gain, contrast gain, ROC and AUC.
//! - [`synth`]: seeded synthetic scenes with ground truth.
//!
//! The crate is `no_std` + `alloc` when the default `std` feature is off.

extern crate alloc;

mod error;
pub mod diff;
pub mod fft;
pub mod linalg;
pub(crate) mod math;
pub mod metrics;
pub mod pipeline;
pub mod prox;
pub mod saliency;
pub mod solver;
pub mod synth;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{Cube, Mat, Mode};
