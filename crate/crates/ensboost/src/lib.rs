//! Ensemble boosting for gridded monthly climate fields.
//!
//! A conditional variational autoencoder is trained on a single realization
//! of a monthly field ensemble. At inference time the latent prior is
//! replaced by the empirical covariance of the encoded training samples and
//! the decoder output is perturbed with structured noise estimated from the
//! training reconstruction residuals, which together let the model emit
//! arbitrarily large ensembles whose variability tracks the reference
//! population. An evaluation battery (quantile-quantile curves, log-PDFs,
//! radially averaged power spectra, moment and percentile maps, region
//! indices, detrended threshold composites) compares a boosted ensemble
//! against a held-out population.
//!
//! Numeric kernels are generic over the scalar type through [`scalar::Scalar`];
//! the shipped pipeline instantiates everything at [`Real`] (`f64`).

pub mod cvae;
pub mod data;
pub mod error;
pub mod eval;
pub mod inference;
pub mod linalg;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod scalar;

/// Scalar type used by the concrete pipeline. Covariance estimation and
/// Cholesky conditioning dominate the error budget, so the pipeline runs in
/// 64-bit throughout; the generic kernels also admit `f32`.
pub type Real = f64;


pub use error::{Error, Result};


