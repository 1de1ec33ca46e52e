//! Minimal dense neural-network engine: sequential linear layers with
//! element-wise activations, reverse-mode gradients, an adaptive-moment
//! optimizer and a cosine learning-rate schedule.

mod adam;
mod dense;

pub use adam::{Adam, LrSchedule};
pub use dense::{Activation, DenseNet, ForwardTrace, Layer, NetGrads};
