//! Recover audio from high-speed video by tracking tiny, sub-pixel
//! vibrations of image blocks and combining the per-block motion into one
//! signal.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below name the common concrete types.

pub mod aggregate;
pub mod audio;
pub mod bench;
pub mod dsp;
pub mod direction;
pub mod error;
mod linalg;
mod parallel;
pub mod metrics;
pub mod motion;
pub mod pipeline;
mod scalar;
pub mod stats;
pub mod synth;
pub mod vibrometry;
pub mod video;

pub use audio::AudioSignal;
pub use error::{Error, Result};
pub use scalar::Real;

pub type AudioSignalF32 = audio::AudioSignal<f32>;
pub type AudioSignalF64 = audio::AudioSignal<f64>;
pub type DisplacementSignalF32 = motion::DisplacementSignal<f32>;
pub type DisplacementSignalF64 = motion::DisplacementSignal<f64>;
