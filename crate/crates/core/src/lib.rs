//! Frequency-permutation waveforms for joint radar and communication.
//!
//! Data symbols are mapped to permutations of `M` stepped-frequency tones.
//! The crate covers the symbol codec, waveform synthesis, fading channels,
//! assignment-based detection, closed-form block error bounds, ambiguity
//! function and CRLB analysis, and a deterministic Monte Carlo engine.

pub mod bounds;
pub mod channel;
pub mod cli;
pub mod error;
pub mod lehmer;
pub mod radar;
pub mod receiver;
pub mod rng;
pub mod simkit;
pub mod special;
pub mod waveform;

pub use error::{Error, Result};
pub use lehmer::Permutation;
