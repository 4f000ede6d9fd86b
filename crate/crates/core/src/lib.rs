//! Simulator and toolkit for fuzzy quantum watermarking.
//!
//! A classical message is written as qubits in a public basis `j`. The
//! owner rewrites a secret subset `I` of them in a dissimilar basis `k`;
//! whoever observes the message in `j` then reads those positions wrong
//! with probability `p_e = sin²(k - j)`. Ownership is verified by checking
//! that a suspect copy disagrees with the original at `I` about `p_e` of
//! the time.
//!
//! * [`qstate`]: rebit states, bases and Born-rule measurement.
//! * [`watermark`]: build, embed, observe, verify, and the classical flip equivalent.
//! * [`keys`]: deriving `I` from a compact key.
//! * [`stats`]: decision rules and sample-size analysis.
//! * [`attacks`]: averaging, noise and shift attacks.
//! * [`carrier`]: raw and PGM payloads with imperceptibility masks.
//! * [`cli`]: the `qumark` command and its file formats.
//!
//! Measurement randomness is simulated with a seedable ChaCha20 stream
//! ([`qstate::RandomSource`]) so every transcript is reproducible.

pub mod attacks;
pub mod carrier;
pub mod cli;
mod error;
pub mod keys;
pub mod qstate;
pub mod stats;
pub mod watermark;

pub use error::{Error, Result};
pub use qstate::{Basis, RandomSource, RebitState, UniformSource};
pub use stats::{Decision, DecisionRule};
pub use watermark::{ObservedMessage, QuantumMessage, VerificationReport, WatermarkSecret};
