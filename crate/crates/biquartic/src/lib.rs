//! Chaos diagnostics for few-mode nonlinear oscillators.
//!
//! The crate simulates classical and quantum dynamics of two coupled quartic
//! oscillators and extracts the observables that distinguish integrable from
//! chaotic motion in the time domain: the out-of-time-ordered correlator, the
//! number of harmonics of the phase-space distribution, and nearest-neighbor
//! level-spacing statistics. A multiple-quantum-coherence echo protocol
//! reconstructs the harmonics moment the way an experiment would.

pub mod analysis;
pub mod classical;
pub mod error;
pub mod exec;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod mqc;
pub mod oracle;
pub mod output;
pub mod pipeline;
pub mod quantum;
pub mod series;
pub mod sparse;
pub mod stats;

pub use error::{Error, Result};
