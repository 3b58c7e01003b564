//! Mutual information rate (MIR) and alternative mutual information rate
//! (AMIR) for pairs of stochastic processes.
//!
//! * [`exact`]: closed-form and bounded rates for Markov and hidden-Markov pairs.
//! * [`estimators`]: plug-in, kNN and block estimators from sampled sequences,
//!   convergence traces and the AEP log-ratio tracker.
//! * [`bottleneck`]: accuracy / compression / overall scores of temporal encoders.
//! * [`processes`]: process definitions, JSON loading and seeded samplers.
//!
//! All rates are in bits per step.

pub mod bottleneck;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod exact;
pub mod info;
pub mod processes;
mod svg;
pub mod types;

pub use error::{Error, Marginal, Result};
pub use info::{entropy_bits, mutual_information_bits};
pub use types::{
    Alphabet, ConvergenceTrace, PairedSymbolSequence, RateMethod, RateReport, RealPairedSequence, SymbolSequence,
};
