//! Simulation of multi-photon linear optics with mid-circuit
//! measure-and-reinject channels.
//!
//! The model: `m` optical modes carry `n` indistinguishable photons. A
//! single-photon unitary U acts on the n-photon sector through the
//! permanent-based lift W = φ(U), with ⟨s|W|t⟩ = per(U_{s,t})/√(s!·t!),
//! where U_{s,t} repeats rows and columns of U according to the output and
//! input occupations. On top of the unitary layer sit density-matrix
//! channels that photon-count a subset of modes and re-inject a Fock state
//! chosen by the outcome. The crate provides:
//!
//! - [`fock`]: occupation vectors, sector bases, substitution submatrices;
//! - [`permanent`]: exact (Glynn) and naive permanents plus the Gurvits
//!   ±1 estimator;
//! - [`circuit`]: beam-splitter/phase-shifter circuits, universal meshes,
//!   Haar-random unitaries, exact parameter derivatives;
//! - [`lift`]: the homomorphism U ↦ W on the n-photon sector;
//! - [`channel`]: density matrices, measurement statistics, state
//!   injection, purity, trace distance;
//! - [`analysis`]: degree-of-freedom (Jacobian rank) analysis, purity-decay
//!   bounds, photon-collision statistics;
//! - [`probestim`]: the static (m+k)-mode equivalent model of a k-injection
//!   pipeline and exact/estimated output probabilities.
//!
//! Everything randomized takes explicit seeds and produces identical
//! results regardless of worker count. The `parallel` feature (on by
//! default) runs the heavy kernels on rayon; disabling it falls back to
//! sequential loops with bit-identical output.

pub mod analysis;
pub mod channel;
pub mod circuit;
pub mod fock;
pub mod lift;
mod linalg;
mod parallel;
pub mod permanent;
pub mod probestim;

pub use fock::{FockBasis, FockState};
pub use parallel::execution_mode;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count must be at least 1")]
    NoModes,
    #[error("basis dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix side {side} exceeds permanent cap {cap}")]
    PermanentCap { side: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("photon number mismatch: {left} vs {right}")]
    PhotonMismatch { left: u32, right: u32 },
    #[error("state has {got} modes, expected {expected}")]
    ModeMismatch { expected: usize, got: usize },
    #[error("state not in basis")]
    NotInBasis,
    #[error("integer overflow computing {0}")]
    Overflow(&'static str),
    #[error("sample count must be at least 1")]
    ZeroSamples,
    #[error("parameter vector has length {got}, circuit expects {expected}")]
    ParamCount { expected: usize, got: usize },
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("operands live on different bases")]
    BasisMismatch,
    #[error("invalid injection: {0}")]
    InvalidInjection(String),
    #[error("injection violates photon conservation: outcome {outcome:?} -> {injected:?}")]
    NonConserving { outcome: Vec<u32>, injected: Vec<u32> },
    #[error("not a density matrix: {0}")]
    InvalidDensity(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("matrix is not unitary (deviation {deviation:.2e})")]
    NotUnitary { deviation: f64 },
    #[error("invalid serialized state: {0}")]
    BadDump(String),
}

pub type Result<T> = std::result::Result<T, Error>;
