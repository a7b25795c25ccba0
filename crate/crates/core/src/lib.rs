//! Conditioning toolkit for the sensing matrix of the modulated wideband
//! converter (MWC).
//!
//! The converter mixes its input with `m` periodic ±1 waveforms, so after the
//! continuous-to-finite reduction its support-recovery step faces the matrix
//! `Φ = S·F / √(mM)`, where `S` holds one sign pattern per row and `F` is the
//! `M`-point DFT. This crate covers the whole chain around that matrix:
//!
//! * [`seqgen`] generates sign-pattern families (m-sequences, Gold, small-set
//!   Kasami, Hadamard, random) and the correlation utilities used to check them.
//! * [`matrixlab`] builds `Φ` and computes the row-correlation measures
//!   α, β, γ, the column coherence and the spectral norm.
//! * [`guarantees`] evaluates the expected-RIP probability bound, its
//!   `1 − 1/(mδ²)` approximation and the classical coherence/RIP/StRIP bounds,
//!   and searches for the smallest channel count satisfying each.
//! * [`mc_oracle`] checks the probability bound against brute-force sampling.
//! * [`mmv`] synthesizes multiple-measurement-vector problems and recovers
//!   their row support with simultaneous orthogonal matching pursuit.
//! * [`harness`] holds the parameter presets and the table/sweep drivers.

pub mod guarantees;
pub mod harness;
pub mod matrixlab;
pub mod mc_oracle;
pub mod mmv;
pub mod rng;
pub mod seqgen;

pub use guarantees::{
    BoundName, DistKind, ExripInputs, GuaranteeResult, MomentConstants, MomentMethod,
    NonzeroDistribution,
};
pub use matrixlab::{QualityReport, SensingMatrix};
pub use seqgen::{BinarySequence, Family, FamilySpec, SignMatrix};

/// Isometry constant used throughout: the basis-pursuit exact-recovery
/// threshold `δ_2K < √2 − 1`.
pub const DEFAULT_DELTA: f64 = std::f64::consts::SQRT_2 - 1.0;
