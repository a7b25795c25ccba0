//! Conditioning guarantees for `Φ`: the expected-RIP probability bound and
//! its approximation, the classical coherence, RIP and StRIP bounds, and the
//! minimal channel count each of them requires.

mod classic;
mod distribution;
mod exrip;
mod search;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::matrixlab::MatrixError;
use crate::seqgen::SeqError;

pub use classic::{
    coherence_guarantees, rip_min_m, rip_requirement, strip_calderbank, strip_gan, strip_tropp,
    CandesPlanCheck, CoherenceGuarantees, SparsityLimit, RIP_SUBGAUSSIAN_C,
};
pub use distribution::{
    moment_constants, DistKind, MomentConstants, MomentMethod, MomentSource, NonzeroDistribution,
    MIN_MC_SAMPLES,
};
pub use exrip::{exrip_approx, exrip_probability, ExripInputs};
pub use search::{min_channels_search, tropp_t, ChannelSearch, SearchOutcome, SearchParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GuaranteeError {
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),
    #[error("sparsity K = {k} must satisfy 1 <= K < M = {length}")]
    InvalidSparsity { k: usize, length: usize },
    #[error("coherence must lie in [0, 1], got {0}")]
    InvalidCoherence(f64),
    #[error("{0}")]
    InvalidParameter(String),
    #[error("no closed form for {kind} at K = {k}; use monte_carlo")]
    ClosedFormUnavailable { kind: DistKind, k: usize },
    #[error("monte_carlo needs at least {min} samples, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error("moment constants were computed for K = {constants} but the bound uses K = {bound}")]
    ConstantsMismatch { constants: usize, bound: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

/// Every implemented bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    Exrip,
    ExripApprox,
    DonohoElad,
    TroppCoherence,
    CandesPlan,
    Rip,
    Calderbank,
    Gan,
    TroppStrip,
}

impl BoundName {
    pub const ALL: [BoundName; 9] = [
        BoundName::DonohoElad,
        BoundName::TroppCoherence,
        BoundName::CandesPlan,
        BoundName::Rip,
        BoundName::Calderbank,
        BoundName::Gan,
        BoundName::TroppStrip,
        BoundName::Exrip,
        BoundName::ExripApprox,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundName::Exrip => "exrip",
            BoundName::ExripApprox => "exrip_approx",
            BoundName::DonohoElad => "donoho_elad",
            BoundName::TroppCoherence => "tropp_coherence",
            BoundName::CandesPlan => "candes_plan",
            BoundName::Rip => "rip",
            BoundName::Calderbank => "calderbank",
            BoundName::Gan => "gan",
            BoundName::TroppStrip => "tropp_strip",
        }
    }

    /// Bounds that depend on the coherence of a concrete instance.
    pub fn uses_coherence(self) -> bool {
        matches!(
            self,
            BoundName::DonohoElad
                | BoundName::TroppCoherence
                | BoundName::CandesPlan
                | BoundName::Gan
                | BoundName::TroppStrip
        )
    }
}

impl fmt::Display for BoundName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        BoundName::ALL
            .into_iter()
            .find(|b| b.as_str() == key)
            .ok_or_else(|| format!("unknown bound '{s}'"))
    }
}

/// Outcome of one probabilistic guarantee.
///
/// `probability` is always `raw_value` clamped to `[0, 1]`. When the bound's
/// hypotheses fail, `feasible` is false, `raw_value` is 0 and `reason` says
/// why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeResult {
    pub bound: BoundName,
    pub probability: f64,
    pub raw_value: f64,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub params: BTreeMap<String, Value>,
}

impl GuaranteeResult {
    pub fn from_raw(bound: BoundName, raw_value: f64, params: BTreeMap<String, Value>) -> Self {
        Self {
            bound,
            probability: raw_value.clamp(0.0, 1.0),
            raw_value,
            feasible: true,
            reason: None,
            params,
        }
    }

    pub fn infeasible(
        bound: BoundName,
        reason: impl Into<String>,
        params: BTreeMap<String, Value>,
    ) -> Self {
        Self {
            bound,
            probability: 0.0,
            raw_value: 0.0,
            feasible: false,
            reason: Some(reason.into()),
            params,
        }
    }
}

pub(crate) fn params<const N: usize>(entries: [(&str, Value); N]) -> BTreeMap<String, Value> {
    entries
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

pub(crate) fn check_delta(delta: f64) -> Result<(), GuaranteeError> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(GuaranteeError::InvalidDelta(delta))
    }
}

pub(crate) fn check_probability(p: f64) -> Result<(), GuaranteeError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(GuaranteeError::InvalidProbability(p))
    }
}

pub(crate) fn check_sparsity(k: usize, length: usize) -> Result<(), GuaranteeError> {
    if k >= 1 && k < length {
        Ok(())
    } else {
        Err(GuaranteeError::InvalidSparsity { k, length })
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<(), GuaranteeError> {
    if (0.0..=1.0).contains(&mu) {
        Ok(())
    } else {
        Err(GuaranteeError::InvalidCoherence(mu))
    }
}
