//! Named parameter presets and the drivers that turn them into tables and
//! sweeps.
//!
//! Presets live in an embedded TOML file. Every driver is deterministic in
//! its seed: random families get their instance seed from
//! [`instance_seed`], moment constants use the run seed directly.

mod drivers;

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::guarantees::{BoundName, DistKind, GuaranteeError, MomentMethod};
use crate::matrixlab::MatrixError;
use crate::mc_oracle::OracleError;
use crate::mmv::MmvError;
use crate::rng::{derive_seed, Domain};
use crate::seqgen::{Family, FamilySpec, SeqError};
use crate::DEFAULT_DELTA;

pub use drivers::{
    fig2_sweep, sweep_csv, table1_report, table2_report, verify_preset, SweepParams, SweepRow,
    Table1Params, Table1Report, Table1Row, Table2Report, Table2Row,
};

const PRESETS_TOML: &str = include_str!("presets.toml");

/// The family-comparison presets in report order.
pub const TABLE2_PRESETS: [&str; 6] = [
    "table2_maximal",
    "table2_gold",
    "table2_hadamard",
    "table2_random1",
    "table2_kasami",
    "table2_random2",
];

pub const DEFAULT_VERIFY_TRIALS: usize = 100_000;
/// Monte-Carlo samples behind the moment constants of the table drivers.
pub const DEFAULT_MOMENT_SAMPLES: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("preset file: {0}")]
    PresetParse(String),
    #[error("preset '{preset}' has no [{section}] section")]
    MissingSection {
        preset: String,
        section: &'static str,
    },
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Guarantee(#[from] GuaranteeError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Mmv(#[from] MmvError),
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_dists() -> Vec<DistKind> {
    vec![DistKind::ComplexNormal, DistKind::ComplexUniform]
}

fn default_trials() -> usize {
    DEFAULT_VERIFY_TRIALS
}

fn default_moment_samples() -> usize {
    DEFAULT_MOMENT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchPreset {
    pub attempts: usize,
    pub ceiling: usize,
    pub target_prob: f64,
    /// Sparsities the closed-form RIP requirement is reported at.
    pub rip_k: Vec<usize>,
    /// Channel count the Calderbank probability is quoted at.
    pub calderbank_m: usize,
    pub exrip_k: usize,
    pub exrip_target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPreset {
    pub m_min: usize,
    pub m_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmvPreset {
    pub r: usize,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub snr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    #[serde(default)]
    pub name: String,
    pub description: String,
    pub family: FamilySpec,
    /// Sparsity the bounds are evaluated at (the "2K" column).
    pub k: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_dists")]
    pub dists: Vec<DistKind>,
    /// Monte-Carlo trials for `verify` and `recover`.
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_moment_samples")]
    pub moment_samples: usize,
    #[serde(default)]
    pub bounds: Vec<BoundName>,
    #[serde(default)]
    pub search: Option<SearchPreset>,
    #[serde(default)]
    pub sweep: Option<SweepPreset>,
    #[serde(default)]
    pub mmv: Option<MmvPreset>,
}

impl Preset {
    /// The family spec with a seed filled in for random families.
    pub fn family_spec(&self, seed: u64) -> FamilySpec {
        resolve_seed(self.family, seed)
    }
}

/// Instance seed used for random families that do not fix their own.
pub fn instance_seed(seed: u64) -> u64 {
    derive_seed(seed, Domain::Presets, 0)
}

pub(crate) fn resolve_seed(spec: FamilySpec, seed: u64) -> FamilySpec {
    if spec.family == Family::Random && spec.seed.is_none() {
        spec.with_seed(instance_seed(seed))
    } else {
        spec
    }
}

/// Closed form where one exists, Monte Carlo otherwise.
pub fn moment_method(dist: DistKind, samples: usize, seed: u64) -> MomentMethod {
    if dist == DistKind::RealNormal {
        MomentMethod::ClosedForm
    } else {
        MomentMethod::MonteCarlo { samples, seed }
    }
}

/// Parses a presets document; table names become preset names.
pub fn parse_presets(text: &str) -> Result<BTreeMap<String, Preset>, HarnessError> {
    let mut map: BTreeMap<String, Preset> =
        toml::from_str(text).map_err(|e| HarnessError::PresetParse(e.to_string()))?;
    for (name, p) in map.iter_mut() {
        p.name = name.clone();
    }
    Ok(map)
}

/// The embedded presets.
pub fn presets() -> &'static BTreeMap<String, Preset> {
    static CELL: OnceLock<BTreeMap<String, Preset>> = OnceLock::new();
    CELL.get_or_init(|| parse_presets(PRESETS_TOML).expect("embedded presets parse"))
}

pub fn preset(name: &str) -> Result<Preset, HarnessError> {
    presets()
        .get(name)
        .cloned()
        .ok_or_else(|| HarnessError::UnknownPreset(name.to_string()))
}

/// Everything needed to rerun a command, plus its outputs and wall time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub tool_version: String,
    pub command: Vec<String>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub outputs: Vec<Value>,
    pub wall_time_s: f64,
}

/// Three decimals, without a negative zero.
pub fn fmt3(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::build_sign_matrix;

    #[test]
    fn every_preset_parses_and_builds() {
        let all = presets();
        for name in TABLE2_PRESETS
            .iter()
            .chain(&["table1_mwc", "fig2_sweep", "mmv_gold_standard"])
        {
            let p = &all[*name];
            assert_eq!(&p.name, name);
            assert!((p.delta - DEFAULT_DELTA).abs() < 1e-15);
            let s = build_sign_matrix(&p.family_spec(1)).unwrap();
            assert_eq!(s.channels(), p.family.channels);
        }
    }

    #[test]
    fn preset_dimensions() {
        let dims = |name: &str| {
            let p = preset(name).unwrap();
            let (_, len) = p.family_spec(0).dimensions().unwrap();
            (p.family.channels, len, p.k)
        };
        assert_eq!(dims("table2_gold"), (80, 511, 24));
        assert_eq!(dims("table2_maximal"), (80, 511, 24));
        assert_eq!(dims("table2_hadamard"), (80, 512, 24));
        assert_eq!(dims("table2_random1"), (80, 511, 24));
        assert_eq!(dims("table2_kasami"), (16, 255, 12));
        assert_eq!(dims("table2_random2"), (40, 195, 24));
        let t1 = preset("table1_mwc").unwrap();
        assert_eq!((t1.family.length, t1.k), (Some(195), 12));
        let s = t1.search.unwrap();
        assert_eq!((s.attempts, s.exrip_k, s.calderbank_m), (100, 24, 150));
        let f2 = preset("fig2_sweep").unwrap().sweep.unwrap();
        assert_eq!((f2.m_min, f2.m_max), (20, 100));
    }

    #[test]
    fn unknown_fields_and_names_are_rejected() {
        assert!(matches!(
            preset("table3"),
            Err(HarnessError::UnknownPreset(_))
        ));
        let bad = "[x]\ndescription = \"\"\nfamily = { family = \"gold\", register_length = 5, channels = 2 }\nk = 2\nwat = 1\n";
        assert!(parse_presets(bad).is_err());
    }

    #[test]
    fn random_seed_resolution() {
        let p = preset("table2_random2").unwrap();
        assert_eq!(p.family_spec(7).seed, Some(instance_seed(7)));
        assert_ne!(instance_seed(7), instance_seed(8));
        let g = preset("table2_gold").unwrap();
        assert_eq!(g.family_spec(7).seed, None);
    }

    #[test]
    fn three_decimals() {
        assert_eq!(fmt3(-0.0), "0.000");
        assert_eq!(fmt3(-1e-9), "0.000");
        assert_eq!(fmt3(0.93851), "0.939");
        assert_eq!(fmt3(1.25), "1.250");
    }
}
