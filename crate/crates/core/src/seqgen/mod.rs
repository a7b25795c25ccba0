//! Binary sign-pattern families.
//!
//! A sign pattern is one period of a ±1 waveform. Patterns are produced from
//! bit sequences with the map `0 → +1`, `1 → −1`; any consistent map gives the
//! same correlation magnitudes, this one is fixed so outputs are reproducible.

mod correlation;
mod families;
mod lfsr;
mod pattern_file;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{self, Domain};

pub use correlation::{
    cyclic_convolution, cyclic_correlation, direct_cyclic_convolution, CorrelationBank,
};
pub use families::{
    gold_family, gold_preferred_pair, hadamard_family, kasami_small_family, maximal_family,
};
pub use lfsr::{
    default_primitive_polynomial, lfsr_msequence, primitive_polynomials, Polynomial,
    GOLD_PREFERRED_PAIRS, PRIMITIVE_POLYNOMIALS,
};
pub use pattern_file::{parse_pattern_file, read_pattern_file, write_pattern_file};

/// Errors raised while generating or validating sign patterns.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("sequence entry {value} at index {index} is not ±1")]
    InvalidEntry { index: usize, value: i64 },
    #[error("sequence length {0} is below the minimum of 2")]
    TooShort(usize),
    #[error("rows have different lengths ({expected} vs {found})")]
    LengthMismatch { expected: usize, found: usize },
    #[error("sign matrix needs at least one row")]
    Empty,
    #[error("polynomial {poly:#o} of degree {degree} is not primitive (state period {period}, expected {expected})")]
    NotPrimitive {
        poly: u32,
        degree: u32,
        period: u64,
        expected: u64,
    },
    #[error("polynomial {0:#o} has no constant term or an unsupported degree")]
    InvalidPolynomial(u32),
    #[error("the LFSR initial state must be a nonzero {degree}-bit value, got {state:#x}")]
    InvalidState { state: u32, degree: u32 },
    #[error("polynomials {first:#o} and {second:#o} are not a preferred pair: cross-correlation value {value} outside {{-1, -{t}, {t_minus_2}}}", t_minus_2 = .t - 2)]
    NotPreferredPair {
        first: u32,
        second: u32,
        value: i64,
        t: i64,
    },
    #[error("no preferred pair is shipped for register length {0}")]
    NoPreferredPair(u32),
    #[error("{family} requires {requirement}, got {got}")]
    InvalidParameter {
        family: Family,
        requirement: &'static str,
        got: String,
    },
    #[error("{family} family has only {population} patterns available, {requested} requested")]
    PopulationExceeded {
        family: Family,
        population: u64,
        requested: usize,
    },
    #[error("generated family contains duplicate rows {first} and {second}")]
    DuplicateRows { first: usize, second: usize },
    #[error("pattern file: {0}")]
    Format(String),
}

/// One period of a ±1 sign pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct BinarySequence(Vec<i8>);

impl BinarySequence {
    pub fn new(entries: Vec<i8>) -> Result<Self, SeqError> {
        if entries.len() < 2 {
            return Err(SeqError::TooShort(entries.len()));
        }
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, &v)| v != 1 && v != -1)
        {
            return Err(SeqError::InvalidEntry {
                index,
                value: value as i64,
            });
        }
        Ok(Self(entries))
    }

    /// Maps bits to signs, `0 → +1` and `1 → −1`.
    pub fn from_bits(bits: &[u8]) -> Result<Self, SeqError> {
        if let Some((index, &b)) = bits.iter().enumerate().find(|(_, &b)| b > 1) {
            return Err(SeqError::InvalidEntry {
                index,
                value: b as i64,
            });
        }
        Self::new(bits.iter().map(|&b| 1 - 2 * b as i8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn bits(&self) -> Vec<u8> {
        self.0.iter().map(|&s| u8::from(s < 0)).collect()
    }

    /// Cyclic left shift: `out[t] = self[(t + k) mod M]`.
    pub fn shifted(&self, k: usize) -> Self {
        let mut v = self.0.clone();
        let len = v.len();
        v.rotate_left(k % len);
        Self(v)
    }

    /// Sign-domain product, i.e. XOR of the underlying bit sequences.
    pub fn xor(&self, other: &Self) -> Result<Self, SeqError> {
        if self.len() != other.len() {
            return Err(SeqError::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect(),
        ))
    }

    /// `a⁻[n] = a[−n mod M]`.
    pub fn reversed(&self) -> Self {
        let len = self.len();
        Self((0..len).map(|n| self.0[(len - n) % len]).collect())
    }

    /// Smallest `p ≥ 1` with `a[t + p] = a[t]` for all `t`.
    pub fn period(&self) -> usize {
        let len = self.len();
        (1..len)
            .filter(|p| len.is_multiple_of(*p))
            .find(|&p| (0..len).all(|t| self.0[t] == self.0[(t + p) % len]))
            .unwrap_or(len)
    }

    pub fn dot(&self, other: &Self) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| (a as i64) * (b as i64))
            .sum()
    }
}

impl TryFrom<Vec<i8>> for BinarySequence {
    type Error = SeqError;

    fn try_from(v: Vec<i8>) -> Result<Self, SeqError> {
        Self::new(v)
    }
}

impl From<BinarySequence> for Vec<i8> {
    fn from(s: BinarySequence) -> Self {
        s.0
    }
}

/// The `m × M` sign matrix `S`, one waveform pattern per row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignMatrix {
    rows: Vec<BinarySequence>,
    family: String,
    seed: Option<u64>,
}

impl SignMatrix {
    pub fn new(
        rows: Vec<BinarySequence>,
        family: impl Into<String>,
        seed: Option<u64>,
    ) -> Result<Self, SeqError> {
        let first = rows.first().ok_or(SeqError::Empty)?;
        let len = first.len();
        if let Some(r) = rows.iter().find(|r| r.len() != len) {
            return Err(SeqError::LengthMismatch {
                expected: len,
                found: r.len(),
            });
        }
        let family = family.into();
        if family.is_empty() || family.contains(char::is_whitespace) {
            return Err(SeqError::Format(format!(
                "family tag {family:?} must be a single nonempty word"
            )));
        }
        Ok(Self { rows, family, seed })
    }

    /// Number of channels `m`.
    pub fn channels(&self) -> usize {
        self.rows.len()
    }

    /// Pattern length `M`.
    pub fn length(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[BinarySequence] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BinarySequence {
        &self.rows[i]
    }

    pub fn family_tag(&self) -> &str {
        &self.family
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// First `m` rows as a new matrix.
    pub fn truncated(&self, m: usize) -> Result<Self, SeqError> {
        Self::new(
            self.rows[..m.min(self.rows.len())].to_vec(),
            self.family.clone(),
            self.seed,
        )
    }

    /// Index pair of the first repeated row, if any.
    pub fn first_duplicate(&self) -> Option<(usize, usize)> {
        let mut seen = std::collections::HashMap::new();
        for (i, r) in self.rows.iter().enumerate() {
            if let Some(&j) = seen.get(r) {
                return Some((j, i));
            }
            seen.insert(r, i);
        }
        None
    }
}

/// Sign-pattern families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Maximal,
    Gold,
    KasamiSmall,
    Hadamard,
    Random,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Maximal => "maximal",
            Family::Gold => "gold",
            Family::KasamiSmall => "kasami_small",
            Family::Hadamard => "hadamard",
            Family::Random => "random",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "maximal" | "msequence" | "m_sequence" => Ok(Family::Maximal),
            "gold" => Ok(Family::Gold),
            "kasami" | "kasami_small" => Ok(Family::KasamiSmall),
            "hadamard" => Ok(Family::Hadamard),
            "random" => Ok(Family::Random),
            other => Err(format!("unknown family '{other}'")),
        }
    }
}

/// Which rows of a family's enumeration end up in the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Family default: Hadamard skips its all-ones row 0, every other family
    /// starts at the head of its enumeration.
    #[default]
    Canonical,
    /// Start at this index of the enumeration (Hadamard included).
    Offset(usize),
}

/// Parameters of one sign matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    /// Register length `n`.
    #[serde(default)]
    pub register_length: Option<u32>,
    /// Pattern length `M`, as an alternative to `n`.
    #[serde(default)]
    pub length: Option<usize>,
    /// Number of channels `m`.
    pub channels: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub selection: Selection,
}

impl FamilySpec {
    pub fn maximal(n: u32, m: usize) -> Self {
        Self::with_register(Family::Maximal, n, m)
    }

    pub fn gold(n: u32, m: usize) -> Self {
        Self::with_register(Family::Gold, n, m)
    }

    pub fn kasami_small(n: u32, m: usize) -> Self {
        Self::with_register(Family::KasamiSmall, n, m)
    }

    pub fn hadamard(length: usize, m: usize) -> Self {
        Self {
            family: Family::Hadamard,
            register_length: None,
            length: Some(length),
            channels: m,
            seed: None,
            selection: Selection::Canonical,
        }
    }

    pub fn random(length: usize, m: usize, seed: u64) -> Self {
        Self {
            family: Family::Random,
            register_length: None,
            length: Some(length),
            channels: m,
            seed: Some(seed),
            selection: Selection::Canonical,
        }
    }

    fn with_register(family: Family, n: u32, m: usize) -> Self {
        Self {
            family,
            register_length: Some(n),
            length: None,
            channels: m,
            seed: None,
            selection: Selection::Canonical,
        }
    }

    pub fn with_channels(mut self, m: usize) -> Self {
        self.channels = m;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_selection(mut self, selection: Selection) -> Self {
        self.selection = selection;
        self
    }

    fn invalid(&self, requirement: &'static str, got: impl fmt::Display) -> SeqError {
        SeqError::InvalidParameter {
            family: self.family,
            requirement,
            got: got.to_string(),
        }
    }

    /// Resolves `(n, M)`; `n` is `None` for the random family when only `M`
    /// was given.
    pub fn dimensions(&self) -> Result<(Option<u32>, usize), SeqError> {
        if self.channels == 0 {
            return Err(self.invalid("at least one channel", self.channels));
        }
        match self.family {
            Family::Maximal | Family::Gold | Family::KasamiSmall => {
                let n = match (self.register_length, self.length) {
                    (Some(n), Some(len)) if (1usize << n) - 1 != len => {
                        return Err(self.invalid("M = 2^n - 1", format!("n = {n}, M = {len}")))
                    }
                    (Some(n), _) => n,
                    (None, Some(len)) => match (len + 1).checked_ilog2() {
                        Some(n) if (len + 1).is_power_of_two() => n,
                        _ => return Err(self.invalid("M = 2^n - 1", format!("M = {len}"))),
                    },
                    (None, None) => return Err(self.invalid("a register length", "none")),
                };
                match self.family {
                    Family::Maximal if !(2..=13).contains(&n) => {
                        Err(self.invalid("2 <= n <= 13", n))
                    }
                    Family::Gold if n % 4 == 0 || n < 3 => {
                        Err(self.invalid("n >= 3 not divisible by 4", n))
                    }
                    Family::Gold if n > 20 => Err(self.invalid("n <= 20", n)),
                    Family::KasamiSmall if n % 2 == 1 || !(4..=20).contains(&n) => {
                        Err(self.invalid("even n with 4 <= n <= 20", n))
                    }
                    _ => Ok((Some(n), (1usize << n) - 1)),
                }
            }
            Family::Hadamard => {
                let len = match (self.register_length, self.length) {
                    (Some(n), Some(len)) if 1usize << n != len => {
                        return Err(self.invalid("M = 2^n", format!("n = {n}, M = {len}")))
                    }
                    (_, Some(len)) => len,
                    (Some(n), None) if n < 24 => 1usize << n,
                    (Some(n), None) => return Err(self.invalid("n < 24", n)),
                    (None, None) => return Err(self.invalid("a length", "none")),
                };
                if len < 2 || !len.is_power_of_two() {
                    return Err(self.invalid("M a power of two >= 2", len));
                }
                Ok((Some(len.ilog2()), len))
            }
            Family::Random => {
                let len = match (self.register_length, self.length) {
                    (_, Some(len)) => len,
                    (Some(n), None) if (2..=24).contains(&n) => (1usize << n) - 1,
                    (Some(n), None) => return Err(self.invalid("2 <= n <= 24", n)),
                    (None, None) => return Err(self.invalid("a length", "none")),
                };
                if len < 2 {
                    return Err(self.invalid("M >= 2", len));
                }
                if self.seed.is_none() {
                    return Err(self.invalid("a seed", "none"));
                }
                Ok((self.register_length, len))
            }
        }
    }

    /// Number of distinct patterns the selection policy can deliver, `None`
    /// when effectively unbounded.
    pub fn population(&self) -> Result<Option<u64>, SeqError> {
        let (n, len) = self.dimensions()?;
        let offset = match self.selection {
            Selection::Canonical if self.family == Family::Hadamard => 1,
            Selection::Canonical => 0,
            Selection::Offset(k) => k as u64,
        };
        let total = match self.family {
            Family::Maximal => {
                let n = n.expect("resolved");
                primitive_polynomials(n).len() as u64 * len as u64
            }
            Family::Gold => (1u64 << n.expect("resolved")) + 1,
            Family::KasamiSmall => 1u64 << (n.expect("resolved") / 2),
            Family::Hadamard => len as u64,
            Family::Random => {
                return Ok(if len < 63 { Some(1u64 << len) } else { None });
            }
        };
        Ok(Some(total.saturating_sub(offset)))
    }
}

/// Builds the sign matrix described by `spec`.
///
/// Deterministic families take `m` consecutive rows of their enumeration
/// starting at the selection offset. The random family draws row `i` from the
/// stream keyed by `(seed, i)` and redraws on collision, so the first `m'`
/// rows of an `m`-row matrix are exactly the `m'`-row matrix.
pub fn build_sign_matrix(spec: &FamilySpec) -> Result<SignMatrix, SeqError> {
    let (n, len) = spec.dimensions()?;
    let m = spec.channels;
    if let Some(pop) = spec.population()? {
        if (m as u64) > pop {
            return Err(SeqError::PopulationExceeded {
                family: spec.family,
                population: pop,
                requested: m,
            });
        }
    }
    let offset = match spec.selection {
        Selection::Canonical if spec.family == Family::Hadamard => 1,
        Selection::Canonical => 0,
        Selection::Offset(k) => k,
    };
    let rows = match spec.family {
        Family::Maximal => maximal_family(n.expect("resolved"), offset + m)?.split_off(offset),
        Family::Gold => {
            let n = n.expect("resolved");
            let pair = gold_preferred_pair(n)?;
            gold_family(n, pair)?.split_off(offset)
        }
        Family::KasamiSmall => kasami_small_family(n.expect("resolved"))?.split_off(offset),
        Family::Hadamard => hadamard_family(len)?.split_off(offset),
        Family::Random => random_rows(len, m, spec.seed.expect("validated")),
    };
    let rows: Vec<BinarySequence> = rows.into_iter().take(m).collect();
    let matrix = SignMatrix::new(rows, spec.family.as_str(), spec.seed)?;
    if let Some((first, second)) = matrix.first_duplicate() {
        return Err(SeqError::DuplicateRows { first, second });
    }
    Ok(matrix)
}

fn random_rows(len: usize, m: usize, seed: u64) -> Vec<BinarySequence> {
    let mut stream = RandomRowStream::new(len, seed);
    (0..m).map(|_| stream.next_row()).collect()
}

/// Row-by-row generator of the random family; yields the same rows, in the
/// same order, as [`build_sign_matrix`] with a random spec of equal `M` and
/// seed.
///
/// The caller must not request more than `2^M` rows.
#[derive(Debug, Clone)]
pub struct RandomRowStream {
    len: usize,
    seed: u64,
    index: u64,
    seen: HashSet<Vec<i8>>,
}

impl RandomRowStream {
    pub fn new(len: usize, seed: u64) -> Self {
        Self {
            len,
            seed,
            index: 0,
            seen: HashSet::new(),
        }
    }

    pub fn rows_emitted(&self) -> usize {
        self.index as usize
    }

    pub fn next_row(&mut self) -> BinarySequence {
        let mut rng = rng::stream(self.seed, Domain::SignRows, self.index);
        self.index += 1;
        loop {
            let row: Vec<i8> = (0..self.len)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            if self.seen.insert(row.clone()) {
                return BinarySequence(row);
            }
        }
    }
}
