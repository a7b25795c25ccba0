//! Maximal, Gold, small-set Kasami and Hadamard families.
//!
//! Every LFSR-based base sequence starts from the all-ones register state.

use super::lfsr::{shipped_preferred_pair, Polynomial};
use super::{
    cyclic_correlation, default_primitive_polynomial, lfsr_msequence, primitive_polynomials,
    BinarySequence, Family, SeqError,
};

fn all_ones_state(n: u32) -> u32 {
    (1 << n) - 1
}

/// First `count` rows of the maximal family of degree `n`.
///
/// One m-sequence per primitive polynomial in ascending mask order, then
/// cyclic shifts by 1, 2, … of those sequences in round-robin order.
pub fn maximal_family(n: u32, count: usize) -> Result<Vec<BinarySequence>, SeqError> {
    let polys = primitive_polynomials(n);
    if polys.is_empty() {
        return Err(SeqError::InvalidParameter {
            family: Family::Maximal,
            requirement: "2 <= n <= 24",
            got: n.to_string(),
        });
    }
    let base: Vec<BinarySequence> = polys
        .iter()
        .map(|&p| lfsr_msequence(p, all_ones_state(n)))
        .collect::<Result<_, _>>()?;
    let len = base[0].len();
    let population = base.len() * len;
    if count > population {
        return Err(SeqError::PopulationExceeded {
            family: Family::Maximal,
            population: population as u64,
            requested: count,
        });
    }
    Ok((0..count)
        .map(|i| base[i % base.len()].shifted(i / base.len()))
        .collect())
}

/// Shipped preferred pair for odd `n ∈ {5, 7, 9, 11}`.
pub fn gold_preferred_pair(n: u32) -> Result<(Polynomial, Polynomial), SeqError> {
    shipped_preferred_pair(n)
}

fn gold_t(n: u32) -> i64 {
    (1i64 << n.div_ceil(2)) + 1
}

/// Checks the cross-correlation spectrum `{−1, −t(n), t(n) − 2}` of the two
/// base m-sequences.
pub(super) fn check_preferred_pair(
    n: u32,
    first: Polynomial,
    second: Polynomial,
) -> Result<(BinarySequence, BinarySequence), SeqError> {
    for p in [first, second] {
        if p.degree() != n {
            return Err(SeqError::InvalidParameter {
                family: Family::Gold,
                requirement: "both polynomials of degree n",
                got: format!("{:#o} for n = {n}", p.mask()),
            });
        }
    }
    let a = lfsr_msequence(first, all_ones_state(n))?;
    let b = lfsr_msequence(second, all_ones_state(n))?;
    let t = gold_t(n);
    let allowed = [-1, -t, t - 2];
    if let Some(&value) = cyclic_correlation(&a, &b)?
        .iter()
        .find(|v| !allowed.contains(v))
    {
        return Err(SeqError::NotPreferredPair {
            first: first.mask(),
            second: second.mask(),
            value,
            t,
        });
    }
    Ok((a, b))
}

/// Gold family of odd register length `n`: `2^n + 1` sequences.
///
/// Order: the two base m-sequences, then `a ⊕ T^k b` for `k = 0, …, M − 1`
/// where `T^k` is the cyclic left shift by `k`.
pub fn gold_family(
    n: u32,
    preferred_pair: (Polynomial, Polynomial),
) -> Result<Vec<BinarySequence>, SeqError> {
    if n.is_multiple_of(2) || n < 5 {
        return Err(SeqError::InvalidParameter {
            family: Family::Gold,
            requirement: "odd n >= 5",
            got: n.to_string(),
        });
    }
    let (a, b) = check_preferred_pair(n, preferred_pair.0, preferred_pair.1)?;
    let len = a.len();
    let mut out = Vec::with_capacity(len + 2);
    out.push(a.clone());
    out.push(b.clone());
    for k in 0..len {
        out.push(a.xor(&b.shifted(k))?);
    }
    Ok(out)
}

/// Small Kasami set of even register length `n`: `2^(n/2)` sequences.
///
/// The base m-sequence `a` comes first, followed by `a ⊕ T^k b` for every
/// shift of the decimation `b[t] = a[(2^(n/2) + 1)·t mod M]`.
pub fn kasami_small_family(n: u32) -> Result<Vec<BinarySequence>, SeqError> {
    if n % 2 == 1 || n < 4 {
        return Err(SeqError::InvalidParameter {
            family: Family::KasamiSmall,
            requirement: "even n >= 4",
            got: n.to_string(),
        });
    }
    let poly = default_primitive_polynomial(n)?;
    let a = lfsr_msequence(poly, all_ones_state(n))?;
    let len = a.len();
    let q = (1usize << (n / 2)) + 1;
    let b = BinarySequence::new((0..len).map(|t| a.as_slice()[(q * t) % len]).collect())?;
    let short_period = (1usize << (n / 2)) - 1;
    let mut out = Vec::with_capacity(short_period + 1);
    out.push(a.clone());
    for k in 0..short_period {
        out.push(a.xor(&b.shifted(k))?);
    }
    Ok(out)
}

/// Rows of the `M × M` Sylvester Hadamard matrix in natural order,
/// `H[i][j] = (−1)^popcount(i & j)`.
pub fn hadamard_family(len: usize) -> Result<Vec<BinarySequence>, SeqError> {
    if len < 2 || !len.is_power_of_two() {
        return Err(SeqError::InvalidParameter {
            family: Family::Hadamard,
            requirement: "M a power of two >= 2",
            got: len.to_string(),
        });
    }
    (0..len)
        .map(|i| {
            BinarySequence::new(
                (0..len)
                    .map(|j| if (i & j).count_ones() % 2 == 0 { 1 } else { -1 })
                    .collect(),
            )
        })
        .collect()
}
