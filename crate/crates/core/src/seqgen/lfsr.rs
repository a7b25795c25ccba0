//! Fibonacci LFSRs and maximal-length sequences.
//!
//! A polynomial `x^n + c_{n−1}x^{n−1} + … + c_1 x + 1` is stored as the bit
//! mask with bit `i` holding `c_i` and bit `n` set. The register produces
//! `s[t + n] = Σ_{i<n} c_i · s[t + i] (mod 2)`, and the initial state loads
//! `s[i]` from bit `i`.

use std::sync::OnceLock;

use super::{BinarySequence, SeqError};

/// Lowest primitive polynomial (in mask order) of each degree 3..=13.
pub const PRIMITIVE_POLYNOMIALS: [(u32, u32); 11] = [
    (3, 0o13),
    (4, 0o23),
    (5, 0o45),
    (6, 0o103),
    (7, 0o203),
    (8, 0o435),
    (9, 0o1021),
    (10, 0o2011),
    (11, 0o4005),
    (12, 0o10123),
    (13, 0o20033),
];

/// Preferred pairs with three-valued cross-correlation.
pub const GOLD_PREFERRED_PAIRS: [(u32, u32, u32); 4] = [
    (5, 0o45, 0o75),
    (7, 0o211, 0o217),
    (9, 0o1021, 0o1131),
    (11, 0o4005, 0o4445),
];

const MAX_DEGREE: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Polynomial(u32);

impl Polynomial {
    pub fn new(mask: u32) -> Result<Self, SeqError> {
        if mask & 1 == 0 || mask < 0b11 {
            return Err(SeqError::InvalidPolynomial(mask));
        }
        let p = Self(mask);
        if p.degree() > MAX_DEGREE {
            return Err(SeqError::InvalidPolynomial(mask));
        }
        Ok(p)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn degree(self) -> u32 {
        31 - self.0.leading_zeros()
    }

    pub fn period_length(self) -> usize {
        (1usize << self.degree()) - 1
    }

    fn taps(self) -> u32 {
        self.0 & ((1 << self.degree()) - 1)
    }

    /// Number of steps until the register returns to `state`.
    fn state_period(self, state: u32) -> u64 {
        let n = self.degree();
        let taps = self.taps();
        let mut s = state;
        let limit = 1u64 << n;
        for k in 1..=limit {
            s = step(s, taps, n);
            if s == state {
                return k;
            }
        }
        limit
    }

    pub fn is_primitive(self) -> bool {
        let n = self.degree();
        n >= 1 && self.state_period((1 << n) - 1) == (1u64 << n) - 1
    }
}

#[inline]
fn step(state: u32, taps: u32, n: u32) -> u32 {
    let feedback = (state & taps).count_ones() & 1;
    (state >> 1) | (feedback << (n - 1))
}

fn output_bits(poly: Polynomial, state: u32) -> Vec<u8> {
    let n = poly.degree();
    let taps = poly.taps();
    let mut s = state;
    (0..poly.period_length())
        .map(|_| {
            let bit = (s & 1) as u8;
            s = step(s, taps, n);
            bit
        })
        .collect()
}

/// One full period of the m-sequence of `poly` started from `initial_state`.
pub fn lfsr_msequence(poly: Polynomial, initial_state: u32) -> Result<BinarySequence, SeqError> {
    let n = poly.degree();
    if initial_state == 0 || initial_state >> n != 0 {
        return Err(SeqError::InvalidState {
            state: initial_state,
            degree: n,
        });
    }
    let period = poly.state_period(initial_state);
    let expected = (1u64 << n) - 1;
    if period != expected {
        return Err(SeqError::NotPrimitive {
            poly: poly.mask(),
            degree: n,
            period,
            expected,
        });
    }
    BinarySequence::from_bits(&output_bits(poly, initial_state))
}

/// All primitive polynomials of degree `n`, ascending by mask.
///
/// Found by exhaustive period search, which is only practical up to about
/// `n = 16`; results are cached per degree.
pub fn primitive_polynomials(n: u32) -> Vec<Polynomial> {
    static CACHE: [OnceLock<Vec<Polynomial>>; MAX_DEGREE as usize + 1] =
        [const { OnceLock::new() }; MAX_DEGREE as usize + 1];
    if !(2..=MAX_DEGREE).contains(&n) {
        return Vec::new();
    }
    CACHE[n as usize]
        .get_or_init(|| {
            ((1u32 << n) + 1..(1u32 << (n + 1)))
                .step_by(2)
                .map(Polynomial)
                .filter(|p| p.is_primitive())
                .collect()
        })
        .clone()
}

fn validated_tables() -> &'static Result<(), SeqError> {
    static CHECK: OnceLock<Result<(), SeqError>> = OnceLock::new();
    CHECK.get_or_init(|| {
        for &(n, mask) in &PRIMITIVE_POLYNOMIALS {
            let p = Polynomial::new(mask)?;
            if p.degree() != n {
                return Err(SeqError::InvalidPolynomial(mask));
            }
            lfsr_msequence(p, (1 << n) - 1)?;
        }
        for &(n, a, b) in &GOLD_PREFERRED_PAIRS {
            super::families::check_preferred_pair(n, Polynomial::new(a)?, Polynomial::new(b)?)?;
        }
        Ok(())
    })
}

/// Shipped primitive polynomial of degree `n`; outside the table the lowest
/// primitive polynomial found by search is used.
pub fn default_primitive_polynomial(n: u32) -> Result<Polynomial, SeqError> {
    validated_tables().clone()?;
    if let Some(&(_, mask)) = PRIMITIVE_POLYNOMIALS.iter().find(|(d, _)| *d == n) {
        return Polynomial::new(mask);
    }
    primitive_polynomials(n)
        .first()
        .copied()
        .ok_or(SeqError::InvalidPolynomial(1 << n.min(31)))
}

pub(super) fn shipped_preferred_pair(n: u32) -> Result<(Polynomial, Polynomial), SeqError> {
    validated_tables().clone()?;
    let &(_, a, b) = GOLD_PREFERRED_PAIRS
        .iter()
        .find(|(d, _, _)| *d == n)
        .ok_or(SeqError::NoPreferredPair(n))?;
    Ok((Polynomial::new(a)?, Polynomial::new(b)?))
}
