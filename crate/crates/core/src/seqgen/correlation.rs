//! Integer cyclic convolution and correlation of sign patterns.
//!
//! The transform path rounds the inverse FFT to the nearest integer. For ±1
//! inputs every output is an integer of magnitude at most `M`, and the FFT
//! error stays many orders of magnitude below 0.5 for any practical `M`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{BinarySequence, SeqError};

fn check_lengths(a: &BinarySequence, b: &BinarySequence) -> Result<usize, SeqError> {
    if a.len() != b.len() {
        return Err(SeqError::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.len())
}

fn spectrum(fft: &Arc<dyn Fft<f64>>, s: &BinarySequence) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = s
        .as_slice()
        .iter()
        .map(|&x| Complex64::new(x as f64, 0.0))
        .collect();
    fft.process(&mut buf);
    buf
}

fn round_inverse(ifft: &Arc<dyn Fft<f64>>, mut buf: Vec<Complex64>) -> Vec<i64> {
    let len = buf.len() as f64;
    ifft.process(&mut buf);
    buf.iter().map(|z| (z.re / len).round() as i64).collect()
}

/// `c[l] = Σ_n a[n]·b[(l − n) mod M]`.
pub fn cyclic_convolution(a: &BinarySequence, b: &BinarySequence) -> Result<Vec<i64>, SeqError> {
    let len = check_lengths(a, b)?;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    let fa = spectrum(&fft, a);
    let fb = spectrum(&fft, b);
    let prod = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    Ok(round_inverse(&ifft, prod))
}

/// Reference `O(M²)` evaluation of [`cyclic_convolution`].
pub fn direct_cyclic_convolution(
    a: &BinarySequence,
    b: &BinarySequence,
) -> Result<Vec<i64>, SeqError> {
    let len = check_lengths(a, b)?;
    let (a, b) = (a.as_slice(), b.as_slice());
    Ok((0..len)
        .map(|l| {
            (0..len)
                .map(|n| (a[n] as i64) * (b[(l + len - n) % len] as i64))
                .sum()
        })
        .collect())
}

/// Periodic correlation `R[τ] = Σ_n a[n]·b[(n + τ) mod M]`.
pub fn cyclic_correlation(a: &BinarySequence, b: &BinarySequence) -> Result<Vec<i64>, SeqError> {
    let len = check_lengths(a, b)?;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    let fa = spectrum(&fft, a);
    let fb = spectrum(&fft, b);
    let prod = fa.iter().zip(&fb).map(|(x, y)| x.conj() * y).collect();
    Ok(round_inverse(&ifft, prod))
}

/// Cached spectra of a sequence set, for all-pairs correlation checks.
pub struct CorrelationBank {
    spectra: Vec<Vec<Complex64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl CorrelationBank {
    pub fn new(seqs: &[BinarySequence]) -> Result<Self, SeqError> {
        let first = seqs.first().ok_or(SeqError::Empty)?;
        for s in seqs {
            check_lengths(first, s)?;
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(first.len());
        Ok(Self {
            spectra: seqs.iter().map(|s| spectrum(&fft, s)).collect(),
            ifft: planner.plan_fft_inverse(first.len()),
        })
    }

    pub fn len(&self) -> usize {
        self.spectra.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectra.is_empty()
    }

    /// Same as [`cyclic_correlation`] of members `i` and `k`.
    pub fn correlation(&self, i: usize, k: usize) -> Vec<i64> {
        let prod = self.spectra[i]
            .iter()
            .zip(&self.spectra[k])
            .map(|(x, y)| x.conj() * y)
            .collect();
        round_inverse(&self.ifft, prod)
    }
}
