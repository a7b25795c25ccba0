//! Mutual coherence of `Φ`, accumulated one row of `S` at a time.
//!
//! The accumulator keeps the unnormalized column Gram `Σ_i conj(Ŝ_i[j])·Ŝ_i[l]`
//! for `j < l`, so the coherence of every prefix `S[0..m]` is available
//! without rebuilding. The `1/(mM)` scaling cancels in the normalized inner
//! products.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::spectral::{power_iteration, POWER_TOLERANCE};
use super::MatrixError;
use crate::seqgen::BinarySequence;

/// Columns with `‖Φ_j‖² < ZERO_COLUMN_TOL` are treated as zero.
pub const ZERO_COLUMN_TOL: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coherence {
    pub mu: f64,
    pub zero_columns: usize,
}

pub struct CoherenceAccumulator {
    length: usize,
    rows: usize,
    gram_re: Vec<f64>,
    gram_im: Vec<f64>,
    diag: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    scratch_re: Vec<f64>,
    scratch_im: Vec<f64>,
}

impl std::fmt::Debug for CoherenceAccumulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoherenceAccumulator")
            .field("length", &self.length)
            .field("rows", &self.rows)
            .finish()
    }
}

impl CoherenceAccumulator {
    pub fn new(length: usize) -> Self {
        let pairs = length * length.saturating_sub(1) / 2;
        Self {
            length,
            rows: 0,
            gram_re: vec![0.0; pairs],
            gram_im: vec![0.0; pairs],
            diag: vec![0.0; length],
            fft: FftPlanner::new().plan_fft_forward(length.max(1)),
            scratch_re: vec![0.0; length],
            scratch_im: vec![0.0; length],
        }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Adds a row given its unnormalized spectrum.
    pub fn push_spectrum(&mut self, spectrum: &[Complex64]) {
        assert_eq!(spectrum.len(), self.length, "spectrum length mismatch");
        for (j, z) in spectrum.iter().enumerate() {
            self.scratch_re[j] = z.re;
            self.scratch_im[j] = z.im;
        }
        let (xr, xi) = (&self.scratch_re, &self.scratch_im);
        let len = self.length;
        let mut offset = 0;
        for j in 0..len {
            let (ar, ai) = (xr[j], xi[j]);
            self.diag[j] += ar * ar + ai * ai;
            let seg = len - j - 1;
            let gr = &mut self.gram_re[offset..offset + seg];
            let gi = &mut self.gram_im[offset..offset + seg];
            let (br, bi) = (&xr[j + 1..], &xi[j + 1..]);
            for t in 0..seg {
                gr[t] += ar * br[t] + ai * bi[t];
                gi[t] += ar * bi[t] - ai * br[t];
            }
            offset += seg;
        }
        self.rows += 1;
    }

    pub fn push_row(&mut self, row: &BinarySequence) {
        assert_eq!(row.len(), self.length, "row length mismatch");
        let mut buf: Vec<Complex64> = row
            .as_slice()
            .iter()
            .map(|&x| Complex64::new(x as f64, 0.0))
            .collect();
        self.fft.process(&mut buf);
        self.push_spectrum(&buf);
    }

    /// `‖Φ‖²` of the rows pushed so far, as the largest eigenvalue of the
    /// column Gram `ΦᴴΦ`.
    pub fn spectral_norm_sq(&self) -> f64 {
        if self.rows == 0 {
            return 0.0;
        }
        let len = self.length;
        let scale = (self.rows * len) as f64;
        // Hermitian Gram embedded as a real symmetric 2M × 2M operator
        let result = power_iteration(2 * len, POWER_TOLERANCE, |v, w| {
            let (ar, ai) = v.split_at(len);
            let (yr, yi) = w.split_at_mut(len);
            for j in 0..len {
                yr[j] = self.diag[j] * ar[j];
                yi[j] = self.diag[j] * ai[j];
            }
            let mut offset = 0;
            for j in 0..len {
                let seg = len - j - 1;
                let gr = &self.gram_re[offset..offset + seg];
                let gi = &self.gram_im[offset..offset + seg];
                let (mut sr, mut si) = (0.0, 0.0);
                for t in 0..seg {
                    let l = j + 1 + t;
                    sr += gr[t] * ar[l] - gi[t] * ai[l];
                    si += gr[t] * ai[l] + gi[t] * ar[l];
                    yr[l] += gr[t] * ar[j] + gi[t] * ai[j];
                    yi[l] += gr[t] * ai[j] - gi[t] * ar[j];
                }
                yr[j] += sr;
                yi[j] += si;
                offset += seg;
            }
        });
        result.value / scale
    }

    /// Coherence of the rows pushed so far, zero columns excluded.
    pub fn coherence(&self) -> Result<Coherence, MatrixError> {
        let scale = (self.rows * self.length) as f64;
        let inv: Vec<f64> = self
            .diag
            .iter()
            .map(|&d| {
                if self.rows > 0 && d / scale >= ZERO_COLUMN_TOL {
                    1.0 / d
                } else {
                    0.0
                }
            })
            .collect();
        let zero_columns = inv.iter().filter(|&&v| v == 0.0).count();
        if zero_columns == self.length {
            return Err(MatrixError::AllColumnsZero);
        }
        let len = self.length;
        let mut best = 0.0f64;
        let mut offset = 0;
        for j in 0..len {
            let seg = len - j - 1;
            if inv[j] != 0.0 {
                let gr = &self.gram_re[offset..offset + seg];
                let gi = &self.gram_im[offset..offset + seg];
                let row_inv = &inv[j + 1..];
                let mut local = 0.0f64;
                for t in 0..seg {
                    let v = (gr[t] * gr[t] + gi[t] * gi[t]) * row_inv[t];
                    local = local.max(v);
                }
                best = best.max(local * inv[j]);
            }
            offset += seg;
        }
        Ok(Coherence {
            mu: best.sqrt().min(1.0),
            zero_columns,
        })
    }
}
