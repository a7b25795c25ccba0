//! Correlation-energy measures α, β, γ and the full quality report.
//!
//! All three energies are accumulated in exact integer arithmetic.
//! β uses `‖a ⊛ b‖² = Σ_τ R_a[τ]·R_b[τ]`, with `R` the periodic
//! autocorrelation, which gives `Σ_{i,k} ‖S_i ⊛ S_k‖² = Σ_τ (Σ_i R_i[τ])²`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{row_spectra, CoherenceAccumulator, MatrixError};
use crate::seqgen::SignMatrix;

const SLACK_TOLERANCE: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub spectral_norm_sq: f64,
    pub m: usize,
    #[serde(rename = "M")]
    pub length: usize,
    pub zero_columns: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowMeasures {
    pub m: usize,
    pub length: usize,
    /// `Σ_{i,k} (S_iᵀS_k)²`
    pub alpha_energy: u128,
    /// `Σ_{i,k} ‖S_i ⊛ S_k‖²`
    pub beta_energy: u128,
    /// `Σ_{i,k} (S_iᵀS_k⁻)²`
    pub gamma_energy: u128,
}

impl RowMeasures {
    pub fn alpha(&self) -> f64 {
        self.alpha_energy as f64 / ((self.m * self.length) as f64).powi(2)
    }

    pub fn beta(&self) -> f64 {
        let (m, len) = (self.m as f64, self.length as f64);
        self.beta_energy as f64 / (m * m * len * len * len)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_energy as f64 / ((self.m * self.length) as f64).powi(2)
    }
}

fn dot(a: &[i8], b: &[i8]) -> i64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x as i32 * y as i32) as i64)
        .sum()
}

/// `Σ_{i,k} (a_i·b_k)²` for a symmetric pairing, summed over `i ≤ k`.
fn symmetric_pair_energy(left: &[Vec<i8>], right: &[Vec<i8>]) -> u128 {
    (0..left.len())
        .into_par_iter()
        .map(|i| {
            let mut acc: u128 = 0;
            for (k, r) in right.iter().enumerate().skip(i) {
                let d = dot(&left[i], r) as i128;
                let sq = (d * d) as u128;
                acc += if i == k { sq } else { 2 * sq };
            }
            acc
        })
        .sum()
}

/// Sum over rows of the periodic autocorrelation, `Σ_i R_i[τ]`.
pub fn summed_autocorrelation(s: &SignMatrix) -> Vec<i64> {
    let len = s.length();
    let ifft = FftPlanner::new().plan_fft_inverse(len);
    let mut total = vec![0i64; len];
    for spec in row_spectra(s) {
        let mut buf: Vec<Complex64> = spec
            .iter()
            .map(|z| Complex64::new(z.norm_sqr(), 0.0))
            .collect();
        ifft.process(&mut buf);
        for (t, z) in total.iter_mut().zip(&buf) {
            *t += (z.re / len as f64).round() as i64;
        }
    }
    total
}

pub fn row_measures(s: &SignMatrix) -> RowMeasures {
    let rows: Vec<Vec<i8>> = s.rows().iter().map(|r| r.as_slice().to_vec()).collect();
    let reversed: Vec<Vec<i8>> = s
        .rows()
        .iter()
        .map(|r| r.reversed().as_slice().to_vec())
        .collect();
    let alpha_energy = symmetric_pair_energy(&rows, &rows);
    let gamma_energy = symmetric_pair_energy(&rows, &reversed);
    let beta_energy = summed_autocorrelation(s)
        .iter()
        .map(|&v| (v as i128 * v as i128) as u128)
        .sum();
    RowMeasures {
        m: s.channels(),
        length: s.length(),
        alpha_energy,
        beta_energy,
        gamma_energy,
    }
}

pub fn quality_measures(s: &SignMatrix) -> Result<QualityReport, MatrixError> {
    let rows = row_measures(s);
    let mut acc = CoherenceAccumulator::new(s.length());
    for spec in row_spectra(s) {
        acc.push_spectrum(&spec);
    }
    let coherence = acc.coherence()?;
    Ok(QualityReport {
        alpha: rows.alpha(),
        beta: rows.beta(),
        gamma: rows.gamma(),
        mu: coherence.mu,
        spectral_norm_sq: super::spectral_norm_sq(s),
        m: s.channels(),
        length: s.length(),
        zero_columns: coherence.zero_columns,
    })
}

/// `(2m − 1)/(2mM − 1)`, the lower bound used for β and γ.
pub fn welch_bound(m: usize, length: usize) -> f64 {
    (2 * m - 1) as f64 / (2 * m * length - 1) as f64
}

/// Slack of each quality inequality; nonnegative when the bound holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSlacks {
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    pub beta_lower: f64,
    pub beta_upper: f64,
    pub gamma_lower: f64,
    pub gamma_upper: f64,
    pub mu_lower: f64,
    pub mu_upper: f64,
}

impl BoundSlacks {
    pub fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("1/m <= alpha", self.alpha_lower),
            ("alpha <= 1", self.alpha_upper),
            ("(2m-1)/(2mM-1) <= beta", self.beta_lower),
            ("beta <= 1", self.beta_upper),
            ("(2m-1)/(2mM-1) <= gamma", self.gamma_lower),
            ("gamma <= 1", self.gamma_upper),
            ("0 <= mu", self.mu_lower),
            ("mu <= 1", self.mu_upper),
        ]
    }
}

pub fn bound_slacks(report: &QualityReport) -> BoundSlacks {
    let w = welch_bound(report.m, report.length);
    BoundSlacks {
        alpha_lower: report.alpha - 1.0 / report.m as f64,
        alpha_upper: 1.0 - report.alpha,
        beta_lower: report.beta - w,
        beta_upper: 1.0 - report.beta,
        gamma_lower: report.gamma - w,
        gamma_upper: 1.0 - report.gamma,
        mu_lower: report.mu,
        mu_upper: 1.0 - report.mu,
    }
}

/// Checks every inequality, failing on the first one whose slack is below
/// `-1e-12`.
pub fn quality_bounds_check(report: &QualityReport) -> Result<BoundSlacks, MatrixError> {
    let slacks = bound_slacks(report);
    for (inequality, slack) in slacks.entries() {
        if slack < SLACK_TOLERANCE {
            return Err(MatrixError::BoundViolated { inequality, slack });
        }
    }
    Ok(slacks)
}
