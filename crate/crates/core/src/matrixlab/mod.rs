//! The scaled sensing matrix `Φ = S·F / √(mM)` and its quality measures.
//!
//! `F[j, k] = exp(−2πi·jk/M)` is the unnormalized DFT with unit-modulus
//! entries. The DFT column permutation of the analog model is not applied:
//! coherence, spectral norm and the row measures are all invariant under
//! column permutations of `Φ`.

mod coherence;
mod quality;
mod spectral;

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::seqgen::{SeqError, SignMatrix};

pub use coherence::{Coherence, CoherenceAccumulator, ZERO_COLUMN_TOL};
pub use quality::{
    bound_slacks, quality_bounds_check, quality_measures, row_measures, welch_bound, BoundSlacks,
    QualityReport, RowMeasures,
};
pub use spectral::{power_iteration, spectral_norm_sq, PowerIteration};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error("every column of the sensing matrix is zero")]
    AllColumnsZero,
    #[error("quality bound violated: {inequality} (slack {slack:e})")]
    BoundViolated {
        inequality: &'static str,
        slack: f64,
    },
}

/// Unnormalized DFT of every row of `S`, `Ŝ_i[j] = Σ_k S[i,k]·exp(−2πi·jk/M)`.
pub fn row_spectra(s: &SignMatrix) -> Vec<Vec<Complex64>> {
    let fft = FftPlanner::new().plan_fft_forward(s.length());
    s.rows()
        .iter()
        .map(|row| {
            let mut buf: Vec<Complex64> = row
                .as_slice()
                .iter()
                .map(|&x| Complex64::new(x as f64, 0.0))
                .collect();
            fft.process(&mut buf);
            buf
        })
        .collect()
}

/// Complex `m × M` matrix `Φ = S·F / √(mM)`.
#[derive(Debug, Clone)]
pub struct SensingMatrix {
    entries: Array2<Complex64>,
    source: SignMatrix,
    scaling: f64,
}

impl SensingMatrix {
    pub fn new(s: &SignMatrix) -> Self {
        let (m, len) = (s.channels(), s.length());
        let scaling = 1.0 / ((m * len) as f64).sqrt();
        let mut entries = Array2::zeros((m, len));
        for (i, spec) in row_spectra(s).into_iter().enumerate() {
            for (j, z) in spec.into_iter().enumerate() {
                entries[[i, j]] = z * scaling;
            }
        }
        Self {
            entries,
            source: s.clone(),
            scaling,
        }
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn source(&self) -> &SignMatrix {
        &self.source
    }

    /// The scalar `1/√(mM)`.
    pub fn scaling(&self) -> f64 {
        self.scaling
    }

    pub fn channels(&self) -> usize {
        self.entries.nrows()
    }

    pub fn length(&self) -> usize {
        self.entries.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, Complex64> {
        self.entries.column(j)
    }

    pub fn column_norms_sq(&self) -> Vec<f64> {
        self.entries
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    /// Columns stored contiguously, for inner loops that gather a few
    /// columns per draw.
    pub fn columns_contiguous(&self) -> Vec<Vec<Complex64>> {
        self.entries
            .columns()
            .into_iter()
            .map(|c| c.to_vec())
            .collect()
    }
}

pub fn sensing_matrix(s: &SignMatrix) -> SensingMatrix {
    SensingMatrix::new(s)
}
