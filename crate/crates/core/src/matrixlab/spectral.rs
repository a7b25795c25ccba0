//! Squared spectral norm `‖Φ‖² = λ_max(SSᵀ)/m`.
//!
//! `ΦΦᴴ = S·F·Fᴴ·Sᵀ/(mM) = SSᵀ/m` because `FFᴴ = M·I`. The largest
//! eigenvalue of the smaller of `SSᵀ` and `SᵀS` is found by power iteration.

use crate::seqgen::SignMatrix;

pub const POWER_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Dominant eigenvalue of a symmetric positive semidefinite operator of
/// dimension `n`, from a fixed start vector.
pub fn power_iteration<F>(n: usize, tolerance: f64, mut apply: F) -> PowerIteration
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + (i as f64 * 0.618_033_988_749_895).fract())
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut w = vec![0.0; n];
    let mut previous = f64::NAN;
    for it in 1..=MAX_ITERATIONS {
        apply(&v, &mut w);
        let lambda: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn == 0.0 {
            return PowerIteration {
                value: 0.0,
                iterations: it,
                converged: true,
            };
        }
        if (lambda - previous).abs() <= tolerance * lambda.abs() {
            return PowerIteration {
                value: lambda,
                iterations: it,
                converged: true,
            };
        }
        previous = lambda;
        for (a, b) in v.iter_mut().zip(&w) {
            *a = b / wn;
        }
    }
    PowerIteration {
        value: previous,
        iterations: MAX_ITERATIONS,
        converged: false,
    }
}

fn gram(vectors: &[Vec<i32>]) -> Vec<f64> {
    let n = vectors.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for k in i..n {
            let d: i64 = vectors[i]
                .iter()
                .zip(&vectors[k])
                .map(|(&a, &b)| (a * b) as i64)
                .sum();
            g[i * n + k] = d as f64;
            g[k * n + i] = d as f64;
        }
    }
    g
}

pub fn spectral_norm_sq(s: &SignMatrix) -> f64 {
    let (m, len) = (s.channels(), s.length());
    let vectors: Vec<Vec<i32>> = if m <= len {
        s.rows()
            .iter()
            .map(|r| r.as_slice().iter().map(|&x| x as i32).collect())
            .collect()
    } else {
        (0..len)
            .map(|j| s.rows().iter().map(|r| r.as_slice()[j] as i32).collect())
            .collect()
    };
    let n = vectors.len();
    let g = gram(&vectors);
    let result = power_iteration(n, POWER_TOLERANCE, |v, w| {
        for (i, out) in w.iter_mut().enumerate() {
            *out = g[i * n..(i + 1) * n]
                .iter()
                .zip(v)
                .map(|(a, b)| a * b)
                .sum();
        }
    });
    result.value / m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixlab::SensingMatrix;
    use crate::seqgen::{build_sign_matrix, FamilySpec};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn oracle(s: &SignMatrix) -> f64 {
        let phi = SensingMatrix::new(s);
        let e = phi.entries();
        let a = DMatrix::from_fn(e.nrows(), e.ncols(), |i, j| {
            nalgebra::Complex::new(e[[i, j]].re, e[[i, j]].im)
        });
        let sv = a.singular_values();
        sv.max().powi(2)
    }

    #[test]
    fn matches_singular_value_oracle() {
        for spec in [
            FamilySpec::random(63, 12, 1),
            FamilySpec::random(31, 40, 2),
            FamilySpec::gold(5, 20),
            FamilySpec::maximal(6, 30),
        ] {
            let s = build_sign_matrix(&spec).unwrap();
            assert_relative_eq!(spectral_norm_sq(&s), oracle(&s), max_relative = 1e-8);
        }
    }

    #[test]
    fn orthogonal_rows() {
        let s = build_sign_matrix(&FamilySpec::hadamard(512, 80)).unwrap();
        assert_relative_eq!(spectral_norm_sq(&s), 512.0 / 80.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_operator() {
        let r = power_iteration(3, 1e-10, |_, w| w.iter_mut().for_each(|x| *x = 0.0));
        assert_eq!(r.value, 0.0);
    }
}
