//! Brute-force check of the expected-RIP bound.
//!
//! Random `K`-sparse vectors with a uniform support and i.i.d. nonzeros are
//! pushed through `Φ`, and `Z² = ‖Φu‖²/‖u‖²` is compared with `[1−δ, 1+δ]`.
//! Trial `t` draws from the stream keyed by `(seed, t)`, and trials are
//! reduced in fixed chunks, so estimates do not depend on the thread count.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::guarantees::{
    exrip_probability, moment_constants, ExripInputs, GuaranteeError, GuaranteeResult,
    MomentConstants, MomentMethod, NonzeroDistribution,
};
use crate::matrixlab::{row_measures, SensingMatrix};
use crate::rng::{self, Domain};
use crate::seqgen::SignMatrix;

pub const MIN_TRIALS: usize = 1000;
const CHUNK: usize = 1024;
const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("at least {min} trials are required, got {got}")]
    TooFewTrials { got: usize, min: usize },
    #[error("sparsity K = {k} must satisfy 1 <= K <= M = {length}")]
    InvalidSparsity { k: usize, length: usize },
    #[error("delta must be positive, got {0}")]
    InvalidDelta(f64),
    #[error(transparent)]
    Guarantee(#[from] GuaranteeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub length: usize,
    /// Ascending support indices.
    pub support: Vec<usize>,
    /// Nonzero values, aligned with `support`.
    pub values: Vec<Complex64>,
}

impl SparseVector {
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.length];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }
}

/// Uniform `K`-subset by partial Fisher-Yates, then i.i.d. values in
/// ascending index order.
pub fn sample_sparse_vector<R: Rng + ?Sized>(
    length: usize,
    k: usize,
    dist: &NonzeroDistribution,
    rng: &mut R,
) -> Result<SparseVector, OracleError> {
    if k == 0 || k > length {
        return Err(OracleError::InvalidSparsity { k, length });
    }
    let mut support = draw_support(length, k, rng);
    support.sort_unstable();
    let values = support.iter().map(|_| dist.sample(rng)).collect();
    Ok(SparseVector {
        length,
        support,
        values,
    })
}

pub(crate) fn draw_support<R: Rng + ?Sized>(length: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..length).collect();
    for i in 0..k {
        let j = rng.random_range(i..length);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExripEstimate {
    pub trials: usize,
    pub k: usize,
    pub delta: f64,
    pub seed: u64,
    /// Fraction of trials with `|Z² − 1| ≤ δ`.
    pub empirical_p: f64,
    /// Binomial standard error of `empirical_p`.
    pub stderr: f64,
    pub moment2: f64,
    pub moment2_stderr: f64,
    pub moment4: f64,
    pub moment4_stderr: f64,
    /// Largest observed `|Z² − 1|`.
    pub max_deviation: f64,
    /// Draws discarded because `‖u‖²` underflowed.
    pub redraws: usize,
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    n: usize,
    inside: usize,
    z2: f64,
    z2_sq: f64,
    z4_sq: f64,
    max_dev: f64,
    redraws: usize,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            n: self.n + o.n,
            inside: self.inside + o.inside,
            z2: self.z2 + o.z2,
            z2_sq: self.z2_sq + o.z2_sq,
            z4_sq: self.z4_sq + o.z4_sq,
            max_dev: self.max_dev.max(o.max_dev),
            redraws: self.redraws + o.redraws,
        }
    }
}

fn mean_stderr(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// `Z²` of one trial.
fn trial_z2(
    columns: &[Vec<Complex64>],
    k: usize,
    dist: &NonzeroDistribution,
    seed: u64,
    trial: usize,
    redraws: &mut usize,
) -> f64 {
    let m = columns[0].len();
    let mut rng = rng::stream(seed, Domain::ExripTrials, trial as u64);
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    loop {
        let u = sample_sparse_vector(columns.len(), k, dist, &mut rng).expect("validated");
        let norm2 = u.norm_sqr();
        if norm2 < UNDERFLOW {
            *redraws += 1;
            continue;
        }
        y.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (&j, &v) in u.support.iter().zip(&u.values) {
            for (yi, phi) in y.iter_mut().zip(&columns[j]) {
                *yi += phi * v;
            }
        }
        return y.iter().map(|v| v.norm_sqr()).sum::<f64>() / norm2;
    }
}

pub fn empirical_exrip(
    phi: &SensingMatrix,
    k: usize,
    delta: f64,
    dist: &NonzeroDistribution,
    trials: usize,
    seed: u64,
) -> Result<ExripEstimate, OracleError> {
    if trials < MIN_TRIALS {
        return Err(OracleError::TooFewTrials {
            got: trials,
            min: MIN_TRIALS,
        });
    }
    if k == 0 || k > phi.length() {
        return Err(OracleError::InvalidSparsity {
            k,
            length: phi.length(),
        });
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(OracleError::InvalidDelta(delta));
    }
    let columns = phi.columns_contiguous();
    let chunks = trials.div_ceil(CHUNK);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::default();
            for trial in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let z2 = trial_z2(&columns, k, dist, seed, trial, &mut t.redraws);
                let z4 = z2 * z2;
                let dev = (z2 - 1.0).abs();
                t.n += 1;
                t.inside += usize::from(dev <= delta);
                t.z2 += z2;
                t.z2_sq += z4;
                t.z4_sq += z4 * z4;
                t.max_dev = t.max_dev.max(dev);
            }
            t
        })
        .collect();
    let total = tallies.into_iter().fold(Tally::default(), Tally::merge);
    let n = total.n as f64;
    let p = total.inside as f64 / n;
    let (moment2, moment2_stderr) = mean_stderr(total.z2, total.z2_sq, total.n);
    let (moment4, moment4_stderr) = mean_stderr(total.z2_sq, total.z4_sq, total.n);
    Ok(ExripEstimate {
        trials,
        k,
        delta,
        seed,
        empirical_p: p,
        stderr: (p * (1.0 - p) / n).sqrt(),
        moment2,
        moment2_stderr,
        moment4,
        moment4_stderr,
        max_deviation: total.max_dev,
        redraws: total.redraws,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    /// `empirical_p + 3·stderr ≥ p`.
    pub bound_holds: bool,
    /// `|E[Z²] − 1| ≤ 3·stderr`.
    pub mean_one: bool,
    /// `1 + δ²(1 − p_raw)`, the fourth moment a pure Chebyshev argument
    /// would give. Informational.
    pub moment4_chebyshev: f64,
    pub moment4_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub family: String,
    pub m: usize,
    #[serde(rename = "M")]
    pub length: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub constants: MomentConstants,
    pub theoretical: GuaranteeResult,
    pub estimate: ExripEstimate,
    pub verdicts: Verdicts,
}

/// Floor on the tolerance of the mean-one check, for the isometry case
/// where the standard error vanishes.
const MEAN_ONE_FLOOR: f64 = 1e-12;

pub fn bound_validity_report(
    s: &SignMatrix,
    k: usize,
    delta: f64,
    dist: &NonzeroDistribution,
    moments: MomentMethod,
    trials: usize,
    seed: u64,
) -> Result<ValidityReport, OracleError> {
    let rows = row_measures(s);
    let constants = moment_constants(dist, k, moments)?;
    let theoretical = exrip_probability(&ExripInputs::from_rows(&rows, k, delta, constants))?;
    let estimate = empirical_exrip(&SensingMatrix::new(s), k, delta, dist, trials, seed)?;
    let chebyshev = 1.0 + delta * delta * (1.0 - theoretical.raw_value);
    let verdicts = Verdicts {
        bound_holds: estimate.empirical_p + 3.0 * estimate.stderr >= theoretical.probability,
        mean_one: (estimate.moment2 - 1.0).abs()
            <= (3.0 * estimate.moment2_stderr).max(MEAN_ONE_FLOOR),
        moment4_chebyshev: chebyshev,
        moment4_gap: estimate.moment4 - chebyshev,
    };
    Ok(ValidityReport {
        family: s.family_tag().to_string(),
        m: s.channels(),
        length: s.length(),
        alpha: rows.alpha(),
        beta: rows.beta(),
        gamma: rows.gamma(),
        constants,
        theoretical,
        estimate,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guarantees::DistKind;
    use crate::seqgen::{build_sign_matrix, FamilySpec, Selection};
    use crate::DEFAULT_DELTA;

    fn dist(kind: DistKind) -> NonzeroDistribution {
        NonzeroDistribution::standard(kind)
    }

    #[test]
    fn full_support_and_sign_values() {
        let mut rng = rng::stream(1, Domain::ExripTrials, 0);
        let u = sample_sparse_vector(9, 9, &dist(DistKind::BernoulliSign), &mut rng).unwrap();
        assert_eq!(u.support, (0..9).collect::<Vec<_>>());
        assert!(u.values.iter().all(|v| v.re.abs() == 1.0 && v.im == 0.0));
        assert!(sample_sparse_vector(9, 10, &dist(DistKind::RealNormal), &mut rng).is_err());
        let dense = u.to_dense();
        assert_eq!(dense.len(), 9);
    }

    #[test]
    fn support_frequencies_are_uniform() {
        let (length, k, draws) = (195usize, 12usize, 100_000usize);
        let mut counts = vec![0usize; length];
        let mut rng = rng::stream(2024, Domain::ExripTrials, 0);
        for _ in 0..draws {
            let u = sample_sparse_vector(length, k, &dist(DistKind::RealNormal), &mut rng).unwrap();
            assert_eq!(u.support.len(), k);
            assert!(u.support.windows(2).all(|w| w[0] < w[1]));
            for i in u.support {
                counts[i] += 1;
            }
        }
        let p = k as f64 / length as f64;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!((c as f64 - mean).abs() <= 3.0 * sigma, "index {i}: {c}");
        }
    }

    #[test]
    fn isometry_case() {
        let s =
            build_sign_matrix(&FamilySpec::hadamard(64, 64).with_selection(Selection::Offset(0)))
                .unwrap();
        let phi = SensingMatrix::new(&s);
        let est = empirical_exrip(&phi, 5, 1e-9, &dist(DistKind::ComplexNormal), 2000, 4).unwrap();
        assert_eq!(est.empirical_p, 1.0);
        assert!((est.moment2 - 1.0).abs() < 1e-12);
        assert!((est.moment4 - 1.0).abs() < 1e-12);
        assert!(est.max_deviation < 1e-12);
    }

    #[test]
    fn large_delta_covers_everything() {
        let s = build_sign_matrix(&FamilySpec::random(63, 10, 1)).unwrap();
        let phi = SensingMatrix::new(&s);
        let d = dist(DistKind::RealUniform);
        let est = empirical_exrip(&phi, 4, 0.3, &d, 2000, 8).unwrap();
        let all = empirical_exrip(&phi, 4, est.max_deviation, &d, 2000, 8).unwrap();
        assert_eq!(all.empirical_p, 1.0);
    }

    #[test]
    fn scale_invariance() {
        let s = build_sign_matrix(&FamilySpec::random(63, 10, 1)).unwrap();
        let phi = SensingMatrix::new(&s);
        let a = empirical_exrip(&phi, 4, 0.3, &dist(DistKind::ComplexNormal), 3000, 8).unwrap();
        let scaled = NonzeroDistribution::new(DistKind::ComplexNormal, 7.5).unwrap();
        let b = empirical_exrip(&phi, 4, 0.3, &scaled, 3000, 8).unwrap();
        assert_eq!(a.empirical_p, b.empirical_p);
        assert!((a.moment2 - b.moment2).abs() < 1e-12);
        assert!((a.moment4 - b.moment4).abs() < 1e-12);
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let s = build_sign_matrix(&FamilySpec::random(63, 10, 1)).unwrap();
        let phi = SensingMatrix::new(&s);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    empirical_exrip(&phi, 4, 0.3, &dist(DistKind::ComplexNormal), 5000, 8).unwrap()
                })
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn rejects_small_trial_counts() {
        let s = build_sign_matrix(&FamilySpec::random(63, 10, 1)).unwrap();
        let phi = SensingMatrix::new(&s);
        assert!(matches!(
            empirical_exrip(&phi, 4, 0.3, &dist(DistKind::ComplexNormal), 999, 8),
            Err(OracleError::TooFewTrials { .. })
        ));
    }

    #[test]
    fn random2_mean_one_and_bound_validity() {
        let s = build_sign_matrix(&FamilySpec::random(195, 40, 17)).unwrap();
        let r = bound_validity_report(
            &s,
            24,
            DEFAULT_DELTA,
            &dist(DistKind::ComplexNormal),
            MomentMethod::MonteCarlo {
                samples: 200_000,
                seed: 1,
            },
            20_000,
            5,
        )
        .unwrap();
        assert!(r.verdicts.mean_one, "{:?}", r.estimate);
        assert!(r.verdicts.bound_holds);
        assert!(r.theoretical.probability > 0.8);
    }
}
