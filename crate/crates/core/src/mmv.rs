//! Multiple-measurement-vector problems `V = ΦU + N` and their row-support
//! recovery by simultaneous orthogonal matching pursuit (SOMP).

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::guarantees::NonzeroDistribution;
use crate::matrixlab::SensingMatrix;
use crate::mc_oracle::draw_support;
use crate::rng::{self, Domain};
use crate::seqgen::{build_sign_matrix, FamilySpec, SeqError};

/// Relative norm below which a new column counts as linearly dependent on
/// the ones already selected.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MmvError {
    #[error("support index {index} out of range for M = {length}")]
    SupportOutOfRange { index: usize, length: usize },
    #[error("support index {0} repeated")]
    RepeatedSupport(usize),
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[derive(Debug, Clone)]
pub struct MmvInstance<'a> {
    pub phi: &'a SensingMatrix,
    /// Ascending row support of `U`.
    pub support: Vec<usize>,
    /// `M × r`, zero outside `support`.
    pub u: Array2<Complex64>,
    /// `m × r`.
    pub v: Array2<Complex64>,
    pub noise_sigma: f64,
    /// Set when `U = 0` and there is no noise, so `V = 0`.
    pub degenerate: bool,
}

fn synthesize_with<'a, R: Rng + ?Sized>(
    phi: &'a SensingMatrix,
    support: &[usize],
    r: usize,
    dist: &NonzeroDistribution,
    noise_sigma: f64,
    rng: &mut R,
) -> Result<MmvInstance<'a>, MmvError> {
    let (m, length) = (phi.channels(), phi.length());
    if r == 0 {
        return Err(MmvError::InvalidParameter("r must be at least 1".into()));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(MmvError::InvalidParameter(format!(
            "noise sigma must be a finite nonnegative number, got {noise_sigma}"
        )));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            return Err(MmvError::RepeatedSupport(w[0]));
        }
    }
    if let Some(&index) = sorted.iter().find(|&&i| i >= length) {
        return Err(MmvError::SupportOutOfRange { index, length });
    }
    let mut u = Array2::from_elem((length, r), zero());
    for &i in &sorted {
        for c in 0..r {
            u[[i, c]] = dist.sample(rng);
        }
    }
    let mut v = Array2::from_elem((m, r), zero());
    for &i in &sorted {
        let col = phi.column(i);
        for c in 0..r {
            let x = u[[i, c]];
            for row in 0..m {
                v[[row, c]] += col[row] * x;
            }
        }
    }
    if noise_sigma > 0.0 {
        let s = noise_sigma / 2f64.sqrt();
        for z in v.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z += Complex64::new(re * s, im * s);
        }
    }
    Ok(MmvInstance {
        phi,
        degenerate: sorted.is_empty() && noise_sigma == 0.0,
        support: sorted,
        u,
        v,
        noise_sigma,
    })
}

/// Fills `U` on `support` with i.i.d. draws across its `r` columns and adds
/// circular complex Gaussian noise with per-entry standard deviation
/// `noise_sigma`.
pub fn synthesize_mmv<'a>(
    phi: &'a SensingMatrix,
    support: &[usize],
    r: usize,
    dist: &NonzeroDistribution,
    noise_sigma: f64,
    seed: u64,
) -> Result<MmvInstance<'a>, MmvError> {
    let mut rng = rng::stream(seed, Domain::MmvTrials, 0);
    synthesize_with(phi, support, r, dist, noise_sigma, &mut rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SompResult {
    /// Ascending selected indices.
    pub support: Vec<usize>,
    /// Indices in the order they were picked.
    pub order: Vec<usize>,
    /// The next pick was linearly dependent on the current selection and
    /// the iteration stopped early.
    pub rank_deficient: bool,
    /// Frobenius norm of the final residual.
    pub residual_norm: f64,
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Simultaneous OMP: picks the column maximizing `‖Φ_jᴴ R‖₂`, ties to the
/// lowest index, then projects the residual off the span of the selection.
pub fn somp(
    phi: ArrayView2<'_, Complex64>,
    v: ArrayView2<'_, Complex64>,
    k_target: usize,
) -> Result<SompResult, MmvError> {
    let (m, length) = phi.dim();
    if v.nrows() != m {
        return Err(MmvError::InvalidParameter(format!(
            "V has {} rows, expected {m}",
            v.nrows()
        )));
    }
    if k_target > m {
        return Err(MmvError::InvalidParameter(format!(
            "k_target = {k_target} exceeds m = {m}"
        )));
    }
    let columns: Vec<Vec<Complex64>> = phi.columns().into_iter().map(|c| c.to_vec()).collect();
    let mut residual: Vec<Vec<Complex64>> = v.columns().into_iter().map(|c| c.to_vec()).collect();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(k_target);
    let mut order = Vec::with_capacity(k_target);
    let mut selected = vec![false; length];
    let mut rank_deficient = false;
    for _ in 0..k_target {
        let mut best: Option<(usize, f64)> = None;
        for (j, col) in columns.iter().enumerate() {
            if selected[j] {
                continue;
            }
            let score: f64 = residual.iter().map(|rc| inner(col, rc).norm_sqr()).sum();
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let Some((j, _)) = best else { break };
        // modified Gram-Schmidt, applied twice
        let mut w = columns[j].clone();
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let wn = norm(&w);
        if wn <= RANK_TOL * norm(&columns[j]).max(f64::MIN_POSITIVE) {
            rank_deficient = true;
            break;
        }
        w.iter_mut().for_each(|x| *x /= wn);
        for rc in residual.iter_mut() {
            let c = inner(&w, rc);
            for (ri, qi) in rc.iter_mut().zip(&w) {
                *ri -= c * qi;
            }
        }
        basis.push(w);
        selected[j] = true;
        order.push(j);
    }
    let mut support = order.clone();
    support.sort_unstable();
    let residual_norm = residual
        .iter()
        .map(|c| c.iter().map(|x| x.norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    Ok(SompResult {
        support,
        order,
        rank_deficient,
        residual_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum NoiseSpec {
    /// Per-entry noise standard deviation.
    Sigma(f64),
    /// `10·log10(E‖ΦU‖²_F / E‖N‖²_F)`.
    SnrDb(f64),
}

impl NoiseSpec {
    /// Per-entry standard deviation for `K` nonzero rows of law `dist` in
    /// an `m`-channel system.
    pub fn sigma(self, k_rows: usize, m: usize, dist: &NonzeroDistribution) -> f64 {
        match self {
            NoiseSpec::Sigma(s) => s,
            NoiseSpec::SnrDb(db) => {
                let signal = k_rows as f64 * dist.second_moment();
                (signal / (m as f64 * 10f64.powf(db / 10.0))).sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryParams {
    pub family: FamilySpec,
    pub k_rows: usize,
    pub r: usize,
    pub noise: NoiseSpec,
    pub dist: NonzeroDistribution,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub exact_match: bool,
    pub rank_deficient: bool,
    pub true_support: Vec<usize>,
    pub estimated_support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub params: RecoveryParams,
    pub m: usize,
    #[serde(rename = "M")]
    pub length: usize,
    pub noise_sigma: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub stderr: f64,
    pub outcomes: Vec<TrialOutcome>,
}

impl RecoveryReport {
    /// One line per trial: `trial,exact_match,rank_deficient,true_support,estimated_support`,
    /// supports as space-separated indices.
    pub fn outcomes_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "trial",
            "exact_match",
            "rank_deficient",
            "true_support",
            "estimated_support",
        ])
        .expect("in-memory write");
        let join = |s: &[usize]| {
            s.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        for o in &self.outcomes {
            w.write_record([
                o.trial.to_string(),
                o.exact_match.to_string(),
                o.rank_deficient.to_string(),
                join(&o.true_support),
                join(&o.estimated_support),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii")
    }
}

/// Runs `trials` independent recoveries on one sign matrix; trial `t`
/// draws its support, values and noise from the stream keyed by `(seed, t)`.
pub fn recovery_experiment(params: &RecoveryParams) -> Result<RecoveryReport, MmvError> {
    let s = build_sign_matrix(&params.family)?;
    let phi = SensingMatrix::new(&s);
    let (m, length) = (phi.channels(), phi.length());
    if params.k_rows > m || params.k_rows > length {
        return Err(MmvError::InvalidParameter(format!(
            "K_rows = {} must not exceed m = {m} or M = {length}",
            params.k_rows
        )));
    }
    if params.trials == 0 {
        return Err(MmvError::InvalidParameter(
            "trials must be at least 1".into(),
        ));
    }
    let sigma = params.noise.sigma(params.k_rows, m, &params.dist);
    let outcomes = (0..params.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng::stream(params.seed, Domain::MmvTrials, trial as u64);
            let support = draw_support(length, params.k_rows, &mut rng);
            let inst = synthesize_with(&phi, &support, params.r, &params.dist, sigma, &mut rng)?;
            let est = somp(phi.entries().view(), inst.v.view(), params.k_rows)?;
            Ok(TrialOutcome {
                trial,
                exact_match: est.support == inst.support,
                rank_deficient: est.rank_deficient,
                true_support: inst.support,
                estimated_support: est.support,
            })
        })
        .collect::<Result<Vec<_>, MmvError>>()?;
    let successes = outcomes.iter().filter(|o| o.exact_match).count();
    let rate = successes as f64 / params.trials as f64;
    Ok(RecoveryReport {
        params: *params,
        m,
        length,
        noise_sigma: sigma,
        trials: params.trials,
        successes,
        success_rate: rate,
        stderr: (rate * (1.0 - rate) / params.trials as f64).sqrt(),
        outcomes,
    })
}
