//! Nonzero-value distributions and the moment constants `B_K`, `C_K`.
//!
//! For a vector `u` of `K` i.i.d. draws,
//! `B_K = E{|Σ u_i²|² / ‖u‖⁴}` and `C_K = E{Σ |u_i|⁴ / ‖u‖⁴}`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GuaranteeError;
use crate::rng::{self, Domain};

pub const MIN_MC_SAMPLES: usize = 100_000;
const BLOCK: usize = 8192;
const UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    RealNormal,
    RealUniform,
    ComplexNormal,
    ComplexUniform,
    BernoulliSign,
}

impl DistKind {
    pub const ALL: [DistKind; 5] = [
        DistKind::RealNormal,
        DistKind::RealUniform,
        DistKind::ComplexNormal,
        DistKind::ComplexUniform,
        DistKind::BernoulliSign,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistKind::RealNormal => "real_normal",
            DistKind::RealUniform => "real_uniform",
            DistKind::ComplexNormal => "complex_normal",
            DistKind::ComplexUniform => "complex_uniform",
            DistKind::BernoulliSign => "bernoulli_sign",
        }
    }

    pub fn is_real(self) -> bool {
        !matches!(self, DistKind::ComplexNormal | DistKind::ComplexUniform)
    }
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistKind {
    type Err = String;

    /// Accepts `complex_normal` and `complex-normal` alike.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        DistKind::ALL
            .into_iter()
            .find(|d| d.as_str() == key)
            .ok_or_else(|| format!("unknown distribution '{s}'"))
    }
}

/// Law of the nonzero entries. Uniform kinds draw from `[−0.5, 0.5]·scale`;
/// complex kinds draw real and imaginary parts independently.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NonzeroDistribution {
    pub kind: DistKind,
    pub scale: f64,
}

impl NonzeroDistribution {
    pub fn new(kind: DistKind, scale: f64) -> Result<Self, GuaranteeError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(GuaranteeError::InvalidParameter(format!(
                "distribution scale must be positive, got {scale}"
            )));
        }
        Ok(Self { kind, scale })
    }

    pub fn standard(kind: DistKind) -> Self {
        Self { kind, scale: 1.0 }
    }

    fn base<R: Rng + ?Sized>(&self, rng: &mut R, normal: bool) -> f64 {
        if normal {
            rng.sample::<f64, _>(StandardNormal)
        } else {
            rng.random::<f64>() - 0.5
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let z = match self.kind {
            DistKind::RealNormal => Complex64::new(self.base(rng, true), 0.0),
            DistKind::RealUniform => Complex64::new(self.base(rng, false), 0.0),
            DistKind::ComplexNormal => Complex64::new(self.base(rng, true), self.base(rng, true)),
            DistKind::ComplexUniform => {
                Complex64::new(self.base(rng, false), self.base(rng, false))
            }
            DistKind::BernoulliSign => {
                Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
            }
        };
        z * self.scale
    }

    /// `E|u|²`.
    pub fn second_moment(&self) -> f64 {
        let unit = match self.kind {
            DistKind::RealNormal | DistKind::BernoulliSign => 1.0,
            DistKind::RealUniform => 1.0 / 12.0,
            DistKind::ComplexNormal => 2.0,
            DistKind::ComplexUniform => 1.0 / 6.0,
        };
        unit * self.scale * self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum MomentMethod {
    ClosedForm,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum MomentSource {
    ClosedForm,
    MonteCarlo {
        samples: usize,
        seed: u64,
        stderr_b: f64,
        stderr_c: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentConstants {
    pub b: f64,
    pub c: f64,
    pub k: usize,
    pub source: MomentSource,
}

#[derive(Debug, Default, Clone, Copy)]
struct Sums {
    n: usize,
    b: f64,
    b2: f64,
    c: f64,
    c2: f64,
}

fn block_sums(dist: &NonzeroDistribution, k: usize, seed: u64, block: usize, count: usize) -> Sums {
    let mut rng = rng::stream(seed, Domain::Moments, block as u64);
    let mut sums = Sums::default();
    let mut u = vec![Complex64::new(0.0, 0.0); k];
    for _ in 0..count {
        let (norm2, quartic, square_sum) = loop {
            u.iter_mut().for_each(|x| *x = dist.sample(&mut rng));
            let norm2: f64 = u.iter().map(|x| x.norm_sqr()).sum();
            if norm2 >= UNDERFLOW {
                let quartic: f64 = u.iter().map(|x| x.norm_sqr().powi(2)).sum();
                let square_sum: Complex64 = u.iter().map(|x| x * x).sum();
                break (norm2, quartic, square_sum);
            }
        };
        let n4 = norm2 * norm2;
        let c = quartic / n4;
        let b = if dist.kind.is_real() {
            1.0
        } else {
            square_sum.norm_sqr() / n4
        };
        sums.n += 1;
        sums.b += b;
        sums.b2 += b * b;
        sums.c += c;
        sums.c2 += c * c;
    }
    sums
}

fn mean_stderr(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Computes `(B_K, C_K)`.
///
/// `K = 1` is exact for every kind. The closed form exists only for
/// `real_normal`, where `C_K = 3K/(2K + K²)`. Monte Carlo runs in blocks of
/// 8192 samples, each on its own stream, so the estimate does not depend on
/// the thread count.
pub fn moment_constants(
    dist: &NonzeroDistribution,
    k: usize,
    method: MomentMethod,
) -> Result<MomentConstants, GuaranteeError> {
    if k == 0 {
        return Err(GuaranteeError::InvalidParameter(
            "K must be at least 1".into(),
        ));
    }
    if k == 1 {
        return Ok(MomentConstants {
            b: 1.0,
            c: 1.0,
            k,
            source: MomentSource::ClosedForm,
        });
    }
    match method {
        MomentMethod::ClosedForm => match dist.kind {
            DistKind::RealNormal => {
                let kf = k as f64;
                Ok(MomentConstants {
                    b: 1.0,
                    c: 3.0 * kf / (2.0 * kf + kf * kf),
                    k,
                    source: MomentSource::ClosedForm,
                })
            }
            kind => Err(GuaranteeError::ClosedFormUnavailable { kind, k }),
        },
        MomentMethod::MonteCarlo { samples, seed } => {
            if samples < MIN_MC_SAMPLES {
                return Err(GuaranteeError::TooFewSamples {
                    got: samples,
                    min: MIN_MC_SAMPLES,
                });
            }
            let blocks = samples.div_ceil(BLOCK);
            let partial: Vec<Sums> = (0..blocks)
                .into_par_iter()
                .map(|blk| {
                    let count = BLOCK.min(samples - blk * BLOCK);
                    block_sums(dist, k, seed, blk, count)
                })
                .collect();
            let total = partial.iter().fold(Sums::default(), |acc, s| Sums {
                n: acc.n + s.n,
                b: acc.b + s.b,
                b2: acc.b2 + s.b2,
                c: acc.c + s.c,
                c2: acc.c2 + s.c2,
            });
            let (c, stderr_c) = mean_stderr(total.c, total.c2, total.n);
            let (b, stderr_b) = if dist.kind.is_real() {
                (1.0, 0.0)
            } else {
                mean_stderr(total.b, total.b2, total.n)
            };
            Ok(MomentConstants {
                b,
                c,
                k,
                source: MomentSource::MonteCarlo {
                    samples,
                    seed,
                    stderr_b,
                    stderr_c,
                },
            })
        }
    }
}
