//! Coherence, RIP and StRIP guarantees.

use serde::{Deserialize, Serialize};
use serde_json::json;
use statrs::function::gamma::ln_gamma;

use super::{
    check_delta, check_mu, check_probability, check_sparsity, params, BoundName, GuaranteeError,
    GuaranteeResult,
};

/// Distribution constant of the sub-Gaussian RIP bound for equiprobable
/// ±1 entries.
pub const RIP_SUBGAUSSIAN_C: f64 = 7.0 / 18.0;

/// Guards the floor of quantities like `1/(1/23)` against rounding just
/// below an integer.
const FLOOR_GUARD: f64 = 1e-12;

fn guarded_floor(x: f64) -> u64 {
    (x * (1.0 + FLOOR_GUARD)).floor() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "max_k")]
pub enum SparsityLimit {
    /// `μ = 0`: every sparsity level is covered.
    Unbounded,
    AtMost(u64),
}

impl SparsityLimit {
    pub fn admits(self, k: usize) -> bool {
        match self {
            SparsityLimit::Unbounded => true,
            SparsityLimit::AtMost(max) => k as u64 <= max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandesPlanCheck {
    pub c: f64,
    pub k: usize,
    /// `μ < c / log M`
    pub coherence_ok: bool,
    /// `K ≤ c·M / (‖Φ‖² log M)`
    pub sparsity_ok: bool,
}

impl CandesPlanCheck {
    pub fn holds(&self) -> bool {
        self.coherence_ok && self.sparsity_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceGuarantees {
    pub mu: f64,
    #[serde(rename = "M")]
    pub length: usize,
    pub spectral_norm_sq: f64,
    /// Largest `K` with `K ≤ (1 + 1/μ)/2`.
    pub donoho_elad: SparsityLimit,
    /// Largest `K` with `K ≤ 1/(3μ)`.
    pub tropp: SparsityLimit,
    /// `None` unless the caller supplied the constant `c`.
    pub candes_plan: Option<CandesPlanCheck>,
}

/// `candes_plan` carries `(c, K)`; the constant has no default.
pub fn coherence_guarantees(
    mu: f64,
    length: usize,
    spectral_norm_sq: f64,
    candes_plan: Option<(f64, usize)>,
) -> Result<CoherenceGuarantees, GuaranteeError> {
    check_mu(mu)?;
    if length < 2 {
        return Err(GuaranteeError::InvalidParameter(format!(
            "M must be at least 2, got {length}"
        )));
    }
    let (donoho_elad, tropp) = if mu == 0.0 {
        (SparsityLimit::Unbounded, SparsityLimit::Unbounded)
    } else {
        (
            SparsityLimit::AtMost(guarded_floor(0.5 * (1.0 + 1.0 / mu))),
            SparsityLimit::AtMost(guarded_floor(1.0 / (3.0 * mu))),
        )
    };
    let candes_plan = candes_plan
        .map(|(c, k)| {
            if !(c.is_finite() && c > 0.0) {
                return Err(GuaranteeError::InvalidParameter(format!(
                    "Candes-Plan constant must be positive, got {c}"
                )));
            }
            let log_m = (length as f64).ln();
            Ok(CandesPlanCheck {
                c,
                k,
                coherence_ok: mu < c / log_m,
                sparsity_ok: k as f64 <= c * length as f64 / (spectral_norm_sq * log_m),
            })
        })
        .transpose()?;
    Ok(CoherenceGuarantees {
        mu,
        length,
        spectral_norm_sq,
        donoho_elad,
        tropp,
        candes_plan,
    })
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// Right-hand side of the sub-Gaussian RIP bound,
/// `(2/(cδ))·(ln 2 + ln C(M, K) + K ln(12/δ) + t)` with `t = −ln(1 − p)`.
pub fn rip_requirement(
    length: usize,
    k: usize,
    delta: f64,
    prob: f64,
    c: f64,
) -> Result<f64, GuaranteeError> {
    check_delta(delta)?;
    check_probability(prob)?;
    check_sparsity(k, length)?;
    if !(c.is_finite() && c > 0.0) {
        return Err(GuaranteeError::InvalidParameter(format!(
            "distribution constant must be positive, got {c}"
        )));
    }
    let t = -(1.0 - prob).ln();
    let inner = 2f64.ln() + ln_binomial(length, k) + k as f64 * (12.0 / delta).ln() + t;
    Ok(2.0 / (c * delta) * inner)
}

/// Smallest integer `m` meeting [`rip_requirement`].
pub fn rip_min_m(
    length: usize,
    k: usize,
    delta: f64,
    prob: f64,
    c: f64,
) -> Result<u64, GuaranteeError> {
    Ok(rip_requirement(length, k, delta, prob, c)?.ceil() as u64)
}

/// `1 − [2K/m + (2K+7)/(M−3)] / (δ − (K−1)/(M−1))²`, valid for
/// `(K−1)/(M−1) < δ < 1`.
pub fn strip_calderbank(
    m: usize,
    length: usize,
    k: usize,
    delta: f64,
) -> Result<GuaranteeResult, GuaranteeError> {
    check_sparsity(k, length)?;
    if m == 0 || length <= 3 {
        return Err(GuaranteeError::InvalidParameter(format!(
            "need m >= 1 and M > 3, got m = {m}, M = {length}"
        )));
    }
    let p = params([
        ("m", json!(m)),
        ("M", json!(length)),
        ("K", json!(k)),
        ("delta", json!(delta)),
    ]);
    let floor = (k as f64 - 1.0) / (length as f64 - 1.0);
    if !(delta > floor && delta < 1.0) {
        return Ok(GuaranteeResult::infeasible(
            BoundName::Calderbank,
            format!("requires (K-1)/(M-1) = {floor:.6} < delta < 1"),
            p,
        ));
    }
    let (kf, mf, lf) = (k as f64, m as f64, length as f64);
    let numerator = 2.0 * kf / mf + (2.0 * kf + 7.0) / (lf - 3.0);
    let raw = 1.0 - numerator / (delta - floor).powi(2);
    Ok(GuaranteeResult::from_raw(BoundName::Calderbank, raw, p))
}

/// `1 − 2·exp(−(δ − 1/(M−1))² / (16 μ² K))`, valid for `δ > 1/(M−1)`.
pub fn strip_gan(
    mu: f64,
    length: usize,
    k: usize,
    delta: f64,
) -> Result<GuaranteeResult, GuaranteeError> {
    check_mu(mu)?;
    check_sparsity(k, length)?;
    let p = params([
        ("mu", json!(mu)),
        ("M", json!(length)),
        ("K", json!(k)),
        ("delta", json!(delta)),
    ]);
    let floor = 1.0 / (length as f64 - 1.0);
    if delta <= floor {
        return Ok(GuaranteeResult::infeasible(
            BoundName::Gan,
            format!("requires delta > 1/(M-1) = {floor:.6}"),
            p,
        ));
    }
    let exponent = if mu == 0.0 {
        f64::INFINITY
    } else {
        (delta - floor).powi(2) / (16.0 * mu * mu * k as f64)
    };
    let raw = 1.0 - 2.0 * (-exponent).exp();
    Ok(GuaranteeResult::from_raw(BoundName::Gan, raw, p))
}

/// Left-hand side of the Tropp StRIP condition,
/// `√(144 μ² K t ln(K/2 + 1)) + (2K/M)‖Φ‖²`.
fn tropp_lhs(mu: f64, spectral_norm_sq: f64, length: usize, k: usize, t: f64) -> f64 {
    let kf = k as f64;
    (144.0 * mu * mu * kf * t * (kf / 2.0 + 1.0).ln()).sqrt()
        + 2.0 * kf / length as f64 * spectral_norm_sq
}

/// Feasible when the condition `lhs ≤ e^{−1/4} δ` holds; the probability is
/// then `1 − (K/2)^{−t}`.
pub fn strip_tropp(
    mu: f64,
    spectral_norm_sq: f64,
    length: usize,
    k: usize,
    delta: f64,
    t: f64,
) -> Result<GuaranteeResult, GuaranteeError> {
    check_mu(mu)?;
    check_sparsity(k, length)?;
    check_delta(delta)?;
    if !(t >= 1.0 && t.is_finite()) {
        return Err(GuaranteeError::InvalidParameter(format!(
            "t must be finite and at least 1, got {t}"
        )));
    }
    let lhs = tropp_lhs(mu, spectral_norm_sq, length, k, t);
    let rhs = (-0.25f64).exp() * delta;
    let p = params([
        ("mu", json!(mu)),
        ("spectral_norm_sq", json!(spectral_norm_sq)),
        ("M", json!(length)),
        ("K", json!(k)),
        ("delta", json!(delta)),
        ("t", json!(t)),
        ("lhs", json!(lhs)),
        ("rhs", json!(rhs)),
    ]);
    if k < 2 {
        return Ok(GuaranteeResult::infeasible(
            BoundName::TroppStrip,
            "requires K >= 2",
            p,
        ));
    }
    if lhs > rhs {
        return Ok(GuaranteeResult::infeasible(
            BoundName::TroppStrip,
            format!("condition fails: {lhs:.6} > e^(-1/4) delta = {rhs:.6}"),
            p,
        ));
    }
    let raw = 1.0 - (k as f64 / 2.0).powf(-t);
    Ok(GuaranteeResult::from_raw(BoundName::TroppStrip, raw, p))
}
