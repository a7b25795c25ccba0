//! Expected-RIP probability bound and its one-parameter approximation.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{
    check_delta, check_sparsity, params, BoundName, GuaranteeError, GuaranteeResult,
    MomentConstants,
};
use crate::matrixlab::{QualityReport, RowMeasures};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExripInputs {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub m: usize,
    #[serde(rename = "M")]
    pub length: usize,
    /// Sparsity the bound is evaluated at; table reproductions pass `2K`.
    pub k: usize,
    pub delta: f64,
    pub constants: MomentConstants,
}

impl ExripInputs {
    pub fn from_report(
        report: &QualityReport,
        k: usize,
        delta: f64,
        constants: MomentConstants,
    ) -> Self {
        Self {
            alpha: report.alpha,
            beta: report.beta,
            gamma: report.gamma,
            m: report.m,
            length: report.length,
            k,
            delta,
            constants,
        }
    }

    pub fn from_rows(rows: &RowMeasures, k: usize, delta: f64, constants: MomentConstants) -> Self {
        Self {
            alpha: rows.alpha(),
            beta: rows.beta(),
            gamma: rows.gamma(),
            m: rows.m,
            length: rows.length,
            k,
            delta,
            constants,
        }
    }

    /// `ρ_M = M/(M − 1)`.
    pub fn rho(&self) -> f64 {
        self.length as f64 / (self.length as f64 - 1.0)
    }

    fn validate(&self) -> Result<(), GuaranteeError> {
        check_delta(self.delta)?;
        check_sparsity(self.k, self.length)?;
        if self.constants.k != self.k {
            return Err(GuaranteeError::ConstantsMismatch {
                constants: self.constants.k,
                bound: self.k,
            });
        }
        Ok(())
    }
}

/// `1 − [(1−C)ρ(1+α−2β) + (B−C)ρ(γ−β) + C·M·β − 1]/δ²`.
pub fn exrip_probability(inputs: &ExripInputs) -> Result<GuaranteeResult, GuaranteeError> {
    inputs.validate()?;
    let ExripInputs {
        alpha,
        beta,
        gamma,
        delta,
        ..
    } = *inputs;
    let (b, c) = (inputs.constants.b, inputs.constants.c);
    let rho = inputs.rho();
    let big_m = inputs.length as f64;
    let excess = (1.0 - c) * rho * (1.0 + alpha - 2.0 * beta)
        + (b - c) * rho * (gamma - beta)
        + c * big_m * beta
        - 1.0;
    let raw = 1.0 - excess / (delta * delta);
    Ok(GuaranteeResult::from_raw(
        BoundName::Exrip,
        raw,
        params([
            ("alpha", json!(alpha)),
            ("beta", json!(beta)),
            ("gamma", json!(gamma)),
            ("m", json!(inputs.m)),
            ("M", json!(inputs.length)),
            ("K", json!(inputs.k)),
            ("delta", json!(delta)),
            ("B_K", json!(b)),
            ("C_K", json!(c)),
            ("rho_M", json!(rho)),
        ]),
    ))
}

/// `1 − 1/(m·δ²)`.
pub fn exrip_approx(m: usize, delta: f64) -> Result<GuaranteeResult, GuaranteeError> {
    check_delta(delta)?;
    if m == 0 {
        return Err(GuaranteeError::InvalidParameter(
            "m must be at least 1".into(),
        ));
    }
    let raw = 1.0 - 1.0 / (m as f64 * delta * delta);
    Ok(GuaranteeResult::from_raw(
        BoundName::ExripApprox,
        raw,
        params([("m", json!(m)), ("delta", json!(delta))]),
    ))
}
