use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt3, moment_method, preset, resolve_seed, HarnessError, Preset};
use crate::guarantees::{
    exrip_approx, exrip_probability, moment_constants, strip_calderbank, BoundName, ChannelSearch,
    DistKind, ExripInputs, MomentConstants, NonzeroDistribution, SearchOutcome, SearchParams,
    RIP_SUBGAUSSIAN_C,
};
use crate::matrixlab::row_measures;
use crate::mc_oracle::{bound_validity_report, ValidityReport};
use crate::seqgen::{build_sign_matrix, FamilySpec};

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn opt3(x: Option<f64>) -> String {
    x.map(fmt3).unwrap_or_default()
}

/// Empirical check of the ExRIP bound on a preset's instance.
pub fn verify_preset(
    preset: &Preset,
    dist: DistKind,
    trials: usize,
    seed: u64,
) -> Result<ValidityReport, HarnessError> {
    let s = build_sign_matrix(&preset.family_spec(seed))?;
    Ok(bound_validity_report(
        &s,
        preset.k,
        preset.delta,
        &NonzeroDistribution::standard(dist),
        moment_method(dist, preset.moment_samples, seed),
        trials,
        seed,
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub family: String,
    pub preset: String,
    pub m: usize,
    #[serde(rename = "M")]
    pub length: usize,
    /// The sparsity the probability is evaluated at.
    pub k: usize,
    pub alpha_x100: Option<f64>,
    pub beta_x100: Option<f64>,
    pub gamma_x100: Option<f64>,
    /// Complex normal nonzeros.
    pub p_normal: Option<f64>,
    /// Complex uniform nonzeros.
    pub p_uniform: Option<f64>,
    /// `ok`, or `failed: <reason>`.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2Report {
    pub seed: u64,
    pub rows: Vec<Table2Row>,
}

impl Table2Report {
    pub const HEADER: [&'static str; 10] = [
        "family",
        "m",
        "M",
        "2K",
        "alpha_x100",
        "beta_x100",
        "gamma_x100",
        "p_normal",
        "p_uniform",
        "status",
    ];

    pub fn to_csv(&self) -> String {
        csv_string(
            &Self::HEADER,
            self.rows.iter().map(|r| {
                vec![
                    r.family.clone(),
                    r.m.to_string(),
                    r.length.to_string(),
                    r.k.to_string(),
                    opt3(r.alpha_x100),
                    opt3(r.beta_x100),
                    opt3(r.gamma_x100),
                    opt3(r.p_normal),
                    opt3(r.p_uniform),
                    r.status.clone(),
                ]
            }),
        )
    }
}

type ConstantsCache = HashMap<(DistKind, usize, usize), MomentConstants>;

fn cached_constants(
    cache: &mut ConstantsCache,
    dist: DistKind,
    k: usize,
    samples: usize,
    seed: u64,
) -> Result<MomentConstants, HarnessError> {
    if let Some(c) = cache.get(&(dist, k, samples)) {
        return Ok(*c);
    }
    let c = moment_constants(
        &NonzeroDistribution::standard(dist),
        k,
        moment_method(dist, samples, seed),
    )?;
    cache.insert((dist, k, samples), c);
    Ok(c)
}

fn table2_row(
    p: &Preset,
    seed: u64,
    cache: &mut ConstantsCache,
) -> Result<Table2Row, HarnessError> {
    let s = build_sign_matrix(&p.family_spec(seed))?;
    let rows = row_measures(&s);
    let mut prob = |dist| -> Result<f64, HarnessError> {
        let c = cached_constants(cache, dist, p.k, p.moment_samples, seed)?;
        Ok(exrip_probability(&ExripInputs::from_rows(&rows, p.k, p.delta, c))?.probability)
    };
    Ok(Table2Row {
        family: label(&p.name),
        preset: p.name.clone(),
        m: s.channels(),
        length: s.length(),
        k: p.k,
        alpha_x100: Some(100.0 * rows.alpha()),
        beta_x100: Some(100.0 * rows.beta()),
        gamma_x100: Some(100.0 * rows.gamma()),
        p_normal: Some(prob(DistKind::ComplexNormal)?),
        p_uniform: Some(prob(DistKind::ComplexUniform)?),
        status: "ok".into(),
    })
}

fn label(name: &str) -> String {
    name.strip_prefix("table2_").unwrap_or(name).to_string()
}

/// One row per preset; a preset whose matrix cannot be generated yields a
/// `failed` row and the run continues.
pub fn table2_report(names: &[&str], seed: u64) -> Result<Table2Report, HarnessError> {
    let presets = names
        .iter()
        .map(|n| preset(n))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cache = ConstantsCache::new();
    let mut rows = Vec::with_capacity(presets.len());
    for p in &presets {
        let row = match table2_row(p, seed, &mut cache) {
            Ok(r) => r,
            Err(e) => Table2Row {
                family: label(&p.name),
                preset: p.name.clone(),
                m: p.family.channels,
                length: p.family_spec(seed).dimensions().map(|d| d.1).unwrap_or(0),
                k: p.k,
                alpha_x100: None,
                beta_x100: None,
                gamma_x100: None,
                p_normal: None,
                p_uniform: None,
                status: format!("failed: {e}"),
            },
        };
        rows.push(row);
    }
    Ok(Table2Report { seed, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    /// Family with a resolved seed; its channel count is overridden per `m`.
    pub family: FamilySpec,
    pub k: usize,
    pub delta: f64,
    pub dist: DistKind,
    pub m_min: usize,
    pub m_max: usize,
    pub moment_samples: usize,
}

impl SweepParams {
    pub fn from_preset(p: &Preset, seed: u64) -> Result<Self, HarnessError> {
        let sweep = p.sweep.ok_or_else(|| HarnessError::MissingSection {
            preset: p.name.clone(),
            section: "sweep",
        })?;
        Ok(Self {
            family: p.family_spec(seed),
            k: p.k,
            delta: p.delta,
            dist: p.dists.first().copied().unwrap_or(DistKind::ComplexNormal),
            m_min: sweep.m_min,
            m_max: sweep.m_max,
            moment_samples: p.moment_samples,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: usize,
    pub p_exact: f64,
    pub p_approx: f64,
}

/// ExRIP probability and its `1 − 1/(mδ²)` approximation for each `m` in
/// the range. Random families reuse one seed, so each instance extends the
/// previous one by a row.
pub fn fig2_sweep(params: &SweepParams, seed: u64) -> Result<Vec<SweepRow>, HarnessError> {
    if params.m_min == 0 || params.m_min > params.m_max {
        return Err(HarnessError::InvalidParameter(format!(
            "channel range must be nonempty and start at 1 or more, got [{}, {}]",
            params.m_min, params.m_max
        )));
    }
    let constants = moment_constants(
        &NonzeroDistribution::standard(params.dist),
        params.k,
        moment_method(params.dist, params.moment_samples, seed),
    )?;
    let family = resolve_seed(params.family, seed);
    (params.m_min..=params.m_max)
        .into_par_iter()
        .map(|m| {
            let s = build_sign_matrix(&family.with_channels(m))?;
            let inputs =
                ExripInputs::from_rows(&row_measures(&s), params.k, params.delta, constants);
            Ok(SweepRow {
                m,
                p_exact: exrip_probability(&inputs)?.probability,
                p_approx: exrip_approx(m, params.delta)?.probability,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    csv_string(
        &["m", "p_exact", "p_approx"],
        rows.iter()
            .map(|r| vec![r.m.to_string(), fmt3(r.p_exact), fmt3(r.p_approx)]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Params {
    #[serde(rename = "M")]
    pub length: usize,
    /// Sparsity of the coherence, RIP and StRIP rows.
    pub k: usize,
    pub delta: f64,
    pub bounds: Vec<BoundName>,
    pub attempts: usize,
    pub ceiling: usize,
    pub target_prob: f64,
    pub rip_k: Vec<usize>,
    pub rip_c: f64,
    pub calderbank_m: usize,
    pub exrip_k: usize,
    pub exrip_target: f64,
    pub dist: DistKind,
    pub moment_samples: usize,
    pub candes_plan_c: Option<f64>,
}

impl Table1Params {
    pub fn from_preset(p: &Preset) -> Result<Self, HarnessError> {
        let search = p
            .search
            .clone()
            .ok_or_else(|| HarnessError::MissingSection {
                preset: p.name.clone(),
                section: "search",
            })?;
        let (_, length) = p.family_spec(0).dimensions()?;
        Ok(Self {
            length,
            k: p.k,
            delta: p.delta,
            bounds: p.bounds.clone(),
            attempts: search.attempts,
            ceiling: search.ceiling,
            target_prob: search.target_prob,
            rip_k: search.rip_k,
            rip_c: RIP_SUBGAUSSIAN_C,
            calderbank_m: search.calderbank_m,
            exrip_k: search.exrip_k,
            exrip_target: search.exrip_target,
            dist: p.dists.first().copied().unwrap_or(DistKind::ComplexNormal),
            moment_samples: p.moment_samples,
            candes_plan_c: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub bound: BoundName,
    pub k: usize,
    /// `None` for the deterministic coherence bounds.
    pub target_prob: Option<f64>,
    pub m: Option<usize>,
    /// Best coherence for coherence-based bounds, guaranteed probability
    /// otherwise.
    pub value: Option<f64>,
    pub witness_seed: Option<u64>,
    pub evaluations: usize,
    /// `ok` or `n/a`.
    pub status: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Report {
    pub params: Table1Params,
    pub seed: u64,
    pub rows: Vec<Table1Row>,
}

impl Table1Report {
    pub const HEADER: [&'static str; 9] = [
        "bound",
        "K",
        "target_p",
        "m",
        "value",
        "witness_seed",
        "evaluations",
        "status",
        "note",
    ];

    pub fn row(&self, bound: BoundName) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.bound == bound)
    }

    pub fn to_csv(&self) -> String {
        csv_string(
            &Self::HEADER,
            self.rows.iter().map(|r| {
                vec![
                    r.bound.to_string(),
                    r.k.to_string(),
                    opt3(r.target_prob),
                    r.m.map_or_else(|| "n/a".into(), |m| m.to_string()),
                    r.value.map(|v| format!("{v:.6}")).unwrap_or_default(),
                    r.witness_seed.map(|s| s.to_string()).unwrap_or_default(),
                    r.evaluations.to_string(),
                    r.status.clone(),
                    r.note.clone(),
                ]
            }),
        )
    }
}

fn table1_row(
    o: SearchOutcome,
    k: usize,
    target_prob: Option<f64>,
    extra: Option<String>,
) -> Table1Row {
    let note = [o.reason, extra]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>()
        .join("; ");
    Table1Row {
        bound: o.bound,
        k,
        target_prob,
        status: if o.m.is_some() { "ok" } else { "n/a" }.into(),
        m: o.m,
        value: o.value,
        witness_seed: o.witness_seed,
        evaluations: o.evaluations,
        note,
    }
}

/// Minimal channel count per bound in the MWC setting. Coherence-based
/// searches share one set of best-of-N random instances.
pub fn table1_report(params: &Table1Params, seed: u64) -> Result<Table1Report, HarnessError> {
    let base = SearchParams {
        length: params.length,
        k: params.k,
        delta: params.delta,
        target_prob: params.target_prob,
        dist: NonzeroDistribution::standard(params.dist),
        moments: moment_method(params.dist, params.moment_samples, seed),
        attempts: params.attempts,
        ceiling: params.ceiling,
        seed,
        candes_plan_c: params.candes_plan_c,
        rip_c: params.rip_c,
    };
    let mut shared = ChannelSearch::new(base)?;
    let mut exrip = ChannelSearch::new(SearchParams {
        k: params.exrip_k,
        target_prob: params.exrip_target,
        ..base
    })?;
    let mut rows = Vec::new();
    for &bound in &params.bounds {
        match bound {
            BoundName::Rip => {
                for &k in &params.rip_k {
                    let o = ChannelSearch::new(SearchParams { k, ..base })?.run(bound)?;
                    rows.push(table1_row(o, k, Some(params.target_prob), None));
                }
            }
            BoundName::Exrip | BoundName::ExripApprox => {
                let o = exrip.run(bound)?;
                rows.push(table1_row(
                    o,
                    params.exrip_k,
                    Some(params.exrip_target),
                    None,
                ));
            }
            BoundName::Calderbank => {
                let o = shared.run(bound)?;
                let at =
                    strip_calderbank(params.calderbank_m, params.length, params.k, params.delta)?;
                let extra = format!(
                    "p = {} at m = {}",
                    fmt3(at.probability),
                    params.calderbank_m
                );
                rows.push(table1_row(
                    o,
                    params.k,
                    Some(params.target_prob),
                    Some(extra),
                ));
            }
            BoundName::DonohoElad | BoundName::TroppCoherence | BoundName::CandesPlan => {
                let o = shared.run(bound)?;
                rows.push(table1_row(o, params.k, None, None));
            }
            BoundName::Gan | BoundName::TroppStrip => {
                let o = shared.run(bound)?;
                rows.push(table1_row(o, params.k, Some(params.target_prob), None));
            }
        }
    }
    Ok(Table1Report {
        params: params.clone(),
        seed,
        rows,
    })
}
