use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use mwc_core::guarantees::{
    coherence_guarantees, exrip_approx, exrip_probability, moment_constants, rip_min_m,
    strip_calderbank, strip_gan, strip_tropp, tropp_t, CoherenceGuarantees, DistKind, ExripInputs,
    GuaranteeError, GuaranteeResult, NonzeroDistribution, RIP_SUBGAUSSIAN_C,
};
use mwc_core::harness::{
    fig2_sweep, instance_seed, moment_method, preset, sweep_csv, table1_report, table2_report,
    HarnessError, Preset, RunRecord, SweepParams, Table1Params, TABLE2_PRESETS,
};
use mwc_core::matrixlab::{
    bound_slacks, quality_measures, row_measures, welch_bound, MatrixError, QualityReport,
};
use mwc_core::mc_oracle::{bound_validity_report, OracleError};
use mwc_core::mmv::{recovery_experiment, MmvError, NoiseSpec, RecoveryParams};
use mwc_core::seqgen::{
    build_sign_matrix, read_pattern_file, write_pattern_file, Family, FamilySpec, Selection,
    SeqError, SignMatrix,
};
use mwc_core::DEFAULT_DELTA;

use crate::{BoundArgs, Cli, CliError, Command, Format, InstanceArgs};

macro_rules! invalid_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Invalid(e.to_string())
            }
        })*
    };
}

invalid_from!(
    HarnessError,
    GuaranteeError,
    SeqError,
    MatrixError,
    OracleError,
    MmvError
);

fn invalid(msg: impl Display) -> CliError {
    CliError::Invalid(msg.to_string())
}

fn internal(msg: impl Display) -> CliError {
    CliError::Internal(msg.to_string())
}

/// What a command produced: the bytes written to `--out`, and a JSON view
/// of it for the run record.
struct Artifact {
    text: String,
    json: Value,
}

fn json_artifact<T: Serialize>(value: &T) -> Result<Artifact, CliError> {
    let json = serde_json::to_value(value).map_err(internal)?;
    let mut text = serde_json::to_string_pretty(&json).map_err(internal)?;
    text.push('\n');
    Ok(Artifact { text, json })
}

fn table_artifact<T: Serialize>(
    format: Format,
    csv: String,
    value: &T,
) -> Result<Artifact, CliError> {
    match format {
        Format::Json => json_artifact(value),
        Format::Csv => Ok(Artifact {
            text: csv,
            json: serde_json::to_value(value).map_err(internal)?,
        }),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| internal(format!("{}: {e}", path.display())))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let (artifact, preset_name) = dispatch(cli)?;
    match &cli.out {
        Some(path) => write_file(path, &artifact.text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(artifact.text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(internal)?;
        }
    }
    if let Some(path) = &cli.record {
        let record = RunRecord {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: std::env::args().collect(),
            preset: preset_name,
            seed: Some(cli.seed),
            threads: rayon::current_num_threads(),
            outputs: vec![artifact.json],
            wall_time_s: start.elapsed().as_secs_f64(),
        };
        let mut text = serde_json::to_string_pretty(&record).map_err(internal)?;
        text.push('\n');
        write_file(path, &text)?;
    }
    Ok(())
}

struct Resolved {
    matrix: SignMatrix,
    preset: Option<Preset>,
}

fn spec_from_flags(a: &InstanceArgs, seed: u64) -> Result<Option<FamilySpec>, CliError> {
    let Some(name) = &a.family else {
        return Ok(None);
    };
    let family = Family::from_str(name).map_err(invalid)?;
    let channels = a
        .channels
        .ok_or_else(|| invalid("--m is required with --family"))?;
    Ok(Some(FamilySpec {
        family,
        register_length: a.n,
        length: a.length,
        channels,
        seed: (family == Family::Random).then(|| instance_seed(seed)),
        selection: a.offset.map_or(Selection::Canonical, Selection::Offset),
    }))
}

fn preset_spec(a: &InstanceArgs, p: &Preset, seed: u64) -> FamilySpec {
    let mut spec = p.family_spec(seed);
    if let Some(m) = a.channels {
        spec.channels = m;
    }
    if let Some(off) = a.offset {
        spec.selection = Selection::Offset(off);
    }
    spec
}

fn resolve(a: &InstanceArgs, seed: u64) -> Result<Resolved, CliError> {
    if let Some(name) = &a.preset {
        let p = preset(name)?;
        let spec = preset_spec(a, &p, seed);
        return Ok(Resolved {
            matrix: build_sign_matrix(&spec)?,
            preset: Some(p),
        });
    }
    if let Some(path) = &a.patterns {
        return Ok(Resolved {
            matrix: read_pattern_file(path)?,
            preset: None,
        });
    }
    match spec_from_flags(a, seed)? {
        Some(spec) => Ok(Resolved {
            matrix: build_sign_matrix(&spec)?,
            preset: None,
        }),
        None => Err(invalid(
            "one of --preset, --patterns or --family is required",
        )),
    }
}

struct BoundSettings {
    k: usize,
    delta: f64,
    dist: DistKind,
    samples: usize,
}

fn bound_settings(b: &BoundArgs, p: Option<&Preset>) -> Result<BoundSettings, CliError> {
    let k =
        b.k.or(p.map(|p| p.k))
            .ok_or_else(|| invalid("--k is required"))?;
    let delta = b.delta.or(p.map(|p| p.delta)).unwrap_or(DEFAULT_DELTA);
    let dist = match &b.dist {
        Some(d) => DistKind::from_str(d).map_err(invalid)?,
        None => p
            .and_then(|p| p.dists.first().copied())
            .unwrap_or(DistKind::ComplexNormal),
    };
    Ok(BoundSettings {
        k,
        delta,
        dist,
        samples: b.samples,
    })
}

#[derive(Serialize)]
struct MeasuresOut {
    quality: QualityReport,
    welch_bound: f64,
    slacks: BTreeMap<&'static str, f64>,
}

#[derive(Serialize)]
struct BoundsOut {
    m: usize,
    #[serde(rename = "M")]
    length: usize,
    k: usize,
    delta: f64,
    target_prob: f64,
    coherence: CoherenceGuarantees,
    rip_min_m: u64,
    rip_satisfied: bool,
    results: Vec<GuaranteeResult>,
}

fn dispatch(cli: &Cli) -> Result<(Artifact, Option<String>), CliError> {
    let seed = cli.seed;
    let preset_of = |a: &InstanceArgs| a.preset.clone();
    match &cli.command {
        Command::Gen(a) => {
            let r = resolve(a, seed)?;
            let s = &r.matrix;
            let json = json!({
                "m": s.channels(),
                "M": s.length(),
                "family": s.family_tag(),
                "seed": s.seed(),
            });
            Ok((
                Artifact {
                    text: write_pattern_file(s),
                    json,
                },
                preset_of(a),
            ))
        }
        Command::Measures(a) => {
            let r = resolve(a, seed)?;
            let quality = quality_measures(&r.matrix)?;
            let out = MeasuresOut {
                welch_bound: welch_bound(quality.m, quality.length),
                slacks: bound_slacks(&quality).entries().into_iter().collect(),
                quality,
            };
            Ok((json_artifact(&out)?, preset_of(a)))
        }
        Command::Exrip { instance, bound } => {
            let r = resolve(instance, seed)?;
            let b = bound_settings(bound, r.preset.as_ref())?;
            let c = moment_constants(
                &NonzeroDistribution::standard(b.dist),
                b.k,
                moment_method(b.dist, b.samples, seed),
            )?;
            let inputs = ExripInputs::from_rows(&row_measures(&r.matrix), b.k, b.delta, c);
            Ok((
                json_artifact(&exrip_probability(&inputs)?)?,
                preset_of(instance),
            ))
        }
        Command::Bounds {
            instance,
            bound,
            prob,
            c,
        } => {
            let r = resolve(instance, seed)?;
            let b = bound_settings(bound, r.preset.as_ref())?;
            let q = quality_measures(&r.matrix)?;
            let (m, length) = (q.m, q.length);
            let coherence =
                coherence_guarantees(q.mu, length, q.spectral_norm_sq, c.map(|c| (c, b.k)))?;
            let rip = rip_min_m(length, b.k, b.delta, *prob, RIP_SUBGAUSSIAN_C)?;
            let constants = moment_constants(
                &NonzeroDistribution::standard(b.dist),
                b.k,
                moment_method(b.dist, b.samples, seed),
            )?;
            let results = vec![
                strip_calderbank(m, length, b.k, b.delta)?,
                strip_gan(q.mu, length, b.k, b.delta)?,
                strip_tropp(
                    q.mu,
                    q.spectral_norm_sq,
                    length,
                    b.k,
                    b.delta,
                    tropp_t(b.k, *prob),
                )?,
                exrip_probability(&ExripInputs::from_report(&q, b.k, b.delta, constants))?,
                exrip_approx(m, b.delta)?,
            ];
            let out = BoundsOut {
                m,
                length,
                k: b.k,
                delta: b.delta,
                target_prob: *prob,
                coherence,
                rip_min_m: rip,
                rip_satisfied: m as u64 >= rip,
                results,
            };
            Ok((json_artifact(&out)?, preset_of(instance)))
        }
        Command::Verify {
            instance,
            bound,
            trials,
        } => {
            let r = resolve(instance, seed)?;
            let b = bound_settings(bound, r.preset.as_ref())?;
            let trials = trials
                .or(r.preset.as_ref().map(|p| p.trials))
                .unwrap_or(mwc_core::harness::DEFAULT_VERIFY_TRIALS);
            let report = bound_validity_report(
                &r.matrix,
                b.k,
                b.delta,
                &NonzeroDistribution::standard(b.dist),
                moment_method(b.dist, b.samples, seed),
                trials,
                seed,
            )?;
            Ok((json_artifact(&report)?, preset_of(instance)))
        }
        Command::Recover {
            instance,
            k,
            r,
            sigma,
            snr,
            dist,
            trials,
            csv,
        } => {
            if instance.patterns.is_some() {
                return Err(invalid(
                    "recover takes --preset or --family, not --patterns",
                ));
            }
            let p = instance.preset.as_deref().map(preset).transpose()?;
            let spec = match &p {
                Some(p) => preset_spec(instance, p, seed),
                None => spec_from_flags(instance, seed)?
                    .ok_or_else(|| invalid("one of --preset or --family is required"))?,
            };
            let mmv = p.as_ref().and_then(|p| p.mmv);
            let k_rows = k
                .or(p.as_ref().map(|p| p.k))
                .ok_or_else(|| invalid("--k is required"))?;
            let r = r
                .or(mmv.map(|m| m.r))
                .ok_or_else(|| invalid("--r is required"))?;
            let noise = match (sigma, snr) {
                (Some(s), _) => NoiseSpec::Sigma(*s),
                (None, Some(db)) => NoiseSpec::SnrDb(*db),
                (None, None) => match mmv {
                    Some(m) => match (m.sigma, m.snr_db) {
                        (_, Some(db)) => NoiseSpec::SnrDb(db),
                        (s, None) => NoiseSpec::Sigma(s.unwrap_or(0.0)),
                    },
                    None => NoiseSpec::Sigma(0.0),
                },
            };
            let dist = match dist {
                Some(d) => DistKind::from_str(d).map_err(invalid)?,
                None => p
                    .as_ref()
                    .and_then(|p| p.dists.first().copied())
                    .unwrap_or(DistKind::ComplexNormal),
            };
            let trials = trials
                .or(p.as_ref().map(|p| p.trials))
                .ok_or_else(|| invalid("--trials is required"))?;
            let report = recovery_experiment(&RecoveryParams {
                family: spec,
                k_rows,
                r,
                noise,
                dist: NonzeroDistribution::standard(dist),
                trials,
                seed,
            })?;
            if let Some(path) = csv {
                write_file(path, &report.outcomes_csv())?;
            }
            Ok((json_artifact(&report)?, preset_of(instance)))
        }
        Command::Sweep {
            instance,
            bound,
            m_min,
            m_max,
            format,
        } => {
            if instance.patterns.is_some() {
                return Err(invalid("sweep takes --preset or --family, not --patterns"));
            }
            let name = match (&instance.preset, &instance.family) {
                (Some(n), _) => Some(n.clone()),
                (None, None) => Some("fig2_sweep".to_string()),
                (None, Some(_)) => None,
            };
            let p = name.as_deref().map(preset).transpose()?;
            let mut params = match &p {
                Some(p) => {
                    let mut params = SweepParams::from_preset(p, seed)?;
                    params.family = preset_spec(instance, p, seed);
                    params
                }
                None => {
                    let spec = spec_from_flags(instance, seed)?.expect("family given");
                    SweepParams {
                        family: spec,
                        k: 0,
                        delta: DEFAULT_DELTA,
                        dist: DistKind::ComplexNormal,
                        m_min: 1,
                        m_max: spec.channels,
                        moment_samples: bound.samples,
                    }
                }
            };
            let b = bound_settings(bound, p.as_ref())?;
            params.k = b.k;
            params.delta = b.delta;
            params.dist = b.dist;
            params.moment_samples = b.samples;
            if let Some(lo) = m_min {
                params.m_min = *lo;
            }
            if let Some(hi) = m_max {
                params.m_max = *hi;
            }
            let rows = fig2_sweep(&params, seed)?;
            Ok((table_artifact(*format, sweep_csv(&rows), &rows)?, name))
        }
        Command::Table1 {
            preset: name,
            attempts,
            ceiling,
            c,
            format,
        } => {
            let mut params = Table1Params::from_preset(&preset(name)?)?;
            if let Some(a) = attempts {
                params.attempts = *a;
            }
            if let Some(cl) = ceiling {
                params.ceiling = *cl;
            }
            params.candes_plan_c = *c;
            let report = table1_report(&params, seed)?;
            Ok((
                table_artifact(*format, report.to_csv(), &report)?,
                Some(name.clone()),
            ))
        }
        Command::Table2 { presets, format } => {
            let names: Vec<&str> = if presets.is_empty() {
                TABLE2_PRESETS.to_vec()
            } else {
                presets.iter().map(String::as_str).collect()
            };
            let report = table2_report(&names, seed)?;
            Ok((table_artifact(*format, report.to_csv(), &report)?, None))
        }
    }
}
