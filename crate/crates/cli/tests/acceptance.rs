//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! observed values. Runs as a plain binary (no libtest harness) so the lines
//! show up in `cargo test` output.
//!
//! A criterion listed in `KNOWN_RED` still prints `FAIL` when it fails, but
//! does not fail the process; the reason is printed next to it.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mwc_core::guarantees::{rip_min_m, strip_calderbank, BoundName, DistKind, RIP_SUBGAUSSIAN_C};
use mwc_core::harness::{
    fig2_sweep, preset, table1_report, table2_report, verify_preset, SweepParams, Table1Params,
    Table2Row, TABLE2_PRESETS,
};
use mwc_core::matrixlab::{row_measures, welch_bound, RowMeasures};
use mwc_core::mmv::{recovery_experiment, NoiseSpec, RecoveryParams};
use mwc_core::seqgen::{
    build_sign_matrix, gold_family, gold_preferred_pair, kasami_small_family, maximal_family,
    BinarySequence, CorrelationBank, FamilySpec, SignMatrix,
};
use mwc_core::{NonzeroDistribution, DEFAULT_DELTA};

const SEED: u64 = 1;

// criterion 1
const GOLD_ALPHA: (f64, f64) = (1.25, 1.27);
const GOLD_BETA: (f64, f64) = (0.18, 0.22);
const GOLD_GAMMA: (f64, f64) = (0.18, 0.22);
const GOLD_P: (f64, f64) = (0.930, 0.945);
// criterion 2
const HADAMARD_P_MAX: f64 = 0.01;
// criterion 3
const RANDOM2_P: (f64, f64) = (0.84, 0.87);
const RANDOM1_P: (f64, f64) = (0.92, 0.935);
const RANDOM_SEEDS: u64 = 10;
// criterion 4
const KASAMI_ALPHA_REF: f64 = 6.667;
const KASAMI_ALPHA_REL: f64 = 0.05;
const KASAMI_P: (f64, f64) = (0.65, 0.72);
const MAXIMAL_P: (f64, f64) = (0.92, 0.945);
// criterion 5
const SWEEP_MAX_GAP: f64 = 0.01;
// criterion 6
const VERIFY_TRIALS: usize = 100_000;
const VERIFY_SIGMAS: f64 = 3.0;
// criterion 7
const SLACK_TOL: f64 = -1e-12;
const RANDOM_INSTANCES: u64 = 100;
// criterion 9
const DE_REF: f64 = 4230.0;
const DE_REL: f64 = 0.25;
const RIP_REF: f64 = 950.0;
// criterion 10
const MMV_TRIALS: usize = 500;
const MMV_MIN_RATE: f64 = 0.90;

/// Criteria whose failure is analyzed and expected. The γ lower bound
/// `(2m−1)/(2mM−1) ≤ γ` is not a valid inequality: γ sums squared
/// correlations against reversed rows, which no Welch-type argument covers,
/// and `S = [1 1 1 −1]` already has γ = 0.
const KNOWN_RED: &[(u32, &str)] = &[(
    7,
    "the gamma lower bound is not a true inequality; random instances violate it",
)];

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

fn table2_row(name: &str, seed: u64) -> Table2Row {
    let r = table2_report(&[name], seed).expect("table2 preset");
    let row = r.rows.into_iter().next().expect("one row");
    assert_eq!(row.status, "ok", "{name}: {}", row.status);
    row
}

fn c1_gold() -> Outcome {
    let r = table2_row("table2_gold", SEED);
    let (a, b, g, p) = (
        r.alpha_x100.unwrap(),
        r.beta_x100.unwrap(),
        r.gamma_x100.unwrap(),
        r.p_normal.unwrap(),
    );
    check(
        within(a, GOLD_ALPHA) && within(b, GOLD_BETA) && within(g, GOLD_GAMMA) && within(p, GOLD_P),
        format!("100a={a:.4} 100b={b:.4} 100g={g:.4} p={p:.4} (ref 1.255/0.198/0.199/0.939)"),
    )
}

fn c2_hadamard() -> Outcome {
    let p = preset("table2_hadamard").unwrap();
    let s = build_sign_matrix(&p.family_spec(SEED)).unwrap();
    let rows = row_measures(&s);
    // α = 1/m exactly: Σ(S_i·S_k)² = m·M² in integers
    let exact = rows.alpha_energy * rows.m as u128 == (rows.m as u128 * rows.length as u128).pow(2);
    let r = table2_row("table2_hadamard", SEED);
    let pn = r.p_normal.unwrap();
    check(
        exact && pn <= HADAMARD_P_MAX,
        format!(
            "100a={:.3} (exact 1/m: {exact}) p={pn:.4} (ref 1.250, 0.000)",
            r.alpha_x100.unwrap()
        ),
    )
}

fn c3_random() -> Outcome {
    let mut ok = true;
    let mut summary = Vec::new();
    for (name, range) in [("table2_random2", RANDOM2_P), ("table2_random1", RANDOM1_P)] {
        let ps: Vec<f64> = (1..=RANDOM_SEEDS)
            .map(|seed| table2_row(name, seed).p_normal.unwrap())
            .collect();
        let (lo, hi) = ps
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| {
                (a.min(p), b.max(p))
            });
        let mean = ps.iter().sum::<f64>() / ps.len() as f64;
        ok &= ps.iter().all(|&p| within(p, range));
        summary.push(format!(
            "{name}: p in [{lo:.4}, {hi:.4}] mean {mean:.4} over {RANDOM_SEEDS} seeds"
        ));
    }
    check(ok, summary.join("; ") + " (ref 0.856, 0.927)")
}

fn c4_kasami_maximal() -> Outcome {
    let k = table2_row("table2_kasami", SEED);
    let a = k.alpha_x100.unwrap();
    let pk = k.p_normal.unwrap();
    let m = table2_row("table2_maximal", SEED);
    let pm = m.p_normal.unwrap();
    let alpha_ok = ((a - KASAMI_ALPHA_REF) / KASAMI_ALPHA_REF).abs() <= KASAMI_ALPHA_REL;
    check(
        alpha_ok && within(pk, KASAMI_P) && within(pm, MAXIMAL_P),
        format!(
            "kasami 100a={a:.3} p={pk:.4} (ref 6.667, 0.689); maximal p={pm:.4} (ref 0.932, construction differs)"
        ),
    )
}

fn c5_sweep() -> Outcome {
    let params = SweepParams::from_preset(&preset("fig2_sweep").unwrap(), SEED).unwrap();
    let rows = fig2_sweep(&params, SEED).unwrap();
    let worst = rows
        .iter()
        .map(|r| (r.m, (r.p_exact - r.p_approx).abs()))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let span = rows.first().map(|r| r.m) == Some(20) && rows.last().map(|r| r.m) == Some(100);
    check(
        span && worst.1 <= SWEEP_MAX_GAP,
        format!(
            "max |p_exact - p_approx| = {:.4} at m = {} over m in [20, 100]",
            worst.1, worst.0
        ),
    )
}

fn c6_validity() -> Outcome {
    let mut ok = true;
    let mut worst_margin = f64::INFINITY;
    let mut worst_z = 0.0f64;
    let mut failures = Vec::new();
    for name in TABLE2_PRESETS {
        let p = preset(name).unwrap();
        for dist in [DistKind::ComplexNormal, DistKind::ComplexUniform] {
            let r = verify_preset(&p, dist, VERIFY_TRIALS, SEED).unwrap();
            let e = &r.estimate;
            let margin = e.empirical_p + VERIFY_SIGMAS * e.stderr - r.theoretical.probability;
            let z = if e.moment2_stderr > 0.0 {
                (e.moment2 - 1.0).abs() / e.moment2_stderr
            } else {
                0.0
            };
            worst_margin = worst_margin.min(margin);
            worst_z = worst_z.max(z);
            if !(r.verdicts.bound_holds && r.verdicts.mean_one) {
                ok = false;
                failures.push(format!("{name}/{dist}"));
            }
        }
    }
    check(
        ok,
        format!(
            "12 runs of {VERIFY_TRIALS} trials: min(empirical + 3se - bound) = {worst_margin:.4}, max |E[Z^2]-1|/se = {worst_z:.2}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!(", failing: {}", failures.join(" "))
            }
        ),
    )
}

fn slacks(r: &RowMeasures) -> [(&'static str, f64); 6] {
    let w = welch_bound(r.m, r.length);
    [
        ("alpha_lower", r.alpha() - 1.0 / r.m as f64),
        ("alpha_upper", 1.0 - r.alpha()),
        ("beta_lower", r.beta() - w),
        ("beta_upper", 1.0 - r.beta()),
        ("gamma_lower", r.gamma() - w),
        ("gamma_upper", 1.0 - r.gamma()),
    ]
}

fn c7_bounds() -> Outcome {
    let ones = BinarySequence::new(vec![1; 64]).unwrap();
    let all_ones = SignMatrix::new(vec![ones; 8], "ones", None).unwrap();
    let r = row_measures(&all_ones);
    let full = (r.m as u128 * r.length as u128).pow(2);
    let ones_ok = r.alpha_energy == full
        && r.gamma_energy == full
        && r.beta_energy == full * r.length as u128;

    let h = build_sign_matrix(&preset("table2_hadamard").unwrap().family_spec(SEED)).unwrap();
    let hr = row_measures(&h);
    let had_ok = hr.alpha_energy * hr.m as u128 == (hr.m as u128 * hr.length as u128).pow(2)
        && slacks(&hr)
            .iter()
            .all(|(n, s)| *n == "gamma_lower" || *s >= SLACK_TOL);

    let mut violations: BTreeSet<&str> = BTreeSet::new();
    let mut gamma_violations = 0;
    let mut min_gamma_slack = f64::INFINITY;
    for seed in 0..RANDOM_INSTANCES {
        let s = build_sign_matrix(&FamilySpec::random(195, 40, seed)).unwrap();
        for (name, slack) in slacks(&row_measures(&s)) {
            if name == "gamma_lower" {
                min_gamma_slack = min_gamma_slack.min(slack);
            }
            if slack < SLACK_TOL {
                violations.insert(name);
                gamma_violations += (name == "gamma_lower") as usize;
            }
        }
    }
    let had_gamma = slacks(&hr)[4].1;
    check(
        ones_ok && had_ok && violations.is_empty() && had_gamma >= SLACK_TOL,
        format!(
            "all-ones exact 1/1/1: {ones_ok}; hadamard alpha = 1/m: {had_ok}, gamma slack {had_gamma:.2e}; \
             random 40x195: {gamma_violations}/{RANDOM_INSTANCES} violate gamma >= (2m-1)/(2mM-1) \
             (min slack {min_gamma_slack:.2e}), other violated: {:?}",
            violations.iter().filter(|n| **n != "gamma_lower").collect::<Vec<_>>()
        ),
    )
}

fn correlation_values(seqs: &[BinarySequence], cross_only: bool) -> BTreeSet<i64> {
    let bank = CorrelationBank::new(seqs).unwrap();
    let mut values = BTreeSet::new();
    for i in 0..seqs.len() {
        for k in i..seqs.len() {
            if cross_only && i == k {
                continue;
            }
            let c = bank.correlation(i, k);
            let skip_peak = usize::from(i == k);
            values.extend(c.into_iter().skip(skip_peak));
        }
    }
    values
}

/// Direct O(M²) correlation, independent of the FFT path.
fn direct_correlation(a: &[i8], b: &[i8]) -> Vec<i64> {
    let n = a.len();
    (0..n)
        .map(|t| (0..n).map(|j| a[j] as i64 * b[(j + t) % n] as i64).sum())
        .collect()
}

fn c8_sequences() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [3u32, 5, 7, 9] {
        let seqs = maximal_family(n, 1).unwrap();
        let s = seqs[0].as_slice();
        let c = direct_correlation(s, s);
        let good = c[0] == s.len() as i64 && c[1..].iter().all(|&v| v == -1);
        ok &= good;
        notes.push(format!("m-seq n={n}: {good}"));
    }
    let gold = gold_family(9, gold_preferred_pair(9).unwrap()).unwrap();
    let gold_allowed: BTreeSet<i64> = [-1, -33, 31].into();
    let gv = correlation_values(&gold, false);
    // the FFT path agrees with direct sums on every pair involving the
    // first two members
    let mut fft_agrees = true;
    let bank = CorrelationBank::new(&gold).unwrap();
    for i in 0..2 {
        for k in 0..gold.len() {
            fft_agrees &= bank.correlation(i, k)
                == direct_correlation(gold[i].as_slice(), gold[k].as_slice());
        }
    }
    let gold_ok = gold.len() == 513 && gv.is_subset(&gold_allowed) && fft_agrees;
    ok &= gold_ok;
    notes.push(format!(
        "gold n=9 ({} seqs) values {gv:?}, fft=direct: {fft_agrees}",
        gold.len()
    ));
    let kasami = kasami_small_family(8).unwrap();
    let kasami_allowed: BTreeSet<i64> = [-1, -17, 15].into();
    let mut kv = BTreeSet::new();
    for (i, a) in kasami.iter().enumerate() {
        for (k, b) in kasami.iter().enumerate().skip(i) {
            let c = direct_correlation(a.as_slice(), b.as_slice());
            kv.extend(c.into_iter().skip(usize::from(i == k)));
        }
    }
    let kasami_ok = kasami.len() == 16 && kv.is_subset(&kasami_allowed);
    ok &= kasami_ok;
    notes.push(format!("kasami n=8 ({} seqs) values {kv:?}", kasami.len()));
    check(ok, notes.join("; "))
}

/// `ln C(M, K)` as a sum of logs, independent of the gamma function.
fn ln_binomial_sum(m: usize, k: usize) -> f64 {
    (1..=k).map(|i| ((m - k + i) as f64 / i as f64).ln()).sum()
}

fn rip_oracle(m: usize, k: usize, delta: f64, p: f64, c: f64) -> u64 {
    let t = -(1.0 - p).ln();
    let v = 2.0 / (c * delta)
        * (2f64.ln() + ln_binomial_sum(m, k) + k as f64 * (12.0 / delta).ln() + t);
    v.ceil() as u64
}

fn c9_classical_bounds() -> Outcome {
    let cal = strip_calderbank(150, 195, 12, DEFAULT_DELTA).unwrap();
    let cal_ok = cal.probability == 0.0;

    let params = Table1Params::from_preset(&preset("table1_mwc").unwrap()).unwrap();
    let t1 = table1_report(&params, SEED).unwrap();
    let de = t1.row(BoundName::DonohoElad).unwrap().m;
    let de_ok = de.is_some_and(|m| (m as f64 - DE_REF).abs() <= DE_REL * DE_REF);
    let cp = t1.row(BoundName::CandesPlan).unwrap();
    let cp_ok = cp.m.is_none() && cp.status == "n/a";

    let mut rip_ok = true;
    let mut rip_notes = Vec::new();
    for k in [12, 24] {
        let got = rip_min_m(195, k, DEFAULT_DELTA, 0.97, RIP_SUBGAUSSIAN_C).unwrap();
        let oracle = rip_oracle(195, k, DEFAULT_DELTA, 0.97, RIP_SUBGAUSSIAN_C);
        rip_ok &= got == oracle;
        rip_notes.push(format!("K={k}: {got} (oracle {oracle})"));
    }
    let rip24 = rip_min_m(195, 24, DEFAULT_DELTA, 0.97, RIP_SUBGAUSSIAN_C).unwrap() as f64;
    let ratio = rip24 / RIP_REF;
    let order_ok = (ratio.log10()).abs() <= 0.5;
    check(
        cal_ok && de_ok && cp_ok && rip_ok && order_ok,
        format!(
            "calderbank(150) p={} raw={:.3}; donoho-elad m={} (ref 4230); candes-plan {}; rip {} ratio to 950 = {ratio:.2}",
            cal.probability,
            cal.raw_value,
            de.map_or("none".into(), |m| m.to_string()),
            cp.status,
            rip_notes.join(", ")
        ),
    )
}

fn c10_mmv() -> Outcome {
    let p = preset("mmv_gold_standard").unwrap();
    let mmv = p.mmv.unwrap();
    let params = RecoveryParams {
        family: p.family_spec(SEED),
        k_rows: p.k,
        r: mmv.r,
        noise: NoiseSpec::Sigma(mmv.sigma.unwrap_or(0.0)),
        dist: NonzeroDistribution::standard(DistKind::ComplexNormal),
        trials: MMV_TRIALS,
        seed: SEED,
    };
    let main = recovery_experiment(&params).unwrap();
    let single = recovery_experiment(&RecoveryParams {
        k_rows: 1,
        ..params
    })
    .unwrap();
    check(
        main.success_rate >= MMV_MIN_RATE && single.success_rate == 1.0,
        format!(
            "40x195, 12 rows, r=12: {:.3} +- {:.3} over {MMV_TRIALS} trials; K_rows=1: {:.3}",
            main.success_rate, main.stderr, single.success_rate
        ),
    )
}

fn run_cli(args: &[&str], threads: &str, dir: &Path, tag: &str) -> Vec<u8> {
    let out = dir.join(format!("{tag}.out"));
    let status = Command::new(env!("CARGO_BIN_EXE_mwc-lab"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .env("MWC_LAB_THREADS", threads)
        .status()
        .expect("spawn mwc-lab");
    assert!(status.success(), "mwc-lab {args:?} failed");
    std::fs::read(out).unwrap()
}

fn c11_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let pat = dir.path().join("g.pat");
    let pat_s = pat.to_str().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_mwc-lab"))
        .args([
            "gen", "--family", "gold", "--n", "9", "--m", "80", "--out", pat_s,
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "gen", "--family", "random", "--M", "195", "--m", "40", "--seed", "5",
        ],
        vec!["measures", "--preset", "table2_kasami"],
        vec![
            "exrip",
            "--patterns",
            pat_s,
            "--k",
            "24",
            "--dist",
            "complex-uniform",
            "--seed",
            "3",
        ],
        vec![
            "bounds",
            "--family",
            "random",
            "--M",
            "195",
            "--m",
            "40",
            "--k",
            "12",
            "--samples",
            "100000",
        ],
        vec![
            "verify",
            "--preset",
            "table2_random2",
            "--trials",
            "20000",
            "--samples",
            "100000",
            "--seed",
            "7",
        ],
        vec![
            "recover",
            "--preset",
            "mmv_gold_standard",
            "--trials",
            "60",
            "--snr",
            "20",
            "--seed",
            "4",
        ],
        vec![
            "sweep",
            "--m-min",
            "20",
            "--m-max",
            "60",
            "--samples",
            "100000",
        ],
        vec![
            "table1",
            "--attempts",
            "4",
            "--ceiling",
            "1024",
            "--seed",
            "2",
        ],
        vec!["table2", "--seed", "9"],
    ];
    let mut differing = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        let a = run_cli(args, "1", dir.path(), &format!("{i}a"));
        let b = run_cli(args, "1", dir.path(), &format!("{i}b"));
        let c = run_cli(args, "4", dir.path(), &format!("{i}c"));
        if a != b || a != c || a.is_empty() {
            differing.push(args[0]);
        }
    }
    check(
        differing.is_empty(),
        format!(
            "{} commands x (repeat, 1 vs 4 threads): differing {differing:?}",
            commands.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "gold family row", c1_gold),
        (2, "hadamard family row", c2_hadamard),
        (3, "random rows over seeds", c3_random),
        (4, "kasami and maximal rows", c4_kasami_maximal),
        (5, "sweep exact vs approximation", c5_sweep),
        (6, "ExRIP bound validity by Monte Carlo", c6_validity),
        (7, "quality-measure bound suite", c7_bounds),
        (8, "sequence correlation invariants", c8_sequences),
        (9, "classical bounds at MWC dimensions", c9_classical_bounds),
        (10, "MMV support recovery", c10_mmv),
        (11, "CLI determinism", c11_determinism),
    ];
    let mut unexpected = 0;
    let mut known = 0;
    for (id, name, f) in criteria {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        let expected_red = KNOWN_RED
            .iter()
            .find(|(k, _)| *k == id)
            .map(|(_, why)| *why);
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let suffix = match (o.pass, expected_red) {
            (false, Some(why)) => {
                known += 1;
                format!(" [known red: {why}]")
            }
            (false, None) => {
                unexpected += 1;
                String::new()
            }
            _ => String::new(),
        };
        println!(
            "criterion {id:>2} {verdict} {name}: {} ({secs:.1}s){suffix}",
            o.detail
        );
    }
    println!(
        "acceptance: {} pass, {known} known red, {unexpected} unexpected failures",
        11 - known - unexpected
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
