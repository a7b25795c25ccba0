//! Reproduction checks for the sweep and search drivers at the MWC
//! dimensions.

use mwc_core::guarantees::{
    min_channels_search, BoundName, DistKind, MomentMethod, NonzeroDistribution, SearchParams,
    RIP_SUBGAUSSIAN_C,
};
use mwc_core::harness::{fig2_sweep, preset, table2_report, SweepParams, TABLE2_PRESETS};
use mwc_core::DEFAULT_DELTA;

/// Adjacent `m` may dip by at most this much.
const MONOTONE_TOL: f64 = 0.005;

#[test]
fn sweep_is_nearly_monotone_and_hits_random2() {
    let params = SweepParams::from_preset(&preset("fig2_sweep").unwrap(), 1).unwrap();
    let rows = fig2_sweep(&params, 1).unwrap();
    for w in rows.windows(2) {
        assert!(
            w[1].p_exact >= w[0].p_exact - MONOTONE_TOL,
            "m = {}: {} -> {}",
            w[1].m,
            w[0].p_exact,
            w[1].p_exact
        );
        assert!(w[1].p_approx > w[0].p_approx);
    }
    let at40 = rows.iter().find(|r| r.m == 40).unwrap();
    assert!((at40.p_exact - 0.856).abs() <= 0.01, "{}", at40.p_exact);
}

#[test]
fn exrip_search_lands_near_forty_channels() {
    let params = SearchParams {
        length: 195,
        k: 24,
        delta: DEFAULT_DELTA,
        target_prob: 0.85,
        dist: NonzeroDistribution::standard(DistKind::ComplexNormal),
        moments: MomentMethod::MonteCarlo {
            samples: 1_000_000,
            seed: 1,
        },
        attempts: 100,
        ceiling: 1024,
        seed: 1,
        candes_plan_c: None,
        rip_c: RIP_SUBGAUSSIAN_C,
    };
    let exact = min_channels_search(BoundName::Exrip, params).unwrap();
    let m = exact.m.unwrap();
    assert!((36..=44).contains(&m), "{m}");
    let approx = min_channels_search(BoundName::ExripApprox, params).unwrap();
    assert_eq!(approx.m, Some(39));
}

#[test]
fn table2_is_deterministic_in_seed() {
    let a = table2_report(&TABLE2_PRESETS, 3).unwrap();
    let b = table2_report(&TABLE2_PRESETS, 3).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    let c = table2_report(&["table2_random2"], 4).unwrap();
    let a2 = a
        .rows
        .iter()
        .find(|r| r.preset == "table2_random2")
        .unwrap();
    assert_ne!(a2.alpha_x100, c.rows[0].alpha_x100);
}
