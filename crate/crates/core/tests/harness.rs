use proptest::prelude::*;
use serde::Deserialize;

use sparse_recovery::harness::{
    csv_bytes, gen_signal, run_trials, summarize, HarnessConfig, HeadShape, Quantiles, SignalSpec, TailShape,
};

fn small() -> HarnessConfig {
    let mut cfg = HarnessConfig::from_text("n = 2048\nk = 3\neps = 0.5\ntrials = 4\nseed = 7\n").unwrap();
    cfg.tail = TailShape::Geometric { ratio: 0.95, support: Some(300) };
    cfg.tail_mass = 2.0;
    cfg
}

#[derive(Deserialize)]
struct Row {
    seed: u64,
    ratio: f64,
    rel_error: f64,
    recall: f64,
    decoys: usize,
    error: Option<String>,
}

#[test]
fn summary_is_recomputable_from_csv_rows() {
    let cfg = small();
    let reports = run_trials(&cfg, 2).unwrap();
    let summary = summarize(&cfg, &reports).unwrap();
    let bytes = csv_bytes(&reports).unwrap();
    let rows: Vec<Row> = csv::Reader::from_reader(bytes.as_slice())
        .deserialize()
        .collect::<Result<_, _>>()
        .unwrap();
    assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![7, 8, 9, 10]);
    let ok: Vec<&Row> = rows.iter().filter(|r| r.error.is_none()).collect();
    assert_eq!(summary.failed, rows.len() - ok.len());
    let ratios: Vec<f64> = ok.iter().map(|r| r.ratio).collect();
    assert_eq!(summary.ratio, Quantiles::of(&ratios));
    assert_eq!(summary.recall, Quantiles::of(&ok.iter().map(|r| r.recall).collect::<Vec<_>>()));
    assert_eq!(summary.decoys, Quantiles::of(&ok.iter().map(|r| r.decoys as f64).collect::<Vec<_>>()));
    assert_eq!(summary.exact, ok.iter().filter(|r| r.rel_error <= 1e-6).count());
    assert_eq!(
        summary.within_one_plus_two_eps,
        ok.iter().filter(|r| r.ratio <= 1.0 + 2.0 * cfg.eps).count()
    );
    // every constant is recorded
    for key in ["c1", "c7", "round_decay", "upfal_alpha", "zeta", "delta", "bfs_c"] {
        assert!(summary.config.contains_key(key), "{key} missing");
    }
    assert!(summary.rounds.iter().all(|r| r.pv_m > 0 && r.pv_h >= 2));
}

#[test]
fn reports_are_finite_and_normalized_errors_unscaled() {
    let cfg = small();
    for r in run_trials(&cfg, 1).unwrap() {
        assert!(r.ok(), "{:?}", r.error);
        for v in [r.ratio, r.rel_error, r.recall, r.scale, r.tail_l1, r.l1_error] {
            assert!(v.is_finite());
        }
        assert!((0.0..=1.0).contains(&r.recall));
        assert!((r.tail_l1 - 2.0).abs() < 1e-9);
        assert!((r.scale - 0.5).abs() < 1e-12);
        assert!(r.ratio <= 1.0 + 2.0 * cfg.eps, "seed {} ratio {}", r.seed, r.ratio);
    }
}

fn head() -> impl Strategy<Value = HeadShape> {
    prop_oneof![
        (1.0f64..5.0).prop_map(|value| HeadShape::Flat { value }),
        (1.0f64..5.0, 0.8f64..1.0).prop_map(|(start, ratio)| HeadShape::Geometric { start, ratio }),
    ]
}

fn tail() -> impl Strategy<Value = TailShape> {
    prop_oneof![
        prop::option::of(100usize..2000).prop_map(|support| TailShape::Uniform { support }),
        (0.95f64..0.999, 200usize..2000).prop_map(|(ratio, s)| TailShape::Geometric { ratio, support: Some(s) }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_tail_mass_is_exact(k in 0usize..10, head in head(), tail in tail(), mass in 0.0f64..1.5, seed in any::<u64>()) {
        let spec = SignalSpec { n: 4096, k, head, tail, tail_mass: mass, seed };
        let x = gen_signal(&spec, None).unwrap();
        prop_assert!((x.tail_norm(k) - mass).abs() <= 1e-9 * mass.max(1e-300));
        prop_assert_eq!(x.top(k).len(), k);
        prop_assert_eq!(gen_signal(&spec, None).unwrap(), x);
    }

    #[test]
    fn config_text_round_trips(k in 1usize..64, eps in 0.01f64..0.9, c3 in 0.5f64..4.0, delta in 4usize..16, trials in 1usize..1000) {
        let mut cfg = HarnessConfig { k, eps, trials, ..Default::default() };
        cfg.sketch.c3 = c3;
        cfg.sketch.delta = delta as _;
        prop_assert_eq!(HarnessConfig::from_text(&cfg.to_text()).unwrap(), cfg);
    }
}
