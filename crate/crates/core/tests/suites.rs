use std::process::Command;

use weighted_birkhoff::measures::Anchor;
use weighted_birkhoff::potential::Potential;
use weighted_birkhoff::sft::Sft;
use weighted_birkhoff::verify::{
    count_level_cylinders, run_packing_suite, run_spectrum_equality_suite, run_limit_comparison_suite, LevelSetQuery,
    PackingOptions, LimitComparisonOptions,
};
use weighted_birkhoff::weights::{Classification, WeightSequence};

#[test]
fn bounded_weights_agree_with_plain_limits() {
    for w in [WeightSequence::constant(), WeightSequence::power(-0.5).unwrap()] {
        let r = run_limit_comparison_suite(&w, &LimitComparisonOptions::default()).unwrap();
        assert!(matches!(r.classification, Classification::Bounded { .. }));
        assert!(r.passed(), "{:?}", r.checks);
        assert!(r.counterexample.is_empty());
    }
}

#[test]
fn harmonic_counterexample_is_certified() {
    let r = run_limit_comparison_suite(&WeightSequence::harmonic(), &LimitComparisonOptions::default()).unwrap();
    assert!(r.passed(), "{:?}", r.checks);
    assert_eq!(r.counterexample.len(), 12);
}

#[test]
fn golden_mean_packing_with_two_fifths_anchor() {
    let g = Sft::golden_mean();
    let phi = Potential::indicator(&g, 1).unwrap();
    let anchor = Anchor::periodic(vec![0, 1, 0, 1, 0]);
    // at m_3 = 127 the copied symbols and per-block Parry boundary terms
    // still cost 6-7% of h_top; the 5% level is reached from k = 4
    let opts = PackingOptions { seeds: 10, entropy_from: 4, ..Default::default() };
    let r = run_packing_suite(&g, &phi, &WeightSequence::harmonic(), &anchor, &opts).unwrap();
    assert!((r.alpha - 0.4).abs() < 1e-15);
    assert!(r.passed(), "{:?}", r.checks);
    let gap3 = r.rows.iter().filter(|row| row.k == 3).map(|row| 1.0 - row.local_entropy / r.h_top).fold(0.0, f64::max);
    assert!(gap3 > 0.05 && gap3 < 0.1, "{gap3}");
}

#[test]
fn harmonic_level_set_slope_near_log_two() {
    let s = Sft::full_shift(2);
    let phi = Potential::indicator(&s, 1).unwrap();
    let q = LevelSetQuery {
        alpha: 0.5,
        eps: 0.05,
        depth_lo: 16,
        depth_hi: 24,
        weights: Some(WeightSequence::harmonic()),
    };
    let r = count_level_cylinders(&s, &phi, &q).unwrap();
    assert!((r.slope - 2f64.ln()).abs() <= 0.1, "{}", r.slope);
}

#[test]
fn spectrum_equality_outside_domain_is_empty() {
    let s = Sft::full_shift(2);
    let phi = Potential::indicator(&s, 1).unwrap();
    let r = run_spectrum_equality_suite(&s, &phi, &WeightSequence::harmonic(), &[-0.3, 0.5, 1.3], 0.05, (10, 14)).unwrap();
    assert!(r.passed(), "{:?}", r.checks);
    assert!(r.rows[0].weighted_counts.iter().all(|&c| c == 0));
}

fn wbirk(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_wbirk")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn cli_classify_power() {
    let (code, out) = wbirk(&["weights", "classify", "--family", "power", "--d", "-0.5", "--N", "1000000"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("n,S_n,ratio\n"));
    let last: f64 = out.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((last - 2.0).abs() < 0.01);
}

#[test]
fn cli_sft_info_golden() {
    let dir = std::env::temp_dir().join(format!("wbirk-info-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("golden.json");
    std::fs::write(&path, r#"{"alphabet":["0","1"],"adjacency":[[1,1],[1,0]]}"#).unwrap();
    let (code, out) = wbirk(&["sft", "info", "--sft", path.to_str().unwrap()]);
    std::fs::remove_dir_all(&dir).ok();
    assert_eq!(code, 0);
    assert!(out.contains("h_top 0.48121182506\n"));
    assert!(out.contains("r 2\n"));
}

#[test]
fn cli_verify_harmonic_counterexample() {
    let (code, out) = wbirk(&["verify", "thm1", "--family", "harmonic"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("k,endpoint,index,plain,weighted\n"));
}

#[test]
fn cli_exit_codes() {
    assert_eq!(wbirk(&["verify", "thm4", "--family", "constant"]).0, 2);
    assert_eq!(wbirk(&["measure", "sample"]).0, 2);
    assert_eq!(wbirk(&["spectrum", "--potential", "example", "--depths", "1", "--points", "5"]).0, 0);
}
