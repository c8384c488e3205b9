//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test --test acceptance`.

use std::time::Instant;

use aircomp::analysis::{chernoff_tail, epsilon_delta_rate_bound, epsilon_rate_bound, min_source_length, GammaParams};
use aircomp::channel::{db_to_linear, ChannelRealization, SystemConfig};
use aircomp::coding::{construct_random_orthonormal, construct_repetition, construct_with_spectrum, validate, RankMode};
use aircomp::experiments::{
    oracle_equivalence_test, run_trials, summarize, ChannelMode, ExperimentPlan, SchemeKind, TrialSet,
};
use aircomp::numerics::rng::{SimRng, StreamDomain};
use aircomp::numerics::stats::{ks_critical_two_sample, mean, unbiased_variance};
use aircomp::numerics::ComplexMatrix;

const SEED: u64 = 20_240_601;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn config(l: usize, l_tilde: usize, snr_db: f64) -> SystemConfig {
    SystemConfig { l, l_tilde, snr_db, master_seed: SEED, ..SystemConfig::default() }
}

fn trials(config: SystemConfig, scheme: SchemeKind, n: usize, mode: ChannelMode) -> TrialSet {
    run_trials(&ExperimentPlan::new(config, scheme, n, mode)).expect("trials run")
}

fn orthonormality() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for (l, l_tilde) in [(5, 10), (5, 20), (8, 16)] {
        for seed in 0..100 {
            let mut rng = SimRng::stream(seed, StreamDomain::Encoding, 0);
            let enc = construct_random_orthonormal(l_tilde, l, &mut rng).expect("construct");
            worst = worst.max(enc.phi().gram().max_abs_diff(&ComplexMatrix::identity(l)));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(worst < 1e-10 && elapsed < 1.0, format!("max |PhiH Phi - I| = {worst:.3e} (< 1e-10), {elapsed:.3} s (< 1 s)"))
}

fn mean_reproduction() -> Outcome {
    let ts = trials(config(5, 10, 10.0), SchemeKind::RandomOrthonormal, 100_000, ChannelMode::FixedUnitMinGain);
    let m = mean(&ts.samples).unwrap();
    let rel = (m / 0.05 - 1.0).abs();
    outcome(rel <= 0.02, format!("mean MSE {m:.6} vs 0.05, relative error {rel:.4} (<= 0.02)"))
}

fn gamma_law() -> Outcome {
    let ts = trials(config(5, 10, 10.0), SchemeKind::RandomOrthonormal, 10_000, ChannelMode::FixedUnitMinGain);
    let theory = GammaParams::new(5.0, 0.01).unwrap();
    let report = summarize(&ts, &theory, None).unwrap();
    let d = report.ks_statistic.unwrap();
    outcome(d < 0.0163, format!("KS distance {d:.5} vs Gamma(5, 0.01) (< 0.0163)"))
}

fn oracle_equivalence() -> Outcome {
    let n = 10_000;
    let cfg = config(2, 4, 10.0);
    let mut rng = SimRng::stream(SEED, StreamDomain::Encoding, 4);
    let enc = construct_with_spectrum(4, &[0.5, 1.5], &mut rng).expect("custom matrix");
    let channel = ChannelRealization::unit(cfg.k_users);
    let d = oracle_equivalence_test(&enc, &cfg, &channel, n, &mut rng).unwrap();
    let critical = ks_critical_two_sample(n, n);
    outcome(d < critical, format!("two-sample KS {d:.5} for spectrum {{0.5, 1.5}} (< {critical:.5})"))
}

fn chernoff() -> Outcome {
    let n = 100_000;
    let ts = trials(config(5, 10, 10.0), SchemeKind::RandomOrthonormal, n, ChannelMode::FixedUnitMinGain);
    let theory = GammaParams::new(5.0, 0.01).unwrap();
    let mut passed = true;
    let mut parts = Vec::new();
    for eta in [0.5, 1.0, 2.0] {
        let freq = summarize(&ts, &theory, Some(eta)).unwrap().exceedance_freq.unwrap();
        let bound = (-5.0 * (eta - f64::ln(1.0 + eta))).exp();
        let limit = bound + 3.0 * (bound * (1.0 - bound) / n as f64).sqrt();
        passed &= freq <= limit;
        parts.push(format!("eta {eta}: {freq:.5} <= {limit:.5}"));
    }
    let mut grid_ok = true;
    for delta in [0.01, 0.05, 0.1, 0.2, 0.5] {
        for eta in [0.1, 0.5, 1.0, 2.0, 5.0] {
            grid_ok &= chernoff_tail(min_source_length(delta, eta) as f64, eta) <= delta;
        }
    }
    passed &= grid_ok;
    parts.push(format!("l_min grid {}", if grid_ok { "ok" } else { "violated" }));
    outcome(passed, parts.join("; "))
}

fn rate_regions() -> Outcome {
    let rho = db_to_linear(15.0);
    let r2 = epsilon_rate_bound(0.02, rho, 1.0, 1.0);
    let r4 = epsilon_delta_rate_bound(0.02, 1.0, rho, 1.0, 1.0);
    let mut passed = format!("{r2:.6}") == "0.632456" && format!("{r4:.6}") == "0.316228";
    let snrs: Vec<f64> = (-20..=50).map(f64::from).collect();
    let mut prev = (0.0, 0.0);
    for &snr in &snrs {
        let rho = db_to_linear(snr);
        let a = epsilon_rate_bound(0.02, rho, 1.0, 1.0);
        let b = epsilon_delta_rate_bound(0.02, 1.0, rho, 1.0, 1.0);
        passed &= b <= a && a >= prev.0 && b >= prev.1;
        prev = (a, b);
    }
    outcome(passed, format!("eps bound {r2:.6} (0.632456), eps-delta bound {r4:.6} (0.316228); monotone and nested over -20..50 dB"))
}

fn blocklength() -> Outcome {
    let n = 10_000;
    let short = trials(config(5, 10, 15.0), SchemeKind::RandomOrthonormal, n, ChannelMode::FixedUnitMinGain);
    let long = trials(config(10, 20, 15.0), SchemeKind::RandomOrthonormal, n, ChannelMode::FixedUnitMinGain);
    let (m1, v1) = (mean(&short.samples).unwrap(), unbiased_variance(&short.samples).unwrap());
    let (m2, v2) = (mean(&long.samples).unwrap(), unbiased_variance(&long.samples).unwrap());
    let ratio = v2 / v1;
    let se = (v1 / n as f64 + v2 / n as f64).sqrt();
    let passed = (ratio / 0.5 - 1.0).abs() <= 0.10 && (m1 - m2).abs() <= 3.0 * se;
    outcome(
        passed,
        format!("var(L~=20)/var(L~=10) = {ratio:.4} (0.5 +- 10%), |mean diff| = {:.3e} (<= 3 SE = {:.3e})", (m1 - m2).abs(), 3.0 * se),
    )
}

fn scaling_laws() -> Outcome {
    let n = 10_000;
    // Independent seeds per run, so the ratios carry sampling noise.
    let run = |l, l_tilde, snr, seed| {
        let cfg = SystemConfig { master_seed: seed, ..config(l, l_tilde, snr) };
        let ts = trials(cfg, SchemeKind::RandomOrthonormal, n, ChannelMode::FixedUnitMinGain);
        mean(&ts.samples).unwrap()
    };
    let snr_ratio = run(5, 10, 10.0, SEED + 1) / run(5, 10, 20.0, SEED + 2);
    let rate_ratio = run(5, 20, 10.0, SEED + 3) / run(5, 10, 10.0, SEED + 4);
    let passed = (snr_ratio / 10.0 - 1.0).abs() <= 0.05 && (rate_ratio / 0.5 - 1.0).abs() <= 0.05;
    outcome(passed, format!("mean(10 dB)/mean(20 dB) = {snr_ratio:.4} (10 +- 5%), mean(R=0.25)/mean(R=0.5) = {rate_ratio:.4} (0.5 +- 5%)"))
}

fn baseline_identity() -> Outcome {
    let mut identical = true;
    let mut total = 0;
    for seed in 0..5 {
        for mode in [ChannelMode::FixedUnitMinGain, ChannelMode::RicianPerTrial, ChannelMode::FixedFromSeed] {
            let cfg = SystemConfig { master_seed: seed, ..config(5, 5, 10.0) };
            let coded = trials(cfg.clone(), SchemeKind::Identity, 1_000, mode);
            let uncoded = trials(cfg, SchemeKind::Uncoded, 1_000, mode);
            identical &= coded.samples.iter().zip(&uncoded.samples).all(|(a, b)| a.to_bits() == b.to_bits());
            total += coded.samples.len();
        }
    }
    outcome(identical, format!("{total} paired distortion samples bitwise identical"))
}

fn rank_condition() -> Outcome {
    let mut random_ok = true;
    for seed in 0..100 {
        let mut rng = SimRng::stream(seed, StreamDomain::Encoding, 0);
        let enc = construct_random_orthonormal(6, 3, &mut rng).unwrap();
        let report = validate(&enc, 100_000, 1_000, &mut rng);
        random_ok &= report.rank_mode == RankMode::Exhaustive && report.subsets_checked == 20 && report.rank_ok;
    }
    let repetition = construct_repetition(2, 2).unwrap();
    let mut rng = SimRng::stream(SEED, StreamDomain::Validation, 0);
    let first = validate(&repetition, 100_000, 1_000, &mut rng);
    let second = validate(&repetition, 100_000, 1_000, &mut rng);
    let repetition_fails = first.rank_mode == RankMode::Exhaustive && !first.rank_ok && first == second;
    outcome(
        random_ok && repetition_fails,
        format!(
            "random (6,3) passes for 100 seeds: {random_ok}; repetition (L=2, m=2) fails: {repetition_fails} (worst ratio {:.3e})",
            first.worst_min_singular_ratio
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("optimality identity", orthonormality),
        ("mean MSE reproduction", mean_reproduction),
        ("gamma-law certification", gamma_law),
        ("oracle equivalence", oracle_equivalence),
        ("Chernoff bound", chernoff),
        ("rate-region numbers", rate_regions),
        ("blocklength concentration", blocklength),
        ("scaling laws", scaling_laws),
        ("baseline identity", baseline_identity),
        ("rank condition", rank_condition),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        println!("criterion {:>2} {}: {}: {}", i + 1, if result.passed { "PASS" } else { "FAIL" }, name, result.detail);
        failures += usize::from(!result.passed);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
