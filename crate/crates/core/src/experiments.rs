//! Monte Carlo harness: trial sets, summaries, figure sweeps and the
//! statistical certification suite.
//!
//! Trial `i` of a plan draws everything from the stream
//! `(master_seed, Trial, i)`, so results do not depend on how trials are
//! scheduled across threads. Fixed channels come from the `Channel` stream
//! and random encoding matrices from the `Encoding` stream.

use std::path::Path;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    chernoff_tail, epsilon_delta_rate_bound, epsilon_rate_bound, gamma_cdf, min_source_length,
    optimal_mse_gamma, sample_general_mse, Criterion, GammaParams,
};
use crate::channel::{
    db_to_linear, max_power_scaling, run_uncoded_round, sample_rician, ChannelRealization, CodedLink,
    SystemConfig,
};
use crate::coding::{
    construct_identity, construct_random_orthonormal, construct_repetition, construct_with_spectrum,
    gram_spectrum, EncodingMatrix,
};
use crate::error::{Error, Result};
use crate::numerics::rng::{SimRng, StreamDomain, RNG_ALGORITHM};
use crate::numerics::stats::{
    ks_critical_one_sample, ks_critical_two_sample, ks_distance, ks_two_sample, mean,
    unbiased_variance,
};

/// Header of every sweep CSV.
pub const CSV_HEADER: &str = "experiment,snr_db,rate,l,l_tilde,scheme,trials,mean_mse,var_mse,theory_mean,theory_var,ks_stat,exceedance,bound";

/// How the channel evolves over the trials of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    /// `h_k = 1` for all users, held fixed.
    FixedUnitMinGain,
    /// Fresh Rician draw in every trial.
    RicianPerTrial,
    /// One Rician draw from the plan seed, held fixed.
    FixedFromSeed,
}

impl ChannelMode {
    pub fn is_fixed(&self) -> bool {
        !matches!(self, ChannelMode::RicianPerTrial)
    }
}

/// Transmission scheme of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SchemeKind {
    RandomOrthonormal,
    Identity,
    Repetition { copies: usize },
    /// Direct transmission without an encoding matrix; needs `l_tilde = l`.
    Uncoded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    SnrDb,
    Rate,
    LTilde,
    Epsilon,
    Eta,
}

/// Everything needed to reproduce a trial set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub config: SystemConfig,
    pub construction: SchemeKind,
    pub trials: usize,
    pub channel_mode: ChannelMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<(SweepParameter, Vec<f64>)>>,
    #[serde(default)]
    pub output_path: String,
}

impl ExperimentPlan {
    pub fn new(config: SystemConfig, construction: SchemeKind, trials: usize, channel_mode: ChannelMode) -> Self {
        Self { config, construction, trials, channel_mode, sweep: None, output_path: String::new() }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        let (l, l_tilde) = (self.config.l, self.config.l_tilde);
        match self.construction {
            SchemeKind::Identity | SchemeKind::Uncoded if l_tilde != l => Err(Error::InvalidConfig(
                format!("{:?} needs l_tilde = l, got {l_tilde} and {l}", self.construction),
            )),
            SchemeKind::Repetition { copies } if copies == 0 || l_tilde != l * copies => {
                Err(Error::InvalidConfig(format!(
                    "repetition with {copies} copies needs l_tilde = {}",
                    l * copies.max(1)
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("plan serializes");
        text.push('\n');
        text
    }

    /// Encoding matrix for coded schemes; `None` for [`SchemeKind::Uncoded`].
    pub fn encoding_matrix(&self) -> Result<Option<EncodingMatrix>> {
        let (l, l_tilde) = (self.config.l, self.config.l_tilde);
        let enc = match self.construction {
            SchemeKind::RandomOrthonormal => {
                let mut rng = SimRng::stream(self.config.master_seed, StreamDomain::Encoding, 0);
                construct_random_orthonormal(l_tilde, l, &mut rng)?
            }
            SchemeKind::Identity => construct_identity(l)?,
            SchemeKind::Repetition { copies } => construct_repetition(l, copies)?,
            SchemeKind::Uncoded => return Ok(None),
        };
        Ok(Some(enc))
    }

    /// The channel held fixed in the fixed modes.
    pub fn fixed_channel(&self) -> Result<Option<ChannelRealization>> {
        match self.channel_mode {
            ChannelMode::FixedUnitMinGain => Ok(Some(ChannelRealization::unit(self.config.k_users))),
            ChannelMode::FixedFromSeed => {
                let mut rng = SimRng::stream(self.config.master_seed, StreamDomain::Channel, 0);
                Ok(Some(sample_rician(&self.config, &mut rng)?))
            }
            ChannelMode::RicianPerTrial => Ok(None),
        }
    }

    /// Gamma law of the optimal-scheme MSE given a channel min gain.
    pub fn theory_for_gain(&self, min_gain: f64) -> Result<GammaParams> {
        optimal_mse_gamma(self.config.l, self.config.l_tilde, self.config.p_w, self.config.rho_x(), min_gain)
    }
}

/// Distortion samples of a plan, indexed by trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSet {
    pub plan: ExperimentPlan,
    pub rng_algorithm: String,
    pub samples: Vec<f64>,
    pub channel_min_gains: Vec<f64>,
    pub p_used: Vec<f64>,
}

impl TrialSet {
    /// Per-trial CSV: `trial,distortion,min_gain,p_used`.
    pub fn to_csv(&self) -> String {
        let records = self
            .samples
            .iter()
            .zip(&self.channel_min_gains)
            .zip(&self.p_used)
            .enumerate()
            .map(|(i, ((d, g), p))| vec![i.to_string(), fmt_num(*d), fmt_num(*g), fmt_num(*p)]);
        csv_string("trial,distortion,min_gain,p_used", records)
    }
}

enum Link {
    Coded(CodedLink),
    Uncoded,
}

/// Runs `plan.trials` independent rounds. Uses `P = P*` of the channel in
/// force for each trial.
pub fn run_trials(plan: &ExperimentPlan) -> Result<TrialSet> {
    plan.validate()?;
    let link = match plan.encoding_matrix()? {
        Some(enc) => Link::Coded(CodedLink::new(enc)?),
        None => Link::Uncoded,
    };
    let fixed = plan.fixed_channel()?;
    let config = &plan.config;

    let results: Vec<(f64, f64, f64)> = (0..plan.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = SimRng::stream(config.master_seed, StreamDomain::Trial, i as u64);
            let drawn;
            let channel = match &fixed {
                Some(ch) => ch,
                None => {
                    drawn = sample_rician(config, &mut rng)?;
                    &drawn
                }
            };
            let p = max_power_scaling(channel, config);
            let outcome = match &link {
                Link::Coded(link) => link.run_round(config, channel, p, &mut rng)?,
                Link::Uncoded => run_uncoded_round(config, channel, p, &mut rng)?,
            };
            Ok((outcome.distortion, channel.min_gain(), p))
        })
        .collect::<Result<_>>()?;

    let (samples, (channel_min_gains, p_used)) = results.into_iter().map(|(d, g, p)| (d, (g, p))).unzip();
    Ok(TrialSet {
        plan: plan.clone(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        samples,
        channel_min_gains,
        p_used,
    })
}

/// Empirical MSE statistics next to their theoretical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseReport {
    pub trials: usize,
    pub mean: f64,
    pub variance: f64,
    pub theory_mean: f64,
    pub theory_variance: f64,
    pub ks_statistic: Option<f64>,
    pub ks_critical: Option<f64>,
    pub eta: Option<f64>,
    pub exceedance_freq: Option<f64>,
    pub chernoff_bound: Option<f64>,
    /// Set when there is a single sample and the variance is reported as 0.
    pub degenerate: bool,
}

impl MseReport {
    pub fn mean_ratio(&self) -> f64 {
        self.mean / self.theory_mean
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Summarizes a trial set against `theory`.
///
/// In the fixed channel modes the theoretical moments are those of `theory`
/// and a one-sample KS statistic against its CDF is included. With a fresh
/// channel per trial, each trial follows `Γ(theory.shape, θ_i)` where `θ_i`
/// is the scale for that trial's min gain, and the reported moments are
/// those of this mixture. When `eta` is given, the exceedance frequency
/// counts trials with `d ≥ (1+η)` times their conditional theoretical mean.
pub fn summarize(ts: &TrialSet, theory: &GammaParams, eta: Option<f64>) -> Result<MseReport> {
    let n = ts.samples.len();
    let sample_mean = mean(&ts.samples)?;
    let variance = unbiased_variance(&ts.samples)?;

    let conditional: Vec<GammaParams> = if ts.plan.channel_mode.is_fixed() {
        vec![*theory; n]
    } else {
        ts.channel_min_gains
            .iter()
            .map(|&g| {
                let scaled = ts.plan.theory_for_gain(g)?;
                GammaParams::new(theory.shape, scaled.scale)
            })
            .collect::<Result<_>>()?
    };
    let (theory_mean, theory_variance) = if ts.plan.channel_mode.is_fixed() {
        (theory.mean(), theory.variance())
    } else {
        let m = conditional.iter().map(GammaParams::mean).sum::<f64>() / n as f64;
        let second = conditional.iter().map(|g| g.variance() + g.mean() * g.mean()).sum::<f64>() / n as f64;
        (m, (second - m * m).max(0.0))
    };

    let (ks_statistic, ks_critical) = if ts.plan.channel_mode.is_fixed() {
        let mut sorted = ts.samples.clone();
        sorted.sort_by(f64::total_cmp);
        (Some(ks_distance(&sorted, |x| gamma_cdf(theory, x))?), Some(ks_critical_one_sample(n)))
    } else {
        (None, None)
    };

    let exceedance_freq = eta.map(|eta| {
        let hits = ts
            .samples
            .iter()
            .zip(&conditional)
            .filter(|(d, g)| **d >= (1.0 + eta) * g.mean())
            .count();
        hits as f64 / n as f64
    });

    Ok(MseReport {
        trials: n,
        mean: sample_mean,
        variance,
        theory_mean,
        theory_variance,
        ks_statistic,
        ks_critical,
        eta,
        exceedance_freq,
        chernoff_bound: eta.map(|eta| chernoff_tail(theory.shape, eta)),
        degenerate: n < 2,
    })
}

/// One CSV row. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TableRow {
    pub experiment: String,
    pub snr_db: Option<f64>,
    pub rate: Option<f64>,
    pub l: Option<usize>,
    pub l_tilde: Option<usize>,
    pub scheme: String,
    pub trials: Option<usize>,
    pub mean_mse: Option<f64>,
    pub var_mse: Option<f64>,
    pub theory_mean: Option<f64>,
    pub theory_var: Option<f64>,
    pub ks_stat: Option<f64>,
    pub exceedance: Option<f64>,
    pub bound: Option<f64>,
}

impl TableRow {
    fn from_report(experiment: &str, scheme: &str, plan: &ExperimentPlan, report: &MseReport) -> Self {
        TableRow {
            experiment: experiment.into(),
            snr_db: Some(plan.config.snr_db),
            rate: Some(plan.config.rate()),
            l: Some(plan.config.l),
            l_tilde: Some(plan.config.l_tilde),
            scheme: scheme.into(),
            trials: Some(report.trials),
            mean_mse: Some(report.mean),
            var_mse: Some(report.variance),
            theory_mean: Some(report.theory_mean),
            theory_var: Some(report.theory_variance),
            ks_stat: report.ks_statistic,
            exceedance: report.exceedance_freq,
            bound: report.chernoff_bound,
        }
    }

    fn record(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        let u = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.experiment.clone(),
            f(self.snr_db),
            f(self.rate),
            u(self.l),
            u(self.l_tilde),
            self.scheme.clone(),
            u(self.trials),
            f(self.mean_mse),
            f(self.var_mse),
            f(self.theory_mean),
            f(self.theory_var),
            f(self.ks_stat),
            f(self.exceedance),
            f(self.bound),
        ]
        .into()
    }
}

fn csv_string(header: &str, records: impl Iterator<Item = Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header.split(',')).expect("in-memory write");
    for record in records {
        writer.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn rows_to_csv(rows: &[TableRow]) -> String {
    csv_string(CSV_HEADER, rows.iter().map(TableRow::record))
}

pub fn write_csv(rows: &[TableRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, rows_to_csv(rows)).map_err(|e| Error::io(path, e))
}

/// Locale-independent number formatting with 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-4..9).contains(&magnitude) {
        let decimals = (11 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

/// `L̃ = L / rate`, rejecting rates that do not give an integer.
pub fn blocklength_for_rate(l: usize, rate: f64) -> Result<usize> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidArgument(format!("rate must lie in (0, 1], got {rate}")));
    }
    let exact = l as f64 / rate;
    let rounded = exact.round();
    if (exact - rounded).abs() > 1e-9 * exact {
        return Err(Error::NonIntegralBlocklength { rate, l });
    }
    Ok(rounded as usize)
}

/// `L = rate · L̃`, rejecting non-integral results.
pub fn source_length_for_rate(l_tilde: usize, rate: f64) -> Result<usize> {
    let exact = rate * l_tilde as f64;
    let rounded = exact.round();
    if rounded < 1.0 || (exact - rounded).abs() > 1e-9 * exact.max(1.0) {
        return Err(Error::NonIntegralBlocklength { rate, l: l_tilde });
    }
    Ok(rounded as usize)
}

fn run_and_summarize(plan: &ExperimentPlan, eta: Option<f64>) -> Result<MseReport> {
    let ts = run_trials(plan)?;
    let reference_gain = match plan.fixed_channel()? {
        Some(ch) => ch.min_gain(),
        None => 1.0,
    };
    summarize(&ts, &plan.theory_for_gain(reference_gain)?, eta)
}

/// Mean MSE against the SNR cap for each rate, plus the uncoded baseline
/// (`Φ = I`, `R = 1`) once per SNR.
pub fn sweep_mse_vs_snr(base: &ExperimentPlan, snr_db_values: &[f64], rates: &[f64]) -> Result<Vec<TableRow>> {
    let l = base.config.l;
    let blocklengths = rates.iter().map(|&r| blocklength_for_rate(l, r)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &snr_db in snr_db_values {
        for &l_tilde in &blocklengths {
            let plan = ExperimentPlan {
                config: SystemConfig { snr_db, l_tilde, ..base.config.clone() },
                construction: SchemeKind::RandomOrthonormal,
                ..base.clone()
            };
            let report = run_and_summarize(&plan, None)?;
            rows.push(TableRow::from_report("mse_vs_snr", "proposed", &plan, &report));
        }
        let plan = ExperimentPlan {
            config: SystemConfig { snr_db, l_tilde: l, ..base.config.clone() },
            construction: SchemeKind::Uncoded,
            ..base.clone()
        };
        let report = run_and_summarize(&plan, None)?;
        rows.push(TableRow::from_report("mse_vs_snr", "uncoded", &plan, &report));
    }
    Ok(rows)
}

/// Maximum rates under the three criteria for every SNR.
///
/// Rows per SNR: `epsilon` and `epsilon_asymptotic`, then one
/// `epsilon_delta(eta=…)` row per `η`. The rate bound goes in `bound`; the
/// `epsilon_delta` rows also carry the minimum source length in `l` and its
/// Chernoff tail in `exceedance`.
pub fn sweep_rate_regions(
    epsilon: f64,
    delta: f64,
    etas: &[f64],
    snr_db_values: &[f64],
    p_w: f64,
    min_gain: f64,
) -> Result<Vec<TableRow>> {
    for &eta in etas {
        crate::analysis::check_delta_eta(delta, eta)?;
    }
    let positive = |x: f64| x > 0.0 && x.is_finite();
    if !(positive(epsilon) && positive(p_w) && positive(min_gain)) {
        return Err(Error::InvalidArgument("epsilon, p_w and min_gain must be positive".into()));
    }
    let mut rows = Vec::new();
    for &snr_db in snr_db_values {
        let rho_x = db_to_linear(snr_db);
        let r_eps = epsilon_rate_bound(epsilon, rho_x, min_gain, p_w);
        for criterion in [Criterion::Epsilon, Criterion::EpsilonAsymptotic] {
            rows.push(TableRow {
                experiment: "rate_region".into(),
                snr_db: Some(snr_db),
                scheme: criterion.as_str().into(),
                bound: Some(r_eps),
                ..TableRow::default()
            });
        }
        for &eta in etas {
            let l_min = min_source_length(delta, eta);
            rows.push(TableRow {
                experiment: "rate_region".into(),
                snr_db: Some(snr_db),
                l: Some(l_min),
                scheme: format!("{}(eta={eta})", Criterion::EpsilonDelta.as_str()),
                exceedance: Some(chernoff_tail(l_min as f64, eta)),
                bound: Some(epsilon_delta_rate_bound(epsilon, eta, rho_x, min_gain, p_w)),
                ..TableRow::default()
            });
        }
    }
    Ok(rows)
}

/// MSE mean and variance against `L̃` at the fixed rate of `base`.
pub fn sweep_blocklength(base: &ExperimentPlan, l_tilde_values: &[usize]) -> Result<Vec<TableRow>> {
    if !base.channel_mode.is_fixed() {
        return Err(Error::InvalidArgument("blocklength sweeps need a fixed channel mode".into()));
    }
    let rate = base.config.rate();
    let mut rows = Vec::new();
    for &l_tilde in l_tilde_values {
        let l = source_length_for_rate(l_tilde, rate)?;
        let plan = ExperimentPlan {
            config: SystemConfig { l, l_tilde, ..base.config.clone() },
            construction: SchemeKind::RandomOrthonormal,
            ..base.clone()
        };
        let report = run_and_summarize(&plan, None)?;
        rows.push(TableRow::from_report("blocklength", "proposed", &plan, &report));
    }
    Ok(rows)
}

/// Two-sample KS distance between `n` full-pipeline distortions and `n`
/// direct draws of the weighted-exponential law for the Gram spectrum of
/// `enc` at `ρ = P* / N₀`.
///
/// One `u64` from `rng` seeds both samplers; they use disjoint stream
/// domains of that seed.
pub fn oracle_equivalence_test<R: RngCore + ?Sized>(
    enc: &EncodingMatrix,
    config: &SystemConfig,
    channel: &ChannelRealization,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let seed = rng.next_u64();
    let p = max_power_scaling(channel, config);
    let link = CodedLink::new(enc.clone())?;
    let pipeline: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut trial_rng = SimRng::stream(seed, StreamDomain::Trial, i as u64);
            link.run_round(config, channel, p, &mut trial_rng).map(|o| o.distortion)
        })
        .collect::<Result<_>>()?;
    let spectrum = gram_spectrum(enc);
    let rho = p / config.n0;
    let mut oracle_rng = SimRng::stream(seed, StreamDomain::Oracle, 0);
    let oracle: Vec<f64> = (0..n).map(|_| sample_general_mse(&spectrum, rho, &mut oracle_rng)).collect();
    ks_two_sample(&pipeline, &oracle)
}

/// Outcome of one statistical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub statistic: f64,
    pub critical: f64,
    pub passed: bool,
}

impl CheckOutcome {
    fn at_most(name: impl Into<String>, statistic: f64, critical: f64) -> Self {
        Self { name: name.into(), statistic, critical, passed: statistic <= critical }
    }

    fn below(name: impl Into<String>, statistic: f64, critical: f64) -> Self {
        Self { name: name.into(), statistic, critical, passed: statistic < critical }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {}: statistic {} vs critical {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            fmt_num(self.statistic),
            fmt_num(self.critical)
        )
    }
}

/// Gamma-law KS, Chernoff exceedance and oracle-equivalence checks in the
/// fixed unit-gain channel for `config`.
pub fn certification_suite(config: &SystemConfig, trials: usize, etas: &[f64]) -> Result<Vec<CheckOutcome>> {
    let plan = ExperimentPlan::new(config.clone(), SchemeKind::RandomOrthonormal, trials, ChannelMode::FixedUnitMinGain);
    let ts = run_trials(&plan)?;
    let theory = plan.theory_for_gain(1.0)?;
    let mut checks = Vec::new();

    let report = summarize(&ts, &theory, None)?;
    checks.push(CheckOutcome::below(
        format!("gamma-law KS, Gamma({}, {})", fmt_num(theory.shape), fmt_num(theory.scale)),
        report.ks_statistic.expect("fixed mode has KS"),
        ks_critical_one_sample(trials),
    ));

    for &eta in etas {
        let report = summarize(&ts, &theory, Some(eta))?;
        let bound = chernoff_tail(theory.shape, eta);
        let se = (bound * (1.0 - bound) / trials as f64).sqrt();
        checks.push(CheckOutcome::at_most(
            format!("Chernoff exceedance, eta = {eta}"),
            report.exceedance_freq.expect("eta given"),
            bound + 3.0 * se,
        ));
    }

    let channel = ChannelRealization::unit(config.k_users);
    let mut rng = SimRng::stream(config.master_seed, StreamDomain::Oracle, 1);
    let orthonormal = plan.encoding_matrix()?.expect("coded scheme");
    let d = oracle_equivalence_test(&orthonormal, config, &channel, trials, &mut rng)?;
    checks.push(CheckOutcome::below("oracle equivalence, orthonormal", d, ks_critical_two_sample(trials, trials)));

    if config.l >= 2 {
        // Spread spectrum with trace L: half the entries at 0.5, the rest at 1.5.
        let l = config.l;
        let mut spectrum: Vec<f64> = (0..l).map(|i| if i < l / 2 { 0.5 } else { 1.5 }).collect();
        let total: f64 = spectrum.iter().sum();
        spectrum.iter_mut().for_each(|s| *s *= l as f64 / total);
        let mut enc_rng = SimRng::stream(config.master_seed, StreamDomain::Encoding, 1);
        let custom = construct_with_spectrum(config.l_tilde, &spectrum, &mut enc_rng)?;
        let d = oracle_equivalence_test(&custom, config, &channel, trials, &mut rng)?;
        checks.push(CheckOutcome::below("oracle equivalence, non-flat spectrum", d, ks_critical_two_sample(trials, trials)));
    }
    Ok(checks)
}
