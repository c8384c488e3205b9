//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a validation or assertion fails, 2 on
//! usage and input errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{chernoff_tail, gamma_opt, optimal_mse_gamma};
use crate::channel::{max_power_scaling, ChannelRealization, SystemConfig};
use crate::coding::{
    construct_identity, construct_random_orthonormal, construct_repetition, theoretical_mse_expectation, validate,
    EncodingMatrix, ValidationReport, DEFAULT_MAX_EXHAUSTIVE_SUBSETS, DEFAULT_SAMPLE_COUNT,
};
use crate::error::{Error, Result};
use crate::experiments::{
    certification_suite, fmt_num, rows_to_csv, run_trials, summarize, sweep_blocklength, sweep_mse_vs_snr,
    sweep_rate_regions, write_csv, ChannelMode, ExperimentPlan, SchemeKind,
};
use crate::numerics::rng::{SimRng, StreamDomain};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Largest `‖ΦᴴΦ − I‖_max` reported as orthonormal.
const ORTHONORMAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "aircomp", version, about = "Channel-coded over-the-air computation toolkit")]
pub struct Cli {
    /// Cap on worker threads. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an encoding matrix and write it as JSON.
    Construct(ConstructArgs),
    /// Validate an encoding matrix file.
    Check(CheckArgs),
    /// Print closed-form MSE statistics for a configuration.
    Theory(TheoryArgs),
    /// Print maximum rates per criterion and SNR as CSV.
    Regions(RegionsArgs),
    /// Run Monte Carlo trials and compare against theory.
    Simulate(SimulateArgs),
    /// Run the statistical certification checks.
    DistTest(DistTestArgs),
    /// Regenerate the figure sweeps as CSV files.
    Figures(FiguresArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructionArg {
    Random,
    Identity,
    Repetition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Random,
    Identity,
    Repetition,
    Uncoded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    FixedUnit,
    Rician,
    FixedSeed,
}

impl From<ModeArg> for ChannelMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::FixedUnit => ChannelMode::FixedUnitMinGain,
            ModeArg::Rician => ChannelMode::RicianPerTrial,
            ModeArg::FixedSeed => ChannelMode::FixedFromSeed,
        }
    }
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub l: usize,
    #[arg(long = "l-tilde")]
    pub l_tilde: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ConstructionArg::Random)]
    pub construction: ConstructionArg,
    /// Copies per source symbol for the repetition construction.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Exit 1 when validation fails.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Seed for sampled subset checks.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// System configuration JSON. Defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self) -> Result<SystemConfig> {
        let mut config = match &self.config {
            Some(path) => SystemConfig::load(path)?,
            None => SystemConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long = "min-gain", default_value_t = 1.0)]
    pub min_gain: f64,
    #[arg(long)]
    pub eta: Option<f64>,
    /// Also report the expected MSE of this matrix at `P*`.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RegionsArgs {
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub eta: Vec<f64>,
    #[arg(long = "snr-db", value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
    pub snr_db: Vec<f64>,
    #[arg(long = "p-w", default_value_t = 1.0)]
    pub p_w: f64,
    #[arg(long = "min-gain", default_value_t = 1.0)]
    pub min_gain: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::FixedUnit)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Random)]
    pub scheme: SchemeArg,
    /// Copies per source symbol for the repetition scheme.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Output directory for `trials.csv` and `report.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit 1 when the empirical/theory mean ratio is off by more than this.
    #[arg(long = "assert-tolerance")]
    pub assert_tolerance: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DistTestArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    pub eta: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=4))]
    pub which: u8,
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
    /// Overrides the per-point trial count.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be >= 1");
            return EXIT_USAGE;
        }
        // Fails only if a pool already exists, which leaves results unchanged.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Construct(args) => construct(args, out),
        Command::Check(args) => check(args, out),
        Command::Theory(args) => theory(args, out),
        Command::Regions(args) => regions(args, out),
        Command::Simulate(args) => simulate(args, out),
        Command::DistTest(args) => dist_test(args, out),
        Command::Figures(args) => figures(args, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "fail"
    }
}

fn orthonormality_defect(enc: &EncodingMatrix) -> f64 {
    let gram = enc.phi().gram();
    gram.max_abs_diff(&crate::numerics::ComplexMatrix::identity(enc.l()))
}

fn report_lines(enc: &EncodingMatrix, report: &ValidationReport) -> String {
    let defect = orthonormality_defect(enc);
    format!(
        "shape {}x{} rate {} trace {}\northonormal: {} (max |PhiH Phi - I| = {})\npower: {}\nrank: {} ({:?}, {} subsets, worst singular ratio {})\n",
        enc.l_tilde(),
        enc.l(),
        fmt_num(enc.rate()),
        fmt_num(enc.gram_trace()),
        verdict(defect < ORTHONORMAL_TOLERANCE),
        fmt_num(defect),
        verdict(report.power_ok),
        verdict(report.rank_ok),
        report.rank_mode,
        report.subsets_checked,
        fmt_num(report.worst_min_singular_ratio),
    )
}

fn validate_with_seed(enc: &EncodingMatrix, seed: u64) -> ValidationReport {
    let mut rng = SimRng::stream(seed, StreamDomain::Validation, 0);
    validate(enc, DEFAULT_MAX_EXHAUSTIVE_SUBSETS, DEFAULT_SAMPLE_COUNT, &mut rng)
}

fn construct(args: &ConstructArgs, out: &mut dyn Write) -> Result<i32> {
    let enc = match args.construction {
        ConstructionArg::Random => {
            let mut rng = SimRng::stream(args.seed, StreamDomain::Encoding, 0);
            construct_random_orthonormal(args.l_tilde, args.l, &mut rng)?
        }
        ConstructionArg::Identity => {
            if args.l_tilde != args.l {
                return Err(Error::InvalidShape { l_tilde: args.l_tilde, l: args.l });
            }
            construct_identity(args.l)?
        }
        ConstructionArg::Repetition => {
            if args.l_tilde != args.l * args.m {
                return Err(Error::InvalidShape { l_tilde: args.l_tilde, l: args.l });
            }
            construct_repetition(args.l, args.m)?
        }
    };
    let report = validate_with_seed(&enc, args.seed);
    enc.save(&args.out)?;
    emit(out, &report_lines(&enc, &report))?;
    Ok(strict_code(args.strict, &report))
}

fn strict_code(strict: bool, report: &ValidationReport) -> i32 {
    if strict && !report.is_valid() {
        EXIT_VALIDATION
    } else {
        EXIT_OK
    }
}

fn check(args: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let enc = EncodingMatrix::load(&args.matrix)?;
    let report = validate_with_seed(&enc, args.seed);
    emit(out, &report_lines(&enc, &report))?;
    Ok(strict_code(args.strict, &report))
}

fn theory(args: &TheoryArgs, out: &mut dyn Write) -> Result<i32> {
    let config = args.config.load()?;
    let law = optimal_mse_gamma(config.l, config.l_tilde, config.p_w, config.rho_x(), args.min_gain)?;
    let mut text = format!(
        "rate {}\nrho_x {}\ngamma_opt {}\ngamma_shape {}\ngamma_scale {}\nmse_variance {}\n",
        fmt_num(config.rate()),
        fmt_num(config.rho_x()),
        fmt_num(gamma_opt(config.rate(), config.p_w, config.rho_x(), args.min_gain)),
        fmt_num(law.shape),
        fmt_num(law.scale),
        fmt_num(law.variance()),
    );
    if let Some(eta) = args.eta {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
        }
        text += &format!("chernoff_tail {}\n", fmt_num(chernoff_tail(config.l as f64, eta)));
    }
    if let Some(path) = &args.matrix {
        let enc = EncodingMatrix::load(path)?;
        let k = config.k_users;
        let h = vec![crate::Complex64::new(args.min_gain.sqrt(), 0.0); k];
        let channel = ChannelRealization::new(h, config.min_gain_floor)?;
        let cfg = SystemConfig { l: enc.l(), l_tilde: enc.l_tilde(), ..config };
        let rho = max_power_scaling(&channel, &cfg) / cfg.n0;
        text += &format!("matrix_expected_mse {}\n", fmt_num(theoretical_mse_expectation(&enc, rho)?));
    }
    emit(out, &text)?;
    Ok(EXIT_OK)
}

fn regions(args: &RegionsArgs, out: &mut dyn Write) -> Result<i32> {
    let rows = sweep_rate_regions(args.epsilon, args.delta, &args.eta, &args.snr_db, args.p_w, args.min_gain)?;
    emit(out, &rows_to_csv(&rows))?;
    Ok(EXIT_OK)
}

fn scheme_kind(scheme: SchemeArg, m: usize) -> SchemeKind {
    match scheme {
        SchemeArg::Random => SchemeKind::RandomOrthonormal,
        SchemeArg::Identity => SchemeKind::Identity,
        SchemeArg::Repetition => SchemeKind::Repetition { copies: m },
        SchemeArg::Uncoded => SchemeKind::Uncoded,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let config = args.config.load()?;
    let plan = ExperimentPlan::new(config, scheme_kind(args.scheme, args.m), args.trials, args.mode.into());
    let ts = run_trials(&plan)?;
    let reference_gain = plan.fixed_channel()?.map_or(1.0, |ch| ch.min_gain());
    let report = summarize(&ts, &plan.theory_for_gain(reference_gain)?, args.eta)?;
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        let csv = dir.join("trials.csv");
        std::fs::write(&csv, ts.to_csv()).map_err(|e| Error::io(&csv, e))?;
        let json = dir.join("report.json");
        std::fs::write(&json, report.to_json()).map_err(|e| Error::io(&json, e))?;
    }
    let ratio = report.mean_ratio();
    let mut text = format!(
        "trials {}\nmean {}\ntheory_mean {}\nratio {}\nvariance {}\ntheory_variance {}\n",
        report.trials,
        fmt_num(report.mean),
        fmt_num(report.theory_mean),
        fmt_num(ratio),
        fmt_num(report.variance),
        fmt_num(report.theory_variance),
    );
    if let (Some(d), Some(c)) = (report.ks_statistic, report.ks_critical) {
        text += &format!("ks {} (1% critical {})\n", fmt_num(d), fmt_num(c));
    }
    if let (Some(f), Some(b)) = (report.exceedance_freq, report.chernoff_bound) {
        text += &format!("exceedance {} (chernoff bound {})\n", fmt_num(f), fmt_num(b));
    }
    emit(out, &text)?;
    match args.assert_tolerance {
        Some(tol) if tol.is_nan() || tol < 0.0 => Err(Error::InvalidArgument(format!("bad --assert-tolerance {tol}"))),
        Some(tol) if (ratio - 1.0).abs() > tol => {
            eprintln!("mean ratio {} outside 1 ± {}", fmt_num(ratio), fmt_num(tol));
            Ok(EXIT_VALIDATION)
        }
        _ => Ok(EXIT_OK),
    }
}

fn dist_test(args: &DistTestArgs, out: &mut dyn Write) -> Result<i32> {
    let config = args.config.load()?;
    if args.trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let checks = certification_suite(&config, args.trials, &args.eta)?;
    let mut text = String::new();
    for check in &checks {
        text += &check.line();
        text.push('\n');
    }
    let passed = checks.iter().all(|c| c.passed);
    text += &format!("overall: {}\n", if passed { "PASS" } else { "FAIL" });
    emit(out, &text)?;
    Ok(if passed { EXIT_OK } else { EXIT_VALIDATION })
}

const FIG2_SNR_DB: [f64; 7] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
const FIG2_RATES: [f64; 3] = [0.2, 0.5, 1.0];
const FIG3_SNR_DB: [f64; 11] = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
const FIG3_ETAS: [f64; 3] = [0.5, 1.0, 2.0];
const FIG4_L_TILDE: [usize; 6] = [10, 20, 40, 60, 80, 100];

fn figures(args: &FiguresArgs, out: &mut dyn Write) -> Result<i32> {
    ensure_dir(&args.out_dir)?;
    if args.trials == Some(0) {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let base_config = SystemConfig { master_seed: args.seed, ..SystemConfig::default() };
    let (name, rows) = match args.which {
        2 => {
            let plan = ExperimentPlan::new(
                base_config,
                SchemeKind::RandomOrthonormal,
                args.trials.unwrap_or(2_000),
                ChannelMode::RicianPerTrial,
            );
            ("fig2_mse_vs_snr.csv", sweep_mse_vs_snr(&plan, &FIG2_SNR_DB, &FIG2_RATES)?)
        }
        3 => ("fig3_rate_regions.csv", sweep_rate_regions(0.02, 0.2, &FIG3_ETAS, &FIG3_SNR_DB, 1.0, 1.0)?),
        _ => {
            let config = SystemConfig { snr_db: 15.0, l: 5, l_tilde: 10, ..base_config };
            let plan = ExperimentPlan::new(
                config,
                SchemeKind::RandomOrthonormal,
                args.trials.unwrap_or(500),
                ChannelMode::FixedUnitMinGain,
            );
            ("fig4_blocklength.csv", sweep_blocklength(&plan, &FIG4_L_TILDE)?)
        }
    };
    let path = args.out_dir.join(name);
    write_csv(&rows, &path)?;
    emit(out, &format!("wrote {} ({} rows)\n", path.display(), rows.len()))?;
    Ok(EXIT_OK)
}
