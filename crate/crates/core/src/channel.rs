//! The physical chain: sources, Rician fading, channel-inversion precoding,
//! over-the-air superposition and sum decoding.
//!
//! User `k` sends `x_k = (√P / h_k) Φ w_k`, so the receiver observes
//! `y = Σ h_k x_k + n = √P Φ Σ w_k + n` and decodes `ŵ = Φ† y / √P`.
//! Noise is CN(0, N₀) per complex entry (each part N₀/2).

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coding::EncodingMatrix;
use crate::error::{Error, Result};
use crate::numerics::sampling::complex_gaussian;
use crate::numerics::{pseudo_inverse, sample_complex_gaussian, ComplexMatrix, ComplexVector};

/// Consecutive failed redraws before [`sample_rician`] gives up.
pub const MAX_REDRAWS: usize = 1000;

pub const DEFAULT_MIN_GAIN_FLOOR: f64 = 1e-6;

/// Power ratio from decibels: `10^(x/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// System parameters. Powers are per complex dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigFile", into = "ConfigFile")]
pub struct SystemConfig {
    /// Number of users `K`.
    pub k_users: usize,
    /// Source length `L`.
    pub l: usize,
    /// Codeword length `L̃`.
    pub l_tilde: usize,
    /// Source power `P_W`.
    pub p_w: f64,
    /// Noise power `N₀`.
    pub n0: f64,
    /// Transmit SNR cap `ρ_X = P_X / N₀` in dB.
    pub snr_db: f64,
    /// Rician factor `κ` in dB.
    pub rician_kappa_db: f64,
    /// Smallest admissible `|h_k|²`.
    pub min_gain_floor: f64,
    pub master_seed: u64,
}

impl Default for SystemConfig {
    /// K = 10, L = 5, L̃ = 10, P_W = 1, N₀ = 1, ρ_X = 10 dB, κ = 5 dB.
    fn default() -> Self {
        Self {
            k_users: 10,
            l: 5,
            l_tilde: 10,
            p_w: 1.0,
            n0: 1.0,
            snr_db: 10.0,
            rician_kappa_db: 5.0,
            min_gain_floor: DEFAULT_MIN_GAIN_FLOOR,
            master_seed: 1,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k_users == 0 {
            return bad("k_users must be >= 1".into());
        }
        if self.l == 0 {
            return bad("l must be >= 1".into());
        }
        if self.l_tilde < self.l {
            return bad(format!("l_tilde = {} must be >= l = {}", self.l_tilde, self.l));
        }
        for (name, v) in [("p_w", self.p_w), ("n0", self.n0)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !self.snr_db.is_finite() || !(self.p_x() > 0.0 && self.p_x().is_finite()) {
            return bad(format!("snr_db = {} does not give a finite positive P_X", self.snr_db));
        }
        if self.rician_kappa_db.is_nan() {
            return bad("rician_kappa_db is NaN".into());
        }
        if !(self.min_gain_floor > 0.0 && self.min_gain_floor.is_finite()) {
            return bad(format!("min_gain_floor must be positive, got {}", self.min_gain_floor));
        }
        Ok(())
    }

    /// Coding rate `R = L / L̃`.
    pub fn rate(&self) -> f64 {
        self.l as f64 / self.l_tilde as f64
    }

    /// `ρ_X = P_X / N₀` (linear).
    pub fn rho_x(&self) -> f64 {
        db_to_linear(self.snr_db)
    }

    /// Maximum transmit power `P_X = N₀ ρ_X`.
    pub fn p_x(&self) -> f64 {
        self.n0 * self.rho_x()
    }

    pub fn kappa(&self) -> f64 {
        db_to_linear(self.rician_kappa_db)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("config serializes");
        text.push('\n');
        text
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// On-disk configuration. Keys are fixed; `P_X` is derived from `snr_db`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub k_users: usize,
    pub l: usize,
    pub l_tilde: usize,
    pub p_w: f64,
    pub n0: f64,
    pub snr_db: f64,
    pub rician_kappa_db: f64,
    pub min_gain_floor: f64,
    pub master_seed: u64,
}

impl TryFrom<ConfigFile> for SystemConfig {
    type Error = Error;

    fn try_from(f: ConfigFile) -> Result<Self> {
        let config = SystemConfig {
            k_users: f.k_users,
            l: f.l,
            l_tilde: f.l_tilde,
            p_w: f.p_w,
            n0: f.n0,
            snr_db: f.snr_db,
            rician_kappa_db: f.rician_kappa_db,
            min_gain_floor: f.min_gain_floor,
            master_seed: f.master_seed,
        };
        config.validate()?;
        Ok(config)
    }
}

impl From<SystemConfig> for ConfigFile {
    fn from(c: SystemConfig) -> Self {
        ConfigFile {
            k_users: c.k_users,
            l: c.l,
            l_tilde: c.l_tilde,
            p_w: c.p_w,
            n0: c.n0,
            snr_db: c.snr_db,
            rician_kappa_db: c.rician_kappa_db,
            min_gain_floor: c.min_gain_floor,
            master_seed: c.master_seed,
        }
    }
}

/// Per-user channel coefficients `h_1 … h_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    coefficients: Vec<Complex64>,
    min_gain: f64,
    redraws: usize,
}

impl ChannelRealization {
    /// Rejects empty input and any `|h_k|²` below `floor`.
    pub fn new(coefficients: Vec<Complex64>, floor: f64) -> Result<Self> {
        Self::with_redraws(coefficients, floor, 0)
    }

    fn with_redraws(coefficients: Vec<Complex64>, floor: f64, redraws: usize) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one user".into()));
        }
        for h in &coefficients {
            let gain = h.norm_sqr();
            if !(gain.is_finite() && gain >= floor && gain > 0.0) {
                return Err(Error::ZeroChannel { gain, floor });
            }
        }
        let min_gain = min_gain_of(&coefficients);
        Ok(Self { coefficients, min_gain, redraws })
    }

    /// `h_k = 1` for every user, so `min_k |h_k|² = 1`.
    pub fn unit(k_users: usize) -> Self {
        assert!(k_users > 0, "channel needs at least one user");
        Self { coefficients: vec![Complex64::new(1.0, 0.0); k_users], min_gain: 1.0, redraws: 0 }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn k_users(&self) -> usize {
        self.coefficients.len()
    }

    /// `min_k |h_k|²`.
    pub fn min_gain(&self) -> f64 {
        self.min_gain
    }

    /// Index of the user attaining the minimum gain (first on ties).
    pub fn weakest_user(&self) -> usize {
        self.coefficients
            .iter()
            .position(|h| h.norm_sqr() == self.min_gain)
            .expect("min gain is attained")
    }

    /// Coefficients redrawn because they fell below the floor.
    pub fn redraws(&self) -> usize {
        self.redraws
    }
}

fn min_gain_of(coefficients: &[Complex64]) -> f64 {
    coefficients.iter().map(|h| h.norm_sqr()).fold(f64::INFINITY, f64::min)
}

/// One transmission of the full chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionOutcome {
    /// `w = Σ_k w_k`
    pub true_sum: ComplexVector,
    /// `ŵ`
    pub estimate: ComplexVector,
    /// `‖ŵ − w‖² / L`
    pub distortion: f64,
    /// Power scaling `P` used for this round.
    pub power_used: f64,
}

/// Draws `h_k = √(κ/(κ+1)) + √(1/(κ+1)) ι`, `ι ~ CN(0, 1)`, for each user,
/// redrawing any coefficient whose gain falls below the configured floor.
pub fn sample_rician<R: Rng + ?Sized>(
    config: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let kappa = config.kappa();
    let line_of_sight = (kappa / (kappa + 1.0)).sqrt();
    let scatter_sd = (0.5 / (kappa + 1.0)).sqrt();
    let floor = config.min_gain_floor;

    let mut redraws = 0;
    let mut coefficients = Vec::with_capacity(config.k_users);
    for _ in 0..config.k_users {
        let mut failures = 0;
        loop {
            let h = Complex64::new(line_of_sight, 0.0) + complex_gaussian(rng, scatter_sd);
            if h.norm_sqr() >= floor {
                coefficients.push(h);
                break;
            }
            failures += 1;
            redraws += 1;
            if failures >= MAX_REDRAWS {
                return Err(Error::FloorUnsatisfiable { floor, attempts: failures });
            }
        }
    }
    ChannelRealization::with_redraws(coefficients, floor, redraws)
}

/// `K` independent sources with i.i.d. CN(0, P_W) entries.
pub fn sample_sources<R: Rng + ?Sized>(
    config: &SystemConfig,
    rng: &mut R,
) -> Result<Vec<ComplexVector>> {
    (0..config.k_users).map(|_| sample_complex_gaussian(rng, config.l, config.p_w)).collect()
}

/// `P* = P_X min_k |h_k|² / (R P_W)`: the largest common scaling that keeps
/// every user within `P_X` per channel use, tight for the weakest user.
pub fn max_power_scaling(channel: &ChannelRealization, config: &SystemConfig) -> f64 {
    config.p_x() * channel.min_gain() / (config.rate() * config.p_w)
}

fn inversion_factor(h: Complex64, p: f64, floor: f64) -> Result<Complex64> {
    let gain = h.norm_sqr();
    if !(gain >= floor && gain > 0.0) {
        return Err(Error::ZeroChannel { gain, floor });
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("power scaling must be positive, got {p}")));
    }
    Ok(Complex64::new(p.sqrt(), 0.0) / h)
}

/// `x_k = (√p / h_k) Φ w_k`.
pub fn encode_and_precode(
    enc: &EncodingMatrix,
    w_k: &ComplexVector,
    h_k: Complex64,
    p: f64,
    min_gain_floor: f64,
) -> Result<ComplexVector> {
    if w_k.len() != enc.l() {
        return Err(Error::ShapeMismatch(format!(
            "source has length {}, encoder expects {}",
            w_k.len(),
            enc.l()
        )));
    }
    let alpha = inversion_factor(h_k, p, min_gain_floor)?;
    Ok(enc.phi().mul_vec(w_k).scale(alpha))
}

/// `x_k = (√p / h_k) w_k` without coding.
pub fn precode_uncoded(
    w_k: &ComplexVector,
    h_k: Complex64,
    p: f64,
    min_gain_floor: f64,
) -> Result<ComplexVector> {
    let alpha = inversion_factor(h_k, p, min_gain_floor)?;
    Ok(w_k.scale(alpha))
}

/// Noise-free superposition `Σ_k h_k x_k`.
pub fn superpose_noiseless(
    transmit_signals: &[ComplexVector],
    channel: &ChannelRealization,
) -> Result<ComplexVector> {
    if transmit_signals.len() != channel.k_users() {
        return Err(Error::ShapeMismatch(format!(
            "{} signals for {} channel coefficients",
            transmit_signals.len(),
            channel.k_users()
        )));
    }
    let len = transmit_signals[0].len();
    if transmit_signals.iter().any(|x| x.len() != len) {
        return Err(Error::ShapeMismatch("transmit signals differ in length".into()));
    }
    let mut y = ComplexVector::zeros(len);
    for (x, &h) in transmit_signals.iter().zip(channel.coefficients()) {
        y.add_assign(&x.scale(h));
    }
    Ok(y)
}

/// `y = Σ_k h_k x_k + n` with `n ~ CN(0, n0 I)`.
pub fn superpose<R: Rng + ?Sized>(
    transmit_signals: &[ComplexVector],
    channel: &ChannelRealization,
    n0: f64,
    rng: &mut R,
) -> Result<ComplexVector> {
    let mut y = superpose_noiseless(transmit_signals, channel)?;
    let noise = sample_complex_gaussian(rng, y.len(), n0)?;
    y.add_assign(&noise);
    Ok(y)
}

/// Receiver holding `Φ†` so it is factored once per encoding matrix.
#[derive(Debug, Clone)]
pub struct SumDecoder {
    pinv: ComplexMatrix,
}

impl SumDecoder {
    pub fn new(enc: &EncodingMatrix) -> Result<Self> {
        Ok(Self { pinv: pseudo_inverse(enc.phi())? })
    }

    pub fn pseudo_inverse(&self) -> &ComplexMatrix {
        &self.pinv
    }

    /// `ŵ = Φ† y / √p`.
    pub fn decode(&self, y: &ComplexVector, p: f64) -> Result<ComplexVector> {
        if y.len() != self.pinv.cols() {
            return Err(Error::ShapeMismatch(format!(
                "received {} symbols, decoder expects {}",
                y.len(),
                self.pinv.cols()
            )));
        }
        unscale(&self.pinv.mul_vec(y), p)
    }
}

fn unscale(v: &ComplexVector, p: f64) -> Result<ComplexVector> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("power scaling must be positive, got {p}")));
    }
    Ok(v.scale(Complex64::new(1.0 / p.sqrt(), 0.0)))
}

/// `ŵ = Φ† y / √p`.
pub fn decode_sum(enc: &EncodingMatrix, y: &ComplexVector, p: f64) -> Result<ComplexVector> {
    SumDecoder::new(enc)?.decode(y, p)
}

fn sum_of(sources: &[ComplexVector]) -> ComplexVector {
    let mut sum = ComplexVector::zeros(sources[0].len());
    for w in sources {
        sum.add_assign(w);
    }
    sum
}

fn outcome(true_sum: ComplexVector, estimate: ComplexVector, p: f64) -> TransmissionOutcome {
    let distortion = estimate.distance_sqr(&true_sum) / true_sum.len() as f64;
    TransmissionOutcome { true_sum, estimate, distortion, power_used: p }
}

/// An encoding matrix paired with its decoder.
#[derive(Debug, Clone)]
pub struct CodedLink {
    enc: EncodingMatrix,
    decoder: SumDecoder,
}

impl CodedLink {
    pub fn new(enc: EncodingMatrix) -> Result<Self> {
        let decoder = SumDecoder::new(&enc)?;
        Ok(Self { enc, decoder })
    }

    pub fn encoding(&self) -> &EncodingMatrix {
        &self.enc
    }

    /// Sources, precoding for every user, superposition with noise, decoding.
    /// Draws the sources first and then the noise from `rng`.
    pub fn run_round<R: Rng + ?Sized>(
        &self,
        config: &SystemConfig,
        channel: &ChannelRealization,
        p: f64,
        rng: &mut R,
    ) -> Result<TransmissionOutcome> {
        check_dimensions(&self.enc, config, channel)?;
        let sources = sample_sources(config, rng)?;
        let signals = sources
            .iter()
            .zip(channel.coefficients())
            .map(|(w, &h)| encode_and_precode(&self.enc, w, h, p, config.min_gain_floor))
            .collect::<Result<Vec<_>>>()?;
        let y = superpose(&signals, channel, config.n0, rng)?;
        let estimate = self.decoder.decode(&y, p)?;
        Ok(outcome(sum_of(&sources), estimate, p))
    }
}

fn check_dimensions(
    enc: &EncodingMatrix,
    config: &SystemConfig,
    channel: &ChannelRealization,
) -> Result<()> {
    config.validate()?;
    if enc.l() != config.l || enc.l_tilde() != config.l_tilde {
        return Err(Error::ShapeMismatch(format!(
            "encoding matrix is {}x{}, config expects {}x{}",
            enc.l_tilde(),
            enc.l(),
            config.l_tilde,
            config.l
        )));
    }
    if channel.k_users() != config.k_users {
        return Err(Error::ShapeMismatch(format!(
            "channel has {} users, config expects {}",
            channel.k_users(),
            config.k_users
        )));
    }
    Ok(())
}

/// One coded transmission. Factors `Φ†` on every call; use [`CodedLink`]
/// for repeated rounds.
pub fn run_round<R: Rng + ?Sized>(
    enc: &EncodingMatrix,
    config: &SystemConfig,
    channel: &ChannelRealization,
    p: f64,
    rng: &mut R,
) -> Result<TransmissionOutcome> {
    CodedLink::new(enc.clone())?.run_round(config, channel, p, rng)
}

/// One uncoded transmission: `x_k = (√p/h_k) w_k`, `ŵ = y / √p`.
///
/// Consumes `rng` exactly like [`run_round`] with `Φ = I_L`.
pub fn run_uncoded_round<R: Rng + ?Sized>(
    config: &SystemConfig,
    channel: &ChannelRealization,
    p: f64,
    rng: &mut R,
) -> Result<TransmissionOutcome> {
    config.validate()?;
    if channel.k_users() != config.k_users {
        return Err(Error::ShapeMismatch(format!(
            "channel has {} users, config expects {}",
            channel.k_users(),
            config.k_users
        )));
    }
    let sources = sample_sources(config, rng)?;
    let signals = sources
        .iter()
        .zip(channel.coefficients())
        .map(|(w, &h)| precode_uncoded(w, h, p, config.min_gain_floor))
        .collect::<Result<Vec<_>>>()?;
    let y = superpose(&signals, channel, config.n0, rng)?;
    let estimate = unscale(&y, p)?;
    Ok(outcome(sum_of(&sources), estimate, p))
}
