//! The shared encoding matrix `Φ` (`L̃ × L`).
//!
//! Every user maps its source `w_k ∈ ℂ^L` to the codeword `Φ w_k ∈ ℂ^L̃`.
//! A valid `Φ` keeps the total power (`tr(ΦᴴΦ) = L`) and has every
//! `L`-row submatrix of full rank. Any `Φ` with orthonormal columns
//! minimizes the expected MSE, and the random construction below produces
//! one by orthonormalizing a complex Gaussian matrix.

use std::path::Path;

use itertools::Itertools;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::linalg::{self, RANK_TOLERANCE};
use crate::numerics::sampling::sample_complex_matrix;
use crate::numerics::{hermitian_eigenvalues, pseudo_inverse, qr_orthonormal, ComplexMatrix};

/// Relative tolerance on `tr(ΦᴴΦ) = L`.
pub const TRACE_TOLERANCE: f64 = 1e-8;

pub const DEFAULT_MAX_EXHAUSTIVE_SUBSETS: usize = 100_000;
pub const DEFAULT_SAMPLE_COUNT: usize = 1_000;

/// How an encoding matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    RandomOrthonormal,
    Identity,
    Repetition,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMode {
    Exhaustive,
    Sampled,
}

/// Findings of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub power_ok: bool,
    pub rank_mode: RankMode,
    pub subsets_checked: usize,
    pub rank_ok: bool,
    /// Smallest `σ_min / σ_max` over the checked row subsets.
    pub worst_min_singular_ratio: f64,
    /// Eigenvalues of `ΦᴴΦ`, ascending.
    pub gram_spectrum: Vec<f64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.power_ok && self.rank_ok
    }
}

/// A shared encoding matrix with its provenance and optional validation.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingMatrix {
    phi: ComplexMatrix,
    construction: Construction,
    validation: Option<ValidationReport>,
}

impl EncodingMatrix {
    /// Wraps an arbitrary tall matrix. Only the shape is enforced; power and
    /// rank findings come from [`validate`].
    pub fn custom(phi: ComplexMatrix) -> Result<Self> {
        Self::with_construction(phi, Construction::Custom)
    }

    fn with_construction(phi: ComplexMatrix, construction: Construction) -> Result<Self> {
        if phi.rows() < phi.cols() {
            return Err(Error::InvalidShape { l_tilde: phi.rows(), l: phi.cols() });
        }
        Ok(Self { phi, construction, validation: None })
    }

    pub fn phi(&self) -> &ComplexMatrix {
        &self.phi
    }

    /// Codeword length `L̃`.
    pub fn l_tilde(&self) -> usize {
        self.phi.rows()
    }

    /// Source length `L`.
    pub fn l(&self) -> usize {
        self.phi.cols()
    }

    /// Coding rate `L / L̃`.
    pub fn rate(&self) -> f64 {
        self.l() as f64 / self.l_tilde() as f64
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn validation(&self) -> Option<&ValidationReport> {
        self.validation.as_ref()
    }

    /// `tr(ΦᴴΦ)`, i.e. the squared Frobenius norm.
    pub fn gram_trace(&self) -> f64 {
        self.phi.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Attaches a validation report.
    pub fn with_validation(mut self, report: ValidationReport) -> Self {
        self.validation = Some(report);
        self
    }

    pub fn to_file_format(&self) -> MatrixFile {
        MatrixFile::from(&self.phi)
    }

    pub fn to_json(&self) -> String {
        self.to_file_format().to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(text)?;
        Self::custom(file.into_matrix()?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// On-disk matrix: `{"rows", "cols", "re", "im"}` with row-major parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl MatrixFile {
    pub fn into_matrix(self) -> Result<ComplexMatrix> {
        ComplexMatrix::from_parts(self.rows, self.cols, &self.re, &self.im)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string(self).expect("matrix file serializes");
        text.push('\n');
        text
    }
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            re: m.as_slice().iter().map(|z| z.re).collect(),
            im: m.as_slice().iter().map(|z| z.im).collect(),
        }
    }
}

/// Orthonormalizes an `l_tilde × l` matrix of i.i.d. CN(0, 1) entries.
pub fn construct_random_orthonormal<R: Rng + ?Sized>(
    l_tilde: usize,
    l: usize,
    rng: &mut R,
) -> Result<EncodingMatrix> {
    check_shape(l_tilde, l)?;
    let a = sample_complex_matrix(rng, l_tilde, l, 1.0)?;
    let q = qr_orthonormal(&a)?;
    EncodingMatrix::with_construction(q, Construction::RandomOrthonormal)
}

/// `Φ = I_L`: the uncoded scheme.
pub fn construct_identity(l: usize) -> Result<EncodingMatrix> {
    check_shape(l, l)?;
    EncodingMatrix::with_construction(ComplexMatrix::identity(l), Construction::Identity)
}

/// `Φ = [I_L; …; I_L] / √m` with `m` stacked copies.
///
/// `ΦᴴΦ = I_L`, so the expected MSE is optimal, but for `m ≥ 2` duplicated
/// rows break the any-`L`-rows rank condition.
pub fn construct_repetition(l: usize, copies: usize) -> Result<EncodingMatrix> {
    check_shape(l, l)?;
    if copies == 0 {
        return Err(Error::InvalidArgument("repetition needs at least one copy".into()));
    }
    if copies == 1 {
        return construct_identity(l);
    }
    let amp = Complex64::new(1.0 / (copies as f64).sqrt(), 0.0);
    let phi = ComplexMatrix::from_fn(l * copies, l, |i, j| {
        if i % l == j { amp } else { Complex64::new(0.0, 0.0) }
    });
    EncodingMatrix::with_construction(phi, Construction::Repetition)
}

/// `Φ = Q · diag(√λ)` with `Q` a random orthonormal basis, so that the Gram
/// spectrum of `Φ` is exactly the requested one.
pub fn construct_with_spectrum<R: Rng + ?Sized>(
    l_tilde: usize,
    spectrum: &[f64],
    rng: &mut R,
) -> Result<EncodingMatrix> {
    let l = spectrum.len();
    check_shape(l_tilde, l)?;
    if spectrum.iter().any(|&lambda| !(lambda > 0.0 && lambda.is_finite())) {
        return Err(Error::InvalidArgument("spectrum entries must be positive".into()));
    }
    let q = construct_random_orthonormal(l_tilde, l, rng)?.phi;
    let phi = ComplexMatrix::from_fn(l_tilde, l, |i, j| q[(i, j)] * spectrum[j].sqrt());
    EncodingMatrix::custom(phi)
}

fn check_shape(l_tilde: usize, l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::InvalidArgument("source length l must be >= 1".into()));
    }
    if l_tilde < l {
        return Err(Error::InvalidShape { l_tilde, l });
    }
    Ok(())
}

/// `C(n, k)`, or `None` once it exceeds `cap`.
fn binomial_capped(n: usize, k: usize, cap: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Checks the power constraint and the rank condition on `L`-row subsets.
///
/// All `C(L̃, L)` subsets are checked when that count is at most
/// `max_exhaustive_subsets`; otherwise `sample_count` uniformly random
/// subsets are drawn from `rng`.
pub fn validate<R: Rng + ?Sized>(
    enc: &EncodingMatrix,
    max_exhaustive_subsets: usize,
    sample_count: usize,
    rng: &mut R,
) -> ValidationReport {
    let (l_tilde, l) = (enc.l_tilde(), enc.l());
    let power_ok = (enc.gram_trace() - l as f64).abs() <= TRACE_TOLERANCE * l as f64;

    let subset_ratio = |rows: &[usize]| linalg::singular_ratio(&enc.phi.select_rows(rows));
    let (rank_mode, subsets_checked, worst) = match binomial_capped(l_tilde, l, max_exhaustive_subsets)
    {
        Some(total) => {
            let subsets: Vec<Vec<usize>> = (0..l_tilde).combinations(l).collect();
            debug_assert_eq!(subsets.len(), total);
            let worst = subsets
                .par_iter()
                .map(|s| subset_ratio(s))
                .reduce(|| f64::INFINITY, f64::min);
            (RankMode::Exhaustive, total, worst)
        }
        None => {
            let subsets: Vec<Vec<usize>> = (0..sample_count)
                .map(|_| {
                    let mut s = rand::seq::index::sample(rng, l_tilde, l).into_vec();
                    s.sort_unstable();
                    s
                })
                .collect();
            let worst = subsets
                .par_iter()
                .map(|s| subset_ratio(s))
                .reduce(|| f64::INFINITY, f64::min);
            (RankMode::Sampled, sample_count, worst)
        }
    };

    ValidationReport {
        power_ok,
        rank_mode,
        subsets_checked,
        rank_ok: subsets_checked > 0 && worst > RANK_TOLERANCE,
        worst_min_singular_ratio: if subsets_checked > 0 { worst } else { 0.0 },
        gram_spectrum: gram_spectrum(enc),
    }
}

/// [`validate`] with the default exhaustive cap and sample count.
pub fn validate_default<R: Rng + ?Sized>(enc: &EncodingMatrix, rng: &mut R) -> ValidationReport {
    validate(enc, DEFAULT_MAX_EXHAUSTIVE_SUBSETS, DEFAULT_SAMPLE_COUNT, rng)
}

/// Eigenvalues `λ_1 ≤ … ≤ λ_L` of `ΦᴴΦ`.
pub fn gram_spectrum(enc: &EncodingMatrix) -> Vec<f64> {
    hermitian_eigenvalues(&enc.phi.gram()).expect("a Gram matrix is Hermitian")
}

/// Expected MSE `(1 / (Lρ)) Σ_l 1/λ_l` at normalized SNR `rho = P / N₀`.
pub fn theoretical_mse_expectation(enc: &EncodingMatrix, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    linalg::ensure_full_column_rank(&enc.phi, RANK_TOLERANCE)?;
    let spectrum = gram_spectrum(enc);
    let inverse_sum: f64 = spectrum.iter().map(|lambda| 1.0 / lambda).sum();
    Ok(inverse_sum / (enc.l() as f64 * rho))
}

/// `cov(n_eff) = (1/ρ) Φ†(Φ†)ᴴ = (1/ρ)(ΦᴴΦ)⁻¹`.
pub fn effective_noise_covariance(enc: &EncodingMatrix, rho: f64) -> Result<ComplexMatrix> {
    check_rho(rho)?;
    let pinv = pseudo_inverse(&enc.phi)?;
    Ok(pinv.matmul(&pinv.adjoint()).scale(1.0 / rho))
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rho must be positive and finite, got {rho}")))
    }
}
