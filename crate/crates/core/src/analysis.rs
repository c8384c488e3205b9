//! Closed-form statistics of the optimal scheme and its rate regions.
//!
//! With orthonormal `Φ` and `P = P*`, the per-round MSE is Gamma distributed
//! with shape `L` and scale `P_W / (L̃ ρ_X g)`, where `g = min_k |h_k|²`.
//! Its mean `γ_opt = R P_W / (ρ_X g)` does not depend on `L̃` at fixed rate,
//! while its variance shrinks like `1/L̃`.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::special::regularized_lower_gamma;

/// Shape–scale Gamma law (`mean = shape · scale`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub scale: f64,
}

impl GammaParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Gamma parameters must be positive, got shape {shape}, scale {scale}"
            )));
        }
        Ok(Self { shape, scale })
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale * self.scale
    }

    pub fn cdf(&self, x: f64) -> f64 {
        gamma_cdf(self, x)
    }
}

/// Which accuracy criterion a rate bound certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Expected MSE at most `ε`.
    Epsilon,
    /// Realized MSE at most `ε` as `L̃ → ∞`.
    EpsilonAsymptotic,
    /// `Pr(MSE ≤ ε) ≥ 1 − δ` at finite length.
    EpsilonDelta,
}

impl Criterion {
    pub fn as_str(&self) -> &'static str {
        match self {
            Criterion::Epsilon => "epsilon",
            Criterion::EpsilonAsymptotic => "epsilon_asymptotic",
            Criterion::EpsilonDelta => "epsilon_delta",
        }
    }
}

/// Largest achievable rate under one criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub criterion: Criterion,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub r_max: f64,
    pub l_min: Option<usize>,
}

impl RegionReport {
    /// Region report for `criterion`. `EpsilonDelta` needs both `delta`
    /// and `eta`; the other criteria ignore them.
    pub fn compute(
        criterion: Criterion,
        epsilon: f64,
        delta: Option<f64>,
        eta: Option<f64>,
        rho_x: f64,
        min_gain: f64,
        p_w: f64,
    ) -> Result<Self> {
        check_positive(&[("epsilon", epsilon), ("rho_x", rho_x), ("min_gain", min_gain), ("p_w", p_w)])?;
        match criterion {
            Criterion::Epsilon | Criterion::EpsilonAsymptotic => Ok(Self {
                criterion,
                epsilon,
                delta: None,
                eta: None,
                r_max: epsilon_rate_bound(epsilon, rho_x, min_gain, p_w),
                l_min: None,
            }),
            Criterion::EpsilonDelta => {
                let (delta, eta) = match (delta, eta) {
                    (Some(d), Some(e)) => (d, e),
                    _ => {
                        return Err(Error::InvalidArgument(
                            "the (epsilon, delta) criterion needs delta and eta".into(),
                        ))
                    }
                };
                check_delta_eta(delta, eta)?;
                Ok(Self {
                    criterion,
                    epsilon,
                    delta: Some(delta),
                    eta: Some(eta),
                    r_max: epsilon_delta_rate_bound(epsilon, eta, rho_x, min_gain, p_w),
                    l_min: Some(min_source_length(delta, eta)),
                })
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("region report serializes")
    }
}

fn check_positive(values: &[(&str, f64)]) -> Result<()> {
    for (name, v) in values {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Validates `0 < delta < 1` and `eta > 0`.
pub fn check_delta_eta(delta: f64, eta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    Ok(())
}

/// `γ_opt = R P_W / (ρ_X g)`.
pub fn gamma_opt(rate: f64, p_w: f64, rho_x: f64, min_gain: f64) -> f64 {
    rate * p_w / (rho_x * min_gain)
}

/// Gamma law of the optimal-scheme MSE: shape `L`, scale `P_W / (L̃ ρ_X g)`.
pub fn optimal_mse_gamma(
    l: usize,
    l_tilde: usize,
    p_w: f64,
    rho_x: f64,
    min_gain: f64,
) -> Result<GammaParams> {
    if l == 0 || l_tilde < l {
        return Err(Error::InvalidShape { l_tilde, l });
    }
    check_positive(&[("p_w", p_w), ("rho_x", rho_x), ("min_gain", min_gain)])?;
    GammaParams::new(l as f64, p_w / (l_tilde as f64 * rho_x * min_gain))
}

/// `min(1, ε ρ_X g / P_W)`. Both the expectation criterion and the
/// asymptotic criterion share this bound.
pub fn epsilon_rate_bound(epsilon: f64, rho_x: f64, min_gain: f64, p_w: f64) -> f64 {
    (epsilon * rho_x * min_gain / p_w).min(1.0)
}

/// `min(1, ε ρ_X g / ((1 + η) P_W))`.
pub fn epsilon_delta_rate_bound(epsilon: f64, eta: f64, rho_x: f64, min_gain: f64, p_w: f64) -> f64 {
    (epsilon * rho_x * min_gain / ((1.0 + eta) * p_w)).min(1.0)
}

/// Smallest integer `L ≥ 1` with `L ≥ ln(1/δ) / (η − ln(1+η))`.
pub fn min_source_length(delta: f64, eta: f64) -> usize {
    let bound = (1.0 / delta).ln() / (eta - eta.ln_1p());
    (bound.ceil() as usize).max(1)
}

/// Chernoff bound `exp(−α(η − ln(1+η)))` on `Pr(X ≥ (1+η) E[X])` for `X ~ Γ(α, θ)`.
pub fn chernoff_tail(shape: f64, eta: f64) -> f64 {
    (-shape * (eta - eta.ln_1p())).exp()
}

pub fn gamma_cdf(params: &GammaParams, x: f64) -> f64 {
    regularized_lower_gamma(params.shape, x / params.scale)
}

/// One draw of `(1/(ρL)) Σ_l |z_l|² / λ_l` with `|z_l|² ~ Exp(1)` i.i.d.,
/// the MSE law for a matrix whose Gram spectrum is `spectrum`.
pub fn sample_general_mse<R: Rng + ?Sized>(spectrum: &[f64], rho: f64, rng: &mut R) -> f64 {
    assert!(!spectrum.is_empty(), "spectrum must be non-empty");
    let weighted: f64 = spectrum
        .iter()
        .map(|&lambda| {
            let e: f64 = rng.sample(Exp1);
            e / lambda
        })
        .sum();
    weighted / (rho * spectrum.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::{SimRng, StreamDomain};

    const RHO_15DB: f64 = 31.622_776_601_683_793;

    #[test]
    fn gamma_opt_examples() {
        assert!((gamma_opt(0.5, 1.0, 10.0, 1.0) - 0.05).abs() < 1e-15);
        assert!((gamma_opt(1.0, 1.0, 7.0, 1.0) - 1.0 / 7.0).abs() < 1e-15);
        assert!((gamma_opt(0.25, 1.0, 10.0, 1.0) * 2.0 - gamma_opt(0.5, 1.0, 10.0, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn optimal_gamma_examples() {
        let g = optimal_mse_gamma(5, 10, 1.0, 10.0, 1.0).unwrap();
        assert_eq!(g.shape, 5.0);
        assert!((g.scale - 0.01).abs() < 1e-15);
        assert!((g.mean() - 0.05).abs() < 1e-15);
        assert!((g.variance() - 5e-4).abs() < 1e-15);
        assert!((g.mean() - gamma_opt(0.5, 1.0, 10.0, 1.0)).abs() < 1e-15);
        let longer = optimal_mse_gamma(5, 20, 1.0, 10.0, 1.0).unwrap();
        assert!((longer.mean() - g.mean() / 2.0).abs() < 1e-15);
        assert!((longer.variance() - g.variance() / 4.0).abs() < 1e-18);
        assert!(optimal_mse_gamma(5, 4, 1.0, 10.0, 1.0).is_err());
    }

    #[test]
    fn epsilon_bounds() {
        let r = epsilon_rate_bound(0.02, RHO_15DB, 1.0, 1.0);
        assert!((r - 0.632_455_532).abs() < 1e-9);
        assert_eq!(epsilon_rate_bound(1.0, 10.0, 1.0, 1.0), 1.0);
        assert!((gamma_opt(r, 1.0, RHO_15DB, 1.0) - 0.02).abs() < 1e-12 * 0.02);

        let rd = epsilon_delta_rate_bound(0.02, 1.0, RHO_15DB, 1.0, 1.0);
        assert!((rd - 0.316_227_766).abs() < 1e-9);
        let tiny_eta = epsilon_delta_rate_bound(0.02, 1e-12, RHO_15DB, 1.0, 1.0);
        assert!((tiny_eta - r).abs() < 1e-11);
    }

    #[test]
    fn source_length_examples() {
        assert_eq!(min_source_length(0.2, 1.0), 6);
        assert_eq!(min_source_length(0.2, 0.5), 18);
        assert_eq!(min_source_length(1.0 - 1e-12, 1.0), 1);
        assert!(min_source_length(0.01, 1.0) > min_source_length(0.2, 1.0));
        assert!(min_source_length(0.2, 2.0) < min_source_length(0.2, 1.0));
    }

    #[test]
    fn chernoff_examples() {
        assert!((chernoff_tail(5.0, 1.0) - (-1.534_264_097_200_273_4f64).exp()).abs() < 1e-12);
        assert!((chernoff_tail(5.0, 1.0) - 0.215_614).abs() < 1e-6);
        assert!((chernoff_tail(5.0, 1e-9) - 1.0).abs() < 1e-12);
        for &delta in &[0.01, 0.1, 0.2, 0.5] {
            for &eta in &[0.25, 0.5, 1.0, 3.0] {
                let l = min_source_length(delta, eta);
                assert!(chernoff_tail(l as f64, eta) <= delta * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn cdf_examples() {
        let exp = GammaParams::new(1.0, 1.0).unwrap();
        assert_eq!(exp.cdf(0.0), 0.0);
        assert!((exp.cdf(std::f64::consts::LN_2) - 0.5).abs() < 1e-12);
        // At the (ε, δ) boundary with L = l_min the exact tail is within δ.
        let (delta, eta) = (0.2, 1.0);
        let l = min_source_length(delta, eta);
        let g = optimal_mse_gamma(l, 2 * l, 1.0, 10.0, 1.0).unwrap();
        let epsilon = (1.0 + eta) * g.mean();
        assert!(g.cdf(epsilon) >= 1.0 - delta);
    }

    #[test]
    fn region_reports() {
        let eps = RegionReport::compute(Criterion::Epsilon, 0.02, None, None, RHO_15DB, 1.0, 1.0).unwrap();
        let asym =
            RegionReport::compute(Criterion::EpsilonAsymptotic, 0.02, None, None, RHO_15DB, 1.0, 1.0).unwrap();
        assert_eq!(eps.r_max, asym.r_max);
        let ed = RegionReport::compute(Criterion::EpsilonDelta, 0.02, Some(0.2), Some(1.0), RHO_15DB, 1.0, 1.0)
            .unwrap();
        assert_eq!(ed.l_min, Some(6));
        assert!(ed.r_max <= eps.r_max);
        assert!(RegionReport::compute(Criterion::EpsilonDelta, 0.02, None, Some(1.0), 10.0, 1.0, 1.0).is_err());
        assert!(RegionReport::compute(Criterion::EpsilonDelta, 0.02, Some(1.5), Some(1.0), 10.0, 1.0, 1.0).is_err());
        let json: serde_json::Value = serde_json::from_str(&ed.to_json()).unwrap();
        assert_eq!(json["criterion"], "epsilon_delta");
        assert_eq!(json["l_min"], 6);
    }

    #[test]
    fn general_sampler_moments_and_scaling() {
        let mut rng = SimRng::stream(1, StreamDomain::Test, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| sample_general_mse(&[1.0], 1.0, &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.004, "{mean}");

        let a = sample_general_mse(&[0.5, 1.5], 2.0, &mut SimRng::from_seed(3));
        let b = sample_general_mse(&[0.5, 1.5], 8.0, &mut SimRng::from_seed(3));
        assert!((a / 4.0 - b).abs() < 1e-15);
    }
}
