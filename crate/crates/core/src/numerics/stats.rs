//! Sample moments and Kolmogorov–Smirnov statistics.

use crate::error::{Error, Result};

/// Asymptotic KS coefficient at the 1% level.
pub const KS_COEFF_1PCT: f64 = 1.63;

pub fn mean(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Unbiased (n − 1) variance; zero for a single sample.
pub fn unbiased_variance(samples: &[f64]) -> Result<f64> {
    let m = mean(samples)?;
    let n = samples.len();
    if n < 2 {
        return Ok(0.0);
    }
    Ok(samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64)
}

/// One-sample KS statistic `sup |F_n − F|` for ascending `samples`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    debug_assert!(samples.windows(2).all(|w| w[0] <= w[1]), "samples must be sorted");
    let n = samples.len() as f64;
    let d = samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(d)
}

/// Two-sample KS statistic `sup |F_a − F_b|`. Inputs need not be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// 1% critical value of the one-sample KS statistic, `1.63 / √n`.
pub fn ks_critical_one_sample(n: usize) -> f64 {
    KS_COEFF_1PCT / (n as f64).sqrt()
}

/// 1% critical value of the two-sample KS statistic, `1.63 √((n+m)/(nm))`.
pub fn ks_critical_two_sample(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_COEFF_1PCT * ((n + m) / (n * m)).sqrt()
}
