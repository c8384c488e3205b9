//! Circularly symmetric complex Gaussian draws.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

/// One CN(0, `variance`) draw: real and imaginary parts are independent
/// N(0, `variance`/2), produced by the ziggurat normal sampler.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, std_per_part: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std_per_part, im * std_per_part)
}

fn std_per_part(variance: f64) -> Result<f64> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "complex Gaussian variance must be positive and finite, got {variance}"
        )));
    }
    Ok((variance / 2.0).sqrt())
}

/// `n` i.i.d. CN(0, `variance`) entries.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    variance: f64,
) -> Result<ComplexVector> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample length must be >= 1".into()));
    }
    let sd = std_per_part(variance)?;
    Ok(ComplexVector::from_vec_unchecked((0..n).map(|_| complex_gaussian(rng, sd)).collect()))
}

/// `rows × cols` matrix of i.i.d. CN(0, `variance`) entries, filled row-major.
pub fn sample_complex_matrix<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    variance: f64,
) -> Result<ComplexMatrix> {
    let sd = std_per_part(variance)?;
    ComplexMatrix::new(rows, cols, (0..rows * cols).map(|_| complex_gaussian(rng, sd)).collect())
}
