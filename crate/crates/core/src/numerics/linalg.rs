//! Small dense complex kernels: Householder QR, one-sided Jacobi singular
//! values, Jacobi Hermitian eigenvalues and the Moore–Penrose inverse.
//!
//! QR sign convention: `R` has a real, non-negative diagonal, which makes
//! the thin `Q` unique for full-column-rank input.

use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Relative singular-value threshold below which QR refuses the input.
pub const QR_RANK_TOLERANCE: f64 = 1e-12;

/// Relative singular-value threshold for "full rank" everywhere else.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Largest tolerated `‖m − mᴴ‖_max` for Hermitian input.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Thin QR factors of a tall matrix.
#[derive(Debug, Clone)]
pub struct QrFactors {
    /// `rows × cols`, orthonormal columns.
    pub q: ComplexMatrix,
    /// `cols × cols`, upper triangular with real non-negative diagonal.
    pub r: ComplexMatrix,
}

/// Householder QR without a rank check. Requires `rows ≥ cols`.
pub fn householder_qr(a: &ComplexMatrix) -> QrFactors {
    let (m, n) = a.shape();
    assert!(m >= n, "householder_qr needs rows >= cols");
    let mut work = a.clone();
    let mut reflectors: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(n);

    for k in 0..n {
        let alpha = work[(k, k)];
        let tail_sqr: f64 = (k + 1..m).map(|i| work[(i, k)].norm_sqr()).sum();
        if tail_sqr == 0.0 {
            // Column already upper triangular; the phase fix below handles alpha.
            reflectors.push(None);
            continue;
        }
        let norm = (alpha.norm_sqr() + tail_sqr).sqrt();
        let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { Complex64::new(1.0, 0.0) };
        let mut v: Vec<Complex64> = (k..m).map(|i| work[(i, k)]).collect();
        v[0] = alpha + phase * norm;
        let v_norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        apply_reflector(&mut work, &v, v_norm_sqr, k, k);
        // Exact zeros below the pivot.
        for i in k + 1..m {
            work[(i, k)] = Complex64::new(0.0, 0.0);
        }
        reflectors.push(Some(v));
    }

    // Q = H_0 H_1 ... H_{n-1} [I_n; 0]
    let mut q = ComplexMatrix::from_fn(m, n, |i, j| {
        if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    for (k, v) in reflectors.iter().enumerate().rev() {
        if let Some(v) = v {
            let v_norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            apply_reflector(&mut q, v, v_norm_sqr, k, 0);
        }
    }

    let mut r = ComplexMatrix::from_fn(n, n, |i, j| if j >= i { work[(i, j)] } else { Complex64::new(0.0, 0.0) });
    for j in 0..n {
        let d = r[(j, j)];
        if d.im == 0.0 && d.re >= 0.0 {
            continue;
        }
        let phase = d / d.norm();
        for i in 0..m {
            q[(i, j)] *= phase;
        }
        for c in j..n {
            r[(j, c)] *= phase.conj();
        }
        r[(j, j)] = Complex64::new(d.norm(), 0.0);
    }
    QrFactors { q, r }
}

/// Applies `I − 2 v vᴴ / (vᴴ v)` to rows `offset..` of columns `first_col..`.
fn apply_reflector(
    mat: &mut ComplexMatrix,
    v: &[Complex64],
    v_norm_sqr: f64,
    offset: usize,
    first_col: usize,
) {
    for j in first_col..mat.cols() {
        let s: Complex64 = v
            .iter()
            .enumerate()
            .map(|(t, vi)| vi.conj() * mat[(offset + t, j)])
            .sum();
        let coeff = s * (2.0 / v_norm_sqr);
        for (t, vi) in v.iter().enumerate() {
            mat[(offset + t, j)] -= coeff * vi;
        }
    }
}

/// Orthonormal basis `Q` (same shape as `a`) for the column span of `a`.
pub fn qr_orthonormal(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() < a.cols() {
        return Err(Error::ShapeMismatch(format!(
            "qr_orthonormal needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    ensure_full_column_rank(a, QR_RANK_TOLERANCE)?;
    Ok(householder_qr(a).q)
}

/// Singular values in ascending order (`min(rows, cols)` of them), by
/// one-sided Jacobi rotations applied to the columns.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let a = if m.rows() >= m.cols() { m.clone() } else { m.adjoint() };
    let cols = a.cols();
    // Column-major working copy.
    let mut columns: Vec<Vec<Complex64>> = (0..cols).map(|j| a.column(j)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = columns[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = columns[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 =
                    columns[p].iter().zip(&columns[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate a_p against e^{-iφ} a_q, whose inner product with a_p is real.
                let unphase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = columns.split_at_mut(q);
                for (xp, xq) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (x, y) = (*xp, *xq * unphase);
                    *xp = x * c - y * s;
                    *xq = x * s + y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = columns
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(f64::total_cmp);
    sv
}

pub fn min_singular_value(m: &ComplexMatrix) -> f64 {
    singular_values(m)[0]
}

/// `σ_min / σ_max`, or 0 for the zero matrix.
pub fn singular_ratio(m: &ComplexMatrix) -> f64 {
    let sv = singular_values(m);
    let max = *sv.last().expect("matrix has at least one singular value");
    if max == 0.0 { 0.0 } else { sv[0] / max }
}

pub(crate) fn ensure_full_column_rank(m: &ComplexMatrix, tolerance: f64) -> Result<()> {
    if m.rows() < m.cols() {
        return Err(Error::RankDeficientInput(format!(
            "{}x{} matrix cannot have full column rank",
            m.rows(),
            m.cols()
        )));
    }
    let ratio = singular_ratio(m);
    if ratio > tolerance {
        Ok(())
    } else {
        Err(Error::RankDeficientInput(format!(
            "singular value ratio {ratio:e} is not above {tolerance:e}"
        )))
    }
}

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// The `n × n` Hermitian `A = X + iY` is embedded as the real symmetric
/// `[[X, −Y], [Y, X]]`, whose spectrum is that of `A` with every eigenvalue
/// doubled; cyclic Jacobi diagonalizes the embedding and the pairs are merged.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermitian_defect();
    if defect >= HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows();
    let size = 2 * n;
    let mut a = vec![0.0_f64; size * size];
    for i in 0..n {
        for j in 0..n {
            // Symmetrize so the embedding is exactly symmetric.
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            a[i * size + j] = z.re;
            a[(i + n) * size + (j + n)] = z.re;
            a[i * size + (j + n)] = -z.im;
            a[(i + n) * size + j] = z.im;
        }
    }
    let mut diag = symmetric_jacobi_eigenvalues(&mut a, size);
    diag.sort_by(f64::total_cmp);
    Ok(diag.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}

/// Cyclic Jacobi on a dense real symmetric matrix (overwritten).
fn symmetric_jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let scale: f64 = a.iter().map(|x| x * x).sum();
        if off <= f64::EPSILON * f64::EPSILON * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}

/// Moore–Penrose inverse `(mᴴm)⁻¹mᴴ` of a full-column-rank matrix,
/// evaluated as `R⁻¹Qᴴ` from the thin QR factors.
pub fn pseudo_inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_full_column_rank(m, RANK_TOLERANCE)?;
    let QrFactors { q, r } = householder_qr(m);
    let n = m.cols();
    let qh = q.adjoint();
    let mut x = ComplexMatrix::zeros(n, m.rows());
    for col in 0..m.rows() {
        for i in (0..n).rev() {
            let mut acc = qh[(i, col)];
            for k in i + 1..n {
                acc -= r[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = acc / r[(i, i)];
        }
    }
    Ok(x)
}
