//! Cyclic complex Jacobi eigensolver for Hermitian matrices, and the
//! spectral quantities built on it (operator norms, PSD tests).

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, C_ZERO};
use super::tolerance::ToleranceConfig;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Eigenvalues in descending order with the matching unitary of eigenvectors
/// (column `k` of `vectors` belongs to `values[k]`).
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.col(k)
    }
}

/// Eigendecomposition `M = U diag(λ) U*` of a Hermitian matrix.
pub fn hermitian_eig(m: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<HermitianEig> {
    m.ensure_square()?;
    let fro = m.frobenius_norm();
    let residual = m.hermitian_residual();
    if residual > cfg.structural_tol * (1.0 + fro) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(jacobi(&m.hermitian_part(), cfg))
}

/// Jacobi iteration on a matrix assumed exactly Hermitian.
fn jacobi(m: &ComplexMatrix, cfg: &ToleranceConfig) -> HermitianEig {
    let n = m.rows();
    let mut a: Vec<Complex64> = m.as_slice().to_vec();
    let mut u = vec![C_ZERO; n * n];
    for i in 0..n {
        u[i * n + i] = Complex64::new(1.0, 0.0);
    }
    let fro = m.frobenius_norm();
    // Sweeping until the off-diagonal mass reaches rounding level costs at most one or two
    // extra sweeps (quadratic convergence) and keeps eigenvectors accurate.
    let target = 4.0 * f64::EPSILON * fro;
    let fallback = cfg.structural_tol * fro;
    let negligible = f64::EPSILON * 1e-3 * fro;

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= target || fro == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = apq.norm();
                if g <= negligible {
                    a[p * n + q] = C_ZERO;
                    a[q * n + p] = C_ZERO;
                    continue;
                }
                let phase = apq / g;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let pc = phase.conj();
                // A <- A V with V = [[c, s], [-s·ē, c·ē]] acting on columns p, q.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * s * pc;
                    a[k * n + q] = akp * s + akq * c * pc;
                    let ukp = u[k * n + p];
                    let ukq = u[k * n + q];
                    u[k * n + p] = ukp * c - ukq * s * pc;
                    u[k * n + q] = ukp * s + ukq * c * pc;
                }
                // A <- V* A acting on rows p, q.
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * s * phase;
                    a[q * n + k] = apk * s + aqk * c * phase;
                }
                a[p * n + q] = C_ZERO;
                a[q * n + p] = C_ZERO;
                a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
            }
        }
    }
    debug_assert!(off_diagonal_norm(&a, n) <= fallback.max(target) * 10.0 + 1e-300);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].re.total_cmp(&a[i * n + i].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, k| u[r * n + order[k]]);
    HermitianEig { values, vectors }
}

fn off_diagonal_norm(a: &[Complex64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[i * n + j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Largest singular value together with a unit right singular vector `v`
/// (so that `‖M v‖ = ‖M‖`). Empty matrices have norm 0 and an empty vector.
pub fn top_singular(m: &ComplexMatrix) -> (f64, Vec<Complex64>) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (0.0, vec![C_ZERO; cols]);
    }
    let cfg = ToleranceConfig::default();
    if cols <= rows {
        let gram = &m.adjoint() * m;
        let eig = jacobi(&gram.hermitian_part(), &cfg);
        let sigma = eig.values[0].max(0.0).sqrt();
        (sigma, eig.vector(0))
    } else {
        let gram = m * &m.adjoint();
        let eig = jacobi(&gram.hermitian_part(), &cfg);
        let sigma = eig.values[0].max(0.0).sqrt();
        let u = eig.vector(0);
        if sigma == 0.0 {
            let mut v = vec![C_ZERO; cols];
            v[0] = Complex64::new(1.0, 0.0);
            return (0.0, v);
        }
        let mut v = m.adjoint().matvec(&u);
        let nv = super::matrix::vnorm(&v);
        for z in &mut v {
            *z /= nv;
        }
        (sigma, v)
    }
}

/// Operator norm (largest singular value), computed from the spectrum of the smaller Gram matrix.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let gram = if cols <= rows {
        &m.adjoint() * m
    } else {
        m * &m.adjoint()
    };
    let eig = jacobi(&gram.hermitian_part(), &ToleranceConfig::default());
    eig.values[0].max(0.0).sqrt()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<f64> {
    let eig = hermitian_eig(m, cfg)?;
    Ok(eig.values.last().copied().unwrap_or(0.0))
}

/// `true` iff the Hermitian matrix has spectrum bounded below by `-psd_tol`.
pub fn psd_check(m: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<bool> {
    Ok(min_eigenvalue(m, cfg)? >= -cfg.psd_tol)
}
