use num_complex::Complex64;

use super::vector::{ComplexVector, HermitianMatrix};
use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a dense real symmetric matrix by cyclic Jacobi
/// rotations.
///
/// `a` is row-major `n x n` and assumed symmetric. Returns eigenvalues in
/// ascending order with the matching orthonormal eigenvectors as columns
/// flattened into row-major storage.
pub fn sym_eig(a: &[f64], n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(a.len(), n * n);
    let mut a = a.to_vec();
    // v starts as identity and accumulates the rotations.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = (0..n * n).map(|i| a[i].abs()).fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Ok((vec![0.0; n], v));
    }

    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Apply rotation on rows/columns p and q.
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
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let eigenvalues: Vec<f64> = idx.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &i) in idx.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + col] = v[k * n + i];
        }
    }
    Ok((eigenvalues, vectors))
}

/// Real symmetric embedding `[[Re A, -Im A], [Im A, Re A]]` of a Hermitian
/// matrix, row-major of dimension `2 dim`.
pub(crate) fn real_embedding(a: &HermitianMatrix) -> Vec<f64> {
    let n = a.dim();
    let m = 2 * n;
    let mut e = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a.get(i, j);
            e[i * m + j] = z.re;
            e[i * m + (n + j)] = -z.im;
            e[(n + i) * m + j] = z.im;
            e[(n + i) * m + (n + j)] = z.re;
        }
    }
    e
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending with orthonormal eigenvectors. Realized on
/// the real symmetric embedding of doubled size: each complex eigenvalue
/// appears twice in the embedding, and one complex eigenvector per pair is
/// recovered by greedy orthogonalization of the mapped real eigenvectors.
pub fn herm_eig(a: &HermitianMatrix) -> Result<(Vec<f64>, Vec<ComplexVector>)> {
    let n = a.dim();
    let m = 2 * n;
    let (real_vals, real_vecs) = sym_eig(&real_embedding(a), m)?;

    // Map a real eigenvector [x; y] of the embedding to the complex vector
    // x + i y; the pair partner [-y; x] maps to the same complex direction.
    let candidate = |col: usize| -> ComplexVector {
        let mut v = ComplexVector::zeros(n);
        for k in 0..n {
            v[k] = Complex64::new(real_vecs[k * m + col], real_vecs[(n + k) * m + col]);
        }
        v
    };

    // Relative clustering: physical channel matrices have norms far below
    // one, so an absolute floor here would merge distinct eigenvalues.
    let scale = a.frobenius_norm();
    // Cluster numerically-equal eigenvalues, then pick dim/2 orthonormal
    // complex vectors per cluster by greedy largest-residual selection. This
    // keeps degenerate eigenspaces orthonormal after the complex folding.
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors: Vec<ComplexVector> = Vec::with_capacity(n);
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && (real_vals[end] - real_vals[start]).abs() <= 1e-9 * scale {
            end += 1;
        }
        let cluster: Vec<usize> = (start..end).collect();
        let want = cluster.len() / 2;
        if cluster.len() % 2 != 0 {
            return Err(Error::Numeric(
                "embedding eigenvalues did not pair up; input may be far from Hermitian".into(),
            ));
        }
        let mut residuals: Vec<ComplexVector> = cluster.iter().map(|&c| candidate(c)).collect();
        // Orthogonalize against vectors already selected from earlier clusters
        // (they are nearly orthogonal already; this tightens it).
        for r in residuals.iter_mut() {
            for u in &eigenvectors {
                let proj = u.dot(r);
                r.axpy(-proj, u);
            }
        }
        for _ in 0..want {
            let (best, best_norm) = residuals
                .iter()
                .enumerate()
                .map(|(i, r)| (i, r.norm()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            if best_norm < 1e-6 {
                return Err(Error::Numeric(
                    "failed to extract an orthonormal eigenbasis from the embedding".into(),
                ));
            }
            let u = residuals[best].scale(Complex64::new(1.0 / best_norm, 0.0));
            for r in residuals.iter_mut() {
                let proj = u.dot(r);
                r.axpy(-proj, &u);
            }
            // Use the mean of the cluster's embedding eigenvalues.
            let lam = cluster.iter().map(|&c| real_vals[c]).sum::<f64>() / cluster.len() as f64;
            eigenvalues.push(lam);
            eigenvectors.push(u);
        }
        start = end;
    }
    Ok((eigenvalues, eigenvectors))
}

/// Complex Cholesky factorization `A = L L^H` of a positive definite
/// Hermitian matrix. Returns the lower factor row-major, or the offending
/// pivot on failure.
pub(crate) fn cholesky(a: &HermitianMatrix) -> std::result::Result<Vec<Complex64>, f64> {
    let n = a.dim();
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                let d = sum.re;
                if d <= 0.0 || !d.is_finite() {
                    return Err(d);
                }
                l[i * n + i] = Complex64::new(d.sqrt(), 0.0);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

fn pd_error(a: &HermitianMatrix) -> Error {
    let min_eig = herm_eig(a)
        .map(|(vals, _)| vals[0])
        .unwrap_or(f64::NAN);
    Error::Numeric(format!(
        "matrix is not positive definite (smallest eigenvalue {min_eig:.6e})"
    ))
}

/// Solve `A x = b` for Hermitian positive definite `A` via Cholesky.
pub fn solve_hermitian_pd(a: &HermitianMatrix, b: &ComplexVector) -> Result<ComplexVector> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Validation(format!(
            "dimension mismatch: matrix {n}, vector {}",
            b.len()
        )));
    }
    let l = cholesky(a).map_err(|_| pd_error(a))?;
    // Forward substitution L y = b.
    let mut y = ComplexVector::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    // Back substitution L^H x = y.
    let mut x = ComplexVector::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i].conj() * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Ok(x)
}

/// `log2 det A` for Hermitian positive definite `A`.
pub fn logdet_pd(a: &HermitianMatrix) -> Result<f64> {
    let n = a.dim();
    let l = cholesky(a).map_err(|_| pd_error(a))?;
    let mut acc = 0.0;
    for i in 0..n {
        acc += l[i * n + i].re.log2();
    }
    Ok(2.0 * acc)
}
