use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance for Hermitian symmetry checks.
pub(crate) const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex vector. Carries channel vectors, beamformers and BD symbol
/// blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    entries: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Validation("vector must have length >= 1".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("vector has non-finite entries".into()));
        }
        Ok(Self { entries })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            entries: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self {
            entries: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    /// Conjugate inner product `self^H other`.
    pub fn dot(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.len(), other.len());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// `self += c * other`
    pub fn axpy(&mut self, c: Complex64, other: &Self) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += c * b;
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::DegenerateChannel(
                "cannot normalize a zero vector".into(),
            ));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

impl std::ops::IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.entries[i]
    }
}

/// Dense square complex matrix constrained to be Hermitian.
///
/// Stored row-major. The constructor enforces `A[i][j] == conj(A[j][i])`
/// within an absolute tolerance and then symmetrizes exactly, so downstream
/// code can rely on exact Hermitian storage.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: Vec<Complex64>,
    dim: usize,
}

impl HermitianMatrix {
    /// Build from row-major entries, checking Hermitian symmetry.
    pub fn new(entries: Vec<Complex64>, dim: usize) -> Result<Self> {
        Self::with_tolerance(entries, dim, HERMITIAN_TOL)
    }

    pub fn with_tolerance(entries: Vec<Complex64>, dim: usize, tol: f64) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Validation(format!(
                "expected {}x{dim} entries, got {}",
                dim,
                entries.len()
            )));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1.0);
        for i in 0..dim {
            for j in i..dim {
                let d = entries[i * dim + j] - entries[j * dim + i].conj();
                if d.norm() > tol * scale {
                    return Err(Error::Validation(format!(
                        "matrix is not Hermitian at ({i},{j}): asymmetry {:.3e}",
                        d.norm()
                    )));
                }
            }
        }
        let mut m = Self { entries, dim };
        m.symmetrize();
        Ok(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
            dim,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.entries[i * self.dim + j] = v;
    }

    /// Replace each off-diagonal pair by its Hermitian average and drop
    /// imaginary parts on the diagonal.
    pub fn symmetrize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            self.entries[i * n + i] = Complex64::new(self.entries[i * n + i].re, 0.0);
            for j in (i + 1)..n {
                let avg = 0.5 * (self.entries[i * n + j] + self.entries[j * n + i].conj());
                self.entries[i * n + j] = avg;
                self.entries[j * n + i] = avg.conj();
            }
        }
    }

    /// `self += c * v v^H`
    pub fn add_outer(&mut self, c: f64, v: &ComplexVector) {
        debug_assert_eq!(v.len(), self.dim);
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                self.entries[i * n + j] += c * v[i] * v[j].conj();
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
            dim: self.dim,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
            dim: self.dim,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z * c).collect(),
            dim: self.dim,
        }
    }

    pub fn matvec(&self, v: &ComplexVector) -> ComplexVector {
        debug_assert_eq!(v.len(), self.dim);
        let n = self.dim;
        let mut out = ComplexVector::zeros(n);
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.entries[i * n + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Real quadratic form `w^H A w`.
    pub fn quadratic_form(&self, w: &ComplexVector) -> f64 {
        w.dot(&self.matvec(w)).re
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// Real Hilbert-Schmidt inner product `Tr(A B)` of two Hermitian matrices.
    pub fn trace_product(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        // Tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij), real for Hermitian A, B.
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Rank-one matrix `v v^H`.
    pub fn outer(v: &ComplexVector) -> Self {
        let mut m = Self::zeros(v.len());
        m.add_outer(1.0, v);
        m
    }
}
