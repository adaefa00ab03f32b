//! Dense complex Hermitian matrices: GUE sampling, an in-repo eigensolver
//! (Householder tridiagonalization + implicit-shift QL), matrix
//! self-normalized sums, and deterministic operator-inequality checks.
//!
//! The eigensolver is deliberately in-repo rather than delegated, so the
//! certification path has no external numeric dependency and results are
//! reproducible bit-for-bit across platforms.

mod eigen;
mod gue;
mod selfnorm;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues};
pub use gue::{derive_stream_seed, gue_rng, sample_gue};
pub use selfnorm::{
    build_self_normalized, check_operator_inequalities, default_pinv_floor, trace_resolvent,
    trace_resolvent_from_eigenvalues, InequalityCheck, OperatorInequalityReport,
    SelfNormalizedAccumulator, SelfNormalizedSum,
};

use num_complex::Complex64;
use thiserror::Error;

/// Conjugate-symmetry slack enforced at [`HermitianMatrix`] construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix is not Hermitian: max |M - M*| entry = {deviation:.3e}")]
    NotHermitian { deviation: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("QL iteration failed to converge in sub-block {block}")]
    EigenNonConvergence { block: usize },
    #[error(
        "sum of squares is numerically singular: min eigenvalue {min_eigenvalue:.3e} \
         at or below the floor {floor:.3e}"
    )]
    NotInvertible { min_eigenvalue: f64, floor: f64 },
    #[error("deterministic inequality `{name}` violated: lhs {lhs} > rhs {rhs}")]
    InequalityViolation { name: &'static str, lhs: f64, rhs: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("empty matrix family")]
    EmptyFamily,
}

/// Dense complex matrix in split real/imaginary row-major storage. The
/// split layout keeps the hot eigensolver loops on contiguous f64 lanes and
/// lets complex multiplication run on three real GEMM calls.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            re: vec![0.0; n * n],
            im: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.re[i * n + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let idx = i * self.n + j;
        Complex64::new(self.re[idx], self.im[idx])
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let idx = i * self.n + j;
        self.re[idx] = v.re;
        self.im[idx] = v.im;
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.re[j * n + i] = self.re[i * n + j];
                out.im[j * n + i] = -self.im[i * n + j];
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.re.iter_mut().zip(&other.re) {
            *a += b;
        }
        for (a, b) in out.im.iter_mut().zip(&other.im) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.re.iter_mut().zip(&other.re) {
            *a -= b;
        }
        for (a, b) in out.im.iter_mut().zip(&other.im) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for a in out.re.iter_mut() {
            *a *= c;
        }
        for a in out.im.iter_mut() {
            *a *= c;
        }
        out
    }

    /// Adds `c * I` in place.
    pub fn add_scaled_identity(&mut self, c: f64) {
        let n = self.n;
        for i in 0..n {
            self.re[i * n + i] += c;
        }
    }

    /// Complex matrix product via three real GEMM calls
    /// (Karatsuba split: re = P1 - P2, im = P3 - P1 - P2).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut p1 = vec![0.0; n * n];
        let mut p2 = vec![0.0; n * n];
        let mut p3 = vec![0.0; n * n];
        let sa: Vec<f64> = self.re.iter().zip(&self.im).map(|(a, b)| a + b).collect();
        let sb: Vec<f64> = other.re.iter().zip(&other.im).map(|(a, b)| a + b).collect();
        real_gemm(n, &self.re, &other.re, &mut p1);
        real_gemm(n, &self.im, &other.im, &mut p2);
        real_gemm(n, &sa, &sb, &mut p3);
        let mut out = Self::zeros(n);
        for i in 0..n * n {
            out.re[i] = p1[i] - p2[i];
            out.im[i] = p3[i] - p1[i] - p2[i];
        }
        out
    }

    /// Largest |M_ij - conj(M_ji)| over all entries.
    pub fn max_adjoint_deviation(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let a = self.get(i, j);
                let b = self.get(j, i).conj();
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.re.len() {
            acc += self.re[i] * self.re[i] + self.im[i] * self.im[i];
        }
        acc.sqrt()
    }

    /// In-place averaging with the adjoint, for products that are Hermitian
    /// up to rounding.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            let ii = i * n + i;
            self.im[ii] = 0.0;
            for j in (i + 1)..n {
                let ij = i * n + j;
                let ji = j * n + i;
                let re = 0.5 * (self.re[ij] + self.re[ji]);
                let im = 0.5 * (self.im[ij] - self.im[ji]);
                self.re[ij] = re;
                self.im[ij] = im;
                self.re[ji] = re;
                self.im[ji] = -im;
            }
        }
    }

    pub(crate) fn re_slice(&self) -> &[f64] {
        &self.re
    }

    pub(crate) fn im_slice(&self) -> &[f64] {
        &self.im
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.re, &mut self.im)
    }
}

fn real_gemm(n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    unsafe {
        matrixmultiply::dgemm(
            n,
            n,
            n,
            1.0,
            a.as_ptr(),
            n as isize,
            1,
            b.as_ptr(),
            n as isize,
            1,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// A validated Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Wraps a matrix, enforcing conjugate symmetry to [`HERMITIAN_TOL`].
    pub fn new(m: ComplexMatrix) -> Result<Self, MatrixError> {
        let deviation = m.max_adjoint_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(MatrixError::NotHermitian { deviation });
        }
        let mut m = m;
        m.symmetrize();
        Ok(Self(m))
    }

    /// Wraps a product that is Hermitian in exact arithmetic, averaging away
    /// the rounding skew.
    pub fn from_symmetrized(mut m: ComplexMatrix) -> Self {
        m.symmetrize();
        Self(m)
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_complex(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0.get(i, j)
    }

    /// Normalized trace (1/N) sum of diagonal entries (real for Hermitian).
    pub fn normalized_trace(&self) -> f64 {
        let n = self.dim();
        (0..n).map(|i| self.0.re[i * n + i]).sum::<f64>() / n as f64
    }

    /// Normalized Frobenius norm (tr_N |M|^2)^(1/2) = ||M||_F / sqrt(N).
    pub fn normalized_frobenius(&self) -> f64 {
        self.0.frobenius_norm() / (self.dim() as f64).sqrt()
    }

    /// M^2 through the GEMM path, re-symmetrized.
    pub fn square(&self) -> HermitianMatrix {
        HermitianMatrix::from_symmetrized(self.0.matmul(&self.0))
    }
}

/// Eigenvalues (ascending) with a unitary eigenvector frame and the
/// reconstruction residual ||M Q - Q L||_F / ||M||_F.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors, ordered like `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
    pub residual: f64,
    /// Max entry of |Q* Q - I|.
    pub unitarity_defect: f64,
}
