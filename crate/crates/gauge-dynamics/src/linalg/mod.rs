//! Dense complex linear algebra tuned for the frame integrator.
//!
//! Matrices are row-major `Complex64`. The multiply variants share one
//! cache-blocked split-complex kernel (see `gemm.rs`); everything sums in
//! a fixed order, so repeated runs are bitwise identical.

mod embed;
mod expm;
mod gemm;
mod polar;

pub use embed::{
    apply_local_left, apply_local_right, apply_local_vec, embed_local, partial_trace,
    EMBED_SITE_CAP,
};
pub(crate) use embed::{apply_left_planned, partial_trace_planned, SitePlan};
pub use expm::expm_antihermitian;
pub use polar::{polar_unitarize, UNITARY_TOL};

use gemm::{gemm, Variant};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix. Panics on zero dimensions (programming error, not data).
    pub fn new_zero(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        ComplexMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::new_zero(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::new_zero(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Build from a row-major buffer; rejects length mismatch and non-finite
    /// entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "buffer of length {} cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let m = ComplexMatrix { rows, cols, data };
        if !m.all_finite() {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub(crate) fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Elementwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Elementwise difference.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Scalar multiple.
    pub fn scale(&self, factor: Complex64) -> Self {
        let data = self.data.iter().map(|a| a * factor).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// `self += factor * other` (the RK4 combination primitive).
    pub fn add_assign_scaled(&mut self, other: &Self, factor: Complex64) -> Result<()> {
        self.check_same_shape(other, "add_assign_scaled")?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::new_zero(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    /// `self * b`.
    pub fn matmul(&self, b: &Self) -> Result<Self> {
        if self.cols != b.rows {
            return Err(Error::invalid(format!(
                "matmul shape mismatch: {}x{} times {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let (data, m, n) = gemm(Variant::Plain, &self.data, self.rows, self.cols, &b.data, b.rows, b.cols);
        Ok(ComplexMatrix { rows: m, cols: n, data })
    }

    /// `self^dag * b` without forming the adjoint.
    pub fn matmul_adj_a(&self, b: &Self) -> Result<Self> {
        if self.rows != b.rows {
            return Err(Error::invalid(format!(
                "adjoint-matmul shape mismatch: ({}x{})^dag times {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let (data, m, n) = gemm(Variant::AdjA, &self.data, self.rows, self.cols, &b.data, b.rows, b.cols);
        Ok(ComplexMatrix { rows: m, cols: n, data })
    }

    /// `self * b^dag` without forming the adjoint.
    pub fn matmul_adj_b(&self, b: &Self) -> Result<Self> {
        if self.cols != b.cols {
            return Err(Error::invalid(format!(
                "matmul-adjoint shape mismatch: {}x{} times ({}x{})^dag",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let (data, m, n) = gemm(Variant::AdjB, &self.data, self.rows, self.cols, &b.data, b.rows, b.cols);
        Ok(ComplexMatrix { rows: m, cols: n, data })
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &StateVector) -> Result<StateVector> {
        if self.cols != v.dim() {
            return Err(Error::invalid(format!(
                "matvec shape mismatch: {}x{} times dim-{}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, x) in self.row(r).iter().zip(v.amplitudes()) {
                acc += a * x;
            }
            *slot = acc;
        }
        Ok(StateVector { data: out })
    }

    /// Trace (square matrices only).
    pub fn trace(&self) -> Result<Complex64> {
        if !self.is_square() {
            return Err(Error::invalid(format!("trace of non-square {}x{}", self.rows, self.cols)));
        }
        Ok(self.trace_unchecked())
    }

    pub(crate) fn trace_unchecked(&self) -> Complex64 {
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum (operator infinity norm).
    pub(crate) fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `|| A - A^dag ||_F` (square matrices only; panics otherwise).
    pub fn hermiticity_residual(&self) -> f64 {
        assert!(self.is_square(), "hermiticity residual needs a square matrix");
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let d = self.get(r, c) - self.get(c, r).conj();
                acc += d.norm_sqr();
            }
        }
        acc.sqrt()
    }

    fn check_same_shape(&self, other: &Self, what: &str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::invalid(format!(
                "{what} shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

/// `Tr(A B^dag)` computed entrywise in O(rows*cols), no product formed.
pub fn pair_trace(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::invalid(format!(
            "pair_trace shape mismatch: {}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.data.iter().zip(&b.data) {
        acc += x * y.conj();
    }
    Ok(acc)
}

/// Kronecker product; the second factor occupies the low bits of the
/// combined index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::new_zero(a.rows * b.rows, a.cols * b.cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let w = a.get(ar, ac);
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out.set(ar * b.rows + br, ac * b.cols + bc, w * b.get(br, bc));
                }
            }
        }
    }
    out
}

/// `|| U^dag U - 1 ||_F`, the unitarity defect.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    assert!(u.is_square(), "unitarity residual needs a square matrix");
    let gram = u.matmul_adj_a(u).expect("square matmul");
    let mut acc = 0.0;
    for r in 0..gram.rows {
        for c in 0..gram.cols {
            let mut d = gram.get(r, c);
            if r == c {
                d -= Complex64::new(1.0, 0.0);
            }
            acc += d.norm_sqr();
        }
    }
    acc.sqrt()
}

/// Seeded random Hermitian matrix with entries of order one (used for
/// commutation spot-checks; deterministic for a given seed).
pub fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = ComplexMatrix::new_zero(n, n);
    for r in 0..n {
        for c in r..n {
            if r == c {
                m.set(r, c, Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
            } else {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m.set(r, c, z);
                m.set(c, r, z.conj());
            }
        }
    }
    m
}

/// Seeded random unitary (polar factor of a random perturbation of the
/// identity; deterministic for a given seed).
pub fn random_unitary(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x5eed));
    let mut m = ComplexMatrix::identity(n);
    // Perturbation small enough (spectral norm well under sqrt(3) - 1) to
    // stay inside the Newton-Schulz basin at any dimension.
    let amp = 0.3 / (n as f64).sqrt();
    for r in 0..n {
        for c in 0..n {
            let z = Complex64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp));
            m.set(r, c, m.get(r, c) + z);
        }
    }
    polar_unitarize(&m).expect("random perturbation of identity stays in the polar basin")
}

/// Complex state vector over the register basis (site k = bit k).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    data: Vec<Complex64>,
}

impl StateVector {
    pub fn new_zero(dim: usize) -> Self {
        assert!(dim > 0, "state dimension must be positive");
        StateVector { data: vec![Complex64::new(0.0, 0.0); dim] }
    }

    /// Build from amplitudes; rejects empty or non-finite input.
    pub fn from_vec(data: Vec<Complex64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("state must have positive dimension"));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::invalid("state amplitudes must be finite"));
        }
        Ok(StateVector { data })
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.data
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self | other>` (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::invalid(format!(
                "inner product dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.data.iter().zip(&other.data) {
            acc += a.conj() * b;
        }
        Ok(acc)
    }

    /// `|| self - other ||_2`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::invalid(format!(
                "distance dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let acc: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok(acc.sqrt())
    }
}
