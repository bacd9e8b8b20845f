//! Dense complex matrices and vectors.
//!
//! Storage is row-major. Composite indices of bipartite spaces flatten as
//! `(i, j) -> i * dim2 + j`, first factor major, everywhere in the crate.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance for Hermiticity and eigenvalue sign tests.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diag(&d)
    }

    /// Builds a matrix from real row slices. Panics on ragged input; meant for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self::from_fn(rows.len(), cols, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// `|a><b|`
    pub fn outer(a: &ComplexVector, b: &ComplexVector) -> Self {
        Self::from_fn(a.dim(), b.dim(), |i, j| a[i] * b[j].conj())
    }

    /// `|a><a|`
    pub fn projector(a: &ComplexVector) -> Self {
        Self::outer(a, a)
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

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.data
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector::from((0..self.rows).map(|i| self[(i, j)]).collect::<Vec<_>>())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Entrywise transpose, no conjugation.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "trace of {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of dim {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        Ok(ComplexVector::from(
            (0..self.rows)
                .map(|i| {
                    self.data[i * self.cols..(i + 1) * self.cols]
                        .iter()
                        .zip(v.entries())
                        .map(|(&a, &b)| a * b)
                        .sum::<C64>()
                })
                .collect::<Vec<_>>(),
        ))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "elementwise op on {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        match self.try_sub(other) {
            Ok(d) => d.max_norm(),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|M_ij - conj(M_ji)|`; infinite for non-square matrices.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].norm() <= tol))
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a fallible product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![ZERO; dim],
        }
    }

    /// Computational basis ket `|j>`.
    pub fn basis(dim: usize, j: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[j] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.data
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, &b)| a.conj() * b)
            .sum()
    }

    pub fn conj(&self) -> Self {
        Self {
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.data {
            data.extend(other.data.iter().map(|&b| a * b));
        }
        Self { data }
    }
}

impl From<Vec<C64>> for ComplexVector {
    fn from(data: Vec<C64>) -> Self {
        Self { data }
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.data[i]
    }
}

/// Kronecker product; block `(i, j)` of the result is `a_ij * b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (br, bc) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Which factor of a bipartite space to trace out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

pub fn partial_trace(
    m: &ComplexMatrix,
    dim1: usize,
    dim2: usize,
    which: Subsystem,
) -> Result<ComplexMatrix> {
    let d = dim1 * dim2;
    if d == 0 || m.rows() != d || m.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not bipartite {dim1}x{dim2}",
            m.rows(),
            m.cols()
        )));
    }
    let out = match which {
        Subsystem::Second => ComplexMatrix::from_fn(dim1, dim1, |i, k| {
            (0..dim2).map(|j| m[(i * dim2 + j, k * dim2 + j)]).sum()
        }),
        Subsystem::First => ComplexMatrix::from_fn(dim2, dim2, |j, l| {
            (0..dim1).map(|i| m[(i * dim2 + j, i * dim2 + l)]).sum()
        }),
    };
    Ok(out)
}

/// Spectrum of a Hermitian matrix; eigenvalues ascending, eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// `V f(Λ) V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| v[(i, k)] * v[(j, k)].conj() * fv[k])
                .sum()
        })
    }
}

pub fn herm_eig(h: &ComplexMatrix, tol: f64) -> Result<HermEig> {
    let dev = h.hermitian_deviation();
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    let n = h.rows();
    // Symmetrize so the solver sees an exactly Hermitian input.
    let sym = ComplexMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let eig = SymmetricEigen::new(sym.to_nalgebra());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn psd_check(h: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(herm_eig(h, tol)?.min() >= -tol)
}

/// `h^{-1/2}` for a positive definite `h`.
pub fn inv_sqrt_psd(h: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    let eig = herm_eig(h, tol)?;
    if eig.min() < tol {
        return Err(Error::NotPositiveDefinite(eig.min()));
    }
    Ok(eig.reconstruct_with(|x| 1.0 / x.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, c, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn kron_identities() {
        assert_eq!(
            kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)),
            ComplexMatrix::identity(6)
        );
        assert_eq!(
            kron(
                &ComplexMatrix::from_real_diag(&[1.0, 2.0]),
                &ComplexMatrix::identity(2)
            ),
            ComplexMatrix::from_real_diag(&[1.0, 1.0, 2.0, 2.0])
        );
    }

    #[test]
    fn kron_matches_naive_quadruple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p0 = ComplexMatrix::projector(&ComplexVector::basis(2, 0));
        let rho = random_matrix(&mut rng, 2, 2);
        let k = kron(&p0, &rho);
        let mut naive = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        naive[(i * 2 + p, j * 2 + q)] = p0[(i, j)] * rho[(p, q)];
                    }
                }
            }
        }
        assert_eq!(k, naive);
        // rho sits in the top-left block only
        for i in 0..4 {
            for j in 0..4 {
                if i < 2 && j < 2 {
                    assert_eq!(k[(i, j)], rho[(i, j)]);
                } else {
                    assert_eq!(k[(i, j)], ZERO);
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 3, 3);
        let ab = kron(&a, &b);
        let t2 = partial_trace(&ab, 2, 3, Subsystem::Second).unwrap();
        assert!(t2.max_abs_diff(&a.scale(b.trace())) < 1e-12);
        let t1 = partial_trace(&ab, 2, 3, Subsystem::First).unwrap();
        assert!(t1.max_abs_diff(&b.scale(a.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_of_identity() {
        let n = 3;
        let t = partial_trace(&ComplexMatrix::identity(n * n), n, n, Subsystem::First).unwrap();
        assert_eq!(t, ComplexMatrix::identity(n).scale_real(n as f64));
    }

    #[test]
    fn partial_trace_rejects_bad_shape() {
        let m = ComplexMatrix::identity(5);
        assert!(matches!(
            partial_trace(&m, 2, 2, Subsystem::First),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn partial_trace_of_identity_channel_choi() {
        // sum_{ij} |ii><jj| for n = 2, built by hand
        let mut choi = ComplexMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                choi[(i * 3, j * 3)] = ONE;
            }
        }
        let t = partial_trace(&choi, 2, 2, Subsystem::First).unwrap();
        assert_eq!(t, ComplexMatrix::identity(2));
    }

    #[test]
    fn eig_simple_cases() {
        let e = herm_eig(&ComplexMatrix::identity(3), 1e-9).unwrap();
        for v in e.values {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let e = herm_eig(&ComplexMatrix::from_real_diag(&[3.0, -1.0]), 1e-9).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12 && (e.values[1] - 3.0).abs() < 1e-12);
        assert!((e.vectors[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((e.vectors[(0, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_of_bell_projector() {
        let s = 1.0 / 2f64.sqrt();
        let beta = ComplexVector::from(vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]);
        let e = herm_eig(&ComplexMatrix::projector(&beta), 1e-9).unwrap();
        let expect = [0.0, 0.0, 0.0, 1.0];
        for (v, x) in e.values.iter().zip(expect) {
            assert!((v - x).abs() < 1e-12);
        }
        let top = e.vectors.column(3);
        assert!((top.inner(&beta).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(herm_eig(&m, 1e-9), Err(Error::NotHermitian(_))));
        assert!(psd_check(&m, 1e-9).is_err());
    }

    #[test]
    fn psd_cases() {
        assert!(psd_check(&ComplexMatrix::identity(4), 1e-9).unwrap());
        assert!(!psd_check(&ComplexMatrix::from_real_diag(&[1.0, -0.5]), 1e-9).unwrap());
    }

    #[test]
    fn transpose_map_choi_has_negative_eigenvalue() {
        // sum_ij |i><j| (x) |j><i|  is the swap operator
        let n = 2;
        let mut m = ComplexMatrix::zeros(4, 4);
        for i in 0..n {
            for j in 0..n {
                let eij = ComplexMatrix::outer(&ComplexVector::basis(n, i), &ComplexVector::basis(n, j));
                m = &m + &kron(&eij, &eij.transpose());
            }
        }
        let e = herm_eig(&m, 1e-9).unwrap();
        assert!((e.min() + 1.0).abs() < 1e-12);
        assert!(!psd_check(&m, 1e-9).unwrap());
        // normalized by n it is the -1/2 eigenvalue
        assert!((herm_eig(&m.scale_real(0.5), 1e-9).unwrap().min() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn inv_sqrt_cases() {
        assert!(inv_sqrt_psd(&ComplexMatrix::identity(3), 1e-9)
            .unwrap()
            .max_abs_diff(&ComplexMatrix::identity(3))
            < 1e-12);
        let s = inv_sqrt_psd(&ComplexMatrix::from_real_diag(&[4.0, 1.0]), 1e-9).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::from_real_diag(&[0.5, 1.0])) < 1e-12);
        assert!(matches!(
            inv_sqrt_psd(&ComplexMatrix::from_real_diag(&[1.0, 0.0]), 1e-9),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(inv_sqrt_psd(&ComplexMatrix::from_real_diag(&[1.0, -2.0]), 1e-9).is_err());
    }

    #[test]
    fn inv_sqrt_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..6 {
            let a = random_matrix(&mut rng, n, n);
            let h = &(&a * &a.adjoint()) + &ComplexMatrix::identity(n).scale_real(0.1);
            let s = inv_sqrt_psd(&h, 1e-9).unwrap();
            let shs = &(&s * &h) * &s;
            assert!(shs.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-9);
        }
    }

    #[test]
    fn trace_product_matches_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_matrix(&mut rng, 3, 4);
        let b = random_matrix(&mut rng, 4, 3);
        let t = a.trace_product(&b).unwrap();
        assert!((t - (&a * &b).trace()).norm() < 1e-12);
        assert!(a.trace_product(&a).is_err());
    }

    #[test]
    fn new_rejects_wrong_length() {
        assert!(ComplexMatrix::new(2, 2, vec![ONE; 3]).is_err());
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
    }
}
