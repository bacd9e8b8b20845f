//! State-operator correspondence.
//!
//! An `m x n` matrix `Â` is identified with the vector `A = Σ A_ij |i>|j>` in
//! `C^m ⊗ C^n`, and a map `ρ ↦ Σ_r Â_r ρ Â_r†` with the positive matrix
//! `$ = Σ_r A_r A_r†` on `C^m ⊗ C^n`. The map is completely positive iff `$`
//! is positive semidefinite, and trace preserving iff `Tr_1($) = Id_n`.

use crate::error::{Error, Result};
use crate::linalg::{kron, partial_trace, psd_check, ComplexMatrix, ComplexVector, Subsystem, C64, ZERO};

/// Operators with Frobenius norm below this are treated as zero.
pub const ZERO_OPERATOR_NORM: f64 = 1e-12;

/// Row-major flattening `A_ij -> entry i*n + j`.
pub fn mat_to_vec(a: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from(a.entries().to_vec())
}

pub fn vec_to_mat(v: &ComplexVector, m: usize, n: usize) -> Result<ComplexMatrix> {
    if v.dim() != m * n {
        return Err(Error::DimensionMismatch(format!(
            "vector of dim {} cannot be reshaped to {m}x{n}",
            v.dim()
        )));
    }
    ComplexMatrix::new(m, n, v.entries().to_vec())
}

/// Choi matrix of a map from `n x n` to `m x m` matrices.
#[derive(Clone, Debug)]
pub struct ChoiState {
    dim_out: usize,
    dim_in: usize,
    matrix: ComplexMatrix,
}

impl ChoiState {
    /// Wraps an arbitrary `(m·n) x (m·n)` matrix, e.g. the Choi matrix of a
    /// map that is not completely positive.
    pub fn from_matrix(matrix: ComplexMatrix, dim_out: usize, dim_in: usize) -> Result<Self> {
        let d = dim_out * dim_in;
        if d == 0 || matrix.rows() != d || matrix.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for a Choi state of dims ({dim_out}, {dim_in})",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self {
            dim_out,
            dim_in,
            matrix,
        })
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Completely positive iff the Choi matrix is positive semidefinite.
    /// A non-Hermitian matrix is reported as not CP.
    pub fn is_cp(&self, tol: f64) -> bool {
        psd_check(&self.matrix, tol).unwrap_or(false)
    }

    /// Trace preserving iff `Tr_1($) = Id_n` within `tol` (max norm).
    pub fn is_tp(&self, tol: f64) -> bool {
        self.tp_residual() <= tol
    }

    /// `max |Tr_1($) - Id_n|`
    pub fn tp_residual(&self) -> f64 {
        partial_trace(&self.matrix, self.dim_out, self.dim_in, Subsystem::First)
            .map(|t| t.max_abs_diff(&ComplexMatrix::identity(self.dim_in)))
            .unwrap_or(f64::INFINITY)
    }
}

/// `$ = Σ_r vec(Â_r) vec(Â_r)†`
pub fn choi_of_kraus(kraus: &[ComplexMatrix]) -> Result<ChoiState> {
    let first = kraus.first().ok_or(Error::EmptyKraus)?;
    let (m, n) = (first.rows(), first.cols());
    let d = m * n;
    let mut matrix = ComplexMatrix::zeros(d, d);
    for (r, k) in kraus.iter().enumerate() {
        if k.rows() != m || k.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator {r} is {}x{}, expected {m}x{n}",
                k.rows(),
                k.cols()
            )));
        }
        if k.frobenius_norm() < ZERO_OPERATOR_NORM {
            return Err(Error::ZeroOperator(r));
        }
        let a = k.entries();
        for (p, &ap) in a.iter().enumerate() {
            if ap == ZERO {
                continue;
            }
            for (q, &aq) in a.iter().enumerate() {
                matrix[(p, q)] += ap * aq.conj();
            }
        }
    }
    Ok(ChoiState {
        dim_out: m,
        dim_in: n,
        matrix,
    })
}

/// `Ŝ(ρ) = Tr_2((Id_m ⊗ ρ^t) $)`
pub fn apply_channel(choi: &ChoiState, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (m, n) = (choi.dim_out, choi.dim_in);
    if rho.rows() != n || rho.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} input for a channel on {n}x{n} matrices",
            rho.rows(),
            rho.cols()
        )));
    }
    let lhs = kron(&ComplexMatrix::identity(m), &rho.transpose());
    partial_trace(&lhs.matmul(&choi.matrix)?, m, n, Subsystem::Second)
}

/// Max-norm gap between `κ Ŝ(ρσ) τ` and `Tr_2((κ⊗ρ^t) $ (τ⊗σ^t))`.
pub fn sandwich_identity_residual(
    kappa: &ComplexMatrix,
    rho: &ComplexMatrix,
    sigma: &ComplexMatrix,
    tau: &ComplexMatrix,
    choi: &ChoiState,
) -> Result<f64> {
    let (m, n) = (choi.dim_out, choi.dim_in);
    for (name, x, d) in [("kappa", kappa, m), ("tau", tau, m), ("rho", rho, n), ("sigma", sigma, n)] {
        if x.rows() != d || x.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{name} is {}x{}, expected {d}x{d}",
                x.rows(),
                x.cols()
            )));
        }
    }
    let lhs = kappa
        .matmul(&apply_channel(choi, &rho.matmul(sigma)?)?)?
        .matmul(tau)?;
    let left = kron(kappa, &rho.transpose());
    let right = kron(tau, &sigma.transpose());
    let rhs = partial_trace(
        &left.matmul(&choi.matrix)?.matmul(&right)?,
        m,
        n,
        Subsystem::Second,
    )?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// `Tr((κ ⊗ ρ^t) $)`, which equals `Tr(κ Ŝ(ρ))`.
pub fn expectation_via_choi(
    kappa: &ComplexMatrix,
    rho: &ComplexMatrix,
    choi: &ChoiState,
) -> Result<C64> {
    kron(kappa, &rho.transpose()).trace_product(&choi.matrix)
}
