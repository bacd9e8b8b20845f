//! Message words, decoys, and Bob's tamper test.
//!
//! Message words are the basis kets `|j>`, each with weight `1/n`. Decoys are
//! `(|j> + i|k>)/√2` over all ordered pairs `(j, k)`, each with weight `1/n²`.
//! Both ensembles average to `Id/n`.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, C64, I, ONE};

#[derive(Clone, Debug)]
pub struct Ensemble {
    dim: usize,
    items: Vec<(f64, ComplexVector)>,
}

impl Ensemble {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn items(&self) -> &[(f64, ComplexVector)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `Σ_i p_i |φ_i><φ_i|`
    pub fn average_density(&self) -> ComplexMatrix {
        let mut rho = ComplexMatrix::zeros(self.dim, self.dim);
        for (p, ket) in &self.items {
            for a in 0..self.dim {
                for b in 0..self.dim {
                    rho[(a, b)] += ket[a] * ket[b].conj() * *p;
                }
            }
        }
        rho
    }
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::BadDimension(n));
    }
    Ok(())
}

fn check_index(index: usize, dim: usize) -> Result<()> {
    if index >= dim {
        return Err(Error::IndexOutOfRange { index, dim });
    }
    Ok(())
}

pub fn canonical_ensemble(n: usize) -> Result<Ensemble> {
    check_dim(n)?;
    let w = 1.0 / n as f64;
    Ok(Ensemble {
        dim: n,
        items: (0..n).map(|j| (w, ComplexVector::basis(n, j))).collect(),
    })
}

/// `(|j> + i|k>)/√2` for `j != k`, and `|j>` itself for `j == k`.
pub fn decoy_ket(j: usize, k: usize, n: usize) -> Result<ComplexVector> {
    check_index(j, n)?;
    check_index(k, n)?;
    if j == k {
        return Ok(ComplexVector::basis(n, j));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = ComplexVector::zeros(n);
    v[j] = ONE * s;
    v[k] = I * s;
    Ok(v)
}

/// All ordered pairs `(j, k)` in row-major order, `j` major.
pub fn pairing_ensemble(n: usize) -> Result<Ensemble> {
    check_dim(n)?;
    let w = 1.0 / (n * n) as f64;
    let mut items = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            items.push((w, decoy_ket(j, k, n)?));
        }
    }
    Ok(Ensemble { dim: n, items })
}

/// `(P_intact, P_tamper)` for decoy `(j, k)`; `P_tamper = Id - P_intact`.
pub fn tamper_projectors(j: usize, k: usize, n: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let phi = decoy_ket(j, k, n)?;
    let intact = ComplexMatrix::projector(&phi);
    let tamper = &ComplexMatrix::identity(n) - &intact;
    Ok((intact, tamper))
}

/// Real-weighted mixture helper used in tests and reports.
pub fn mixed_state(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n).scale(C64::new(1.0 / n as f64, 0.0))
}
