//! Eve's mean estimation fidelity `G` and the fidelity `F = 1 - D` she induces
//! on the decoys.
//!
//! Each quantity is available twice: straight from its definition as an
//! average over an ensemble, and as a linear functional of the attack's Choi
//! state (`€` for `G`, `£` for `F`). The two routes are kept independent so
//! that each can check the other.
//!
//! For diagonal attacks the spectral sums
//! `g = Σ_r max_j |A_jjr|²` and `f = Σ_r |Σ_j A_jjr|²` give `G = g/n` and
//! `D = 1/2 - f/(2n²)`.

use crate::attacks::GeneralizedMeasurement;
use crate::choi::{mat_to_vec, ChoiState};
use crate::ensembles::Ensemble;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, C64, ONE};

/// Off-diagonal magnitude tolerated by [`spectral_quantities`].
pub const DIAGONAL_TOL: f64 = 1e-10;

/// Diagonal weights this close to the maximum count as ties.
pub const TIE_TOL: f64 = 1e-12;

/// Eve's best guess per outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct GuessTable {
    /// `j_(r)`, the basis index maximizing `<j|Â_r†Â_r|j>`; lowest index on ties.
    pub guesses: Vec<usize>,
    /// `<j_(r)|Â_r†Â_r|j_(r)>`
    pub weights: Vec<f64>,
}

impl GuessTable {
    pub fn for_measurement(m: &GeneralizedMeasurement) -> Self {
        let n = m.dim();
        let mut guesses = Vec::with_capacity(m.outcomes());
        let mut weights = Vec::with_capacity(m.outcomes());
        for k in m.kraus() {
            // <j|Â†Â|j> is the squared norm of column j
            let w: Vec<f64> = (0..n)
                .map(|j| (0..n).map(|i| k[(i, j)].norm_sqr()).sum())
                .collect();
            let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let j = w.iter().position(|&x| x >= max - TIE_TOL).unwrap_or(0);
            guesses.push(j);
            weights.push(w[j]);
        }
        Self { guesses, weights }
    }

    pub fn guess(&self, outcome: usize) -> usize {
        self.guesses[outcome]
    }
}

/// `G = (1/n) Σ_r max_j <j|Â_r†Â_r|j>` on the canonical ensemble.
pub fn estimation_fidelity(m: &GeneralizedMeasurement) -> (f64, GuessTable) {
    let table = GuessTable::for_measurement(m);
    let g = table.weights.iter().sum::<f64>() / m.dim() as f64;
    (g, table)
}

/// The diagonal operator `€ = (1/n) Σ_r Id ⊗ |j_(r)><j_(r)| ⊗ |r><r|` on
/// system ⊗ guess ⊗ outcome registers, stored by its diagonal.
///
/// Composite index `(i, j, r) -> (i*n + j)*K + r`.
#[derive(Clone, Debug)]
pub struct EuroFunctional {
    n: usize,
    outcomes: usize,
    diag: Vec<f64>,
}

impl EuroFunctional {
    pub fn new(n: usize, table: &GuessTable) -> Self {
        let k = table.guesses.len();
        let mut diag = vec![0.0; n * n * k];
        let w = 1.0 / n as f64;
        for (r, &jr) in table.guesses.iter().enumerate() {
            for i in 0..n {
                diag[(i * n + jr) * k + r] = w;
            }
        }
        Self {
            n,
            outcomes: k,
            diag,
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&self.diag)
    }

    /// `(A_r ⊗ |r>)`
    pub fn lift(&self, a: &ComplexVector, r: usize) -> ComplexVector {
        a.kron(&ComplexVector::basis(self.outcomes, r))
    }

    /// `Σ_r Tr(€ (A_r⊗|r>)(A_r⊗|r>)†)`
    pub fn evaluate(&self, m: &GeneralizedMeasurement) -> Result<f64> {
        if m.dim() != self.n || m.outcomes() != self.outcomes {
            return Err(Error::DimensionMismatch(format!(
                "€ built for n={}, K={} applied to n={}, K={}",
                self.n,
                self.outcomes,
                m.dim(),
                m.outcomes()
            )));
        }
        let k = self.outcomes;
        let mut total = 0.0;
        for (r, op) in m.kraus().iter().enumerate() {
            // the lifted vector is supported on indices idx*K + r
            for (idx, a) in mat_to_vec(op).entries().iter().enumerate() {
                total += self.diag[idx * k + r] * a.norm_sqr();
            }
        }
        Ok(total)
    }
}

/// `G` through the `€` functional.
pub fn estimation_fidelity_functional(m: &GeneralizedMeasurement) -> f64 {
    let table = GuessTable::for_measurement(m);
    EuroFunctional::new(m.dim(), &table)
        .evaluate(m)
        .expect("functional built from the same measurement")
}

/// `F = Σ_i p_i Σ_r |<φ_i|Â_r|φ_i>|²`
pub fn induced_fidelity(m: &GeneralizedMeasurement, e: &Ensemble) -> Result<f64> {
    if e.dim() != m.dim() {
        return Err(Error::DimensionMismatch(format!(
            "ensemble of dim {} for a measurement of dim {}",
            e.dim(),
            m.dim()
        )));
    }
    let mut f = 0.0;
    for (p, phi) in e.items() {
        let mut s = 0.0;
        for k in m.kraus() {
            s += phi.inner(&k.apply(phi)?).norm_sqr();
        }
        f += p * s;
    }
    Ok(f)
}

/// `£ = (1/2n) P_rep + (1/2n) P_β P_rep + (1/n²) Σ_{j<k} |s_jk><s_jk| P_nonrep`
/// with singlets `|s_jk> = (|jk> - |kj>)/√2`, stored as its nonzero entries.
#[derive(Clone, Debug)]
pub struct PoundFunctional {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl PoundFunctional {
    pub fn new(n: usize) -> Self {
        let nf = n as f64;
        let rep = |j: usize| j * n + j;
        let mut entries = Vec::with_capacity(n * n + 4 * n * n);
        for j in 0..n {
            entries.push((rep(j), rep(j), 1.0 / (2.0 * nf)));
        }
        // P_β P_rep = P_β, and <jj|P_β|kk> = 1/n
        for j in 0..n {
            for k in 0..n {
                entries.push((rep(j), rep(k), 1.0 / (2.0 * nf * nf)));
            }
        }
        let s = 1.0 / (2.0 * nf * nf);
        for j in 0..n {
            for k in j + 1..n {
                let (jk, kj) = (j * n + k, k * n + j);
                entries.extend([(jk, jk, s), (kj, kj, s), (jk, kj, -s), (kj, jk, -s)]);
            }
        }
        Self { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for &(p, q, v) in &self.entries {
            m[(p, q)] += C64::new(v, 0.0);
        }
        m
    }

    /// `Tr(£ $)`
    pub fn trace_with(&self, choi: &ChoiState) -> Result<f64> {
        if choi.dim_in() != self.n || choi.dim_out() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "£ for n={} applied to a Choi state of dims ({}, {})",
                self.n,
                choi.dim_out(),
                choi.dim_in()
            )));
        }
        let s = choi.matrix();
        let t: C64 = self.entries.iter().map(|&(p, q, v)| s[(q, p)] * v).sum();
        Ok(t.re)
    }

    /// `Tr(£ Σ_r A_r A_r†) = Σ_r <A_r|£|A_r>`, without materializing `$`.
    pub fn evaluate_kraus(&self, m: &GeneralizedMeasurement) -> Result<f64> {
        if m.dim() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "£ for n={} applied to a measurement of dim {}",
                self.n,
                m.dim()
            )));
        }
        let mut total = 0.0;
        for op in m.kraus() {
            let a = op.entries();
            let t: C64 = self
                .entries
                .iter()
                .map(|&(p, q, v)| a[p].conj() * a[q] * v)
                .sum();
            total += t.re;
        }
        Ok(total)
    }
}

/// `F` on the pairing ensemble through the `£` functional.
pub fn induced_fidelity_functional(m: &GeneralizedMeasurement) -> f64 {
    PoundFunctional::new(m.dim())
        .evaluate_kraus(m)
        .expect("functional built for the measurement's dimension")
}

/// Dense matrices behind the two functionals, for inspection.
#[derive(Clone, Debug)]
pub struct FunctionalMatrices {
    pub euro: ComplexMatrix,
    pub pound: ComplexMatrix,
    pub p_rep: ComplexMatrix,
    pub p_nonrep: ComplexMatrix,
    pub p_beta: ComplexMatrix,
    pub beta: ComplexVector,
}

impl FunctionalMatrices {
    /// Builds `£` literally from its projector expression. Dense, so keep `n` small.
    pub fn new(m: &GeneralizedMeasurement) -> Self {
        let n = m.dim();
        let d = n * n;
        let nf = n as f64;
        let mut p_rep = ComplexMatrix::zeros(d, d);
        let mut beta = ComplexVector::zeros(d);
        for j in 0..n {
            p_rep[(j * n + j, j * n + j)] = ONE;
            beta[j * n + j] = C64::new(1.0 / nf.sqrt(), 0.0);
        }
        let p_nonrep = &ComplexMatrix::identity(d) - &p_rep;
        let p_beta = ComplexMatrix::projector(&beta);
        let mut singlets = ComplexMatrix::zeros(d, d);
        for j in 0..n {
            for k in j + 1..n {
                let mut s = ComplexVector::zeros(d);
                s[j * n + k] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                s[k * n + j] = C64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0);
                singlets = &singlets + &ComplexMatrix::projector(&s);
            }
        }
        let pound = &(&p_rep.scale_real(1.0 / (2.0 * nf)) + &(&p_beta * &p_rep).scale_real(1.0 / (2.0 * nf)))
            + &(&singlets * &p_nonrep).scale_real(1.0 / (nf * nf));
        let euro = EuroFunctional::new(n, &GuessTable::for_measurement(m)).to_dense();
        Self {
            euro,
            pound,
            p_rep,
            p_nonrep,
            p_beta,
            beta,
        }
    }
}

/// `(g, f)` for an attack whose Kraus operators are all diagonal.
pub fn spectral_quantities(m: &GeneralizedMeasurement) -> Result<(f64, f64)> {
    let mut g = 0.0;
    let mut f = 0.0;
    for (r, k) in m.kraus().iter().enumerate() {
        if !k.is_diagonal(DIAGONAL_TOL) {
            return Err(Error::NotDiagonal(r));
        }
        let d = k.diagonal();
        g += d.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
        f += d.iter().sum::<C64>().norm_sqr();
    }
    Ok((g, f))
}

/// `(√g + √((m-1)(n-g)))²`, the largest `f` compatible with a given `g`
/// over coefficient vectors of squared norm `n` spread across `m` entries
/// per outcome.
pub fn banaszek_bound(g: f64, m: usize, n: usize) -> Result<f64> {
    let nf = n as f64;
    if m == 0 || !g.is_finite() || g < -1e-12 || g > nf + 1e-12 {
        return Err(Error::OutOfDomain {
            name: "g",
            value: g,
            lo: 0.0,
            hi: nf,
        });
    }
    let g = g.clamp(0.0, nf);
    Ok((g.sqrt() + ((m - 1) as f64 * (nf - g)).sqrt()).powi(2))
}
