//! Eve's generalized measurements.
//!
//! Every constructor returns a [`GeneralizedMeasurement`] that has passed the
//! completeness check `Σ_r Â_r†Â_r = Id` at [`COMPLETENESS_TOL`].

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::choi::{choi_of_kraus, mat_to_vec, ChoiState, ZERO_OPERATOR_NORM};
use crate::ensembles::check_dim;
use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt_psd, ComplexMatrix, C64, DEFAULT_TOL};

pub const COMPLETENESS_TOL: f64 = 1e-9;

/// Redraws allowed when a random draw is not normalizable.
const MAX_DRAW_ATTEMPTS: u64 = 8;

/// Slack accepted on the `g` and `p` domain boundaries before clamping.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct GeneralizedMeasurement {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
    descriptor: String,
}

impl GeneralizedMeasurement {
    /// Validates a Kraus set: nonempty, square, uniform, nonzero, complete.
    pub fn from_kraus(ops: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let first = ops.first().ok_or(Error::EmptyKraus)?;
        let n = first.rows();
        for (r, k) in ops.iter().enumerate() {
            if k.rows() != n || k.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "Kraus operator {r} is {}x{}, expected {n}x{n}",
                    k.rows(),
                    k.cols()
                )));
            }
            if k.frobenius_norm() < ZERO_OPERATOR_NORM {
                return Err(Error::ZeroOperator(r));
            }
        }
        let residual = completeness_residual(&ops);
        if residual > tol {
            return Err(Error::Incomplete(residual));
        }
        let descriptor = format!("kraus(n={n},k={})", ops.len());
        Ok(Self {
            dim: n,
            kraus: ops,
            descriptor,
        })
    }

    /// Skips validation. Only for exercising failure paths of the verifier.
    #[doc(hidden)]
    pub fn from_kraus_unchecked(ops: Vec<ComplexMatrix>, descriptor: impl Into<String>) -> Self {
        Self {
            dim: ops[0].rows(),
            kraus: ops,
            descriptor: descriptor.into(),
        }
    }

    pub fn with_descriptor(mut self, descriptor: impl Into<String>) -> Self {
        self.descriptor = descriptor.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn outcomes(&self) -> usize {
        self.kraus.len()
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn choi(&self) -> Result<ChoiState> {
        choi_of_kraus(&self.kraus)
    }

    /// `max |Σ_r Â_r†Â_r - Id|`
    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(&self.kraus)
    }

    /// `||v||²` for the stacked coefficient vector `v = (A_ijr)`; equals `n` for a complete set.
    pub fn coefficient_norm_sqr(&self) -> f64 {
        self.kraus.iter().map(|k| mat_to_vec(k).norm_sqr()).sum()
    }

    /// `Σ_r Â_r†Â_r`
    pub fn effect_sum(&self) -> ComplexMatrix {
        effect_sum(&self.kraus)
    }
}

fn effect_sum(ops: &[ComplexMatrix]) -> ComplexMatrix {
    let n = ops[0].cols();
    ops.iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, k| &acc + &(&k.adjoint() * k))
}

fn completeness_residual(ops: &[ComplexMatrix]) -> f64 {
    let n = ops[0].cols();
    effect_sum(ops).max_abs_diff(&ComplexMatrix::identity(n))
}

/// Drops operators with negligible norm, keeping at least one.
fn prune_zero_operators(ops: Vec<ComplexMatrix>, what: &str) -> Vec<ComplexMatrix> {
    let before = ops.len();
    let kept: Vec<_> = ops
        .into_iter()
        .filter(|k| k.frobenius_norm() >= ZERO_OPERATOR_NORM)
        .collect();
    if kept.len() < before {
        log::debug!("{what}: dropped {} zero Kraus operator(s)", before - kept.len());
    }
    kept
}

fn check_unit_interval(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if !value.is_finite() || value < lo - DOMAIN_SLACK || value > hi + DOMAIN_SLACK {
        return Err(Error::OutOfDomain { name, value, lo, hi });
    }
    Ok(value.clamp(lo, hi))
}

/// `Â_r = √g |r><r| + √((1-g)/(n-1)) (Id - |r><r|)`, for `1/n <= g <= 1`.
pub fn optimal_attack(n: usize, g: f64) -> Result<GeneralizedMeasurement> {
    check_dim(n)?;
    let g = check_unit_interval("g", g, 1.0 / n as f64, 1.0)?;
    let on = g.sqrt();
    let off = ((1.0 - g) / (n - 1) as f64).sqrt();
    let ops = (0..n)
        .map(|r| {
            let diag: Vec<f64> = (0..n).map(|j| if j == r { on } else { off }).collect();
            ComplexMatrix::from_real_diag(&diag)
        })
        .collect();
    Ok(GeneralizedMeasurement::from_kraus(ops, COMPLETENESS_TOL)?
        .with_descriptor(AttackSpec::Optimal { n, g }.to_string()))
}

/// `{|r><r|}`
pub fn projective_attack(n: usize) -> Result<GeneralizedMeasurement> {
    check_dim(n)?;
    let ops = (0..n)
        .map(|r| {
            let mut m = ComplexMatrix::zeros(n, n);
            m[(r, r)] = C64::new(1.0, 0.0);
            m
        })
        .collect();
    Ok(GeneralizedMeasurement::from_kraus(ops, COMPLETENESS_TOL)?
        .with_descriptor(AttackSpec::Projective { n }.to_string()))
}

/// `{Id}`, the measurement that does nothing.
pub fn identity_attack(n: usize) -> Result<GeneralizedMeasurement> {
    check_dim(n)?;
    Ok(
        GeneralizedMeasurement::from_kraus(vec![ComplexMatrix::identity(n)], COMPLETENESS_TOL)?
            .with_descriptor(AttackSpec::Identity { n }.to_string()),
    )
}

/// Measure `{|r><r|}` with probability `p`, otherwise leave the state alone.
pub fn probabilistic_attack(n: usize, p: f64) -> Result<GeneralizedMeasurement> {
    check_dim(n)?;
    let p = check_unit_interval("p", p, 0.0, 1.0)?;
    let sp = p.sqrt();
    let mut ops: Vec<_> = (0..n)
        .map(|r| {
            let mut m = ComplexMatrix::zeros(n, n);
            m[(r, r)] = C64::new(sp, 0.0);
            m
        })
        .collect();
    ops.push(ComplexMatrix::identity(n).scale_real((1.0 - p).sqrt()));
    let ops = prune_zero_operators(ops, "probabilistic attack");
    Ok(GeneralizedMeasurement::from_kraus(ops, COMPLETENESS_TOL)?
        .with_descriptor(AttackSpec::Probabilistic { n, p }.to_string()))
}

/// `K` Kraus operators `B_r S^{-1/2}` with `B_r` complex Gaussian and `S = Σ B_r†B_r`.
///
/// The draw for attempt `a` uses ChaCha8 seeded with `seed`, stream `a`.
pub fn random_attack(n: usize, outcomes: usize, seed: u64) -> Result<GeneralizedMeasurement> {
    check_dim(n)?;
    if outcomes == 0 {
        return Err(Error::InvalidArgument("random attack needs at least one outcome".into()));
    }
    for attempt in 0..MAX_DRAW_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let draws: Vec<ComplexMatrix> = (0..outcomes)
            .map(|_| {
                ComplexMatrix::from_fn(n, n, |_, _| {
                    C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
                })
            })
            .collect();
        let s = effect_sum(&draws);
        let whiten = match inv_sqrt_psd(&s, DEFAULT_TOL) {
            Ok(w) => w,
            Err(e) => {
                log::debug!("random attack seed {seed} attempt {attempt}: {e}, redrawing");
                continue;
            }
        };
        let ops: Vec<_> = draws.iter().map(|b| b * &whiten).collect();
        let ops = prune_zero_operators(ops, "random attack");
        match GeneralizedMeasurement::from_kraus(ops, COMPLETENESS_TOL) {
            Ok(m) => {
                return Ok(m.with_descriptor(
                    AttackSpec::Random {
                        n,
                        k: outcomes,
                        seed,
                    }
                    .to_string(),
                ))
            }
            Err(e) => log::debug!("random attack seed {seed} attempt {attempt}: {e}, redrawing"),
        }
    }
    Err(Error::RedrawExhausted(MAX_DRAW_ATTEMPTS as usize))
}

/// Diagonal Kraus operators; `coeffs[r][j]` is the `j`-th diagonal entry of `Â_r`.
pub fn diagonal_attack(coeffs: &[Vec<C64>]) -> Result<GeneralizedMeasurement> {
    let n = coeffs.first().ok_or(Error::EmptyKraus)?.len();
    if n == 0 {
        return Err(Error::BadDimension(0));
    }
    if let Some(r) = coeffs.iter().position(|c| c.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "outcome {r} has {} diagonal entries, expected {n}",
            coeffs[r].len()
        )));
    }
    let norm: f64 = coeffs.iter().flatten().map(|a| a.norm_sqr()).sum();
    if (norm - n as f64).abs() > COMPLETENESS_TOL {
        return Err(Error::Incomplete((norm - n as f64).abs()));
    }
    let ops = coeffs.iter().map(|c| ComplexMatrix::from_diag(c)).collect();
    let ops = prune_zero_operators(ops, "diagonal attack");
    if ops.is_empty() {
        return Err(Error::EmptyKraus);
    }
    let k = ops.len();
    Ok(GeneralizedMeasurement::from_kraus(ops, COMPLETENESS_TOL)?
        .with_descriptor(format!("diagonal(n={n},k={k})")))
}

/// Real diagonal coefficients, `coeffs[r][j]`.
pub fn diagonal_attack_real(coeffs: &[Vec<f64>]) -> Result<GeneralizedMeasurement> {
    let c: Vec<Vec<C64>> = coeffs
        .iter()
        .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
        .collect();
    diagonal_attack(&c)
}

/// Text form of the attack families, e.g. `optimal(n=4,g=0.5)` or
/// `random(n=4,k=16,seed=42)`.
#[derive(Clone, Debug, PartialEq)]
pub enum AttackSpec {
    Optimal { n: usize, g: f64 },
    Projective { n: usize },
    Identity { n: usize },
    Probabilistic { n: usize, p: f64 },
    Random { n: usize, k: usize, seed: u64 },
}

impl AttackSpec {
    pub fn dim(&self) -> usize {
        match *self {
            AttackSpec::Optimal { n, .. }
            | AttackSpec::Projective { n }
            | AttackSpec::Identity { n }
            | AttackSpec::Probabilistic { n, .. }
            | AttackSpec::Random { n, .. } => n,
        }
    }

    pub fn build(&self) -> Result<GeneralizedMeasurement> {
        match *self {
            AttackSpec::Optimal { n, g } => optimal_attack(n, g),
            AttackSpec::Projective { n } => projective_attack(n),
            AttackSpec::Identity { n } => identity_attack(n),
            AttackSpec::Probabilistic { n, p } => probabilistic_attack(n, p),
            AttackSpec::Random { n, k, seed } => random_attack(n, k, seed),
        }
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackSpec::Optimal { n, g } => write!(f, "optimal(n={n},g={g})"),
            AttackSpec::Projective { n } => write!(f, "projective(n={n})"),
            AttackSpec::Identity { n } => write!(f, "identity(n={n})"),
            AttackSpec::Probabilistic { n, p } => write!(f, "prob(n={n},p={p})"),
            AttackSpec::Random { n, k, seed } => write!(f, "random(n={n},k={k},seed={seed})"),
        }
    }
}

impl FromStr for AttackSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let fail = |reason: String| Error::Parse {
            input: input.to_string(),
            reason,
        };
        let s = input.trim();
        let open = s.find('(').ok_or_else(|| fail("expected `name(key=value,...)`".into()))?;
        let body = s[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| fail("missing closing `)`".into()))?;
        let name = s[..open].trim();

        let mut args: Vec<(&str, &str)> = Vec::new();
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| fail(format!("argument `{part}` is not `key=value`")))?;
            let k = k.trim();
            if args.iter().any(|(seen, _)| *seen == k) {
                return Err(fail(format!("duplicate argument `{k}`")));
            }
            args.push((k, v.trim()));
        }
        let allowed: &[&str] = match name {
            "optimal" => &["n", "g"],
            "projective" | "identity" => &["n"],
            "prob" => &["n", "p"],
            "random" => &["n", "k", "seed"],
            other => return Err(fail(format!("unknown attack family `{other}`"))),
        };
        if let Some((k, _)) = args.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(fail(format!("unexpected argument `{k}` for `{name}`")));
        }
        let get = |key: &str| args.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        let req = |key: &str| get(key).ok_or_else(|| fail(format!("missing argument `{key}`")));
        let int = |key: &str, v: &str| {
            v.parse::<u64>()
                .map_err(|_| fail(format!("`{key}` must be a nonnegative integer, got `{v}`")))
        };
        let real = |key: &str, v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| fail(format!("`{key}` must be a finite number, got `{v}`")))
        };

        let n = int("n", req("n")?)? as usize;
        Ok(match name {
            "optimal" => AttackSpec::Optimal {
                n,
                g: real("g", req("g")?)?,
            },
            "projective" => AttackSpec::Projective { n },
            "identity" => AttackSpec::Identity { n },
            "prob" => AttackSpec::Probabilistic {
                n,
                p: real("p", req("p")?)?,
            },
            _ => AttackSpec::Random {
                n,
                k: match get("k") {
                    Some(v) => int("k", v)? as usize,
                    None => n * n,
                },
                seed: int("seed", req("seed")?)?,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexVector;

    fn assert_same_ops(a: &GeneralizedMeasurement, b: &GeneralizedMeasurement, tol: f64) {
        assert_eq!(a.outcomes(), b.outcomes());
        for (x, y) in a.kraus().iter().zip(b.kraus()) {
            assert!(x.max_abs_diff(y) <= tol);
        }
    }

    #[test]
    fn from_kraus_validation() {
        let m = GeneralizedMeasurement::from_kraus(vec![ComplexMatrix::identity(3)], 1e-9).unwrap();
        assert_eq!(m.outcomes(), 1);
        let p0 = ComplexMatrix::projector(&ComplexVector::basis(2, 0));
        assert!(matches!(
            GeneralizedMeasurement::from_kraus(vec![p0.clone()], 1e-9),
            Err(Error::Incomplete(_))
        ));
        assert!(matches!(
            GeneralizedMeasurement::from_kraus(vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)], 1e-9),
            Err(Error::ZeroOperator(1))
        ));
        assert!(matches!(GeneralizedMeasurement::from_kraus(vec![], 1e-9), Err(Error::EmptyKraus)));
        let proj: Vec<_> = (0..4)
            .map(|r| ComplexMatrix::projector(&ComplexVector::basis(4, r)))
            .collect();
        let m = GeneralizedMeasurement::from_kraus(proj, 1e-9).unwrap();
        assert!((m.coefficient_norm_sqr() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_endpoints() {
        for n in [2, 3, 5] {
            assert_same_ops(&optimal_attack(n, 1.0).unwrap(), &projective_attack(n).unwrap(), 0.0);
            let lazy = optimal_attack(n, 1.0 / n as f64).unwrap();
            let target = ComplexMatrix::identity(n).scale_real(1.0 / (n as f64).sqrt());
            for k in lazy.kraus() {
                assert!(k.max_abs_diff(&target) < 1e-15);
            }
        }
    }

    #[test]
    fn optimal_family_entries() {
        let m = optimal_attack(4, 0.5).unwrap();
        let d = m.kraus()[0].diagonal();
        let expect = [0.5f64.sqrt(), (1.0f64 / 6.0).sqrt(), (1.0f64 / 6.0).sqrt(), (1.0f64 / 6.0).sqrt()];
        for (a, b) in d.iter().zip(expect) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }
        assert!(m.kraus()[0].is_diagonal(0.0));
        assert_eq!(m.descriptor(), "optimal(n=4,g=0.5)");
    }

    #[test]
    fn optimal_rejects_domain() {
        assert!(matches!(optimal_attack(3, 0.1), Err(Error::OutOfDomain { name: "g", .. })));
        assert!(optimal_attack(3, 1.01).is_err());
        assert!(optimal_attack(3, f64::NAN).is_err());
        assert!(matches!(optimal_attack(1, 1.0), Err(Error::BadDimension(1))));
    }

    #[test]
    fn named_families() {
        assert_eq!(projective_attack(3).unwrap().outcomes(), 3);
        assert_eq!(identity_attack(5).unwrap().outcomes(), 1);
        assert_same_ops(&probabilistic_attack(3, 0.0).unwrap(), &identity_attack(3).unwrap(), 0.0);
        assert_same_ops(&probabilistic_attack(3, 1.0).unwrap(), &projective_attack(3).unwrap(), 0.0);
        assert_eq!(probabilistic_attack(3, 0.3).unwrap().outcomes(), 4);
        assert!(probabilistic_attack(3, -0.1).is_err());
        assert!(probabilistic_attack(3, 1.5).is_err());
    }

    #[test]
    fn random_is_valid_and_deterministic() {
        for seed in 0..20 {
            let a = random_attack(3, 5, seed).unwrap();
            assert!(a.completeness_residual() < 1e-9);
            assert!((a.coefficient_norm_sqr() - 3.0).abs() < 1e-8);
            let b = random_attack(3, 5, seed).unwrap();
            for (x, y) in a.kraus().iter().zip(b.kraus()) {
                assert_eq!(x.entries(), y.entries());
            }
        }
        let single = random_attack(2, 1, 4).unwrap();
        // one outcome: a unitary
        assert!(single.completeness_residual() < 1e-9);
        assert!(random_attack(2, 0, 1).is_err());
        assert_ne!(
            random_attack(2, 4, 1).unwrap().kraus()[0].entries(),
            random_attack(2, 4, 2).unwrap().kraus()[0].entries()
        );
    }

    #[test]
    fn diagonal_constructor() {
        let n = 3;
        let proj: Vec<Vec<f64>> = (0..n)
            .map(|r| (0..n).map(|j| if j == r { 1.0 } else { 0.0 }).collect())
            .collect();
        assert_same_ops(&diagonal_attack_real(&proj).unwrap(), &projective_attack(n).unwrap(), 0.0);
        assert_same_ops(
            &diagonal_attack_real(&[vec![1.0; n]]).unwrap(),
            &identity_attack(n).unwrap(),
            0.0,
        );

        // lambda delta_jr + mu' reproduces the optimal family
        let (n, g) = (4usize, 0.7);
        let mu = ((1.0 - g) / (n - 1) as f64).sqrt();
        let lambda = g.sqrt() - mu;
        let coeffs: Vec<Vec<f64>> = (0..n)
            .map(|r| (0..n).map(|j| if j == r { lambda + mu } else { mu }).collect())
            .collect();
        assert_same_ops(&diagonal_attack_real(&coeffs).unwrap(), &optimal_attack(n, g).unwrap(), 1e-15);

        assert!(matches!(
            diagonal_attack_real(&[vec![1.0, 0.5]]),
            Err(Error::Incomplete(_))
        ));
        // right norm, wrong distribution over j
        assert!(matches!(
            diagonal_attack_real(&[vec![2f64.sqrt(), 0.0]]),
            Err(Error::Incomplete(_))
        ));
        assert!(diagonal_attack_real(&[vec![1.0, 1.0], vec![1.0]]).is_err());
        // zero outcome is dropped
        let m = diagonal_attack_real(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(m.outcomes(), 1);
    }

    #[test]
    fn descriptors_roundtrip() {
        let specs = [
            AttackSpec::Optimal { n: 4, g: 0.5 },
            AttackSpec::Projective { n: 4 },
            AttackSpec::Identity { n: 4 },
            AttackSpec::Probabilistic { n: 4, p: 0.3 },
            AttackSpec::Random { n: 4, k: 16, seed: 42 },
        ];
        let text = [
            "optimal(n=4,g=0.5)",
            "projective(n=4)",
            "identity(n=4)",
            "prob(n=4,p=0.3)",
            "random(n=4,k=16,seed=42)",
        ];
        for (s, t) in specs.iter().zip(text) {
            assert_eq!(s.to_string(), t);
            assert_eq!(&t.parse::<AttackSpec>().unwrap(), s);
        }
        assert_eq!(
            " random( n = 3 , seed=7 ) ".parse::<AttackSpec>().unwrap(),
            AttackSpec::Random { n: 3, k: 9, seed: 7 }
        );
    }

    #[test]
    fn descriptor_errors() {
        for bad in [
            "optimal",
            "optimal(n=4",
            "optimal(n=4)",
            "optimal(n=4,g=abc)",
            "optimal(n=4,g=0.5,p=1)",
            "teleport(n=2)",
            "identity(n=-1)",
            "identity(n=2,n=3)",
            "prob(n=2,p)",
            "random(n=2,k=4)",
            "prob(n=2,p=inf)",
        ] {
            assert!(matches!(bad.parse::<AttackSpec>(), Err(Error::Parse { .. })), "{bad}");
        }
    }

    #[test]
    fn spec_builds_matching_attack() {
        let m: GeneralizedMeasurement = "prob(n=2,p=0.5)".parse::<AttackSpec>().unwrap().build().unwrap();
        assert_eq!(m.descriptor(), "prob(n=2,p=0.5)");
        assert_eq!(m.outcomes(), 3);
    }
}
