//! The lower bound on Bob's detection probability as a function of Eve's
//! estimation fidelity,
//!
//! ```text
//! D >= 1/2 - (1/2n) (√G + √((n-1)(1-G)))²,    1/n <= G <= 1,
//! ```
//!
//! together with the tools that check it: saturation by the optimal family,
//! random sweeps, and a numerical search for the least disturbing diagonal
//! attack at fixed `G`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::attacks::{diagonal_attack_real, optimal_attack, random_attack, GeneralizedMeasurement};
use crate::ensembles::check_dim;
use crate::error::{Error, Result};
use crate::metrics::{estimation_fidelity_functional, induced_fidelity_functional};

/// Margins below this are float noise, not counterexamples.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Margins below this can only come from a bug and abort evaluation.
pub const ABORT_MARGIN: f64 = -1e-6;

/// Slack on the `G` domain when evaluating measured points.
const G_SLACK: f64 = 1e-9;

pub fn disturbance_bound(g: f64, n: usize) -> Result<f64> {
    check_dim(n)?;
    let lo = 1.0 / n as f64;
    if !g.is_finite() || g < lo - 1e-12 || g > 1.0 + 1e-12 {
        return Err(Error::OutOfDomain {
            name: "g",
            value: g,
            lo,
            hi: 1.0,
        });
    }
    Ok(bound_unchecked(g.clamp(lo, 1.0), n))
}

fn bound_unchecked(g: f64, n: usize) -> f64 {
    let nf = n as f64;
    let s = g.sqrt() + ((nf - 1.0) * (1.0 - g)).sqrt();
    // closed-form endpoints: the radicals do not cancel exactly in floating point
    if g == 1.0 / nf {
        return 0.0;
    }
    if g == 1.0 {
        return 0.5 - 0.5 / nf;
    }
    0.5 - s * s / (2.0 * nf)
}

/// A measured `(G, D)` pair and its distance above the bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub n: usize,
    pub g: f64,
    pub d: f64,
    pub bound: f64,
    pub margin: f64,
    pub source: String,
}

impl TradeoffPoint {
    pub fn from_values(n: usize, g: f64, d: f64, source: impl Into<String>) -> Result<Self> {
        let lo = 1.0 / n as f64;
        if !(lo - G_SLACK..=1.0 + G_SLACK).contains(&g) {
            return Err(Error::OutOfDomain {
                name: "G",
                value: g,
                lo,
                hi: 1.0,
            });
        }
        let bound = disturbance_bound(g.clamp(lo, 1.0), n)?;
        Ok(Self {
            n,
            g,
            d,
            bound,
            margin: d - bound,
            source: source.into(),
        })
    }

    pub fn is_violation(&self) -> bool {
        self.margin < -VIOLATION_TOL
    }
}

/// `(G, D)` through the `€` and `£` functionals.
///
/// A margin below [`ABORT_MARGIN`] is returned as [`Error::BoundViolation`].
pub fn evaluate_point(m: &GeneralizedMeasurement) -> Result<TradeoffPoint> {
    let g = estimation_fidelity_functional(m);
    let d = 1.0 - induced_fidelity_functional(m);
    let point = TradeoffPoint::from_values(m.dim(), g, d, m.descriptor())?;
    if point.margin < ABORT_MARGIN {
        log::error!(
            "bound violated: {} has G={} D={} below bound {} by {:.3e}",
            point.source,
            point.g,
            point.d,
            point.bound,
            -point.margin
        );
        return Err(Error::BoundViolation {
            margin: point.margin,
            source_tag: point.source,
        });
    }
    Ok(point)
}

/// `|D(optimal_attack(n, g)) - bound(g)|`
pub fn saturation_gap(n: usize, g: f64) -> Result<f64> {
    let m = optimal_attack(n, g)?;
    let d = 1.0 - induced_fidelity_functional(&m);
    Ok((d - disturbance_bound(g, n)?).abs())
}

/// `count` points evenly spaced over `[1/n, 1]`, endpoints exact.
pub fn g_grid(n: usize, count: usize) -> Vec<f64> {
    let lo = 1.0 / n as f64;
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| {
                if i == count - 1 {
                    1.0
                } else {
                    lo + (1.0 - lo) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// Seed of the `index`-th independent substream derived from `seed`.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub points: Vec<TradeoffPoint>,
    /// Smallest margin seen; `+inf` for an empty sweep.
    pub min_margin: f64,
}

impl SweepReport {
    pub fn worst(&self) -> Option<&TradeoffPoint> {
        self.points.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    pub fn violations(&self) -> impl Iterator<Item = &TradeoffPoint> {
        self.points.iter().filter(|p| p.is_violation())
    }
}

/// Random attack `t` uses seed `substream_seed(seed, t)`.
pub fn sweep_random(n: usize, trials: usize, outcomes: usize, seed: u64) -> Result<SweepReport> {
    check_dim(n)?;
    let mut points = Vec::with_capacity(trials);
    for t in 0..trials {
        let m = random_attack(n, outcomes, substream_seed(seed, t as u64))?;
        points.push(evaluate_point(&m)?);
    }
    let min_margin = points.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
    Ok(SweepReport { points, min_margin })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimizeConfig {
    pub restarts: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            iters: 2000,
            seed: 0,
        }
    }
}

/// Nonnegative diagonal coefficients `a[r][j]` with `Σ_r a[r][j]² = 1` per `j`.
#[derive(Clone, Debug)]
struct Coefficients {
    n: usize,
    a: Vec<f64>,
}

impl Coefficients {
    fn uniform(n: usize) -> Self {
        Self {
            n,
            a: vec![1.0 / (n as f64).sqrt(); n * n],
        }
    }

    fn projective(n: usize) -> Self {
        let mut a = vec![0.0; n * n];
        for r in 0..n {
            a[r * n + r] = 1.0;
        }
        Self { n, a }
    }

    fn random(n: usize, rng: &mut impl Rng) -> Self {
        let a = (0..n * n).map(|_| rng.random::<f64>()).collect();
        let mut c = Self { n, a };
        c.normalize_columns();
        c
    }

    fn normalize_columns(&mut self) {
        let n = self.n;
        for j in 0..n {
            let norm = (0..n).map(|r| self.a[r * n + j].powi(2)).sum::<f64>().sqrt();
            if norm > 0.0 {
                for r in 0..n {
                    self.a[r * n + j] /= norm;
                }
            } else {
                for r in 0..n {
                    self.a[r * n + j] = 1.0 / (n as f64).sqrt();
                }
            }
        }
    }

    fn mix(&self, other: &Self, t: f64) -> Self {
        let a = self
            .a
            .iter()
            .zip(&other.a)
            .map(|(x, y)| (1.0 - t) * x + t * y)
            .collect();
        let mut c = Self { n: self.n, a };
        c.normalize_columns();
        c
    }

    /// `G = (1/n) Σ_r max_j a[r][j]²`
    fn estimation(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|r| self.a[r * n..(r + 1) * n].iter().map(|x| x * x).fold(0.0, f64::max))
            .sum::<f64>()
            / n as f64
    }

    /// `f = Σ_r (Σ_j a[r][j])²`
    fn spectral_f(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|r| self.a[r * n..(r + 1) * n].iter().sum::<f64>().powi(2))
            .sum()
    }

    /// Moves onto `{G >= g_target}` close to equality by bisecting along the
    /// segment to the uniform point (`G = 1/n`) or the projective point (`G = 1`).
    fn pin_estimation(&self, g_target: f64) -> Self {
        // Every feasible point at G = 1 is projective and every one at G = 1/n
        // has f = n², so snap; the bound is infinitely steep at G = 1 and a
        // rounded mix would land ~1e-9 below it.
        if g_target >= 1.0 {
            return Coefficients::projective(self.n);
        }
        if g_target <= 1.0 / self.n as f64 {
            return Coefficients::uniform(self.n);
        }
        let g = self.estimation();
        if g == g_target {
            return self.clone();
        }
        // t = lo has G < g_target, t = hi has G >= g_target
        let (from, to, mut lo, mut hi) = if g > g_target {
            (Coefficients::uniform(self.n), self.clone(), 0.0, 1.0)
        } else {
            (self.clone(), Coefficients::projective(self.n), 0.0, 1.0)
        };
        if from.estimation() >= g_target {
            return from;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if from.mix(&to, mid).estimation() >= g_target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        from.mix(&to, hi)
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.a.chunks(self.n).map(<[f64]>::to_vec).collect()
    }
}

/// Searches diagonal attacks with `n` outcomes for the smallest disturbance
/// `D = 1/2 - f/(2n²)` at estimation fidelity `g_target`.
///
/// Each restart is a (1+1) evolution strategy: Gaussian steps on the
/// coefficients, column renormalization, then re-pinning `G`; a step is kept
/// when it raises `f`. The returned point is measured on the built attack.
pub fn optimize_attack(
    n: usize,
    g_target: f64,
    config: OptimizeConfig,
) -> Result<(TradeoffPoint, GeneralizedMeasurement)> {
    check_dim(n)?;
    let lo = 1.0 / n as f64;
    if !g_target.is_finite() || g_target < lo - 1e-12 || g_target > 1.0 + 1e-12 {
        return Err(Error::OutOfDomain {
            name: "g",
            value: g_target,
            lo,
            hi: 1.0,
        });
    }
    let g_target = g_target.clamp(lo, 1.0);
    if config.restarts == 0 {
        return Err(Error::InvalidArgument("optimizer needs at least one restart".into()));
    }

    let mut best: Option<(f64, Coefficients)> = None;
    for restart in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(restart as u64);
        let mut current = Coefficients::random(n, &mut rng).pin_estimation(g_target);
        let mut value = current.spectral_f();
        let mut step = 0.3;
        for _ in 0..config.iters {
            let mut cand = current.clone();
            for x in cand.a.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *x = (*x + step * z).abs();
            }
            cand.normalize_columns();
            let cand = cand.pin_estimation(g_target);
            let v = cand.spectral_f();
            if v > value {
                current = cand;
                value = v;
                step = (step * 1.5).min(1.0);
            } else {
                step = (step * 0.92).max(1e-7);
            }
        }
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, current));
        }
    }

    let (_, coeffs) = best.expect("at least one restart");
    let attack = diagonal_attack_real(&coeffs.rows())?.with_descriptor(format!(
        "optimized(n={n},g={g_target},restarts={},iters={},seed={})",
        config.restarts, config.iters, config.seed
    ));
    let point = evaluate_point(&attack)?;
    Ok((point, attack))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::{probabilistic_attack, projective_attack, identity_attack};

    #[test]
    fn bound_endpoints_and_value() {
        for n in 2..=50 {
            let nf = n as f64;
            assert_eq!(disturbance_bound(1.0 / nf, n).unwrap(), 0.0);
            assert!((disturbance_bound(1.0, n).unwrap() - (0.5 - 0.5 / nf)).abs() <= 1e-12);
        }
        assert_eq!(disturbance_bound(1.0, 4).unwrap(), 0.375);
        let direct = 0.5 - (0.75f64.sqrt() + 0.25f64.sqrt()).powi(2) / 4.0;
        let got = disturbance_bound(0.75, 2).unwrap();
        assert!((got - direct).abs() < 1e-15);
        assert!((got - 0.033_493_649_053_890_3).abs() < 1e-12);
    }

    #[test]
    fn bound_domain() {
        assert!(disturbance_bound(0.1, 3).is_err());
        assert!(disturbance_bound(1.1, 3).is_err());
        assert!(disturbance_bound(f64::NAN, 3).is_err());
        assert!(matches!(disturbance_bound(0.5, 1), Err(Error::BadDimension(1))));
    }

    #[test]
    fn bound_monotone() {
        for n in 2..=16 {
            let grid = g_grid(n, 101);
            let vals: Vec<f64> = grid.iter().map(|&g| disturbance_bound(g, n).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] >= w[0]), "n = {n}");
        }
    }

    #[test]
    fn grid_shape() {
        let g = g_grid(4, 5);
        assert_eq!(g, vec![0.25, 0.4375, 0.625, 0.8125, 1.0]);
        assert_eq!(g_grid(50, 2), vec![0.02, 1.0]);
    }

    #[test]
    fn saturation_examples() {
        assert!(saturation_gap(2, 1.0).unwrap() <= 1e-12);
        assert!(saturation_gap(10, 0.1).unwrap() <= 1e-12);
        assert!(saturation_gap(4, 0.6).unwrap() <= 1e-9);
        assert!(saturation_gap(4, 0.1).is_err());
    }

    #[test]
    fn named_points() {
        let p = evaluate_point(&probabilistic_attack(2, 0.5).unwrap()).unwrap();
        assert!((p.g - 0.75).abs() < 1e-12);
        assert!((p.d - 0.125).abs() < 1e-12);
        assert!((p.margin - (0.125 - 0.033_493_649_053_890_3)).abs() < 1e-12);
        let p = evaluate_point(&identity_attack(3).unwrap()).unwrap();
        assert!(p.d.abs() < 1e-12 && p.margin.abs() < 1e-12);
        let p = evaluate_point(&projective_attack(3).unwrap()).unwrap();
        assert!(p.margin.abs() < 1e-12);
    }

    #[test]
    fn broken_attack_aborts() {
        // twice the projective set: G = 2, far outside the domain
        let ops: Vec<_> = projective_attack(2)
            .unwrap()
            .kraus()
            .iter()
            .map(|k| k.scale_real(2f64.sqrt()))
            .collect();
        let m = GeneralizedMeasurement::from_kraus_unchecked(ops, "corrupt");
        assert!(evaluate_point(&m).is_err());
    }

    #[test]
    fn sweep_small() {
        let r = sweep_random(2, 200, 4, 7).unwrap();
        assert_eq!(r.points.len(), 200);
        assert!(r.min_margin >= -VIOLATION_TOL);
        assert_eq!(r.violations().count(), 0);
        let again = sweep_random(2, 200, 4, 7).unwrap();
        assert_eq!(r.points, again.points);
        let empty = sweep_random(3, 0, 9, 1).unwrap();
        assert!(empty.min_margin.is_infinite() && empty.worst().is_none());
    }

    #[test]
    fn pin_estimation_hits_target_from_above_and_below() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 2..6 {
            for &g in &[1.0 / n as f64, 0.55, 0.8, 1.0] {
                let c = Coefficients::random(n, &mut rng).pin_estimation(g);
                let got = c.estimation();
                if g == 1.0 / n as f64 || g == 1.0 {
                    // snapped onto the endpoint; equal up to rounding
                    assert!((got - g).abs() < 1e-15, "n={n} g={g} got={got}");
                } else {
                    assert!(got >= g && got - g < 1e-12, "n={n} g={g} got={got}");
                }
                for j in 0..n {
                    let s: f64 = (0..n).map(|r| c.a[r * n + j].powi(2)).sum();
                    assert!((s - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn optimizer_endpoint_and_interior() {
        let cfg = OptimizeConfig {
            restarts: 4,
            iters: 600,
            seed: 5,
        };
        let (p, m) = optimize_attack(3, 1.0 / 3.0, cfg).unwrap();
        assert!(p.d.abs() < 5e-4 && p.margin >= -VIOLATION_TOL);
        assert_eq!(m.outcomes(), 3);
        let (p, _) = optimize_attack(2, 0.75, cfg).unwrap();
        let b = disturbance_bound(0.75, 2).unwrap();
        assert!(p.d >= b - 1e-9 && p.d <= b + 5e-4, "d = {}", p.d);
        assert!(optimize_attack(3, 0.1, cfg).is_err());
    }
}
