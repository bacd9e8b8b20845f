//! Monte Carlo simulation of the decoy protocol.
//!
//! Each trial Alice sends either a message word `|j>` or, with probability
//! `decoy_fraction`, a decoy `(|j> + i|k>)/√2`. Eve applies her measurement,
//! guesses `j_(r)` from her outcome and forwards the post-measurement state.
//! On decoy trials Bob projects onto the decoy and flags tampering when the
//! projection fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attacks::GeneralizedMeasurement;
use crate::ensembles::{check_dim, decoy_ket};
use crate::error::{Error, Result};
use crate::linalg::{ComplexVector, C64, ZERO};
use crate::metrics::{estimation_fidelity, induced_fidelity_functional, GuessTable};

/// Trials per independently seeded block.
pub const BLOCK_TRIALS: usize = 4096;

/// Outcome distributions must sum to one within this.
const PROBABILITY_TOL: f64 = 1e-9;

/// Estimates farther than this many standard errors from the analytic value are flagged.
pub const CONSISTENCY_SIGMAS: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub shots: usize,
    pub decoy_fraction: f64,
    pub seed: u64,
    /// Sample Bob's tamper test instead of scoring its exact conditional probability.
    pub sample_bob: bool,
}

impl SimConfig {
    pub fn new(shots: usize, seed: u64) -> Self {
        Self {
            shots,
            decoy_fraction: 0.5,
            seed,
            sample_bob: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub n: usize,
    pub shots: usize,
    pub decoy_fraction: f64,
    pub message_trials: usize,
    pub decoy_trials: usize,
    /// `None` when no message word was sent.
    pub g_hat: Option<f64>,
    pub g_se: Option<f64>,
    /// `None` when no decoy was sent.
    pub d_hat: Option<f64>,
    pub d_se: Option<f64>,
    pub g_analytic: f64,
    pub d_analytic: f64,
    pub g_consistent: bool,
    pub d_consistent: bool,
    pub seed: u64,
    pub sample_bob: bool,
    pub attack_descriptor: String,
}

impl SimReport {
    pub fn consistent(&self) -> bool {
        self.g_consistent && self.d_consistent
    }

    /// `D - bound(G)` for the estimated pair, if both were observed.
    pub fn estimated_margin(&self) -> Option<f64> {
        let (g, d) = (self.g_hat?, self.d_hat?);
        let lo = 1.0 / self.n as f64;
        crate::tradeoff::disturbance_bound(g.clamp(lo, 1.0), self.n)
            .ok()
            .map(|b| d - b)
    }

    /// Combined standard error of the estimated pair.
    pub fn combined_se(&self) -> Option<f64> {
        Some(self.g_se?.hypot(self.d_se?))
    }
}

/// Per-state outcome statistics, precomputed once per run.
struct StateTable {
    /// Cumulative outcome distribution.
    cumulative: Vec<f64>,
    /// `|<ψ|Â_r|ψ>|² / p(r)`, the probability Bob finds the decoy intact.
    intact: Vec<f64>,
}

struct TrialTables {
    n: usize,
    messages: Vec<StateTable>,
    decoys: Vec<StateTable>,
    guesses: GuessTable,
}

/// `Â_r|ψ>` for every `r`, using only the nonzero amplitudes of `ψ`.
fn branch_vectors(attack: &GeneralizedMeasurement, psi: &ComplexVector) -> Vec<ComplexVector> {
    let n = attack.dim();
    let support: Vec<(usize, C64)> = psi
        .entries()
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, a)| *a != ZERO)
        .collect();
    attack
        .kraus()
        .iter()
        .map(|k| {
            let mut v = ComplexVector::zeros(n);
            for &(s, amp) in &support {
                for i in 0..n {
                    v[i] += k[(i, s)] * amp;
                }
            }
            v
        })
        .collect()
}

fn outcome_statistics(
    attack: &GeneralizedMeasurement,
    psi: &ComplexVector,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let branches = branch_vectors(attack, psi);
    let probs: Vec<f64> = branches.iter().map(ComplexVector::norm_sqr).collect();
    let total: f64 = probs.iter().sum();
    if !total.is_finite() || (total - 1.0).abs() > PROBABILITY_TOL {
        return Err(Error::BrokenAttack(total));
    }
    let intact = branches
        .iter()
        .zip(&probs)
        .map(|(v, &p)| {
            if p > 0.0 {
                (psi.inner(v).norm_sqr() / p).min(1.0)
            } else {
                1.0
            }
        })
        .collect();
    Ok((probs, intact))
}

fn state_table(attack: &GeneralizedMeasurement, psi: &ComplexVector) -> Result<StateTable> {
    let (probs, intact) = outcome_statistics(attack, psi)?;
    let mut acc = 0.0;
    let cumulative = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    Ok(StateTable { cumulative, intact })
}

impl StateTable {
    fn sample(&self, rng: &mut impl Rng) -> usize {
        // scale by the actual total so rounding never runs off the end
        let total = *self.cumulative.last().expect("nonempty");
        let u = rng.random::<f64>() * total;
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1)
    }
}

impl TrialTables {
    fn new(attack: &GeneralizedMeasurement) -> Result<Self> {
        let n = attack.dim();
        let messages = (0..n)
            .map(|j| state_table(attack, &ComplexVector::basis(n, j)))
            .collect::<Result<_>>()?;
        let mut decoys = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                decoys.push(state_table(attack, &decoy_ket(j, k, n)?)?);
            }
        }
        Ok(Self {
            n,
            messages,
            decoys,
            guesses: GuessTable::for_measurement(attack),
        })
    }
}

fn check_inputs(n: usize, attack: &GeneralizedMeasurement) -> Result<()> {
    check_dim(n)?;
    if attack.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "attack acts on dimension {} but the channel has n = {n}",
            attack.dim()
        )));
    }
    Ok(())
}

fn binomial_se(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).max(0.0).sqrt()
}

#[derive(Default)]
struct Tally {
    messages: usize,
    guessed: usize,
    decoys: usize,
    detected: f64,
}

pub fn run_protocol(n: usize, attack: &GeneralizedMeasurement, config: SimConfig) -> Result<SimReport> {
    check_inputs(n, attack)?;
    if config.shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    if !(0.0..=1.0).contains(&config.decoy_fraction) {
        return Err(Error::OutOfDomain {
            name: "decoy_fraction",
            value: config.decoy_fraction,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let tables = TrialTables::new(attack)?;

    let mut tally = Tally::default();
    let blocks = config.shots.div_ceil(BLOCK_TRIALS);
    for b in 0..blocks {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(b as u64);
        let len = BLOCK_TRIALS.min(config.shots - b * BLOCK_TRIALS);
        for _ in 0..len {
            if rng.random::<f64>() < config.decoy_fraction {
                let idx = rng.random_range(0..tables.n * tables.n);
                let table = &tables.decoys[idx];
                let r = table.sample(&mut rng);
                tally.decoys += 1;
                let intact = table.intact[r];
                if config.sample_bob {
                    if rng.random::<f64>() >= intact {
                        tally.detected += 1.0;
                    }
                } else {
                    tally.detected += 1.0 - intact;
                }
            } else {
                let j = rng.random_range(0..tables.n);
                let r = tables.messages[j].sample(&mut rng);
                tally.messages += 1;
                if tables.guesses.guess(r) == j {
                    tally.guessed += 1;
                }
            }
        }
    }

    let (g_analytic, _) = estimation_fidelity(attack);
    let d_analytic = 1.0 - induced_fidelity_functional(attack);

    let rate = |hits: f64, trials: usize| (trials > 0).then(|| hits / trials as f64);
    let g_hat = rate(tally.guessed as f64, tally.messages);
    let d_hat = rate(tally.detected, tally.decoys);
    let g_se = g_hat.map(|p| binomial_se(p, tally.messages));
    let d_se = d_hat.map(|p| binomial_se(p, tally.decoys));
    // exact ties (e.g. D = 0 with zero variance) pass through the 1e-12 slack
    let consistent = |hat: Option<f64>, se: Option<f64>, exact: f64| match (hat, se) {
        (Some(h), Some(s)) => (h - exact).abs() <= CONSISTENCY_SIGMAS * s + 1e-12,
        _ => true,
    };
    let report = SimReport {
        n,
        shots: config.shots,
        decoy_fraction: config.decoy_fraction,
        message_trials: tally.messages,
        decoy_trials: tally.decoys,
        g_hat,
        g_se,
        d_hat,
        d_se,
        g_analytic,
        d_analytic,
        g_consistent: consistent(g_hat, g_se, g_analytic),
        d_consistent: consistent(d_hat, d_se, d_analytic),
        seed: config.seed,
        sample_bob: config.sample_bob,
        attack_descriptor: attack.descriptor().to_string(),
    };
    if !report.consistent() {
        log::warn!(
            "{}: estimates off by more than {CONSISTENCY_SIGMAS} standard errors (G {:?} vs {}, D {:?} vs {})",
            report.attack_descriptor,
            report.g_hat,
            report.g_analytic,
            report.d_hat,
            report.d_analytic
        );
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrialSpec {
    Message { j: usize },
    Decoy { j: usize, k: usize },
}

/// Everything that happened in one trial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub spec: TrialSpec,
    /// `p(r) = <ψ|Â_r†Â_r|ψ>`
    pub outcome_probabilities: Vec<f64>,
    pub outcome: usize,
    pub guess: usize,
    /// Message trials only.
    pub guess_correct: Option<bool>,
    /// Decoy trials only: probability that Bob's projection succeeds given `outcome`.
    pub bob_intact_probability: Option<f64>,
    /// Decoy trials only: sampled result of Bob's tamper test.
    pub bob_detected: Option<bool>,
}

pub fn trial_trace(
    n: usize,
    attack: &GeneralizedMeasurement,
    spec: TrialSpec,
    seed: u64,
) -> Result<TrialRecord> {
    check_inputs(n, attack)?;
    let psi = match spec {
        TrialSpec::Message { j } => {
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, dim: n });
            }
            ComplexVector::basis(n, j)
        }
        TrialSpec::Decoy { j, k } => decoy_ket(j, k, n)?,
    };
    let (probs, intact) = outcome_statistics(attack, &psi)?;
    let table = state_table(attack, &psi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome = table.sample(&mut rng);
    let guess = GuessTable::for_measurement(attack).guess(outcome);
    let (guess_correct, bob_intact_probability, bob_detected) = match spec {
        TrialSpec::Message { j } => (Some(guess == j), None, None),
        TrialSpec::Decoy { .. } => {
            let p = intact[outcome];
            (None, Some(p), Some(rng.random::<f64>() >= p))
        }
    };
    Ok(TrialRecord {
        spec,
        outcome_probabilities: probs,
        outcome,
        guess,
        guess_correct,
        bob_intact_probability,
        bob_detected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::{identity_attack, optimal_attack, projective_attack};
    use crate::linalg::ComplexMatrix;
    use crate::tradeoff::disturbance_bound;

    fn within(report: &SimReport) {
        assert!(report.g_consistent, "{report:?}");
        assert!(report.d_consistent, "{report:?}");
    }

    #[test]
    fn identity_never_detected() {
        let r = run_protocol(4, &identity_attack(4).unwrap(), SimConfig::new(100_000, 1)).unwrap();
        assert_eq!(r.d_hat, Some(0.0));
        assert!((r.g_analytic - 0.25).abs() < 1e-15);
        within(&r);
        assert!(r.g_se.unwrap() < 0.0025);
    }

    #[test]
    fn projective_converges() {
        let r = run_protocol(2, &projective_attack(2).unwrap(), SimConfig::new(100_000, 2)).unwrap();
        assert_eq!(r.g_hat, Some(1.0));
        assert!((r.d_analytic - 0.25).abs() < 1e-12);
        within(&r);
    }

    #[test]
    fn optimal_converges() {
        let r = run_protocol(4, &optimal_attack(4, 0.5).unwrap(), SimConfig::new(100_000, 9)).unwrap();
        assert!((r.d_analytic - disturbance_bound(0.5, 4).unwrap()).abs() < 1e-12);
        within(&r);
        let mut cfg = SimConfig::new(100_000, 9);
        cfg.sample_bob = true;
        within(&run_protocol(4, &optimal_attack(4, 0.5).unwrap(), cfg).unwrap());
    }

    #[test]
    fn deterministic_for_seed() {
        let m = optimal_attack(3, 0.6).unwrap();
        let a = run_protocol(3, &m, SimConfig::new(10_000, 5)).unwrap();
        let b = run_protocol(3, &m, SimConfig::new(10_000, 5)).unwrap();
        assert_eq!(a, b);
        let c = run_protocol(3, &m, SimConfig::new(10_000, 6)).unwrap();
        assert_ne!(a.g_hat, c.g_hat);
    }

    #[test]
    fn all_messages_or_all_decoys() {
        let m = projective_attack(3).unwrap();
        let mut cfg = SimConfig::new(1000, 1);
        cfg.decoy_fraction = 0.0;
        let r = run_protocol(3, &m, cfg).unwrap();
        assert_eq!((r.message_trials, r.decoy_trials), (1000, 0));
        assert_eq!(r.d_hat, None);
        cfg.decoy_fraction = 1.0;
        let r = run_protocol(3, &m, cfg).unwrap();
        assert_eq!((r.message_trials, r.decoy_trials), (0, 1000));
        assert_eq!(r.g_hat, None);
    }

    #[test]
    fn input_errors() {
        let m = identity_attack(2).unwrap();
        assert!(run_protocol(3, &m, SimConfig::new(10, 1)).is_err());
        assert!(run_protocol(2, &m, SimConfig::new(0, 1)).is_err());
        let mut cfg = SimConfig::new(10, 1);
        cfg.decoy_fraction = 1.5;
        assert!(run_protocol(2, &m, cfg).is_err());
        let broken = GeneralizedMeasurement::from_kraus_unchecked(
            vec![ComplexMatrix::identity(2).scale_real(0.5)],
            "broken",
        );
        assert!(matches!(
            run_protocol(2, &broken, SimConfig::new(10, 1)),
            Err(Error::BrokenAttack(_))
        ));
    }

    #[test]
    fn trace_identity_decoy_is_intact() {
        let m = identity_attack(2).unwrap();
        for seed in 0..10 {
            let t = trial_trace(2, &m, TrialSpec::Decoy { j: 0, k: 1 }, seed).unwrap();
            assert_eq!(t.bob_intact_probability, Some(1.0));
            assert_eq!(t.bob_detected, Some(false));
            assert!((t.outcome_probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_projective_decoy_half_intact() {
        let m = projective_attack(2).unwrap();
        let mut seen = [false; 2];
        for seed in 0..40 {
            let t = trial_trace(2, &m, TrialSpec::Decoy { j: 0, k: 1 }, seed).unwrap();
            assert!((t.outcome_probabilities[0] - 0.5).abs() < 1e-12);
            assert!((t.bob_intact_probability.unwrap() - 0.5).abs() < 1e-12);
            seen[t.outcome] = true;
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn trace_projective_message_always_guessed() {
        let m = projective_attack(4).unwrap();
        for j in 0..4 {
            let t = trial_trace(4, &m, TrialSpec::Message { j }, 3).unwrap();
            assert_eq!(t.outcome, j);
            assert_eq!(t.guess_correct, Some(true));
            assert_eq!(t.outcome_probabilities[j], 1.0);
        }
        assert!(trial_trace(4, &m, TrialSpec::Message { j: 4 }, 3).is_err());
        assert!(trial_trace(4, &m, TrialSpec::Decoy { j: 0, k: 9 }, 3).is_err());
    }
}
