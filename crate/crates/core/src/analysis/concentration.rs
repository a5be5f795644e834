//! Monte-Carlo check of the self-normalized concentration bound
//! `P(exists t <= n : |S_t| >= sqrt(2 N_t ln(c sqrt(N_t) / delta)), N_t > 0) <= delta`
//! for `X_t ∈ {-1, 0, 1}`, `S_t = sum (X_s - mu_s |X_s|)`, `N_t = sum |X_s|`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::binomial_ci;
use crate::error::{Error, Result};
use crate::rng::{trial_stream, with_pool};
use crate::toprank::{confidence_constant, edge_threshold};

/// Law of one increment: `P(X = 1)` and `P(X = -1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Increment {
    pub up: f64,
    pub down: f64,
}

impl Increment {
    pub fn new(up: f64, down: f64) -> Result<Self> {
        if !(up >= 0.0 && down >= 0.0 && up + down <= 1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "P(X=1) = {up}, P(X=-1) = {down} do not form a distribution"
            )));
        }
        Ok(Self { up, down })
    }

    /// `E[X | X != 0]`; zero when `X` is almost surely zero.
    pub fn conditional_mean(&self) -> f64 {
        let nonzero = self.up + self.down;
        if nonzero > 0.0 {
            (self.up - self.down) / nonzero
        } else {
            0.0
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i8 {
        let u: f64 = rng.random();
        if u < self.up {
            1
        } else if u < self.up + self.down {
            -1
        } else {
            0
        }
    }
}

/// How the increments are generated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IncrementLaw {
    Iid(Increment),
    /// An adapted sequence: the law of `X_t` depends on whether the raw sum
    /// `X_1 + ... + X_{t-1}` is nonnegative.
    SignSwitching {
        nonnegative: Increment,
        negative: Increment,
    },
}

impl IncrementLaw {
    fn law_at(&self, raw_sum: i64) -> Increment {
        match *self {
            IncrementLaw::Iid(inc) => inc,
            IncrementLaw::SignSwitching {
                nonnegative,
                negative,
            } => {
                if raw_sum >= 0 {
                    nonnegative
                } else {
                    negative
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationTrialSpec {
    pub horizon: u64,
    pub law: IncrementLaw,
    pub trials: u64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationOutcome {
    pub trials: u64,
    pub crossings: u64,
    pub frequency: f64,
    /// Upper end of the 99% normal-approximation interval on the frequency.
    pub ci_upper: f64,
}

/// Simulates `trials` independent sequences and counts those whose centred
/// sum crosses the boundary at some `t <= n` with `N_t > 0`.
pub fn concentration_mc(spec: &ConcentrationTrialSpec, seed: u64) -> Result<ConcentrationOutcome> {
    if spec.trials == 0 {
        return Err(Error::Precondition("at least one trial is required".into()));
    }
    if !(spec.delta > 0.0 && spec.delta < 1.0) {
        return Err(Error::Precondition(format!(
            "delta = {} must lie in (0, 1)",
            spec.delta
        )));
    }
    let c = confidence_constant();
    let boundary: Vec<f64> = (0..=spec.horizon)
        .map(|n| edge_threshold(n, spec.delta, c).unwrap_or(f64::INFINITY))
        .collect();
    let crossings = with_pool(|| {
        (0..spec.trials)
            .into_par_iter()
            .filter(|&trial| crosses(spec, &boundary, &mut trial_stream(seed, trial)))
            .count() as u64
    });
    let frequency = crossings as f64 / spec.trials as f64;
    Ok(ConcentrationOutcome {
        trials: spec.trials,
        crossings,
        frequency,
        ci_upper: binomial_ci(crossings, spec.trials).1,
    })
}

fn crosses<R: Rng + ?Sized>(spec: &ConcentrationTrialSpec, boundary: &[f64], rng: &mut R) -> bool {
    let mut raw = 0i64;
    let mut centred = 0.0f64;
    let mut count = 0usize;
    for _ in 0..spec.horizon {
        let law = spec.law.law_at(raw);
        let x = law.sample(rng);
        if x == 0 {
            continue;
        }
        raw += i64::from(x);
        centred += f64::from(x) - law.conditional_mean();
        count += 1;
        if centred.abs() >= boundary[count] {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iid(up: f64, down: f64, n: u64, trials: u64, delta: f64) -> ConcentrationTrialSpec {
        ConcentrationTrialSpec {
            horizon: n,
            law: IncrementLaw::Iid(Increment::new(up, down).unwrap()),
            trials,
            delta,
        }
    }

    #[test]
    fn conditional_mean_recovery() {
        let inc = Increment::new(0.3, 0.1).unwrap();
        assert!((inc.conditional_mean() - 0.5).abs() < 1e-15);
        assert_eq!(Increment::new(0.0, 0.0).unwrap().conditional_mean(), 0.0);
        assert!(Increment::new(0.7, 0.4).is_err());
    }

    #[test]
    fn silent_sequences_never_cross() {
        let out = concentration_mc(&iid(0.0, 0.0, 500, 200, 0.05), 1).unwrap();
        assert_eq!(out.crossings, 0);
    }

    #[test]
    fn deterministic_drift_is_centred_away() {
        // X = 1 always: mu = 1, so S stays at zero
        let out = concentration_mc(&iid(1.0, 0.0, 500, 50, 0.05), 1).unwrap();
        assert_eq!(out.crossings, 0);
    }

    #[test]
    fn loose_delta_sees_crossings() {
        let out = concentration_mc(&iid(0.5, 0.5, 1000, 2000, 0.9), 2).unwrap();
        assert!(out.crossings > 0);
        assert!(out.frequency <= 0.9);
    }

    #[test]
    fn reproducible_and_thread_independent() {
        let spec = iid(0.4, 0.4, 200, 400, 0.3);
        let a = concentration_mc(&spec, 9).unwrap();
        let b = concentration_mc(&spec, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adapted_sequence_respects_bound() {
        let spec = ConcentrationTrialSpec {
            horizon: 400,
            law: IncrementLaw::SignSwitching {
                nonnegative: Increment::new(0.1, 0.05).unwrap(),
                negative: Increment::new(0.45, 0.45).unwrap(),
            },
            trials: 2000,
            delta: 0.1,
        };
        let out = concentration_mc(&spec, 4).unwrap();
        assert!(out.frequency <= 0.1, "{out:?}");
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(concentration_mc(&iid(0.5, 0.5, 10, 0, 0.05), 0).is_err());
        assert!(concentration_mc(&iid(0.5, 0.5, 10, 10, 1.5), 0).is_err());
    }
}
