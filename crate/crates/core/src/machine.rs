//! The single quantum machine.
//!
//! A measurement along `u` stretches an elastic between `−u` and `+u`. The
//! particle at `w` falls orthogonally onto it, landing at the signed
//! coordinate `d = w·u ∈ [−1, 1]`. The elastic breaks at a uniformly random
//! point `β`; if the break lies below the particle (`β < d`) the piece
//! holding the particle contracts towards `+u` and the outcome is up,
//! otherwise it is down. Hence `P(up) = (1 + d)/2`, the length of the lower
//! piece over the total length.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{BallState, Direction};
use crate::rng::{default_shards, shard_ranges, RandomStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Up,
    Down,
}

impl Outcome {
    /// `+1` for up, `−1` for down.
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Up => 1.0,
            Outcome::Down => -1.0,
        }
    }
}

/// Result of one elastic measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: Outcome,
    /// `+u` after up, `−u` after down.
    pub post_state: BallState,
    pub break_point: f64,
}

/// Counts of up and down results from repeated measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub n_up: u64,
    pub n_down: u64,
    pub n_total: u64,
    pub freq_up: f64,
    pub freq_down: f64,
    pub seed: u64,
}

impl EmpiricalDistribution {
    pub fn from_counts(n_up: u64, n_down: u64, seed: u64) -> Self {
        let n_total = n_up + n_down;
        let (freq_up, freq_down) = if n_total == 0 {
            (0.0, 0.0)
        } else {
            (n_up as f64 / n_total as f64, n_down as f64 / n_total as f64)
        };
        Self {
            n_up,
            n_down,
            n_total,
            freq_up,
            freq_down,
            seed,
        }
    }
}

/// Splits `1` into `((1+d)/2, (1−d)/2)` so that the two parts add to exactly
/// 1 in floating point: the larger part is computed, the smaller one is its
/// exact complement.
pub(crate) fn split_unit(d: f64) -> (f64, f64) {
    let d = d.clamp(-1.0, 1.0);
    if d >= 0.0 {
        let up = (1.0 + d) / 2.0;
        (up, 1.0 - up)
    } else {
        let down = (1.0 - d) / 2.0;
        (1.0 - down, down)
    }
}

/// `(p_up, p_down) = ((1 + w·u)/2, (1 − w·u)/2)`.
pub fn analytic_probability(w: &BallState, u: &Direction) -> (f64, f64) {
    split_unit(w.dot(u))
}

/// Draws consumed by [`sample_outcome`].
pub const DRAWS_PER_MEASUREMENT: u64 = 1;

/// One elastic measurement. Consumes exactly one draw from `rng`.
/// A break exactly at the particle (`β = d`) resolves to down.
pub fn sample_outcome(w: &BallState, u: &Direction, rng: &mut RandomStream) -> MeasurementRecord {
    let break_point = rng.symmetric();
    let foot = w.dot(u);
    let (outcome, post) = if break_point < foot {
        (Outcome::Up, *u)
    } else {
        (Outcome::Down, u.antipode())
    };
    MeasurementRecord {
        outcome,
        post_state: BallState::surface(post),
        break_point,
    }
}

/// [`run_trials_sharded`] with one shard per worker thread.
pub fn run_trials(w: &BallState, u: &Direction, n: u64, seed: u64) -> EmpiricalDistribution {
    run_trials_sharded(w, u, n, seed, default_shards())
}

/// `n` seeded measurements of `w` along `u`. Trial `i` reads draw `i` of
/// stream 0, so the counts do not depend on `shards`.
pub fn run_trials_sharded(
    w: &BallState,
    u: &Direction,
    n: u64,
    seed: u64,
    shards: usize,
) -> EmpiricalDistribution {
    let n_up: u64 = shard_ranges(n, shards)
        .into_par_iter()
        .map(|range| {
            let mut rng = RandomStream::at(seed, 0, range.start * DRAWS_PER_MEASUREMENT);
            range
                .filter(|_| sample_outcome(w, u, &mut rng).outcome == Outcome::Up)
                .count() as u64
        })
        .sum();
    EmpiricalDistribution::from_counts(n_up, n - n_up, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn analytic_cases() {
        let u = Direction::from_angles(0.9, 1.2).unwrap();
        assert_eq!(analytic_probability(&BallState::surface(u), &u), (1.0, 0.0));
        assert_eq!(analytic_probability(&BallState::CENTER, &u), (0.5, 0.5));
        let w = BallState::surface(Direction::from_angles(FRAC_PI_3, 0.0).unwrap());
        let (up, down) = analytic_probability(&w, &Direction::PLUS_Z);
        assert!((up - 0.75).abs() < 1e-15);
        assert!((down - 0.25).abs() < 1e-15);
    }

    #[test]
    fn probabilities_sum_to_one_exactly() {
        let mut rng = RandomStream::new(11);
        for _ in 0..10_000 {
            let (up, down) = split_unit(rng.symmetric());
            assert_eq!(up + down, 1.0);
        }
    }

    #[test]
    fn certain_outcome_and_repeatability() {
        let u = Direction::from_angles(2.2, 0.3).unwrap();
        let mut rng = RandomStream::new(5);
        for _ in 0..1000 {
            let r = sample_outcome(&BallState::surface(u), &u, &mut rng);
            assert_eq!(r.outcome, Outcome::Up);
        }
        let w = BallState::new(0.1, -0.2, 0.3).unwrap();
        for _ in 0..1000 {
            let first = sample_outcome(&w, &u, &mut rng);
            assert!(first.post_state.is_surface());
            let expected = match first.outcome {
                Outcome::Up => u,
                Outcome::Down => u.antipode(),
            };
            assert_eq!(first.post_state, BallState::surface(expected));
            let again = sample_outcome(&first.post_state, &u, &mut rng);
            assert_eq!(again.outcome, first.outcome);
        }
    }

    #[test]
    fn one_draw_per_measurement() {
        let mut rng = RandomStream::new(1);
        sample_outcome(&BallState::CENTER, &Direction::PLUS_Z, &mut rng);
        assert_eq!(rng.position(), DRAWS_PER_MEASUREMENT);
    }

    #[test]
    fn single_trial_on_axis() {
        let u = Direction::PLUS_X;
        let e = run_trials(&BallState::surface(u), &u, 1, 0);
        assert_eq!((e.n_up, e.n_down, e.freq_up), (1, 0, 1.0));
    }

    #[test]
    fn shard_count_does_not_change_counts() {
        let w = BallState::new(0.2, 0.1, -0.4).unwrap();
        let u = Direction::from_angles(1.0, 1.0).unwrap();
        let base = run_trials_sharded(&w, &u, 10_001, 99, 1);
        for shards in [2, 3, 7, 16] {
            assert_eq!(run_trials_sharded(&w, &u, 10_001, 99, shards), base);
        }
        assert_eq!(run_trials(&w, &u, 10_001, 99), base);
    }
}
