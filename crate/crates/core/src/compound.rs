//! Two quantum machines whose particles are joined by a rigid rod.
//!
//! Both particles start at the centers of their spheres with the rod in
//! place. One elastic breaks first and pulls its particle to `±u`; the rod
//! drags the partner to the antipodal point and then breaks, after which the
//! second machine measures on its own. The resulting joint statistics are
//! those of the singlet, even though each sphere on its own sits at the
//! center (`½·I`), exactly like the product of two maximally mixed states.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bloch::{BallState, Direction};
use crate::machine::{analytic_probability, sample_outcome, Outcome};
use crate::rng::{default_shards, shard_ranges, RandomStream};

/// Probabilities of `(up,up), (up,down), (down,up), (down,down)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    pub p_uu: f64,
    pub p_ud: f64,
    pub p_du: f64,
    pub p_dd: f64,
}

impl JointDistribution {
    pub fn as_array(&self) -> [f64; 4] {
        [self.p_uu, self.p_ud, self.p_du, self.p_dd]
    }

    pub fn from_array(p: [f64; 4]) -> Self {
        Self {
            p_uu: p[0],
            p_ud: p[1],
            p_du: p[2],
            p_dd: p[3],
        }
    }

    pub fn total(&self) -> f64 {
        self.as_array().iter().sum()
    }

    /// `p_uu − p_ud − p_du + p_dd`.
    pub fn correlation(&self) -> f64 {
        self.p_uu - self.p_ud - self.p_du + self.p_dd
    }
}

/// Which way the rod moves the partner once the first particle lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RodRule {
    /// Partner goes to the antipode of the first landing point.
    #[default]
    Antipodal,
    /// Partner goes to the same point as the first. Does not reproduce the
    /// singlet; kept to show that it fails.
    Parallel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::First => Side::Second,
            Side::Second => Side::First,
        }
    }
}

/// Positions of the two particles and whether the rod still holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RodState {
    pub w1: BallState,
    pub w2: BallState,
    pub connected: bool,
}

impl RodState {
    /// Both particles at the centers, rod attached.
    pub fn singlet() -> Self {
        Self {
            w1: BallState::CENTER,
            w2: BallState::CENTER,
            connected: true,
        }
    }

    pub fn state(&self, side: Side) -> BallState {
        match side {
            Side::First => self.w1,
            Side::Second => self.w2,
        }
    }

    fn set(&mut self, side: Side, w: BallState) {
        match side {
            Side::First => self.w1 = w,
            Side::Second => self.w2 = w,
        }
    }

    /// Records that `side` has landed at `landing` and, if the rod is still
    /// attached, moves the partner accordingly.
    pub fn land(&mut self, side: Side, landing: BallState, rule: RodRule) {
        self.set(side, landing);
        if self.connected {
            let [x, y, z] = landing.coords();
            let partner = match rule {
                RodRule::Antipodal => [-x, -y, -z],
                RodRule::Parallel => [x, y, z],
            };
            self.set(side.other(), crate::bloch::clamp_into_ball(partner));
        }
    }

    pub fn disconnect(&mut self) {
        self.connected = false;
    }
}

/// Four measurement directions of a CHSH test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSetting {
    pub a: Direction,
    pub a_prime: Direction,
    pub b: Direction,
    pub b_prime: Direction,
}

impl ChshSetting {
    /// Directions in the x-z plane at the given angles from `+z`.
    pub fn coplanar(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        Self {
            a: Direction::in_xz_plane(a),
            a_prime: Direction::in_xz_plane(a_prime),
            b: Direction::in_xz_plane(b),
            b_prime: Direction::in_xz_plane(b_prime),
        }
    }

    /// `a = 0, a′ = π/2, b = π/4, b′ = 3π/4`.
    pub fn optimal() -> Self {
        Self::coplanar(0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4)
    }

    /// `(a,b), (a,b′), (a′,b), (a′,b′)` in the order they enter `S`.
    pub fn pairs(&self) -> [(Direction, Direction); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }
}

/// Signs of the four correlations in `S`.
pub const CHSH_SIGNS: [f64; 4] = [1.0, -1.0, 1.0, 1.0];

/// Joint probabilities of the rod model at relative angle `α`:
/// `(½sin²(α/2), ½cos²(α/2), ½cos²(α/2), ½sin²(α/2))`.
pub fn singlet_joint_probability(u1: &Direction, u2: &Direction) -> JointDistribution {
    let half = u1.angle_to(u2) / 2.0;
    let (s, c) = half.sin_cos();
    let (mut s2, mut c2) = (s * s, c * c);
    // complement the smaller square so each marginal is exactly ½
    if s2 <= c2 {
        s2 = 1.0 - c2;
    } else {
        c2 = 1.0 - s2;
    }
    JointDistribution {
        p_uu: s2 / 2.0,
        p_ud: c2 / 2.0,
        p_du: c2 / 2.0,
        p_dd: s2 / 2.0,
    }
}

/// Uncorrelated joint statistics of two independent machines.
pub fn product_joint_probability(
    w1: &BallState,
    w2: &BallState,
    u1: &Direction,
    u2: &Direction,
) -> JointDistribution {
    let (up1, down1) = analytic_probability(w1, u1);
    let (up2, down2) = analytic_probability(w2, u2);
    JointDistribution {
        p_uu: up1 * up2,
        p_ud: up1 * down2,
        p_du: down1 * up2,
        p_dd: down1 * down2,
    }
}

/// Probability of up on side 1 and on side 2.
pub fn marginals(j: &JointDistribution) -> (f64, f64) {
    (j.p_uu + j.p_ud, j.p_uu + j.p_du)
}

/// Correlation `E(u₁, u₂)` of the rod model; equals `−cos α`.
pub fn correlation(u1: &Direction, u2: &Direction) -> f64 {
    singlet_joint_probability(u1, u2).correlation()
}

/// `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)`.
pub fn chsh(s: &ChshSetting) -> f64 {
    s.pairs()
        .iter()
        .zip(CHSH_SIGNS)
        .map(|((x, y), sign)| sign * correlation(x, y))
        .sum()
}

/// Largest `|S|` over coplanar settings on a grid of `steps` angles per
/// direction. `a` is pinned at 0 since `S` only depends on relative angles.
pub fn max_coplanar_chsh(steps: usize) -> (f64, ChshSetting) {
    let angle = |k: usize| k as f64 * TAU / steps as f64;
    let mut best = (f64::NEG_INFINITY, ChshSetting::optimal());
    for i in 0..steps {
        for j in 0..steps {
            for k in 0..steps {
                let setting = ChshSetting::coplanar(0.0, angle(i), angle(j), angle(k));
                let s = chsh(&setting).abs();
                if s > best.0 {
                    best = (s, setting);
                }
            }
        }
    }
    best
}

/// Half the L1 distance between two joint distributions.
pub fn tv_distance(j1: &JointDistribution, j2: &JointDistribution) -> f64 {
    0.5 * j1
        .as_array()
        .iter()
        .zip(j2.as_array())
        .map(|(p, q)| (p - q).abs())
        .sum::<f64>()
}

/// Draws consumed by one rod-model trial: coin, first break, second break.
pub const DRAWS_PER_PAIR: u64 = 3;

/// One run of the rod protocol with the antipodal rule.
pub fn sample_singlet(u1: &Direction, u2: &Direction, rng: &mut RandomStream) -> (Outcome, Outcome) {
    sample_singlet_with(u1, u2, RodRule::Antipodal, rng)
}

/// One run of the rod protocol:
/// 1. a fair coin picks which elastic breaks first;
/// 2. that machine measures its particle (at the center);
/// 3. the rod moves the partner according to `rule`;
/// 4. the rod breaks;
/// 5. the other machine measures its now-displaced particle.
pub fn sample_singlet_with(
    u1: &Direction,
    u2: &Direction,
    rule: RodRule,
    rng: &mut RandomStream,
) -> (Outcome, Outcome) {
    let mut rod = RodState::singlet();
    let first = if rng.coin() { Side::First } else { Side::Second };
    let dir = |side: Side| match side {
        Side::First => u1,
        Side::Second => u2,
    };
    let r1 = sample_outcome(&rod.state(first), dir(first), rng);
    rod.land(first, r1.post_state, rule);
    rod.disconnect();
    let second = first.other();
    let r2 = sample_outcome(&rod.state(second), dir(second), rng);
    match first {
        Side::First => (r1.outcome, r2.outcome),
        Side::Second => (r2.outcome, r1.outcome),
    }
}

/// Counts from repeated rod-model trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalJoint {
    pub n_uu: u64,
    pub n_ud: u64,
    pub n_du: u64,
    pub n_dd: u64,
    pub n_total: u64,
    pub seed: u64,
    pub stream: u64,
    pub frequencies: JointDistribution,
}

impl EmpiricalJoint {
    fn from_counts(c: [u64; 4], seed: u64, stream: u64) -> Self {
        let n: u64 = c.iter().sum();
        let f = if n == 0 {
            [0.0; 4]
        } else {
            c.map(|x| x as f64 / n as f64)
        };
        Self {
            n_uu: c[0],
            n_ud: c[1],
            n_du: c[2],
            n_dd: c[3],
            n_total: n,
            seed,
            stream,
            frequencies: JointDistribution::from_array(f),
        }
    }

    pub fn counts(&self) -> [u64; 4] {
        [self.n_uu, self.n_ud, self.n_du, self.n_dd]
    }

    /// `(n_uu − n_ud − n_du + n_dd)/n`.
    pub fn correlation(&self) -> f64 {
        let [uu, ud, du, dd] = self.counts().map(|c| c as i64);
        (uu - ud - du + dd) as f64 / self.n_total as f64
    }
}

fn cell(o: (Outcome, Outcome)) -> usize {
    match o {
        (Outcome::Up, Outcome::Up) => 0,
        (Outcome::Up, Outcome::Down) => 1,
        (Outcome::Down, Outcome::Up) => 2,
        (Outcome::Down, Outcome::Down) => 3,
    }
}

/// `n` seeded rod-model trials on stream 0.
pub fn run_epr_trials(u1: &Direction, u2: &Direction, n: u64, seed: u64) -> EmpiricalJoint {
    run_epr_trials_on(u1, u2, n, seed, 0, default_shards(), RodRule::Antipodal)
}

/// `n` rod-model trials on `stream` of `seed`. Trial `i` starts at draw
/// `3·i`, so counts do not depend on `shards`.
pub fn run_epr_trials_on(
    u1: &Direction,
    u2: &Direction,
    n: u64,
    seed: u64,
    stream: u64,
    shards: usize,
    rule: RodRule,
) -> EmpiricalJoint {
    let counts = shard_ranges(n, shards)
        .into_par_iter()
        .map(|range| {
            let mut rng = RandomStream::at(seed, stream, range.start * DRAWS_PER_PAIR);
            let mut c = [0u64; 4];
            for _ in range {
                c[cell(sample_singlet_with(u1, u2, rule, &mut rng))] += 1;
            }
            c
        })
        .reduce(|| [0u64; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    EmpiricalJoint::from_counts(counts, seed, stream)
}

/// Sampled CHSH value: each of the four pairs gets `n` trials on its own
/// stream (0 to 3) of `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshEmpirical {
    pub pairs: Vec<EmpiricalJoint>,
    pub s: f64,
}

pub fn chsh_empirical(setting: &ChshSetting, n: u64, seed: u64, shards: usize) -> ChshEmpirical {
    let pairs: Vec<EmpiricalJoint> = setting
        .pairs()
        .iter()
        .enumerate()
        .map(|(k, (x, y))| run_epr_trials_on(x, y, n, seed, k as u64, shards, RodRule::Antipodal))
        .collect();
    let s = pairs
        .iter()
        .zip(CHSH_SIGNS)
        .map(|(p, sign)| sign * p.correlation())
        .sum();
    ChshEmpirical { pairs, s }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, PI, SQRT_2};

    fn at(alpha: f64) -> (Direction, Direction) {
        (Direction::PLUS_Z, Direction::in_xz_plane(alpha))
    }

    fn close(j: &JointDistribution, p: [f64; 4], tol: f64) -> bool {
        j.as_array().iter().zip(p).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn singlet_joint_cases() {
        let (a, b) = at(0.0);
        assert_eq!(singlet_joint_probability(&a, &b).as_array(), [0.0, 0.5, 0.5, 0.0]);
        let (a, b) = at(PI);
        assert!(close(&singlet_joint_probability(&a, &b), [0.5, 0.0, 0.0, 0.5], 1e-15));
        let (a, b) = at(FRAC_PI_2);
        assert!(close(&singlet_joint_probability(&a, &b), [0.25; 4], 1e-15));
    }

    #[test]
    fn marginals_cases() {
        for k in 0..=36 {
            let (a, b) = at(k as f64 * PI / 36.0);
            assert_eq!(marginals(&singlet_joint_probability(&a, &b)), (0.5, 0.5));
        }
        assert_eq!(marginals(&JointDistribution::from_array([1.0, 0.0, 0.0, 0.0])), (1.0, 1.0));
        assert_eq!(marginals(&JointDistribution::from_array([0.25; 4])), (0.5, 0.5));
    }

    #[test]
    fn product_cases() {
        let u1 = Direction::from_angles(0.3, 0.1).unwrap();
        let u2 = Direction::from_angles(2.0, 4.0).unwrap();
        let c = BallState::CENTER;
        assert_eq!(product_joint_probability(&c, &c, &u1, &u2).as_array(), [0.25; 4]);
        let j = product_joint_probability(&BallState::surface(u1), &BallState::surface(u2), &u1, &u2);
        assert_eq!(j.as_array(), [1.0, 0.0, 0.0, 0.0]);
        let j = product_joint_probability(&c, &BallState::surface(u2), &u1, &u2);
        assert_eq!(j.as_array(), [0.5, 0.0, 0.5, 0.0]);
    }

    #[test]
    fn correlation_cases() {
        let (a, b) = at(0.0);
        assert_eq!(correlation(&a, &b), -1.0);
        let (a, b) = at(FRAC_PI_2);
        assert!(correlation(&a, &b).abs() < 1e-15);
        let (a, b) = at(PI);
        assert!((correlation(&a, &b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chsh_cases() {
        assert!((chsh(&ChshSetting::optimal()) + 2.0 * SQRT_2).abs() < 1e-12);
        let s = ChshSetting::coplanar(0.0, FRAC_PI_2, 0.0, FRAC_PI_2);
        assert!((chsh(&s) + 2.0).abs() < 1e-15);
        let s = ChshSetting::coplanar(0.7, 0.7, 0.7, 0.7);
        assert!((chsh(&s) + 2.0).abs() < 1e-15);
    }

    #[test]
    fn chsh_grid_maximum_is_tsirelson() {
        let (best, _) = max_coplanar_chsh(48);
        assert!((best - 2.0 * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn tv_cases() {
        let j = JointDistribution::from_array([0.1, 0.2, 0.3, 0.4]);
        assert_eq!(tv_distance(&j, &j), 0.0);
        let (a, b) = at(0.0);
        let singlet = singlet_joint_probability(&a, &b);
        let centers = product_joint_probability(&BallState::CENTER, &BallState::CENTER, &a, &b);
        // ½(|0−¼| + |½−¼| + |½−¼| + |0−¼|)
        assert_eq!(tv_distance(&singlet, &centers), 0.5);
        let x = JointDistribution::from_array([1.0, 0.0, 0.0, 0.0]);
        let y = JointDistribution::from_array([0.0, 1.0, 0.0, 0.0]);
        assert_eq!(tv_distance(&x, &y), 1.0);
    }

    #[test]
    fn tv_to_centers_is_half_abs_cos() {
        let centers = JointDistribution::from_array([0.25; 4]);
        for k in 0..=36 {
            let alpha = k as f64 * PI / 36.0;
            let (a, b) = at(alpha);
            let tv = tv_distance(&singlet_joint_probability(&a, &b), &centers);
            assert!((tv - alpha.cos().abs() / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn aligned_outcomes_always_opposite() {
        let u = Direction::from_angles(1.3, 0.4).unwrap();
        let mut rng = RandomStream::new(17);
        for _ in 0..5000 {
            let (x, y) = sample_singlet(&u, &u, &mut rng);
            assert_ne!(x, y);
        }
        assert_eq!(rng.position(), 5000 * DRAWS_PER_PAIR);
    }

    #[test]
    fn parallel_rod_breaks_anticorrelation() {
        let u = Direction::PLUS_Z;
        let e = run_epr_trials_on(&u, &u, 1000, 3, 0, 1, RodRule::Parallel);
        assert_eq!(e.n_ud + e.n_du, 0);
        assert_eq!(e.n_uu + e.n_dd, 1000);
    }

    #[test]
    fn rod_state_protocol() {
        let mut rod = RodState::singlet();
        assert!(rod.connected && rod.w1.is_center() && rod.w2.is_center());
        rod.land(Side::First, BallState::surface(Direction::PLUS_X), RodRule::Antipodal);
        assert_eq!(rod.w2, BallState::surface(Direction::MINUS_X));
        rod.disconnect();
        rod.land(Side::Second, BallState::surface(Direction::PLUS_Z), RodRule::Antipodal);
        assert_eq!(rod.w1, BallState::surface(Direction::PLUS_X));
    }

    #[test]
    fn single_trial_aligned() {
        let (a, b) = at(0.0);
        for seed in 0..20 {
            let e = run_epr_trials(&a, &b, 1, seed);
            assert!(e.counts() == [0, 1, 0, 0] || e.counts() == [0, 0, 1, 0]);
        }
    }

    #[test]
    fn epr_trials_reproducible_across_shards() {
        let (a, b) = at(FRAC_PI_3);
        let base = run_epr_trials_on(&a, &b, 20_000, 8, 0, 1, RodRule::Antipodal);
        for shards in [2, 5, 12] {
            assert_eq!(run_epr_trials_on(&a, &b, 20_000, 8, 0, shards, RodRule::Antipodal), base);
        }
        assert_eq!(run_epr_trials(&a, &b, 20_000, 8), base);
        assert!((base.frequencies.total() - 1.0).abs() < 1e-12);
    }
}
