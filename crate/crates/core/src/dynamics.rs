//! Mixture lift versus pure lift.
//!
//! An evolution is first defined on ray states (surface points). It extends
//! to the interior in two ways:
//!
//! - **mixture lift**: treat `w = a·v + b·(−v)` as ignorance about which of
//!   the rays `±v` is present; evolve the two rays and keep `(a, b)`.
//! - **pure lift**: treat the density operator itself as the state and
//!   evolve it directly.
//!
//! For unitary evolutions the two coincide, since conjugation is linear. For
//! the nonlinear evolution used here, `W ↦ M·W·M / tr(M·W·M)` with
//! `M = exp(t·G)`, they separate in general, and the separation depends on
//! which diameter the mixture was prepared along.

use serde::{Deserialize, Serialize};

use crate::bloch::{
    ball_from_density, ball_from_matrix, clamp_into_ball, density_from_ball, recompose, BallState,
    Decomposition, DensityMatrix, Direction,
};
use crate::error::{Error, Result};
use crate::hilbert::{bloch_vector, herm_exp, pauli_z, spinor, unitary_exp, ComplexMatrix};
use crate::EXACT_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionKind {
    /// `exp(−i·t·G)`.
    Unitary,
    /// `exp(t·G)` followed by renormalization.
    Nonlinear,
}

/// How a mixture's weights behave while its branches evolve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixtureRule {
    /// Ignorance weights stay at `(a, b)`.
    #[default]
    FixedWeights,
    /// Each branch is weighted by the norm its representative acquires.
    /// Identical to the pure lift; useful only as a comparison.
    TraceReweighted,
}

/// A Hermitian generator, the kind of evolution and the elapsed time.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionSpec {
    generator: ComplexMatrix,
    pub kind: EvolutionKind,
    pub t: f64,
}

impl EvolutionSpec {
    pub fn new(generator: ComplexMatrix, kind: EvolutionKind, t: f64) -> Result<Self> {
        if generator.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: generator.dim(),
            });
        }
        let dev = generator.hermitian_deviation();
        if dev > EXACT_TOL {
            return Err(Error::NonHermitian(dev));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidTimeGrid(format!("time {t} must be finite and ≥ 0")));
        }
        Ok(Self { generator, kind, t })
    }

    /// `G = σ_z` at `t = 0`.
    pub fn sigma_z(kind: EvolutionKind) -> Self {
        Self {
            generator: pauli_z(),
            kind,
            t: 0.0,
        }
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    /// Same generator and kind at time `t`.
    pub fn at(&self, t: f64) -> Self {
        Self {
            generator: self.generator.clone(),
            kind: self.kind,
            t,
        }
    }

    /// The 2×2 operator acting on spinor representatives.
    pub fn operator(&self) -> ComplexMatrix {
        // the generator was validated as Hermitian 2×2 on construction
        match self.kind {
            EvolutionKind::Unitary => unitary_exp(&self.generator, self.t),
            EvolutionKind::Nonlinear => herm_exp(&self.generator, self.t),
        }
        .expect("validated generator")
    }
}

fn direction_of(v: [f64; 3]) -> Direction {
    Direction::from_vector(v[0], v[1], v[2]).expect("evolved spinor is nonzero")
}

fn evolve_with(op: &ComplexMatrix, v: &Direction) -> Direction {
    let psi = op.apply2(spinor(v)).expect("2×2 operator");
    direction_of(bloch_vector(psi))
}

/// Evolves the ray state at `v`.
pub fn evolve_ray(v: &Direction, spec: &EvolutionSpec) -> Direction {
    evolve_with(&spec.operator(), v)
}

/// `a·evolve(v) + b·evolve(−v)` with the weights held fixed.
pub fn mixture_lift(d: &Decomposition, spec: &EvolutionSpec) -> BallState {
    mixture_lift_with(d, spec, MixtureRule::FixedWeights)
}

pub fn mixture_lift_with(d: &Decomposition, spec: &EvolutionSpec, rule: MixtureRule) -> BallState {
    if spec.t == 0.0 {
        return recompose(d);
    }
    let op = spec.operator();
    let plus = op.apply2(spinor(&d.v)).expect("2×2 operator");
    let minus = op.apply2(spinor(&d.v.antipode())).expect("2×2 operator");
    let (wa, wb) = match rule {
        MixtureRule::FixedWeights => (d.a, d.b),
        MixtureRule::TraceReweighted => {
            let na = d.a * (plus[0].norm_sqr() + plus[1].norm_sqr());
            let nb = d.b * (minus[0].norm_sqr() + minus[1].norm_sqr());
            (na / (na + nb), nb / (na + nb))
        }
    };
    let p = bloch_vector(plus);
    let m = bloch_vector(minus);
    clamp_into_ball([
        wa * p[0] + wb * m[0],
        wa * p[1] + wb * m[1],
        wa * p[2] + wb * m[2],
    ])
}

/// Evolves the density operator itself: `U·W·U†` for unitary kinds,
/// `M·W·M / tr(M·W·M)` for nonlinear ones.
pub fn pure_lift(w: &DensityMatrix, spec: &EvolutionSpec) -> Result<BallState> {
    if spec.t == 0.0 {
        return Ok(ball_from_density(w));
    }
    let op = spec.operator();
    let evolved = op.conjugate(w.matrix())?;
    let tr = evolved.trace();
    let normalized = evolved.scale(tr.inv());
    // re-symmetrize away rounding so the density check sees an exact adjoint
    let sym = normalized
        .add(&normalized.adjoint())?
        .scale(num_complex::Complex64::new(0.5, 0.0));
    ball_from_matrix(&sym)
}

/// Both lifts of one initial decomposition along a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftTrajectory {
    pub times: Vec<f64>,
    pub mixture_points: Vec<BallState>,
    pub pure_points: Vec<BallState>,
    pub divergence: Vec<f64>,
}

impl LiftTrajectory {
    /// `(max divergence, time at which it is first attained)`.
    pub fn max_divergence(&self) -> (f64, f64) {
        self.divergence
            .iter()
            .zip(&self.times)
            .fold((0.0, 0.0), |best, (&d, &t)| if d > best.0 { (d, t) } else { best })
    }
}

pub fn divergence_trajectory(
    d: &Decomposition,
    spec: &EvolutionSpec,
    t_grid: &[f64],
) -> Result<LiftTrajectory> {
    divergence_trajectory_with(d, spec, t_grid, MixtureRule::FixedWeights)
}

/// Evaluates both lifts at each grid time, starting from the same
/// decomposition. The grid must start at 0 and increase strictly.
pub fn divergence_trajectory_with(
    d: &Decomposition,
    spec: &EvolutionSpec,
    t_grid: &[f64],
    rule: MixtureRule,
) -> Result<LiftTrajectory> {
    match t_grid.first() {
        None => return Err(Error::InvalidTimeGrid("empty grid".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::InvalidTimeGrid(format!("grid starts at {t0}, not 0")))
        }
        _ => {}
    }
    if let Some(w) = t_grid.windows(2).find(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) || !w[1].is_finite()) {
        return Err(Error::InvalidTimeGrid(format!(
            "grid is not strictly increasing at {} → {}",
            w[0], w[1]
        )));
    }
    let initial = density_from_ball(d);
    let mut traj = LiftTrajectory {
        times: t_grid.to_vec(),
        mixture_points: Vec::with_capacity(t_grid.len()),
        pure_points: Vec::with_capacity(t_grid.len()),
        divergence: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        let at = spec.at(t);
        let mix = mixture_lift_with(d, &at, rule);
        // both lifts start from the same ball point
        let pure = if t == 0.0 { mix } else { pure_lift(&initial, &at)? };
        traj.divergence.push(mix.distance(&pure));
        traj.mixture_points.push(mix);
        traj.pure_points.push(pure);
    }
    Ok(traj)
}

/// `n + 1` evenly spaced times on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::decompose;
    use crate::hilbert::pauli_x;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_3;

    fn nonlinear_z(t: f64) -> EvolutionSpec {
        EvolutionSpec::sigma_z(EvolutionKind::Nonlinear).at(t)
    }

    fn assert_close(a: [f64; 3], b: [f64; 3], tol: f64) {
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn time_zero_is_identity() {
        let v = Direction::from_angles(1.2, 0.4).unwrap();
        for kind in [EvolutionKind::Unitary, EvolutionKind::Nonlinear] {
            let spec = EvolutionSpec::sigma_z(kind);
            assert_close(evolve_ray(&v, &spec).vector(), v.vector(), 1e-15);
            let d = Decomposition::new(v, 0.8, 0.2).unwrap();
            assert_close(mixture_lift(&d, &spec).coords(), recompose(&d).coords(), 1e-15);
            let p = pure_lift(&density_from_ball(&d), &spec).unwrap();
            assert_close(p.coords(), recompose(&d).coords(), 1e-15);
        }
    }

    #[test]
    fn z_eigenray_is_fixed() {
        for t in [0.1, 1.0, 3.0] {
            let r = evolve_ray(&Direction::PLUS_Z, &nonlinear_z(t));
            assert_close(r.vector(), [0.0, 0.0, 1.0], 1e-15);
        }
    }

    #[test]
    fn plus_x_flows_to_pole() {
        for t in [0.05, 0.5, 1.5] {
            let r = evolve_ray(&Direction::PLUS_X, &nonlinear_z(t));
            let expected = [1.0 / (2.0 * t).cosh(), 0.0, (2.0 * t).tanh()];
            assert_close(r.vector(), expected, 1e-14);
        }
    }

    #[test]
    fn mixture_lift_cases() {
        let axis_z = Decomposition::new(Direction::PLUS_Z, 0.5, 0.5).unwrap();
        let axis_x = Decomposition::new(Direction::PLUS_X, 0.5, 0.5).unwrap();
        for t in [0.3, 1.1] {
            assert_close(mixture_lift(&axis_z, &nonlinear_z(t)).coords(), [0.0; 3], 1e-15);
            assert_close(
                mixture_lift(&axis_x, &nonlinear_z(t)).coords(),
                [0.0, 0.0, (2.0 * t).tanh()],
                1e-14,
            );
        }
    }

    #[test]
    fn unitary_mixture_is_rotation() {
        let d = Decomposition::new(Direction::from_angles(0.9, 2.0).unwrap(), 0.7, 0.3).unwrap();
        let t = 0.6;
        let spec = EvolutionSpec::new(pauli_x(), EvolutionKind::Unitary, t).unwrap();
        // exp(−i t σ_x) rotates the Bloch vector about x by 2t.
        let [x, y, z] = recompose(&d).coords();
        let (s, c) = (2.0 * t).sin_cos();
        let rotated = [x, c * y - s * z, s * y + c * z];
        assert_close(mixture_lift(&d, &spec).coords(), rotated, 1e-12);
        let p = pure_lift(&density_from_ball(&d), &spec).unwrap();
        assert_close(p.coords(), rotated, 1e-12);
    }

    #[test]
    fn pure_lift_of_half_identity() {
        for t in [0.2, 0.5, 2.0] {
            let p = pure_lift(&DensityMatrix::maximally_mixed(), &nonlinear_z(t)).unwrap();
            assert_close(p.coords(), [0.0, 0.0, (2.0 * t).tanh()], 1e-14);
        }
    }

    #[test]
    fn reweighted_mixture_equals_pure_lift() {
        let d = Decomposition::new(Direction::from_angles(FRAC_PI_3, 0.7).unwrap(), 0.6, 0.4).unwrap();
        let g = ComplexMatrix::from_rows2([
            [Complex64::new(0.4, 0.0), Complex64::new(0.1, -0.3)],
            [Complex64::new(0.1, 0.3), Complex64::new(-0.2, 0.0)],
        ]);
        for t in [0.1, 0.8, 1.9] {
            let spec = EvolutionSpec::new(g.clone(), EvolutionKind::Nonlinear, t).unwrap();
            let mix = mixture_lift_with(&d, &spec, MixtureRule::TraceReweighted);
            let pure = pure_lift(&density_from_ball(&d), &spec).unwrap();
            assert!(mix.distance(&pure) < 1e-12);
        }
    }

    #[test]
    fn tilted_axis_separates_lifts() {
        let d = Decomposition::new(Direction::from_angles(FRAC_PI_3, 0.0).unwrap(), 0.5, 0.5).unwrap();
        let traj = divergence_trajectory(&d, &nonlinear_z(0.0), &[0.0, 0.5]).unwrap();
        assert_eq!(traj.divergence[0], 0.0);
        assert!(traj.divergence[1] > 0.1);
    }

    #[test]
    fn center_requires_axis() {
        assert!(decompose(&BallState::CENTER, None).is_err());
    }

    #[test]
    fn grid_validation() {
        let d = Decomposition::new(Direction::PLUS_X, 0.5, 0.5).unwrap();
        let spec = nonlinear_z(0.0);
        assert!(divergence_trajectory(&d, &spec, &[]).is_err());
        assert!(divergence_trajectory(&d, &spec, &[0.1, 0.2]).is_err());
        assert!(divergence_trajectory(&d, &spec, &[0.0, 0.2, 0.2]).is_err());
        assert!(divergence_trajectory(&d, &spec, &[0.0, 0.3, 0.2]).is_err());
        assert_eq!(divergence_trajectory(&d, &spec, &uniform_grid(1.0, 4)).unwrap().times.len(), 5);
    }

    #[test]
    fn spec_validation() {
        let bad = ComplexMatrix::from_rows2([
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
        ]);
        assert!(EvolutionSpec::new(bad, EvolutionKind::Nonlinear, 1.0).is_err());
        assert!(EvolutionSpec::new(pauli_z(), EvolutionKind::Nonlinear, -1.0).is_err());
        assert!(EvolutionSpec::new(ComplexMatrix::identity(4), EvolutionKind::Unitary, 1.0).is_err());
    }
}
