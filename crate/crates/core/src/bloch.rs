//! Geometry of the unit ball and its correspondence with 2×2 density operators.
//!
//! A point `w` of the closed unit ball is written as `w = a·v − b·v` for a
//! unit vector `v` and weights `a + b = 1`. The density operator attached to
//! `(a, b, θ, φ)` is
//!
//! ```text
//! ⎡ a cos²(θ/2) + b sin²(θ/2)        (a−b) sin(θ/2) cos(θ/2) e^{−iφ} ⎤
//! ⎣ (a−b) sin(θ/2) cos(θ/2) e^{iφ}    a sin²(θ/2) + b cos²(θ/2)      ⎦
//! ```
//!
//! Surface points (`|w| = 1`) map to rank-one projectors, the center maps to
//! `½·I`. Angles follow the usual convention: θ is measured from `+z`, φ is
//! the azimuth in the x-y plane.

use std::f64::consts::{PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::ComplexMatrix;
use crate::{CLAMP_TOL, EXACT_TOL};

/// Below this norm a ball point is treated as the center.
pub const CENTER_TOL: f64 = 1e-9;

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// A unit vector of 3-space, e.g. a measurement direction `u` or the axis `v`
/// of a decomposition. Serialized as a JSON array `[x, y, z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Direction([f64; 3]);

impl Direction {
    pub const PLUS_X: Direction = Direction([1.0, 0.0, 0.0]);
    pub const PLUS_Y: Direction = Direction([0.0, 1.0, 0.0]);
    pub const PLUS_Z: Direction = Direction([0.0, 0.0, 1.0]);
    pub const MINUS_X: Direction = Direction([-1.0, 0.0, 0.0]);
    pub const MINUS_Z: Direction = Direction([0.0, 0.0, -1.0]);

    /// Direction at polar angle `theta` (from `+z`) and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidDirection(format!(
                "non-finite angles theta={theta}, phi={phi}"
            )));
        }
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Ok(Self([st * cp, st * sp, ct]))
    }

    /// Normalizes `(x, y, z)`.
    pub fn from_vector(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = norm3([x, y, z]);
        if !n.is_finite() || n < f64::MIN_POSITIVE {
            return Err(Error::InvalidDirection(format!(
                "cannot normalize ({x}, {y}, {z})"
            )));
        }
        Ok(Self([x / n, y / n, z / n]))
    }

    /// Direction at angle `angle` from `+z` inside the x-z plane, used for
    /// coplanar settings.
    pub fn in_xz_plane(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self([s, 0.0, c])
    }

    pub fn vector(&self) -> [f64; 3] {
        self.0
    }

    /// Polar angle in `[0, π]`.
    pub fn theta(&self) -> f64 {
        let [x, y, z] = self.0;
        (x * x + y * y).sqrt().atan2(z)
    }

    /// Azimuth in `[0, 2π)`.
    pub fn phi(&self) -> f64 {
        let p = self.0[1].atan2(self.0[0]);
        if p < 0.0 {
            (p + TAU) % TAU
        } else {
            p
        }
    }

    pub fn antipode(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        dot3(self.0, other.0)
    }

    /// Angle in `[0, π]` between two directions.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        norm3(cross3(self.0, other.0)).atan2(self.dot(other))
    }
}

impl TryFrom<[f64; 3]> for Direction {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        let n = norm3(v);
        if (n - 1.0).abs() > CLAMP_TOL {
            return Err(Error::InvalidDirection(format!("norm {n} is not 1")));
        }
        Direction::from_vector(v[0], v[1], v[2])
    }
}

impl From<Direction> for [f64; 3] {
    fn from(d: Direction) -> Self {
        d.0
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// A point of the closed unit ball: the state of one quantum machine.
/// Serialized as a JSON array `[x, y, z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BallState([f64; 3]);

impl BallState {
    pub const CENTER: BallState = BallState([0.0; 3]);

    /// Builds a ball point, pulling norms in `(1, 1 + 1e-9]` back onto the
    /// sphere.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let w = [x, y, z];
        let n = norm3(w);
        if !n.is_finite() || n > 1.0 + CLAMP_TOL {
            return Err(Error::NormExceeded { x, y, z, norm: n });
        }
        if n > 1.0 {
            return Ok(Self([x / n, y / n, z / n]));
        }
        Ok(Self(w))
    }

    pub fn from_array(w: [f64; 3]) -> Result<Self> {
        Self::new(w[0], w[1], w[2])
    }

    /// The surface point (ray state) at `d`.
    pub fn surface(d: Direction) -> Self {
        Self(d.0)
    }

    pub fn coords(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm3(self.0)
    }

    pub fn is_surface(&self) -> bool {
        (self.norm() - 1.0).abs() <= EXACT_TOL
    }

    pub fn is_center(&self) -> bool {
        self.norm() < CENTER_TOL
    }

    /// Projection of the point onto the line through `±u`.
    pub fn dot(&self, u: &Direction) -> f64 {
        dot3(self.0, u.0)
    }

    pub fn distance(&self, other: &BallState) -> f64 {
        norm3([
            self.0[0] - other.0[0],
            self.0[1] - other.0[1],
            self.0[2] - other.0[2],
        ])
    }

    /// Convex combination `λ·self + (1−λ)·other`, `λ ∈ [0, 1]`.
    pub fn mix(&self, other: &BallState, lambda: f64) -> BallState {
        let mu = 1.0 - lambda;
        let w = [
            lambda * self.0[0] + mu * other.0[0],
            lambda * self.0[1] + mu * other.0[1],
            lambda * self.0[2] + mu * other.0[2],
        ];
        clamp_into_ball(w)
    }
}

/// Scales a point whose norm exceeds 1 by rounding back onto the sphere.
pub(crate) fn clamp_into_ball(w: [f64; 3]) -> BallState {
    let n = norm3(w);
    debug_assert!(n <= 1.0 + CLAMP_TOL, "point {w:?} left the ball");
    if n > 1.0 {
        BallState([w[0] / n, w[1] / n, w[2] / n])
    } else {
        BallState(w)
    }
}

impl TryFrom<[f64; 3]> for BallState {
    type Error = Error;

    fn try_from(w: [f64; 3]) -> Result<Self> {
        Self::from_array(w)
    }
}

impl From<BallState> for [f64; 3] {
    fn from(w: BallState) -> Self {
        w.0
    }
}

/// `make_ball_state`: see [`BallState::new`].
pub fn make_ball_state(x: f64, y: f64, z: f64) -> Result<BallState> {
    BallState::new(x, y, z)
}

/// A ball point written as a convex combination `a·v + b·(−v)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub v: Direction,
    pub a: f64,
    pub b: f64,
}

impl Decomposition {
    pub fn new(v: Direction, a: f64, b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidDecomposition(format!(
                "weights ({a}, {b}) outside [0, 1]"
            )));
        }
        if (a + b - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidDecomposition(format!(
                "weights ({a}, {b}) do not sum to 1"
            )));
        }
        Ok(Self { v, a, b })
    }

    /// Weight `a` on `v`, `1 − a` on `−v`.
    pub fn with_weight(v: Direction, a: f64) -> Result<Self> {
        Self::new(v, a, 1.0 - a)
    }
}

/// Canonical decomposition of `w`: `v = w/|w|`, `a ≥ b`. The center has no
/// preferred diameter, so `axis` must be given there; elsewhere it is ignored.
pub fn decompose(w: &BallState, axis: Option<Direction>) -> Result<Decomposition> {
    let r = w.norm();
    let v = if r >= CENTER_TOL {
        let [x, y, z] = w.0;
        Direction::from_vector(x, y, z)?
    } else {
        axis.ok_or(Error::DegenerateDecomposition)?
    };
    let r = if r >= CENTER_TOL { r.min(1.0) } else { 0.0 };
    let a = (1.0 + r) / 2.0;
    Ok(Decomposition { v, a, b: 1.0 - a })
}

pub fn recompose(d: &Decomposition) -> BallState {
    let s = d.a - d.b;
    let [x, y, z] = d.v.0;
    clamp_into_ball([s * x, s * y, s * z])
}

/// A 2×2 density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates the invariants at 1e-12.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim(),
            });
        }
        let herm = m.hermitian_deviation();
        if herm > EXACT_TOL {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > EXACT_TOL || tr.im.abs() > EXACT_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        let d = Self(m);
        let (_, low) = d.eigenvalues();
        if low < -EXACT_TOL {
            return Err(Error::InvalidDensity(format!(
                "negative eigenvalue {low:e}"
            )));
        }
        Ok(d)
    }

    pub fn from_entries(rows: [[Complex64; 2]; 2]) -> Result<Self> {
        Self::new(ComplexMatrix::from_rows2(rows))
    }

    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0)))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Eigenvalues `(larger, smaller)` by the 2×2 closed form.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = &self.0;
        let p = m[(0, 0)].re;
        let q = m[(1, 1)].re;
        let c = m[(0, 1)];
        let mean = (p + q) / 2.0;
        let half_gap = (((p - q) / 2.0).powi(2) + c.norm_sqr()).sqrt();
        (mean + half_gap, mean - half_gap)
    }
}

/// The density operator of a decomposition, entry by entry from
/// `(a, b, θ, φ)`.
pub fn density_from_ball(d: &Decomposition) -> DensityMatrix {
    let (a, b) = (d.a, d.b);
    let theta = d.v.theta();
    let phi = d.v.phi();
    let (s, c) = (theta / 2.0).sin_cos();
    let (s2, c2) = (s * s, c * c);
    let off = (a - b) * s * c;
    let upper = Complex64::from_polar(off, -phi);
    DensityMatrix(ComplexMatrix::from_rows2([
        [Complex64::new(a * c2 + b * s2, 0.0), upper],
        [upper.conj(), Complex64::new(a * s2 + b * c2, 0.0)],
    ]))
}

/// Ball point of a density operator, read off its Pauli components.
pub fn ball_from_density(w: &DensityMatrix) -> BallState {
    let m = w.matrix();
    let off = m[(1, 0)];
    let x = 2.0 * off.re;
    let y = 2.0 * off.im;
    let z = m[(0, 0)].re - m[(1, 1)].re;
    clamp_into_ball([x, y, z])
}

/// [`ball_from_density`] on an unchecked matrix; rejects non-density input.
pub fn ball_from_matrix(m: &ComplexMatrix) -> Result<BallState> {
    Ok(ball_from_density(&DensityMatrix::new(m.clone())?))
}

/// Polar angle wrapped into `[0, π]` with the azimuth adjusted to match.
pub fn normalize_angles(theta: f64, phi: f64) -> (f64, f64) {
    let t = theta.rem_euclid(TAU);
    let (t, p) = if t > PI { (TAU - t, phi + PI) } else { (t, phi) };
    (t, p.rem_euclid(TAU))
}
