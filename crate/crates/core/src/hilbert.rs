//! Standard quantum-mechanical calculator for one and two qubits.
//!
//! Nothing here knows about elastics or rods; it is the reference that the
//! mechanistic model is checked against. Two-qubit indices run
//! `(1,1), (1,2), (2,1), (2,2)`, i.e. `index = 2·i₁ + i₂`.

use std::ops::Index;

use num_complex::Complex64;

use crate::bloch::{DensityMatrix, Direction};
use crate::compound::JointDistribution;
use crate::error::{Error, Result};
use crate::{EXACT_TOL, SOLVE_TOL};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense row-major complex matrix of dimension 2 or 4.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: dim,
            });
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(dim, vec![ZERO; dim * dim])
    }

    /// # Panics
    /// If `dim` is not 2 or 4.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim).expect("dimension must be 2 or 4");
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_rows2(rows: [[Complex64; 2]; 2]) -> Self {
        Self {
            dim: 2,
            data: vec![rows[0][0], rows[0][1], rows[1][0], rows[1][1]],
        }
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len())?;
        for (i, v) in values.iter().enumerate() {
            m.data[i * m.dim + i] = Complex64::new(*v, 0.0);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    fn check_same_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_same_dim(other)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    out[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(Self { dim: n, data: out })
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Largest entrywise `|M − M†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest entrywise difference; infinite when dimensions differ.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `M·X·M†`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.matmul(x)?.matmul(&self.adjoint())
    }

    /// `M·ψ` for a 2-component spinor.
    pub fn apply2(&self, psi: [Complex64; 2]) -> Result<[Complex64; 2]> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.dim,
            });
        }
        let d = &self.data;
        Ok([
            d[0] * psi[0] + d[1] * psi[1],
            d[2] * psi[0] + d[3] * psi[1],
        ])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(w: DensityMatrix) -> Self {
        w.into_matrix()
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows2([[ZERO, ONE], [ONE, ZERO]])
}

pub fn pauli_y() -> ComplexMatrix {
    let i = Complex64::i();
    ComplexMatrix::from_rows2([[ZERO, -i], [i, ZERO]])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_rows2([[ONE, ZERO], [ZERO, -ONE]])
}

/// Spin-up spinor along `u`: `(cos(θ/2), e^{iφ} sin(θ/2))`.
pub fn spinor(u: &Direction) -> [Complex64; 2] {
    let (s, c) = (u.theta() / 2.0).sin_cos();
    [Complex64::new(c, 0.0), Complex64::from_polar(s, u.phi())]
}

/// Bloch vector of a (not necessarily normalized) nonzero spinor.
pub fn bloch_vector(psi: [Complex64; 2]) -> [f64; 3] {
    let n = psi[0].norm_sqr() + psi[1].norm_sqr();
    let cross = psi[0].conj() * psi[1];
    [
        2.0 * cross.re / n,
        2.0 * cross.im / n,
        (psi[0].norm_sqr() - psi[1].norm_sqr()) / n,
    ]
}

fn outer2(psi: [Complex64; 2]) -> ComplexMatrix {
    ComplexMatrix::from_rows2([
        [psi[0] * psi[0].conj(), psi[0] * psi[1].conj()],
        [psi[1] * psi[0].conj(), psi[1] * psi[1].conj()],
    ])
}

/// Rank-one projector onto spin up along `u`.
pub fn projector(u: &Direction) -> ComplexMatrix {
    outer2(spinor(u))
}

/// Trace rule `tr(W·E)`; the imaginary part is discarded.
pub fn trace_probability(w: &ComplexMatrix, e: &ComplexMatrix) -> Result<f64> {
    let p = w.matmul(e)?.trace();
    debug_assert!(p.im.abs() <= SOLVE_TOL, "tr(WE) = {p} is not real");
    Ok(p.re)
}

/// Kronecker product of two 2×2 matrices.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    for m in [a, b] {
        if m.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim,
            });
        }
    }
    let mut out = ComplexMatrix::zeros(4)?;
    for i1 in 0..2 {
        for j1 in 0..2 {
            for i2 in 0..2 {
                for j2 in 0..2 {
                    out.data[(2 * i1 + i2) * 4 + 2 * j1 + j2] = a[(i1, j1)] * b[(i2, j2)];
                }
            }
        }
    }
    Ok(out)
}

/// Which factor of the two-qubit space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Reduced state of `keep`, obtained by tracing out the other factor.
pub fn partial_trace(r: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix> {
    if r.dim != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: r.dim,
        });
    }
    let mut out = ComplexMatrix::zeros(2)?;
    for i in 0..2 {
        for j in 0..2 {
            out.data[2 * i + j] = (0..2)
                .map(|k| match keep {
                    Subsystem::First => r[(2 * i + k, 2 * j + k)],
                    Subsystem::Second => r[(2 * k + i, 2 * k + j)],
                })
                .sum();
        }
    }
    Ok(out)
}

/// Unit vector of the two-qubit space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector4([Complex64; 4]);

impl StateVector4 {
    pub fn new(amps: [Complex64; 4]) -> Result<Self> {
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (n - 1.0).abs() > EXACT_TOL {
            return Err(Error::InvalidStateVector(format!("norm {n} is not 1")));
        }
        Ok(Self(amps))
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: [Complex64; 4]) -> Result<Self> {
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::InvalidStateVector("zero vector".into()));
        }
        Ok(Self(amps.map(|a| a / n)))
    }

    /// `x ⊗ y`, normalized.
    pub fn product(x: [Complex64; 2], y: [Complex64; 2]) -> Result<Self> {
        Self::normalized([x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]])
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|z⟩⟨z|`.
    pub fn projector(&self) -> ComplexMatrix {
        let mut data = vec![ZERO; 16];
        for i in 0..4 {
            for j in 0..4 {
                data[i * 4 + j] = self.0[i] * self.0[j].conj();
            }
        }
        ComplexMatrix { dim: 4, data }
    }

    /// `⟨z|M|z⟩` for a 4×4 `M`.
    pub fn expectation(&self, m: &ComplexMatrix) -> Result<Complex64> {
        if m.dim != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: m.dim,
            });
        }
        let mut acc = ZERO;
        for i in 0..4 {
            for j in 0..4 {
                acc += self.0[i].conj() * m[(i, j)] * self.0[j];
            }
        }
        Ok(acc)
    }
}

/// `(|↑↓⟩ − |↓↑⟩)/√2`.
pub fn singlet() -> StateVector4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector4([ZERO, Complex64::new(h, 0.0), Complex64::new(-h, 0.0), ZERO])
}

/// Schmidt coefficients `(σ₁ ≥ σ₂)`: singular values of the amplitudes
/// reshaped to 2×2.
pub fn schmidt_coefficients(z: &StateVector4) -> (f64, f64) {
    let [a, b, c, d] = z.0;
    let total = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr();
    let det = (a * d - b * c).norm();
    // σ₁² + σ₂² = total, σ₁·σ₂ = |det|
    let disc = (total * total - 4.0 * det * det).max(0.0).sqrt();
    let big_sq = (total + disc) / 2.0;
    let big = big_sq.sqrt();
    let small = if big > 0.0 { det / big } else { 0.0 };
    (big, small)
}

/// Singular values above this count toward the Schmidt rank.
pub const SCHMIDT_TOL: f64 = 1e-10;

/// 1 for product vectors, 2 for nonproduct (entangled) vectors.
pub fn schmidt_rank(z: &StateVector4) -> u8 {
    let (big, small) = schmidt_coefficients(z);
    u8::from(big > SCHMIDT_TOL) + u8::from(small > SCHMIDT_TOL)
}

/// `⟨z| P_{±u₁} ⊗ P_{±u₂} |z⟩` for the four outcome pairs.
pub fn joint_quantum_probability(
    z: &StateVector4,
    u1: &Direction,
    u2: &Direction,
) -> Result<JointDistribution> {
    let identity = ComplexMatrix::identity(2);
    let minus = |p: &ComplexMatrix| identity.add(&p.scale(-ONE));
    let up1 = projector(u1);
    let up2 = projector(u2);
    let down1 = minus(&up1)?;
    let down2 = minus(&up2)?;
    let p = |x: &ComplexMatrix, y: &ComplexMatrix| -> Result<f64> {
        Ok(z.expectation(&tensor(x, y)?)?.re)
    };
    Ok(JointDistribution {
        p_uu: p(&up1, &up2)?,
        p_ud: p(&up1, &down2)?,
        p_du: p(&down1, &up2)?,
        p_dd: p(&down1, &down2)?,
    })
}

/// Pauli components `(c₀, h)` with `H = c₀·I + h·σ`.
fn pauli_components(h: &ComplexMatrix) -> Result<(f64, [f64; 3])> {
    if h.dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: h.dim,
        });
    }
    let dev = h.hermitian_deviation();
    if dev > EXACT_TOL {
        return Err(Error::NonHermitian(dev));
    }
    let c0 = (h[(0, 0)].re + h[(1, 1)].re) / 2.0;
    let off = h[(1, 0)];
    Ok((c0, [off.re, off.im, (h[(0, 0)].re - h[(1, 1)].re) / 2.0]))
}

fn pauli_combination(n: [f64; 3], scale: Complex64) -> ComplexMatrix {
    let upper = Complex64::new(n[0], -n[1]) * scale;
    let lower = Complex64::new(n[0], n[1]) * scale;
    ComplexMatrix::from_rows2([
        [scale * n[2], upper],
        [lower, -scale * n[2]],
    ])
}

/// `exp(t·H)` for Hermitian `H`, by the 2×2 closed form
/// `e^{t c₀}(cosh(t r)·I + sinh(t r)/r · h·σ)`.
pub fn herm_exp(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let (c0, n) = pauli_components(h)?;
    let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let sinhc = if r == 0.0 { t } else { (t * r).sinh() / r };
    let pref = (t * c0).exp();
    let diag = ComplexMatrix::identity(2).scale(Complex64::new(pref * (t * r).cosh(), 0.0));
    diag.add(&pauli_combination(n, Complex64::new(pref * sinhc, 0.0)))
}

/// `exp(−i·t·H)` for Hermitian `H`:
/// `e^{−i t c₀}(cos(t r)·I − i sin(t r)/r · h·σ)`.
pub fn unitary_exp(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let (c0, n) = pauli_components(h)?;
    let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let sinc = if r == 0.0 { t } else { (t * r).sin() / r };
    let phase = Complex64::from_polar(1.0, -t * c0);
    let diag = ComplexMatrix::identity(2).scale(phase * (t * r).cos());
    diag.add(&pauli_combination(n, phase * Complex64::new(0.0, -sinc)))
}
