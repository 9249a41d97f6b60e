//! Small dense kernels: 2×2 and 4×4 complex matrices, 3-vectors and 3×3
//! real matrices.
//!
//! Index conventions used throughout the crate:
//!
//! * Pauli matrices are ordered `(σ₁, σ₂, σ₃) = (σx, σy, σz)`.
//! * The two-qubit basis is `|00⟩, |01⟩, |10⟩, |11⟩`, so `kron(a, b)` places
//!   the block `a[i][j]·b` at rows `2i..2i+2`, columns `2j..2j+2`.

use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Jacobi sweeps stop once the off-diagonal Frobenius norm drops below this.
pub const JACOBI_OFF_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 64;
/// Largest asymmetry accepted by the eigen solvers.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vector3(pub [f64; 3]);

impl Vector3 {
    pub const ZERO: Vector3 = Vector3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vector3([x, y, z])
    }

    pub fn dot(&self, other: &Vector3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(&self, o: &Vector3) -> Vector3 {
        let [a, b, c] = self.0;
        let [x, y, z] = o.0;
        Vector3([b * z - c * y, c * x - a * z, a * y - b * x])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, k: f64) -> Vector3 {
        Vector3(self.0.map(|x| x * k))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, o: Vector3) -> Vector3 {
        Vector3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, o: Vector3) -> Vector3 {
        Vector3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        self.scale(-1.0)
    }
}

/// Real 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RealMatrix3(pub [[f64; 3]; 3]);

impl RealMatrix3 {
    pub const ZERO: RealMatrix3 = RealMatrix3([[0.0; 3]; 3]);
    pub const IDENTITY: RealMatrix3 = RealMatrix3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn diag(d: [f64; 3]) -> Self {
        let mut m = Self::ZERO;
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &Vector3) -> Vector3 {
        let m = &self.0;
        Vector3([
            m[0][0] * v.0[0] + m[0][1] * v.0[1] + m[0][2] * v.0[2],
            m[1][0] * v.0[0] + m[1][1] * v.0[1] + m[1][2] * v.0[2],
            m[2][0] * v.0[0] + m[2][1] * v.0[1] + m[2][2] * v.0[2],
        ])
    }

    pub fn scale(&self, k: f64) -> Self {
        RealMatrix3(self.0.map(|row| row.map(|x| x * k)))
    }

    pub fn max_abs_diff(&self, other: &RealMatrix3) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }

    /// Eigenvalues of a symmetric matrix, descending, by cyclic Jacobi.
    pub fn sym_eigenvalues(&self) -> Result<[f64; 3]> {
        let asym = self.max_abs_diff(&self.transpose());
        if !(asym <= SYMMETRY_TOL) {
            return Err(Error::NotSymmetric(asym));
        }
        let mut a = self.0;
        // symmetrise so that rounding noise in the input is not amplified
        for i in 0..3 {
            for j in (i + 1)..3 {
                let m = 0.5 * (a[i][j] + a[j][i]);
                a[i][j] = m;
                a[j][i] = m;
            }
        }
        for _ in 0..JACOBI_MAX_SWEEPS {
            let off = (2.0 * (a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2))).sqrt();
            if off < JACOBI_OFF_TOL {
                break;
            }
            for p in 0..2 {
                for q in (p + 1)..3 {
                    if a[p][q] == 0.0 {
                        continue;
                    }
                    let (c, s) = jacobi_rotation(a[p][p], a[q][q], a[p][q]);
                    for k in 0..3 {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..3 {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev = [a[0][0], a[1][1], a[2][2]];
        ev.sort_by(|x, y| y.total_cmp(x));
        Ok(ev)
    }
}

impl Mul for RealMatrix3 {
    type Output = RealMatrix3;
    fn mul(self, o: RealMatrix3) -> RealMatrix3 {
        let mut r = RealMatrix3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                r.0[i][j] = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        r
    }
}

/// Rotation `(c, s)` that annihilates the real off-diagonal entry `apq`
/// under `A ← PᵀAP`, with `P[p][p] = P[q][q] = c`, `P[p][q] = s`,
/// `P[q][p] = -s`.
fn jacobi_rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let theta = (aqq - app) / (2.0 * apq);
    let t = if theta.is_infinite() {
        0.0
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    (c, t * c)
}

/// Complex 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix2(pub [[C64; 2]; 2]);

impl ComplexMatrix2 {
    pub const ZERO: ComplexMatrix2 = ComplexMatrix2([[ZERO; 2]; 2]);
    pub const IDENTITY: ComplexMatrix2 = ComplexMatrix2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn scale(&self, k: C64) -> Self {
        ComplexMatrix2(self.0.map(|row| row.map(|x| x * k)))
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        ComplexMatrix2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }
}

impl Add for ComplexMatrix2 {
    type Output = ComplexMatrix2;
    fn add(self, o: Self) -> Self {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for ComplexMatrix2 {
    type Output = ComplexMatrix2;
    fn sub(self, o: Self) -> Self {
        self + o.scale(-ONE)
    }
}

impl Mul for ComplexMatrix2 {
    type Output = ComplexMatrix2;
    fn mul(self, o: Self) -> Self {
        let mut r = Self::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] = self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j];
            }
        }
        r
    }
}

/// Pauli matrix `σ_m` for `m ∈ {0, 1, 2}` = (x, y, z).
pub fn pauli(m: usize) -> ComplexMatrix2 {
    let i = C64::new(0.0, 1.0);
    match m {
        0 => ComplexMatrix2([[ZERO, ONE], [ONE, ZERO]]),
        1 => ComplexMatrix2([[ZERO, -i], [i, ZERO]]),
        2 => ComplexMatrix2([[ONE, ZERO], [ZERO, -ONE]]),
        _ => panic!("Pauli index {m} out of range"),
    }
}

/// Complex 4×4 matrix, row-major, in the `|00⟩,|01⟩,|10⟩,|11⟩` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMatrix4(pub [[C64; 4]; 4]);

impl ComplexMatrix4 {
    pub const ZERO: ComplexMatrix4 = ComplexMatrix4([[ZERO; 4]; 4]);

    pub fn identity() -> Self {
        let mut m = Self::ZERO;
        for i in 0..4 {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_real_diag(d: [f64; 4]) -> Self {
        let mut m = Self::ZERO;
        for i in 0..4 {
            m.0[i][i] = C64::new(d[i], 0.0);
        }
        m
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn outer(psi: &[C64; 4]) -> Self {
        let mut m = Self::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                m.0[i][j] = psi[i] * psi[j].conj();
            }
        }
        m
    }

    pub fn scale(&self, k: f64) -> Self {
        ComplexMatrix4(self.0.map(|row| row.map(|x| x * k)))
    }

    pub fn scale_complex(&self, k: C64) -> Self {
        ComplexMatrix4(self.0.map(|row| row.map(|x| x * k)))
    }

    pub fn adjoint(&self) -> Self {
        let mut r = Self::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                r.0[j][i] = self.0[i][j].conj();
            }
        }
        r
    }

    pub fn trace(&self) -> C64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        let mut acc = ZERO;
        for i in 0..4 {
            for k in 0..4 {
                acc += self.0[i][k] * other.0[k][i];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        worst
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&Self::ZERO)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Eigenvalues of a Hermitian matrix, ascending, by cyclic complex
    /// Jacobi rotations.
    pub fn hermitian_eigenvalues(&self) -> Result<[f64; 4]> {
        let err = self.hermiticity_error();
        if !(err <= SYMMETRY_TOL) {
            return Err(Error::NotHermitian(err));
        }
        // work on the exactly Hermitian part
        let mut a = self.0;
        for i in 0..4 {
            a[i][i] = C64::new(a[i][i].re, 0.0);
            for j in (i + 1)..4 {
                let m = (a[i][j] + a[j][i].conj()) * 0.5;
                a[i][j] = m;
                a[j][i] = m.conj();
            }
        }
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    off += 2.0 * a[i][j].norm_sqr();
                }
            }
            if off.sqrt() < JACOBI_OFF_TOL {
                break;
            }
            for p in 0..3 {
                for q in (p + 1)..4 {
                    let r = a[p][q].norm();
                    if r == 0.0 {
                        continue;
                    }
                    // phase that makes a[p][q] real and positive, then a real rotation
                    let phase = a[p][q] / r;
                    let (c, s) = jacobi_rotation(a[p][p].re, a[q][q].re, r);
                    let sp = phase.conj() * s;
                    for k in 0..4 {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = akp * c - akq * sp;
                        a[k][q] = akp * s + akq * (phase.conj() * c);
                    }
                    for k in 0..4 {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = apk * c - aqk * sp.conj();
                        a[q][k] = apk * s + aqk * (phase * c);
                    }
                    a[p][q] = ZERO;
                    a[q][p] = ZERO;
                    a[p][p].im = 0.0;
                    a[q][q].im = 0.0;
                }
            }
        }
        let mut ev = [a[0][0].re, a[1][1].re, a[2][2].re, a[3][3].re];
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }
}

impl Add for ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn add(self, o: Self) -> Self {
        let mut r = self;
        for i in 0..4 {
            for j in 0..4 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn sub(self, o: Self) -> Self {
        let mut r = self;
        for i in 0..4 {
            for j in 0..4 {
                r.0[i][j] -= o.0[i][j];
            }
        }
        r
    }
}

impl Mul for ComplexMatrix4 {
    type Output = ComplexMatrix4;
    fn mul(self, o: Self) -> Self {
        matmul(&self, &o)
    }
}

pub fn matmul(a: &ComplexMatrix4, b: &ComplexMatrix4) -> ComplexMatrix4 {
    let mut r = ComplexMatrix4::ZERO;
    for i in 0..4 {
        for k in 0..4 {
            let aik = a.0[i][k];
            for j in 0..4 {
                r.0[i][j] += aik * b.0[k][j];
            }
        }
    }
    r
}

pub fn trace(a: &ComplexMatrix4) -> C64 {
    a.trace()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix4 {
    let mut r = ComplexMatrix4::ZERO;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    r.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    r
}

pub fn hermitian_eigenvalues(a: &ComplexMatrix4) -> Result<[f64; 4]> {
    a.hermitian_eigenvalues()
}

pub fn sym3_eigenvalues(a: &RealMatrix3) -> Result<[f64; 3]> {
    a.sym_eigenvalues()
}
