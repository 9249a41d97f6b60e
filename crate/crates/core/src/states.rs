//! Two-qubit density matrices and the state families used for the scans.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::numerics::{ComplexMatrix4, C64};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a physical state.
pub const PSD_TOL: f64 = -1e-10;
pub const WEIGHT_TOL: f64 = 1e-12;

/// A validated two-qubit state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(ComplexMatrix4);

impl DensityMatrix {
    /// Checks all three invariants.
    pub fn new(m: ComplexMatrix4) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let herm = m.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotUnitTrace(tr));
        }
        let min = m.hermitian_eigenvalues()?[0];
        if min < PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(DensityMatrix(m))
    }

    /// Projector onto `psi`, normalised.
    pub fn pure(psi: [C64; 4]) -> Result<Self> {
        let n = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotUnit(n));
        }
        Ok(DensityMatrix(ComplexMatrix4::outer(&psi.map(|z| z / n))))
    }

    /// `𝟙/4`.
    pub fn maximally_mixed() -> Self {
        DensityMatrix(ComplexMatrix4::identity().scale(0.25))
    }

    /// Pure product state whose qubits have Bloch vectors `a` and `b`.
    pub fn product(a: &Direction, b: &Direction) -> Self {
        let (qa, qb) = (bloch_ket(a), bloch_ket(b));
        let psi = [qa[0] * qb[0], qa[0] * qb[1], qa[1] * qb[0], qa[1] * qb[1]];
        DensityMatrix(ComplexMatrix4::outer(&psi))
    }

    pub fn matrix(&self) -> &ComplexMatrix4 {
        &self.0
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.hermitian_eigenvalues().map(|e| e[0]).unwrap_or(f64::NAN)
    }

    /// Expectation `tr(ρ·op)`, real part.
    pub fn expectation(&self, op: &ComplexMatrix4) -> f64 {
        self.0.trace_product(op).re
    }
}

/// Qubit ket with Bloch vector `n`: `(cos(θ/2), e^{iφ} sin(θ/2))`.
fn bloch_ket(n: &Direction) -> [C64; 2] {
    let theta = n.z().clamp(-1.0, 1.0).acos();
    let phi = n.y().atan2(n.x());
    [C64::new((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)]
}

/// Schmidt angle `ϑ ∈ [0, π/2]` of `cosϑ|00⟩ + sinϑ|11⟩`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SchmidtAngle(f64);

impl SchmidtAngle {
    pub const MAXIMAL: SchmidtAngle = SchmidtAngle(core::f64::consts::FRAC_PI_4);

    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::OutOfRange { name: "theta", value: theta, lo: 0.0, hi: FRAC_PI_2 });
        }
        Ok(SchmidtAngle(theta))
    }

    pub fn radians(&self) -> f64 {
        self.0
    }
}

/// Mixing weight `V ∈ [0, 1]` of an isotropic state.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Visibility(f64);

impl Visibility {
    pub fn new(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange { name: "V", value: v, lo: 0.0, hi: 1.0 });
        }
        Ok(Visibility(v))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

pub fn schmidt_pure(theta: SchmidtAngle) -> DensityMatrix {
    let t = theta.radians();
    let psi = [C64::new(t.cos(), 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(t.sin(), 0.0)];
    DensityMatrix(ComplexMatrix4::outer(&psi))
}

/// `V·|φ⟩⟨φ| + (1 − V)·𝟙/4` with `|φ⟩ = cosϑ|00⟩ + sinϑ|11⟩`.
pub fn isotropic(v: Visibility, theta: SchmidtAngle) -> DensityMatrix {
    let v = v.value();
    let pure = schmidt_pure(theta);
    DensityMatrix(pure.0.scale(v) + ComplexMatrix4::identity().scale((1.0 - v) / 4.0))
}

/// Convex combination `Σ pᵢ ρᵢ`.
pub fn mix(components: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
    if components.is_empty() {
        return Err(Error::BadWeights("empty mixture"));
    }
    if components.iter().any(|(p, _)| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::BadWeights("negative or non-finite weight"));
    }
    let total: f64 = components.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::BadWeights("weights do not sum to 1"));
    }
    let m = components.iter().fold(ComplexMatrix4::ZERO, |acc, (p, rho)| acc + rho.0.scale(*p));
    Ok(DensityMatrix(m))
}

/// Haar-random pure state: four complex standard normals, normalised.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    loop {
        let psi: [C64; 4] = core::array::from_fn(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        if let Ok(rho) = DensityMatrix::pure(psi) {
            return rho;
        }
    }
}

/// `Σ pᵢ|ψᵢ⟩⟨ψᵢ|` over `rank` random pure states with flat-Dirichlet weights.
pub fn random_mixed<R: Rng + ?Sized>(rng: &mut R, rank: usize) -> Result<DensityMatrix> {
    if !(1..=4).contains(&rank) {
        return Err(Error::BadRank(rank));
    }
    let comps: Vec<(f64, DensityMatrix)> = (0..rank).map(|_| (rng.sample::<f64, _>(Exp1), random_pure(rng))).collect();
    let total: f64 = comps.iter().map(|c| c.0).sum();
    let m = comps.iter().fold(ComplexMatrix4::ZERO, |acc, (w, rho)| acc + rho.0.scale(w / total));
    Ok(DensityMatrix(m))
}

/// Random separable state: a flat-Dirichlet mixture of `terms` random pure
/// product states.
pub fn random_separable<R: Rng + ?Sized>(rng: &mut R, terms: usize) -> DensityMatrix {
    let terms = terms.max(1);
    let comps: Vec<(f64, DensityMatrix)> = (0..terms)
        .map(|_| {
            let a = crate::geometry::random_direction(rng);
            let b = crate::geometry::random_direction(rng);
            (rng.sample::<f64, _>(Exp1), DensityMatrix::product(&a, &b))
        })
        .collect();
    let total: f64 = comps.iter().map(|c| c.0).sum();
    DensityMatrix(comps.iter().fold(ComplexMatrix4::ZERO, |acc, (w, rho)| acc + rho.0.scale(w / total)))
}
