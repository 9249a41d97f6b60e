//! The four equivalent CHSH operators and their expectations.
//!
//! Each `I_μ` is a signed sum of the four correlators
//! `(A₁B₁, A₁B₂, A₂B₁, A₂B₂)` with the single minus sign in a different slot:
//!
//! | μ | A₁B₁ | A₁B₂ | A₂B₁ | A₂B₂ |
//! |---|------|------|------|------|
//! | 0 |  +   |  +   |  +   |  −   |
//! | 1 |  −   |  +   |  +   |  +   |
//! | 2 |  +   |  −   |  +   |  +   |
//! | 3 |  +   |  +   |  −   |  +   |
//!
//! Expectations are available by the trace `tr ρ I_μ` and, independently,
//! through the correlation tensor `t_mn = tr ρ σ_m ⊗ σ_n`.

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{bob_midframe, Direction, Settings};
use crate::numerics::{kron, pauli, ComplexMatrix2, ComplexMatrix4, RealMatrix3, Vector3, C64};
use crate::states::DensityMatrix;

/// Sign of `A_iB_j` in `I_μ`, indexed `[μ][2i + j]`.
pub const SIGNS: [[f64; 4]; 4] = [[1.0, 1.0, 1.0, -1.0], [-1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 1.0, 1.0], [1.0, 1.0, -1.0, 1.0]];

/// Quantum maximum of `|⟨I_μ⟩|`.
pub const TSIRELSON: f64 = 2.0 * core::f64::consts::SQRT_2;
/// Local hidden-variable bound on `|⟨I_μ⟩|`.
pub const LHV_BOUND: f64 = 2.0;

pub const CORRELATION_IMAG_TOL: f64 = 1e-10;

fn check_index(mu: usize) -> Result<()> {
    if mu < 4 {
        Ok(())
    } else {
        Err(Error::BadIndex(mu))
    }
}

/// `σ⃗·n`.
pub fn observable(n: &Direction) -> ComplexMatrix2 {
    let [x, y, z] = n.vector().0;
    pauli(0).scale(C64::new(x, 0.0)) + pauli(1).scale(C64::new(y, 0.0)) + pauli(2).scale(C64::new(z, 0.0))
}

pub fn bell_operator(mu: usize, s: &Settings) -> Result<ComplexMatrix4> {
    check_index(mu)?;
    let (a1, a2) = (observable(&s.a1), observable(&s.a2));
    let (b1, b2) = (observable(&s.b1), observable(&s.b2));
    let sg = SIGNS[mu];
    Ok(kron(&a1, &b1).scale(sg[0]) + kron(&a1, &b2).scale(sg[1]) + kron(&a2, &b1).scale(sg[2]) + kron(&a2, &b2).scale(sg[3]))
}

/// All four operators at once.
pub fn bell_operators(s: &Settings) -> [ComplexMatrix4; 4] {
    let (a1, a2) = (observable(&s.a1), observable(&s.a2));
    let (b1, b2) = (observable(&s.b1), observable(&s.b2));
    let terms = [kron(&a1, &b1), kron(&a1, &b2), kron(&a2, &b1), kron(&a2, &b2)];
    core::array::from_fn(|mu| {
        let sg = SIGNS[mu];
        (0..4).fold(ComplexMatrix4::ZERO, |acc, k| acc + terms[k].scale(sg[k]))
    })
}

/// Real 3×3 matrix `t_mn = tr ρ (σ_m ⊗ σ_n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTensor(pub RealMatrix3);

impl CorrelationTensor {
    pub fn matrix(&self) -> &RealMatrix3 {
        &self.0
    }

    /// `a·T·b`.
    pub fn correlator(&self, a: &Direction, b: &Direction) -> f64 {
        a.vector().dot(&self.0.mul_vec(&b.vector()))
    }
}

pub fn correlation_tensor(rho: &DensityMatrix) -> Result<CorrelationTensor> {
    let mut t = RealMatrix3::ZERO;
    for m in 0..3 {
        for n in 0..3 {
            let z = rho.matrix().trace_product(&kron(&pauli(m), &pauli(n)));
            if z.im.abs() > CORRELATION_IMAG_TOL {
                return Err(Error::NonRealCorrelation { m, n, im: z.im });
            }
            t.0[m][n] = z.re;
        }
    }
    Ok(CorrelationTensor(t))
}

/// `(⟨I₀⟩, ⟨I₁⟩, ⟨I₂⟩, ⟨I₃⟩)` for one state and one set of settings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BellQuad {
    pub i0: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

impl BellQuad {
    pub fn from_array(v: [f64; 4]) -> Self {
        BellQuad { i0: v[0], i1: v[1], i2: v[2], i3: v[3] }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.i0, self.i1, self.i2, self.i3]
    }

    pub fn get(&self, mu: usize) -> Result<f64> {
        check_index(mu)?;
        Ok(self.to_array()[mu])
    }

    /// Largest `⟨I_μ⟩² + ⟨I_ν⟩²` over the six pairs.
    pub fn max_pair_radius(&self) -> f64 {
        let v = self.to_array();
        let mut worst = 0.0f64;
        for mu in 0..4 {
            for nu in (mu + 1)..4 {
                worst = worst.max(v[mu] * v[mu] + v[nu] * v[nu]);
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

pub fn quad_by_trace(rho: &DensityMatrix, s: &Settings) -> BellQuad {
    BellQuad::from_array(bell_operators(s).map(|op| rho.expectation(&op)))
}

/// `Σ s_ij a_i·T b_j` for every μ.
pub fn quad_by_tensor(t: &CorrelationTensor, s: &Settings) -> BellQuad {
    let e = [t.correlator(&s.a1, &s.b1), t.correlator(&s.a1, &s.b2), t.correlator(&s.a2, &s.b1), t.correlator(&s.a2, &s.b2)];
    BellQuad::from_array(core::array::from_fn(|mu| (0..4).map(|k| SIGNS[mu][k] * e[k]).sum()))
}

/// `⟨I₀⟩ = 2[(a₁, T c) cosθ + (a₂, T c') sinθ]` through Bob's mid-frame.
pub fn i0_by_tensor(t: &CorrelationTensor, s: &Settings) -> f64 {
    let f = bob_midframe(&s.b1, &s.b2);
    2.0 * (t.correlator(&s.a1, &f.c) * f.theta.cos() + t.correlator(&s.a2, &f.cp) * f.theta.sin())
}

/// `2√(τ₁ + τ₂)` with `τ₁ ≥ τ₂` the two largest eigenvalues of `TᵀT`:
/// the largest `|⟨I_μ⟩|` reachable with projective measurements.
pub fn horodecki_value(t: &CorrelationTensor) -> f64 {
    let m = t.0.transpose() * t.0;
    let ev = m.sym_eigenvalues().expect("TᵀT is symmetric");
    2.0 * (ev[0] + ev[1]).max(0.0).sqrt()
}

/// `(min, max)` of the `I_μ` sign pattern over the 16 deterministic
/// assignments `A₁, A₂, B₁, B₂ ∈ {±1}`.
pub fn lhv_extremes(mu: usize) -> Result<(f64, f64)> {
    check_index(mu)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for bits in 0..16u32 {
        let val = |k: u32| if bits >> k & 1 == 1 { -1.0 } else { 1.0 };
        let (a1, a2, b1, b2) = (val(0), val(1), val(2), val(3));
        let sg = SIGNS[mu];
        let x = sg[0] * a1 * b1 + sg[1] * a1 * b2 + sg[2] * a2 * b1 + sg[3] * a2 * b2;
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok((lo, hi))
}

pub fn lhv_max(mu: usize) -> Result<f64> {
    lhv_extremes(mu).map(|(_, hi)| hi)
}

/// Which end of `⟨I_μ⟩` to look for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

impl Extremum {
    fn sign(self) -> f64 {
        match self {
            Extremum::Max => 1.0,
            Extremum::Min => -1.0,
        }
    }
}

pub const OPTIMIZER_RESTARTS: usize = 8;
pub const OPTIMIZER_MAX_ITERS: usize = 500;
pub const OPTIMIZER_STOP: f64 = 1e-12;

/// Settings found by the optimiser and `⟨I_μ⟩` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub settings: Settings,
    pub value: f64,
}

/// `direction ∝ v`, or `fallback` when `v` vanishes.
fn aligned(v: Vector3, fallback: Direction) -> Direction {
    if v.norm() > 1e-300 {
        Direction::normalize(v).unwrap_or(fallback)
    } else {
        fallback
    }
}

/// Alternating closed-form ascent from one start.
fn ascend(t: &RealMatrix3, tt: &RealMatrix3, sg: [f64; 4], start: Settings) -> (Settings, f64) {
    let mut s = start;
    let objective = |s: &Settings| {
        let e = |a: &Direction, b: &Direction| a.vector().dot(&t.mul_vec(&b.vector()));
        sg[0] * e(&s.a1, &s.b1) + sg[1] * e(&s.a1, &s.b2) + sg[2] * e(&s.a2, &s.b1) + sg[3] * e(&s.a2, &s.b2)
    };
    let mut value = objective(&s);
    for _ in 0..OPTIMIZER_MAX_ITERS {
        // Alice: a_i ∝ T (s_i1 b1 + s_i2 b2)
        let (b1, b2) = (s.b1.vector(), s.b2.vector());
        s.a1 = aligned(t.mul_vec(&(b1.scale(sg[0]) + b2.scale(sg[1]))), s.a1);
        s.a2 = aligned(t.mul_vec(&(b1.scale(sg[2]) + b2.scale(sg[3]))), s.a2);
        // Bob: b_j ∝ Tᵀ (s_1j a1 + s_2j a2)
        let (a1, a2) = (s.a1.vector(), s.a2.vector());
        s.b1 = aligned(tt.mul_vec(&(a1.scale(sg[0]) + a2.scale(sg[2]))), s.b1);
        s.b2 = aligned(tt.mul_vec(&(a1.scale(sg[1]) + a2.scale(sg[3]))), s.b2);
        let next = objective(&s);
        let done = (next - value).abs() < OPTIMIZER_STOP;
        value = next;
        if done {
            break;
        }
    }
    (s, value)
}

/// Best settings for one extremum of `⟨I_μ⟩` from the correlation tensor.
pub fn optimize_tensor<R: Rng + ?Sized>(t: &CorrelationTensor, mu: usize, which: Extremum, rng: &mut R) -> Result<Optimum> {
    check_index(mu)?;
    let sg = SIGNS[mu].map(|x| x * which.sign());
    let tt = t.0.transpose();
    let mut best: Option<(Settings, f64)> = None;
    for _ in 0..OPTIMIZER_RESTARTS {
        let start = Settings::random(rng);
        let (s, v) = ascend(&t.0, &tt, sg, start);
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((s, v));
        }
    }
    let (settings, v) = best.expect("at least one restart");
    Ok(Optimum { settings, value: which.sign() * v })
}

/// Settings maximising `⟨I_μ⟩` for `rho`.
pub fn optimize_settings<R: Rng + ?Sized>(rho: &DensityMatrix, mu: usize, rng: &mut R) -> Result<Optimum> {
    optimize_tensor(&correlation_tensor(rho)?, mu, Extremum::Max, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::states::{isotropic, random_mixed, random_pure, random_separable, schmidt_pure, SchmidtAngle, Visibility};
    use core::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn bell() -> DensityMatrix {
        schmidt_pure(SchmidtAngle::MAXIMAL)
    }

    #[test]
    fn observables() {
        assert_eq!(observable(&Direction::Z), pauli(2));
        assert_eq!(observable(&Direction::X), pauli(0));
        let k = 1.0 / 3.0f64.sqrt();
        let o = observable(&Direction::new(k, k, k).unwrap());
        let ev = kron(&o, &ComplexMatrix2::IDENTITY).hermitian_eigenvalues().unwrap();
        for (x, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((x - want).abs() < 1e-12);
        }
        assert!((o * o).max_abs_diff(&ComplexMatrix2::IDENTITY) < 1e-15);
    }

    #[test]
    fn chsh_operator_at_optimal_settings_reaches_tsirelson() {
        let op = bell_operator(0, &Settings::optimal_bell()).unwrap();
        let ev = op.hermitian_eigenvalues().unwrap();
        assert!((ev[0] + TSIRELSON).abs() < 1e-12);
        assert!((ev[3] - TSIRELSON).abs() < 1e-12);
        assert!((bell().expectation(&op) - TSIRELSON).abs() < 1e-12);
        assert!(matches!(bell_operator(4, &Settings::optimal_bell()), Err(Error::BadIndex(4))));
    }

    #[test]
    fn operator_norm_never_exceeds_tsirelson() {
        let mut rng = stream(31, 0);
        for _ in 0..500 {
            let s = Settings::random(&mut rng);
            for mu in 0..4 {
                let op = bell_operator(mu, &s).unwrap();
                let ev = op.hermitian_eigenvalues().unwrap();
                assert!(ev[0] >= -TSIRELSON - 1e-10 && ev[3] <= TSIRELSON + 1e-10);
                let sq = (op * op).hermitian_eigenvalues().unwrap();
                assert!(sq[3] <= 8.0 + 1e-10);
            }
        }
    }

    #[test]
    fn equal_bob_settings_collapse_i0() {
        let mut rng = stream(37, 0);
        let mut s = Settings::random(&mut rng);
        s.b2 = s.b1;
        // I₀ = A₁(B₁ + B₂) + A₂(B₁ − B₂) = 2 A₁B₁
        let want = kron(&observable(&s.a1), &observable(&s.b1)).scale(2.0);
        assert!(bell_operator(0, &s).unwrap().max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn correlation_tensor_examples() {
        let t = correlation_tensor(&bell()).unwrap();
        assert!(t.0.max_abs_diff(&RealMatrix3::diag([1.0, -1.0, 1.0])) < 1e-15);
        assert_eq!(correlation_tensor(&DensityMatrix::maximally_mixed()).unwrap().0, RealMatrix3::ZERO);
        for v in [0.1, 0.5, 0.9] {
            let t = correlation_tensor(&isotropic(Visibility::new(v).unwrap(), SchmidtAngle::MAXIMAL)).unwrap();
            assert!(t.0.max_abs_diff(&RealMatrix3::diag([v, -v, v])) < 1e-15);
        }
    }

    // t_mn by explicit expansion of ⟨φ|σ_m⊗σ_n|φ⟩ over basis amplitudes
    fn tensor_oracle(theta: f64) -> RealMatrix3 {
        let amp = [theta.cos(), 0.0, 0.0, theta.sin()];
        let mut t = RealMatrix3::ZERO;
        for m in 0..3 {
            for n in 0..3 {
                let (p, q) = (pauli(m), pauli(n));
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..4 {
                    for j in 0..4 {
                        let e = p.0[i / 2][j / 2] * q.0[i % 2][j % 2];
                        acc += e * amp[i] * amp[j];
                    }
                }
                t.0[m][n] = acc.re;
            }
        }
        t
    }

    #[test]
    fn schmidt_tensor_is_diagonal() {
        let s = FRAC_PI_4.sin();
        let t = correlation_tensor(&schmidt_pure(SchmidtAngle::new(FRAC_PI_8).unwrap())).unwrap();
        assert!(t.0.max_abs_diff(&RealMatrix3::diag([s, -s, 1.0])) < 1e-15);
        for th in [0.0, 0.2, FRAC_PI_8, 0.7, FRAC_PI_4, 1.1, 1.5] {
            let t = correlation_tensor(&schmidt_pure(SchmidtAngle::new(th).unwrap())).unwrap();
            assert!(t.0.max_abs_diff(&tensor_oracle(th)) < 1e-15);
            let s2 = (2.0 * th).sin();
            assert!(t.0.max_abs_diff(&RealMatrix3::diag([s2, -s2, 1.0])) < 1e-15);
        }
        let t = correlation_tensor(&schmidt_pure(SchmidtAngle::new(0.0).unwrap())).unwrap();
        assert_eq!(t.0, RealMatrix3::diag([0.0, 0.0, 1.0]));
    }

    #[test]
    fn quads_at_optimal_settings() {
        let q = quad_by_trace(&bell(), &Settings::optimal_bell());
        assert!((q.i0 - TSIRELSON).abs() < 1e-10);
        for x in [q.i1, q.i2, q.i3] {
            assert!(x.abs() < 1e-10);
        }
        let mut rng = stream(41, 0);
        let s = Settings::random(&mut rng);
        assert_eq!(quad_by_trace(&DensityMatrix::maximally_mixed(), &s).max_abs(), 0.0);
    }

    #[test]
    fn product_state_respects_lhv_bound() {
        let prod = schmidt_pure(SchmidtAngle::new(0.0).unwrap());
        let mut rng = stream(43, 0);
        for _ in 0..2000 {
            let q = quad_by_trace(&prod, &Settings::random(&mut rng));
            assert!(q.max_abs() <= LHV_BOUND + 1e-10);
        }
    }

    #[test]
    fn separable_mixtures_respect_lhv_bound() {
        let mut rng = stream(47, 0);
        for _ in 0..2000 {
            let rho = random_separable(&mut rng, 3);
            let q = quad_by_trace(&rho, &Settings::random(&mut rng));
            assert!(q.max_abs() <= LHV_BOUND + 1e-9);
        }
    }

    #[test]
    fn tensor_route_agrees_with_trace_route() {
        let optimal = i0_by_tensor(&correlation_tensor(&bell()).unwrap(), &Settings::optimal_bell());
        assert!((optimal - TSIRELSON).abs() < 1e-12);
        let mut rng = stream(53, 0);
        assert_eq!(i0_by_tensor(&CorrelationTensor(RealMatrix3::ZERO), &Settings::random(&mut rng)), 0.0);
        for k in 0..10_000 {
            let rho = random_mixed(&mut rng, 1 + k % 4).unwrap();
            let s = Settings::random(&mut rng);
            let t = correlation_tensor(&rho).unwrap();
            let q = quad_by_trace(&rho, &s);
            assert!((i0_by_tensor(&t, &s) - q.i0).abs() < 1e-11);
            let qt = quad_by_tensor(&t, &s);
            for mu in 0..4 {
                assert!((qt.get(mu).unwrap() - q.get(mu).unwrap()).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn relabelling_permutes_the_quad() {
        let mut rng = stream(59, 0);
        for _ in 0..1000 {
            let rho = random_mixed(&mut rng, 2).unwrap();
            let s = Settings::random(&mut rng);
            let q = quad_by_trace(&rho, &s);
            // a₁ ↔ a₂ sends I₀→I₂, I₁→I₃, I₂→I₀, I₃→I₁
            let qa = quad_by_trace(&rho, &s.swap_alice());
            let want = [q.i2, q.i3, q.i0, q.i1];
            // b₁ ↔ b₂ reverses the order
            let qb = quad_by_trace(&rho, &s.swap_bob());
            let want_b = [q.i3, q.i2, q.i1, q.i0];
            for mu in 0..4 {
                assert!((qa.to_array()[mu] - want[mu]).abs() < 1e-12);
                assert!((qb.to_array()[mu] - want_b[mu]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn horodecki_examples() {
        let t = correlation_tensor(&bell()).unwrap();
        assert!((horodecki_value(&t) - TSIRELSON).abs() < 1e-12);
        for v in [0.2, 1.0 / 3.0, core::f64::consts::FRAC_1_SQRT_2, 0.9] {
            let t = correlation_tensor(&isotropic(Visibility::new(v).unwrap(), SchmidtAngle::MAXIMAL)).unwrap();
            // TᵀT = V²𝟙
            assert!((horodecki_value(&t) - 2.0 * (2.0 * v * v).sqrt()).abs() < 1e-12);
        }
        let t = correlation_tensor(&isotropic(Visibility::new(core::f64::consts::FRAC_1_SQRT_2).unwrap(), SchmidtAngle::MAXIMAL)).unwrap();
        assert!((horodecki_value(&t) - 2.0).abs() < 1e-12);
        assert!((horodecki_value(&CorrelationTensor(RealMatrix3::diag([1.0, 0.0, 0.0]))) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn horodecki_bounds_every_sampled_setting() {
        let mut rng = stream(61, 0);
        for _ in 0..200 {
            let t = correlation_tensor(&random_mixed(&mut rng, 2).unwrap()).unwrap();
            let h = horodecki_value(&t);
            for _ in 0..50 {
                let s = Settings::random(&mut rng);
                assert!(h >= i0_by_tensor(&t, &s).abs() - 1e-9);
            }
        }
    }

    #[test]
    fn lhv_enumeration() {
        for mu in 0..4 {
            assert_eq!(lhv_extremes(mu).unwrap(), (-2.0, 2.0));
            assert_eq!(lhv_max(mu).unwrap(), 2.0);
        }
        assert!(lhv_max(7).is_err());
    }

    #[test]
    fn optimiser_reaches_tsirelson_for_bell_state() {
        let mut rng = stream(67, 0);
        let opt = optimize_settings(&bell(), 0, &mut rng).unwrap();
        assert!((opt.value - TSIRELSON).abs() < 1e-6);
        let q = quad_by_trace(&bell(), &opt.settings);
        assert!((q.i0 - opt.value).abs() < 1e-12);
        for mu in 0..4 {
            let o = optimize_settings(&bell(), mu, &mut rng).unwrap();
            assert!((o.value - TSIRELSON).abs() < 1e-6);
            let m = optimize_tensor(&correlation_tensor(&bell()).unwrap(), mu, Extremum::Min, &mut rng).unwrap();
            assert!((m.value + TSIRELSON).abs() < 1e-6);
        }
    }

    #[test]
    fn optimiser_on_white_noise_returns_zero() {
        let mut rng = stream(71, 0);
        for mu in 0..4 {
            let opt = optimize_settings(&DensityMatrix::maximally_mixed(), mu, &mut rng).unwrap();
            assert!(opt.value.abs() < 1e-9);
        }
    }

    #[test]
    fn optimiser_matches_horodecki_on_random_states() {
        let mut rng = stream(73, 0);
        for k in 0..100 {
            let rho = if k % 5 == 0 { random_pure(&mut rng) } else { random_mixed(&mut rng, 1 + k % 4).unwrap() };
            let h = horodecki_value(&correlation_tensor(&rho).unwrap());
            let opt = optimize_settings(&rho, 0, &mut rng).unwrap();
            assert!((opt.value - h).abs() < 1e-5, "state {k}: {} vs {h}", opt.value);
        }
    }
}
