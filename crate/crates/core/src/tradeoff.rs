//! The tradeoff `⟨I_μ⟩² + ⟨I_ν⟩² ≤ 8` and the machinery behind it.
//!
//! Two independent arguments are implemented:
//!
//! * For the pairs `(I₀, I₂)` and `(I₀, I₃)` the operator identities
//!   `I₀² + I₂² = I₀² + I₃² = 8·𝟙` together with non-negative variances.
//! * For `(I₀, I₁)` the ellipse pipeline. Solving the two linear equations
//!   for `D = ‖T c‖` and `D' = ‖T c'‖` and using `|D|, |D'| ≤ 1` confines
//!   `(⟨I₀⟩, ⟨I₁⟩)` to
//!
//!   ```text
//!   A·I₀² + B·I₁² + 2C·I₀I₁ ≤ r²
//!   A = u² + v²,  B = cos²α + cos²α',  C = u cosα' − v cosα
//!   r = cos(2α+β−δ) + cos(2α'+β−δ') + cos(β−δ) + cos(β−δ')
//!   ```
//!
//!   whose major semi-axis satisfies `𝒱² = r²/B' = 8 − 2Δ` with
//!   `Δ = L − R ≥ 0`.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use twofloat::TwoFloat;

use crate::bell::{bell_operators, correlation_tensor, observable, quad_by_trace, BellQuad, CorrelationTensor};
use crate::error::{Error, Result};
use crate::geometry::{angle_tuple, bob_midframe, delta_interval, image_frame, random_direction, AngleTuple, Direction, Settings};
use crate::numerics::{kron, ComplexMatrix2, ComplexMatrix4, Vector3};
use crate::states::DensityMatrix;

/// Slack on the circle `⟨I_μ⟩² + ⟨I_ν⟩² ≤ 8`.
pub const CIRCLE_TOL: f64 = 1e-9;
/// Slack on exact operator identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Slack on geometric consistency of the ellipse pipeline.
pub const PIPELINE_TOL: f64 = 1e-9;
/// Slack allowed on `δ ∈ [0, 2α]`.
pub const INTERVAL_TOL: f64 = 1e-12;
/// Principal coefficients below this make the ellipse unbounded.
pub const DEGENERATE_AXIS_TOL: f64 = 1e-14;
/// Determinant of the `(D, D')` system below which it is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// `⟨I_μ⟩² + ⟨I_ν⟩²`.
pub fn pair_radius(q: &BellQuad, mu: usize, nu: usize) -> Result<f64> {
    if mu == nu {
        return Err(Error::SameIndex(mu));
    }
    let (a, b) = (q.get(mu)?, q.get(nu)?);
    Ok(a * a + b * b)
}

/// Largest entry of each operator identity residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// `I₀² + I₂² − 8·𝟙`
    pub r02: f64,
    /// `I₀² + I₃² − 8·𝟙`
    pub r03: f64,
    /// `I₀² − 4·𝟙 + [A₁, A₂] ⊗ [B₁, B₂]`
    pub rcomm: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.r02.max(self.r03).max(self.rcomm)
    }
}

fn commutator(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix2 {
    *a * *b - *b * *a
}

pub fn operator_identity_residuals(s: &Settings) -> IdentityResiduals {
    let [i0, _, i2, i3] = bell_operators(s);
    let id = ComplexMatrix4::identity();
    let sq0 = i0 * i0;
    let ca = commutator(&observable(&s.a1), &observable(&s.a2));
    let cb = commutator(&observable(&s.b1), &observable(&s.b2));
    IdentityResiduals {
        r02: (sq0 + i2 * i2 - id.scale(8.0)).max_abs(),
        r03: (sq0 + i3 * i3 - id.scale(8.0)).max_abs(),
        rcomm: (sq0 - id.scale(4.0) + kron(&ca, &cb)).max_abs(),
    }
}

/// Coefficients of `A·I₀² + B·I₁² + 2C·I₀I₁ ≤ r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseCoeffs {
    pub u: f64,
    pub v: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r2: f64,
}

impl EllipseCoeffs {
    pub fn quadratic_form(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + self.b * y * y + 2.0 * self.c * x * y
    }
}

fn check_interval(name: &'static str, delta: f64, alpha: f64) -> Result<()> {
    let (lo, hi) = delta_interval(alpha);
    if !(delta >= lo - INTERVAL_TOL && delta <= hi + INTERVAL_TOL) {
        return Err(Error::BadInterval { name, value: delta, lo, hi });
    }
    Ok(())
}

pub fn ellipse_coeffs(alpha: f64, alpha_p: f64, beta: f64, delta: f64, delta_p: f64) -> Result<EllipseCoeffs> {
    check_interval("delta", delta, alpha)?;
    check_interval("delta'", delta_p, alpha_p)?;
    let u = (alpha + beta - delta).cos();
    let v = (alpha_p + beta - delta_p).cos();
    let (ca, cap) = (alpha.cos(), alpha_p.cos());
    let r = (2.0 * alpha + beta - delta).cos() + (2.0 * alpha_p + beta - delta_p).cos() + (beta - delta).cos() + (beta - delta_p).cos();
    Ok(EllipseCoeffs { u, v, a: u * u + v * v, b: ca * ca + cap * cap, c: u * cap - v * ca, r2: r * r })
}

/// `A`, `B`, `C`, `r²` rebuilt in double-double from the rounded cosines,
/// so `AB − C²` is not lost to cancellation for thin ellipses.
fn coeffs_dd(e: &EllipseCoeffs, alpha: f64, alpha_p: f64, beta: f64, delta: f64, delta_p: f64) -> [TwoFloat; 4] {
    let dd = TwoFloat::from;
    let (u, v) = (dd(e.u), dd(e.v));
    let (ca, cap) = (dd(alpha.cos()), dd(alpha_p.cos()));
    let r = dd((2.0 * alpha + beta - delta).cos())
        + dd((2.0 * alpha_p + beta - delta_p).cos())
        + dd((beta - delta).cos())
        + dd((beta - delta_p).cos());
    [u * u + v * v, ca * ca + cap * cap, u * cap - v * ca, r * r]
}

/// Parity of `k` in `2ξ + η = kπ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// The ellipse in the rotated frame where the cross term vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalAxes {
    pub a_p: f64,
    pub b_p: f64,
    /// Rotation angle taking `(I₀, I₁)` to the principal frame.
    pub xi: f64,
    pub parity: Parity,
    /// `r²/A'`
    pub u2: f64,
    /// `r²/B'`
    pub v2: f64,
}

impl PrincipalAxes {
    /// `(cosξ·x − sinξ·y, sinξ·x + cosξ·y)`.
    pub fn rotate(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.xi.sin_cos();
        (c * x - s * y, s * x + c * y)
    }
}

/// Rotates `A·x² + B·y² + 2C·xy` to its principal frame.
///
/// `ξ = (kπ − η)/2` with `cos η = (A − B)/ρ`, `sin η = 2C/ρ`,
/// `ρ = √((A − B)² + 4C²)`; `η = 0` when `ρ = 0`. Even `k` puts the larger
/// coefficient `(A + B + ρ)/2` on the first axis, odd `k` on the second.
/// The smaller one is taken as `(AB − C²)` over the larger, in double-double
/// arithmetic, so it keeps full relative accuracy when the ellipse is thin.
pub fn principal_axes(a: f64, b: f64, c: f64, r2: f64, parity: Parity) -> Result<PrincipalAxes> {
    let dd = TwoFloat::from;
    principal_axes_dd(dd(a), dd(b), dd(c), dd(r2), parity)
}

fn principal_axes_dd(a: TwoFloat, b: TwoFloat, c: TwoFloat, r2: TwoFloat, parity: Parity) -> Result<PrincipalAxes> {
    let (af, bf, cf) = (f64::from(a), f64::from(b), f64::from(c));
    let eta = if af == bf && cf == 0.0 { 0.0 } else { (2.0 * cf).atan2(af - bf) };
    let k = match parity {
        Parity::Even => 0.0,
        Parity::Odd => 1.0,
    };
    let xi = (k * PI - eta) / 2.0;

    let diff = a - b;
    let rho = (diff * diff + c * c * 4.0).sqrt();
    let major = (a + b + rho) / 2.0;
    let det = a * b - c * c;
    let minor = if f64::from(major) > 0.0 { det / major } else { TwoFloat::from(0.0) };
    let (a_p, b_p) = match parity {
        Parity::Even => (major, minor),
        Parity::Odd => (minor, major),
    };
    let (a_pf, b_pf, r2f) = (f64::from(a_p), f64::from(b_p), f64::from(r2));
    if r2f > 0.0 {
        let small = a_pf.min(b_pf);
        if small < DEGENERATE_AXIS_TOL {
            return Err(Error::DegenerateEllipse(small));
        }
    }
    let ratio = |p: TwoFloat| if r2f == 0.0 { 0.0 } else { f64::from(r2 / p) };
    Ok(PrincipalAxes { a_p: a_pf, b_p: b_pf, xi, parity, u2: ratio(a_p), v2: ratio(b_p) })
}

/// `L`, `R` and the gaps `Δ = L − R`, `Δ' = L² − R²`, with `𝒱² = 8 − 2Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaGap {
    pub l: f64,
    pub r: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub v2: f64,
}

pub fn delta_gap(alpha: f64, alpha_p: f64, beta: f64, delta: f64, delta_p: f64) -> Result<DeltaGap> {
    let e = ellipse_coeffs(alpha, alpha_p, beta, delta, delta_p)?;
    Ok(gap_from_uv(e.u, e.v, alpha, alpha_p))
}

fn gap_from_uv(u: f64, v: f64, alpha: f64, alpha_p: f64) -> DeltaGap {
    let (ca, cap) = (alpha.cos(), alpha_p.cos());
    let (sa, sap) = (alpha.sin(), alpha_p.sin());
    let l = 2.0 - u * u - v * v + sa * sa + sap * sap;
    let r = ((u - ca).powi(2) + (v - cap).powi(2)).sqrt() * ((u + ca).powi(2) + (v + cap).powi(2)).sqrt();
    let delta = l - r;
    DeltaGap { l, r, delta, delta_prime: l * l - r * r, v2: 8.0 - 2.0 * delta }
}

/// The ellipse `A''u² + B''v² + 2C''uv ≤ R''²` in the `(u, v)`-plane that
/// is equivalent to `Δ' ≥ 0`; in fact `Δ' = 4·(R''² − A''u² − B''v² − 2C''uv)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexEllipse {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r2: f64,
}

impl VertexEllipse {
    pub fn new(alpha: f64, alpha_p: f64) -> Self {
        let (ca, cap) = (alpha.cos(), alpha_p.cos());
        VertexEllipse { a: 2.0 - ca * ca, b: 2.0 - cap * cap, c: -ca * cap, r2: 4.0 - 2.0 * ca * ca - 2.0 * cap * cap }
    }

    /// `R''² − (A''u² + B''v² + 2C''uv)`.
    pub fn slack(&self, u: f64, v: f64) -> f64 {
        self.r2 - (self.a * u * u + self.b * v * v + 2.0 * self.c * u * v)
    }
}

/// Closed form of `Δ'` at the box corner `u = cos((−1)ˣα + β)`,
/// `v = cos((−1)ʸα' + β)`.
pub fn vertex_delta(alpha: f64, alpha_p: f64, beta: f64, x: bool, y: bool) -> f64 {
    let sx = if x { -1.0 } else { 1.0 };
    let sy = if y { -1.0 } else { 1.0 };
    let w = (2.0 * sx * alpha + beta).cos() + (2.0 * sy * alpha_p + beta).cos() - 2.0 * beta.cos();
    w * w
}

/// `Δ'` evaluated through `L² − R²` at the same corner.
pub fn vertex_delta_by_gap(alpha: f64, alpha_p: f64, beta: f64, x: bool, y: bool) -> f64 {
    let sx = if x { -1.0 } else { 1.0 };
    let sy = if y { -1.0 } else { 1.0 };
    gap_from_uv((sx * alpha + beta).cos(), (sy * alpha_p + beta).cos(), alpha, alpha_p).delta_prime
}

/// Every derived quantity of the ellipse argument for an admissible tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipseCase {
    pub alpha: f64,
    pub alpha_p: f64,
    pub beta: f64,
    pub delta: f64,
    pub delta_p: f64,
    pub theta: f64,
    pub coeffs: EllipseCoeffs,
    /// Even-`k` axes; `Err` when the ellipse is unbounded.
    pub even: Result<PrincipalAxes>,
    pub odd: Result<PrincipalAxes>,
    pub gap: DeltaGap,
    /// `Δ'` at the four corners `(x, y) = (0,0), (0,1), (1,0), (1,1)`.
    pub vertex_deltas: [f64; 4],
}

impl EllipseCase {
    pub fn new(alpha: f64, alpha_p: f64, beta: f64, delta: f64, delta_p: f64, theta: f64) -> Result<Self> {
        let coeffs = ellipse_coeffs(alpha, alpha_p, beta, delta, delta_p)?;
        let [a, b, c, r2] = coeffs_dd(&coeffs, alpha, alpha_p, beta, delta, delta_p);
        let even = principal_axes_dd(a, b, c, r2, Parity::Even);
        let odd = principal_axes_dd(a, b, c, r2, Parity::Odd);
        let gap = gap_from_uv(coeffs.u, coeffs.v, alpha, alpha_p);
        let vertex_deltas =
            [(false, false), (false, true), (true, false), (true, true)].map(|(x, y)| vertex_delta(alpha, alpha_p, beta, x, y));
        Ok(EllipseCase { alpha, alpha_p, beta, delta, delta_p, theta, coeffs, even, odd, gap, vertex_deltas })
    }

    pub fn from_tuple(t: &AngleTuple, theta: f64) -> Result<Self> {
        Self::new(t.alpha, t.alpha_p, t.beta, t.delta, t.delta_p, theta)
    }

    /// `𝒱² ≤ 8` up to [`CIRCLE_TOL`].
    pub fn passes(&self) -> bool {
        self.gap.v2 <= 8.0 + CIRCLE_TOL
    }
}

/// `D` and `D'` recovered from `(⟨I₀⟩, ⟨I₁⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolvedMagnitudes {
    pub d: f64,
    pub dp: f64,
    pub determinant: f64,
}

/// The ellipse argument applied to a concrete state and settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneCase {
    pub tuple: AngleTuple,
    pub case: EllipseCase,
    pub i0: f64,
    pub i1: f64,
    /// `‖T c‖`, `‖T c'‖` from the tensor.
    pub image_d: f64,
    pub image_dp: f64,
    pub solved: Result<SolvedMagnitudes>,
    /// `Q(I) − r²` in the original frame.
    pub excess: f64,
    /// `𝓘₀²/𝒰² + 𝓘₁²/𝒱² − 1` in the principal frame, when it exists.
    pub normalized_excess: Option<f64>,
}

impl SceneCase {
    pub fn in_circle(&self) -> bool {
        self.i0 * self.i0 + self.i1 * self.i1 <= 8.0 + CIRCLE_TOL
    }

    /// Inside the ellipse with the level set inflated by [`PIPELINE_TOL`].
    pub fn in_ellipse(&self) -> bool {
        match self.solved {
            Ok(_) => self.excess <= PIPELINE_TOL * self.case.coeffs.r2.max(1.0),
            Err(_) => self.in_circle(),
        }
    }

    pub fn magnitudes_bounded(&self) -> bool {
        match self.solved {
            Ok(s) => s.d.abs() <= 1.0 + PIPELINE_TOL && s.dp.abs() <= 1.0 + PIPELINE_TOL,
            Err(_) => true,
        }
    }
}

/// Runs the whole ellipse argument on `(ρ, s)`.
pub fn ellipse_case_from_scene(rho: &DensityMatrix, s: &Settings) -> Result<SceneCase> {
    let frame = bob_midframe(&s.b1, &s.b2);
    if frame.degenerate {
        return Err(Error::DegenerateBob);
    }
    let t = correlation_tensor(rho)?;
    let img = image_frame(&t.0, &frame.c);
    let img_p = image_frame(&t.0, &frame.cp);
    let tuple = angle_tuple(&s.a1, &s.a2, &img.direction, &img_p.direction)?;
    let case = EllipseCase::from_tuple(&tuple, frame.theta)?;
    let q = quad_by_trace(rho, s);
    let (i0, i1) = (q.i0, q.i1);

    // ⟨I₀⟩ = 2cosθ cosα·D + 2sinθ cosα'·D'
    // ⟨I₁⟩ = 2cosθ v·D    − 2sinθ u·D'
    let (ct, st) = frame.theta.sin_cos();
    let (ct, st) = (st, ct);
    let (ca, cap) = (tuple.alpha.cos(), tuple.alpha_p.cos());
    let (u, v) = (tuple.u, tuple.v);
    let det = -4.0 * ct * st * (u * ca + v * cap);
    let solved = if det.abs() < SINGULAR_TOL {
        Err(Error::SingularSystem(det))
    } else {
        let denom = 2.0 * (u * ca + v * cap);
        let d = (i0 * u + i1 * cap) / (ct * denom);
        let dp = (i0 * v - i1 * ca) / (st * denom);
        Ok(SolvedMagnitudes { d, dp, determinant: det })
    };

    let c = &case.coeffs;
    let excess = c.quadratic_form(i0, i1) - c.r2;
    let normalized_excess = case.even.as_ref().ok().filter(|ax| ax.u2 > 0.0 && ax.v2 > 0.0).map(|ax| {
        let (x, y) = ax.rotate(i0, i1);
        x * x / ax.u2 + y * y / ax.v2 - 1.0
    });
    Ok(SceneCase { tuple, case, i0, i1, image_d: img.magnitude, image_dp: img_p.magnitude, solved, excess, normalized_excess })
}

/// A tuple realised by four random unit vectors, hence admissible.
pub fn random_admissible_tuple<R: Rng + ?Sized>(rng: &mut R) -> AngleTuple {
    loop {
        let [a1, a2, d, dp] = core::array::from_fn(|_| random_direction(rng));
        if let Ok(t) = angle_tuple(&a1, &a2, &d, &dp) {
            return t;
        }
    }
}

/// Means, second moments and variances of `I₀` and `I₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    pub mean0: f64,
    pub mean1: f64,
    pub second0: f64,
    pub second1: f64,
    pub var0: f64,
    pub var1: f64,
    /// `⟨I₀²⟩ + ⟨I₁²⟩`
    pub m2sum: f64,
}

pub fn variances(rho: &DensityMatrix, s: &Settings) -> VarianceReport {
    let [i0, i1, _, _] = bell_operators(s);
    let (mean0, mean1) = (rho.expectation(&i0), rho.expectation(&i1));
    let (second0, second1) = (rho.expectation(&(i0 * i0)), rho.expectation(&(i1 * i1)));
    VarianceReport {
        mean0,
        mean1,
        second0,
        second1,
        var0: second0 - mean0 * mean0,
        var1: second1 - mean1 * mean1,
        m2sum: second0 + second1,
    }
}

pub const M2_RESTARTS: usize = 8;
pub const M2_MAX_ITERS: usize = 500;

/// Orthonormal pair `(x, y)` with `x × y = n`, keeping `x` close to `hint`.
fn pair_with_normal(n: &Direction, hint: &Direction) -> (Direction, Direction) {
    let nv = n.vector();
    let h = hint.vector();
    let rest = h - nv.scale(nv.dot(&h));
    let x = if rest.norm() > 1e-6 { Direction::normalize(rest).expect("non-zero") } else { crate::geometry::canonical_completion(n) };
    let y = Direction::normalize(nv.cross(&x.vector())).expect("n ⟂ x");
    (x, y)
}

fn unit_or(v: Vector3, fallback: Direction) -> Direction {
    if v.norm() > 1e-300 {
        Direction::normalize(v).unwrap_or(fallback)
    } else {
        fallback
    }
}

/// Settings maximising `⟨I₀²⟩ + ⟨I₁²⟩`.
///
/// Both squares equal `4·𝟙 − [A₁,A₂]⊗[B₁,B₂]`, so the objective is
/// `8 + 8·(a₁×a₂)·T(b₁×b₂)`. The ascent alternates closed-form updates of
/// Alice's normal `a₁×a₂ ∝ T(b₁×b₂)` and Bob's `b₁×b₂ ∝ Tᵀ(a₁×a₂)`, each side
/// taken as an orthonormal pair. The reported value is the trace
/// `⟨I₀²⟩ + ⟨I₁²⟩` at the final settings.
pub fn maximize_m2sum<R: Rng + ?Sized>(rho: &DensityMatrix, rng: &mut R) -> Result<(Settings, f64)> {
    let t: CorrelationTensor = correlation_tensor(rho)?;
    let tt = t.0.transpose();
    let mut best: Option<(Settings, f64)> = None;
    for _ in 0..M2_RESTARTS {
        let mut s = Settings::random(rng);
        let normal_b = |s: &Settings| unit_or(s.b1.vector().cross(&s.b2.vector()), s.b1);
        let mut m = normal_b(&s);
        let (b1, b2) = pair_with_normal(&m, &s.b1);
        s.b1 = b1;
        s.b2 = b2;
        let mut value = f64::NEG_INFINITY;
        for _ in 0..M2_MAX_ITERS {
            let n = unit_or(t.0.mul_vec(&m.vector()), s.a1);
            let (a1, a2) = pair_with_normal(&n, &s.a1);
            s.a1 = a1;
            s.a2 = a2;
            m = unit_or(tt.mul_vec(&n.vector()), m);
            let (b1, b2) = pair_with_normal(&m, &s.b1);
            s.b1 = b1;
            s.b2 = b2;
            let next = 8.0 + 8.0 * n.vector().dot(&t.0.mul_vec(&m.vector()));
            let done = (next - value).abs() < 1e-12;
            value = next;
            if done {
                break;
            }
        }
        let measured = variances(rho, &s).m2sum;
        if best.is_none_or(|(_, v)| measured > v) {
            best = Some((s, measured));
        }
    }
    Ok(best.expect("at least one restart"))
}
