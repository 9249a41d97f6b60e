//! Measurement directions and the angle bookkeeping of the ellipse bound.
//!
//! Bob's pair `(b₁, b₂)` is re-expressed in its mid-frame
//! `2c·cosθ = b₁ + b₂`, `2c'·sinθ = b₁ − b₂`; the correlation tensor maps the
//! two frame vectors onto `T·c = D·d` and `T·c' = D'·d'`. Alice's directions
//! are then described relative to `d, d'` by
//!
//! ```text
//! a₁·d  = cos α          a₂·d' = cos α'         d·d' = cos β
//! a₁·d' = cos(α + β − δ) =: u
//! a₂·d  = cos(α' + β − δ') =: v
//! ```
//!
//! with `δ ∈ [0, 2α]` and `δ' ∈ [0, 2α']`, which confines `(u, v)` to the box
//! returned by [`admissible_box`].

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{RealMatrix3, Vector3};

/// Tolerance on `‖v‖ − 1` for a [`Direction`].
pub const UNIT_TOL: f64 = 1e-12;
/// Below this, `b₁ ± b₂` is treated as zero and the mid-frame is degenerate.
pub const DEGENERATE_BOB_TOL: f64 = 1e-9;
/// Below this, `T·c` is treated as zero.
pub const ZERO_IMAGE_TOL: f64 = 1e-12;
/// Largest mismatch allowed when recovering `δ` from `u`.
pub const BRANCH_TOL: f64 = 1e-9;

/// Unit vector in ℝ³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Vector3);

impl Direction {
    pub const X: Direction = Direction(Vector3::new(1.0, 0.0, 0.0));
    pub const Y: Direction = Direction(Vector3::new(0.0, 1.0, 0.0));
    pub const Z: Direction = Direction(Vector3::new(0.0, 0.0, 1.0));

    /// Accepts `(x, y, z)` only if it is already unit length.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vector3::new(x, y, z);
        let n = v.norm();
        if !v.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit(n));
        }
        Ok(Direction(v))
    }

    /// Normalises a nonzero finite vector.
    pub fn normalize(v: Vector3) -> Result<Self> {
        let n = v.norm();
        if !v.is_finite() || !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotUnit(n));
        }
        Ok(Direction(v.scale(1.0 / n)))
    }

    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        Direction(Vector3::new(polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()))
    }

    pub fn vector(&self) -> Vector3 {
        self.0
    }

    pub fn x(&self) -> f64 {
        self.0 .0[0]
    }

    pub fn y(&self) -> f64 {
        self.0 .0[1]
    }

    pub fn z(&self) -> f64 {
        self.0 .0[2]
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn neg(&self) -> Direction {
        Direction(-self.0)
    }

    /// Angle to `other` in `[0, π]`, accurate near 0 and π.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        self.0.cross(&other.0).norm().atan2(self.0.dot(&other.0))
    }
}

/// The four measurement axes `(a₁, a₂, b₁, b₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub a1: Direction,
    pub a2: Direction,
    pub b1: Direction,
    pub b2: Direction,
}

impl Settings {
    pub fn new(a1: Direction, a2: Direction, b1: Direction, b2: Direction) -> Self {
        Settings { a1, a2, b1, b2 }
    }

    /// From twelve numbers `a1x a1y a1z a2x … b2z`; each triple is normalised.
    pub fn from_components(v: [f64; 12]) -> Result<Self> {
        let d = |i: usize| Direction::normalize(Vector3::new(v[3 * i], v[3 * i + 1], v[3 * i + 2]));
        Ok(Settings::new(d(0)?, d(1)?, d(2)?, d(3)?))
    }

    pub fn components(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (i, d) in [self.a1, self.a2, self.b1, self.b2].iter().enumerate() {
            out[3 * i..3 * i + 3].copy_from_slice(&d.vector().0);
        }
        out
    }

    /// `a₁ = x̂, a₂ = ẑ, b₁,₂ = (x̂ ± ẑ)/√2`: reaches `2√2` on `I₀` for `Φ⁺`.
    pub fn optimal_bell() -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        Settings { a1: Direction::X, a2: Direction::Z, b1: Direction(Vector3::new(h, 0.0, h)), b2: Direction(Vector3::new(h, 0.0, -h)) }
    }

    pub fn swap_alice(&self) -> Self {
        Settings { a1: self.a2, a2: self.a1, ..*self }
    }

    pub fn swap_bob(&self) -> Self {
        Settings { b1: self.b2, b2: self.b1, ..*self }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let a1 = random_direction(rng);
        let a2 = random_direction(rng);
        let b1 = random_direction(rng);
        let b2 = random_direction(rng);
        Settings { a1, a2, b1, b2 }
    }
}

/// First of `x̂, ŷ, ẑ` with `|e·v| < 0.9`, orthogonalised against `v`.
pub fn canonical_completion(v: &Direction) -> Direction {
    let axis = [Direction::X, Direction::Y, Direction::Z]
        .into_iter()
        .find(|e| e.dot(v).abs() < 0.9)
        .expect("a unit vector has a component below 0.9 in magnitude");
    let w = axis.vector() - v.vector().scale(axis.dot(v));
    Direction::normalize(w).expect("orthogonalised axis is nonzero")
}

/// Bob's mid-frame `(c, c', θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BobFrame {
    pub c: Direction,
    pub cp: Direction,
    pub theta: f64,
    /// `b₁ = ±b₂`: one frame vector came from [`canonical_completion`].
    pub degenerate: bool,
}

impl BobFrame {
    /// `2c·cosθ` and `2c'·sinθ`, which should give back `b₁ + b₂` and `b₁ − b₂`.
    pub fn reconstruct(&self) -> (Vector3, Vector3) {
        (self.c.vector().scale(2.0 * self.theta.cos()), self.cp.vector().scale(2.0 * self.theta.sin()))
    }
}

pub fn bob_midframe(b1: &Direction, b2: &Direction) -> BobFrame {
    let sum = b1.vector() + b2.vector();
    let diff = b1.vector() - b2.vector();
    let (ns, nd) = (sum.norm(), diff.norm());
    let theta = nd.atan2(ns);
    if ns < DEGENERATE_BOB_TOL {
        let cp = Direction(diff.scale(1.0 / nd));
        BobFrame { c: canonical_completion(&cp), cp, theta, degenerate: true }
    } else if nd < DEGENERATE_BOB_TOL {
        let c = Direction(sum.scale(1.0 / ns));
        BobFrame { c, cp: canonical_completion(&c), theta, degenerate: true }
    } else {
        // Gram-Schmidt the difference so c ⟂ c' survives rounding
        let c = Direction(sum.scale(1.0 / ns));
        let cp = Direction::normalize(diff - c.vector().scale(c.vector().dot(&diff))).unwrap_or_else(|_| canonical_completion(&c));
        BobFrame { c, cp, theta, degenerate: false }
    }
}

/// `T·c = D·d` with `D ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageFrame {
    pub magnitude: f64,
    pub direction: Direction,
}

pub fn image_frame(t: &RealMatrix3, c: &Direction) -> ImageFrame {
    let tc = t.mul_vec(&c.vector());
    let n = tc.norm();
    if n < ZERO_IMAGE_TOL {
        ImageFrame { magnitude: 0.0, direction: Direction::X }
    } else {
        ImageFrame { magnitude: n, direction: Direction(tc.scale(1.0 / n)) }
    }
}

/// Range of `u` and `v` allowed by solid geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleBox {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl AdmissibleBox {
    pub fn contains(&self, u: f64, v: f64, tol: f64) -> bool {
        u >= self.u_min - tol && u <= self.u_max + tol && v >= self.v_min - tol && v <= self.v_max + tol
    }

    /// Corners `(x, y) ∈ {0,1}²` at `u = cos((−1)ˣα + β)`, `v = cos((−1)ʸα' + β)`.
    pub fn vertices(alpha: f64, alpha_p: f64, beta: f64) -> [(usize, usize, f64, f64); 4] {
        let sgn = |b: usize| if b == 0 { 1.0 } else { -1.0 };
        let mut out = [(0, 0, 0.0, 0.0); 4];
        for (i, (x, y)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
            out[i] = (x, y, (sgn(x) * alpha + beta).cos(), (sgn(y) * alpha_p + beta).cos());
        }
        out
    }
}

pub fn admissible_box(alpha: f64, alpha_p: f64, beta: f64) -> AdmissibleBox {
    let (u1, u2) = ((alpha + beta).cos(), (beta - alpha).cos());
    let (v1, v2) = ((alpha_p + beta).cos(), (beta - alpha_p).cos());
    AdmissibleBox { u_min: u1.min(u2), u_max: u1.max(u2), v_min: v1.min(v2), v_max: v1.max(v2) }
}

/// `[min(0, 2α), max(0, 2α)]`.
pub fn delta_interval(alpha: f64) -> (f64, f64) {
    (0.0f64.min(2.0 * alpha), 0.0f64.max(2.0 * alpha))
}

/// All `δ` in `delta_interval(alpha)` with `cos(α + β − δ) = u`.
///
/// At most three candidates exist for angles in `[0, π]`; duplicates closer
/// than `1e-12` are merged. The result is empty when `u` is unreachable.
pub fn delta_branches(alpha: f64, beta: f64, u: f64) -> ([f64; 3], usize) {
    let (lo, hi) = delta_interval(alpha);
    let phi0 = u.clamp(-1.0, 1.0).acos();
    let mut found = [0.0; 3];
    let mut n = 0;
    for phi in [phi0, -phi0, 2.0 * PI - phi0] {
        // clamping absorbs the acos error near u = ±1
        let delta = (alpha + beta - phi).clamp(lo, hi);
        if ((alpha + beta - delta).cos() - u).abs() <= BRANCH_TOL && !found[..n].iter().any(|d: &f64| (d - delta).abs() < 1e-12) {
            found[n] = delta;
            n += 1;
        }
    }
    (found, n)
}

/// The angle tuple `(α, α', β, δ, δ', u, v)` of a configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleTuple {
    pub alpha: f64,
    pub alpha_p: f64,
    pub beta: f64,
    pub delta: f64,
    pub delta_p: f64,
    pub u: f64,
    pub v: f64,
    /// Other admissible `δ` (and `δ'`) values, when the branch is not unique.
    pub alt_delta: Option<f64>,
    pub alt_delta_p: Option<f64>,
}

impl AngleTuple {
    pub fn admissible_box(&self) -> AdmissibleBox {
        admissible_box(self.alpha, self.alpha_p, self.beta)
    }
}

pub fn angle_tuple(a1: &Direction, a2: &Direction, d: &Direction, dp: &Direction) -> Result<AngleTuple> {
    let alpha = a1.angle_to(d);
    let alpha_p = a2.angle_to(dp);
    let beta = d.angle_to(dp);
    let u = a1.dot(dp);
    let v = a2.dot(d);
    let (ds, n) = delta_branches(alpha, beta, u);
    if n == 0 {
        return Err(Error::NoBranch(u));
    }
    let (dps, np) = delta_branches(alpha_p, beta, v);
    if np == 0 {
        return Err(Error::NoBranch(v));
    }
    Ok(AngleTuple {
        alpha,
        alpha_p,
        beta,
        delta: ds[0],
        delta_p: dps[0],
        u,
        v,
        alt_delta: (n > 1).then(|| ds[1]),
        alt_delta_p: (np > 1).then(|| dps[1]),
    })
}

/// Uniform on the sphere: a normalised vector of three standard normals.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Direction {
    loop {
        let v = Vector3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-300 {
            return Direction(v.scale(1.0 / n));
        }
    }
}
