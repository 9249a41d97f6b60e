//! Seeded Monte Carlo clouds in the `⟨I₀⟩⟨I₁⟩`-plane.
//!
//! Sample `k` of a scan always draws from `stream(seed, k)`, so a scan can be
//! cut into index ranges, run anywhere, and concatenated in index order
//! without changing a single bit.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use core::ops::Range;

#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::bell::{correlation_tensor, optimize_tensor, quad_by_trace, BellQuad, Extremum};
use crate::error::{Error, Result};
use crate::geometry::Settings;
use crate::rng::stream;
use crate::states::{isotropic, DensityMatrix, SchmidtAngle, Visibility};
use crate::tradeoff::CIRCLE_TOL;

/// Which extremum a star-scan sample was optimised for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quarter {
    I0Max,
    I0Min,
    I1Max,
    I1Min,
}

impl Quarter {
    pub const ALL: [Quarter; 4] = [Quarter::I0Max, Quarter::I0Min, Quarter::I1Max, Quarter::I1Min];

    pub fn index(self) -> usize {
        self.target().0
    }

    /// `(μ, extremum)` optimised in this quarter.
    pub fn target(self) -> (usize, Extremum) {
        match self {
            Quarter::I0Max => (0, Extremum::Max),
            Quarter::I0Min => (0, Extremum::Min),
            Quarter::I1Max => (1, Extremum::Max),
            Quarter::I1Min => (1, Extremum::Min),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Quarter::I0Max => "i0max",
            Quarter::I0Min => "i0min",
            Quarter::I1Max => "i1max",
            Quarter::I1Min => "i1min",
        }
    }

    pub fn from_position(k: usize) -> Quarter {
        Quarter::ALL[k % 4]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub idx: u64,
    pub i0: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    /// Isotropic-state parameters `(V, ϑ)` when the state is one.
    pub v: Option<f64>,
    pub theta: Option<f64>,
    pub quarter: Option<Quarter>,
}

impl ScanPoint {
    pub fn from_quad(idx: u64, q: &BellQuad) -> Self {
        ScanPoint { idx, i0: q.i0, i1: q.i1, i2: q.i2, i3: q.i3, v: None, theta: None, quarter: None }
    }

    pub fn radius(&self) -> f64 {
        (self.i0 * self.i0 + self.i1 * self.i1).sqrt()
    }

    pub fn in_circle(&self) -> bool {
        self.i0 * self.i0 + self.i1 * self.i1 <= 8.0 + CIRCLE_TOL
    }

    pub fn in_lhv_square(&self) -> bool {
        self.i0.abs() <= 2.0 && self.i1.abs() <= 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScanSummary {
    pub n: u64,
    pub max_radius: f64,
    pub count_outside_lhv_square: u64,
    pub count_outside_circle: u64,
    pub seed: u64,
}

impl ScanSummary {
    pub fn passes(&self) -> bool {
        self.count_outside_circle == 0
    }
}

pub fn summarize(points: &[ScanPoint], seed: u64) -> ScanSummary {
    let mut s = ScanSummary { seed, ..ScanSummary::default() };
    for p in points {
        s.n += 1;
        s.max_radius = s.max_radius.max(p.radius());
        s.count_outside_lhv_square += u64::from(!p.in_lhv_square());
        s.count_outside_circle += u64::from(!p.in_circle());
    }
    s
}

/// Points `range` of a random-direction scan of `rho`.
pub fn scan_directions_range(rho: &DensityMatrix, range: Range<u64>, seed: u64) -> Vec<ScanPoint> {
    range
        .map(|idx| {
            let mut rng = stream(seed, idx);
            ScanPoint::from_quad(idx, &quad_by_trace(rho, &Settings::random(&mut rng)))
        })
        .collect()
}

/// `n` uniformly random settings applied to `rho`.
pub fn scan_random_directions(rho: &DensityMatrix, n: u64, seed: u64) -> Result<(Vec<ScanPoint>, ScanSummary)> {
    if n == 0 {
        return Err(Error::OutOfRange { name: "n", value: 0.0, lo: 1.0, hi: f64::INFINITY });
    }
    let points = scan_directions_range(rho, 0..n, seed);
    let summary = summarize(&points, seed);
    Ok((points, summary))
}

/// Parameters of the eight-pointed-star scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarConfig {
    pub n_per_quarter: u64,
    pub seed: u64,
    /// `V` is drawn uniformly from this interval.
    pub v_range: (f64, f64),
    /// `ϑ` is drawn uniformly from this interval.
    pub theta_range: (f64, f64),
}

impl StarConfig {
    pub fn new(n_per_quarter: u64, seed: u64) -> Self {
        StarConfig { n_per_quarter, seed, v_range: (0.0, 1.0), theta_range: (0.0, FRAC_PI_2) }
    }

    pub fn total(&self) -> u64 {
        4 * self.n_per_quarter
    }

    fn validate(&self) -> Result<()> {
        if self.n_per_quarter == 0 {
            return Err(Error::OutOfRange { name: "n", value: 0.0, lo: 1.0, hi: f64::INFINITY });
        }
        let (v0, v1) = self.v_range;
        Visibility::new(v0)?;
        Visibility::new(v1)?;
        let (t0, t1) = self.theta_range;
        SchmidtAngle::new(t0)?;
        SchmidtAngle::new(t1)?;
        if v0 > v1 {
            return Err(Error::OutOfRange { name: "V", value: v0, lo: 0.0, hi: v1 });
        }
        if t0 > t1 {
            return Err(Error::OutOfRange { name: "theta", value: t0, lo: 0.0, hi: t1 });
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// One star sample: optimise the quarter's extremum for `isotropic(V, ϑ)`
/// and record where those settings land.
pub fn star_point<R: Rng + ?Sized>(idx: u64, v: Visibility, theta: SchmidtAngle, quarter: Quarter, rng: &mut R) -> Result<ScanPoint> {
    let rho = isotropic(v, theta);
    let (mu, which) = quarter.target();
    let opt = optimize_tensor(&correlation_tensor(&rho)?, mu, which, rng)?;
    let q = quad_by_trace(&rho, &opt.settings);
    Ok(ScanPoint { v: Some(v.value()), theta: Some(theta.radians()), quarter: Some(quarter), ..ScanPoint::from_quad(idx, &q) })
}

/// Global indices `range` of the star scan; index `k` belongs to quarter
/// `k / n_per_quarter`.
pub fn scan_star_range(cfg: &StarConfig, range: Range<u64>) -> Result<Vec<ScanPoint>> {
    cfg.validate()?;
    range
        .map(|idx| {
            let mut rng = stream(cfg.seed, idx);
            let quarter = Quarter::from_position((idx / cfg.n_per_quarter) as usize);
            let v = Visibility::new(uniform(&mut rng, cfg.v_range))?;
            let theta = SchmidtAngle::new(uniform(&mut rng, cfg.theta_range))?;
            star_point(idx, v, theta, quarter, &mut rng)
        })
        .collect()
}

pub fn scan_star(cfg: &StarConfig) -> Result<(Vec<ScanPoint>, ScanSummary)> {
    let points = scan_star_range(cfg, 0..cfg.total())?;
    let summary = summarize(&points, cfg.seed);
    Ok((points, summary))
}

/// `|partner|² ≤ 8 − extremal² + tol` for a star point.
pub fn star_partner_slack(p: &ScanPoint) -> Option<f64> {
    let (own, partner) = match p.quarter? {
        Quarter::I0Max | Quarter::I0Min => (p.i0, p.i1),
        Quarter::I1Max | Quarter::I1Min => (p.i1, p.i0),
    };
    Some(8.0 - own * own - partner * partner)
}

/// Linear-interpolation quantile of already sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let x = p.clamp(0.0, 1.0) * (n - 1) as f64;
            let k = (x.floor() as usize).min(n - 2);
            let f = x - k as f64;
            sorted[k] + f * (sorted[k + 1] - sorted[k])
        }
    }
}

/// Sorted radii of the points in one quarter.
pub fn quarter_radii(points: &[ScanPoint], quarter: Quarter) -> Vec<f64> {
    let mut r: Vec<f64> = points.iter().filter(|p| p.quarter == Some(quarter)).map(ScanPoint::radius).collect();
    r.sort_by(f64::total_cmp);
    r
}

/// Largest gap between the `ps` quantiles of the radii of two quarters.
pub fn quantile_gap(points: &[ScanPoint], a: Quarter, b: Quarter, ps: &[f64]) -> f64 {
    let (ra, rb) = (quarter_radii(points, a), quarter_radii(points, b));
    ps.iter().map(|&p| (quantile(&ra, p) - quantile(&rb, p)).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::TSIRELSON;
    use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn iso(v: f64, th: f64) -> DensityMatrix {
        isotropic(Visibility::new(v).unwrap(), SchmidtAngle::new(th).unwrap())
    }

    #[test]
    fn maximal_cloud_fills_the_circle() {
        let (_, s) = scan_random_directions(&iso(1.0, FRAC_PI_4), 50_000, 11).unwrap();
        assert!(s.max_radius <= TSIRELSON + 1e-9);
        assert!(s.max_radius >= TSIRELSON - 0.15);
        assert_eq!(s.count_outside_circle, 0);
        assert_eq!(s.n, 50_000);
    }

    #[test]
    fn weak_cloud_stays_within_horodecki_radius() {
        let (_, s) = scan_random_directions(&iso(1.0 / 3.0, FRAC_PI_4), 50_000, 12).unwrap();
        assert!(s.max_radius <= TSIRELSON / 3.0 + 1e-9);
        assert_eq!(s.count_outside_lhv_square, 0);
    }

    #[test]
    fn boundary_visibility_never_leaves_the_square() {
        let (_, s) = scan_random_directions(&iso(FRAC_1_SQRT_2, FRAC_PI_4), 20_000, 13).unwrap();
        assert!(s.max_radius <= 2.0 + 1e-9);
        assert_eq!(s.count_outside_lhv_square, 0);
    }

    #[test]
    fn white_noise_collapses_to_origin() {
        let (pts, _) = scan_random_directions(&DensityMatrix::maximally_mixed(), 100, 14).unwrap();
        assert!(pts.iter().all(|p| p.i0 == 0.0 && p.i1 == 0.0 && p.i2 == 0.0 && p.i3 == 0.0));
    }

    #[test]
    fn empty_scan_is_rejected() {
        assert!(scan_random_directions(&DensityMatrix::maximally_mixed(), 0, 1).is_err());
        assert!(scan_star(&StarConfig::new(0, 1)).is_err());
    }

    #[test]
    fn ranges_concatenate_to_the_full_scan() {
        let rho = iso(0.8, 0.5);
        let (full, _) = scan_random_directions(&rho, 500, 15).unwrap();
        let mut parts = Vec::new();
        for r in [0..7, 7..250, 250..251, 251..500] {
            parts.extend(scan_directions_range(&rho, r, 15));
        }
        assert_eq!(full, parts);
        let (again, _) = scan_random_directions(&rho, 500, 15).unwrap();
        assert_eq!(full, again);
        let (other, _) = scan_random_directions(&rho, 500, 16).unwrap();
        assert_ne!(full, other);
    }

    #[test]
    fn summary_examples() {
        assert_eq!(summarize(&[], 3), ScanSummary { seed: 3, ..ScanSummary::default() });
        let p = ScanPoint::from_quad(0, &BellQuad::from_array([TSIRELSON, 0.0, 0.0, 0.0]));
        let s = summarize(&[p], 0);
        assert_eq!(s.max_radius, TSIRELSON);
        assert_eq!((s.count_outside_lhv_square, s.count_outside_circle), (1, 0));
        let bad = ScanPoint::from_quad(1, &BellQuad::from_array([3.0, 3.0, 0.0, 0.0]));
        let s = summarize(&[p, bad], 0);
        assert_eq!(s.count_outside_circle, 1);
        assert!(!s.passes());
    }

    #[test]
    fn star_point_examples() {
        let mut rng = stream(17, 0);
        let p = star_point(0, Visibility::new(1.0).unwrap(), SchmidtAngle::MAXIMAL, Quarter::I0Max, &mut rng).unwrap();
        assert!((p.i0 - TSIRELSON).abs() < 1e-6 && p.i1.abs() < 1e-6);
        let p = star_point(0, Visibility::new(1.0).unwrap(), SchmidtAngle::MAXIMAL, Quarter::I1Min, &mut rng).unwrap();
        assert!((p.i1 + TSIRELSON).abs() < 1e-6 && p.i0.abs() < 1e-6);
        let p = star_point(0, Visibility::new(0.0).unwrap(), SchmidtAngle::new(0.3).unwrap(), Quarter::I0Max, &mut rng).unwrap();
        assert!(p.i0.abs() < 1e-12 && p.i1.abs() < 1e-12);
    }

    #[test]
    fn star_points_respect_the_theorem_pointwise() {
        let cfg = StarConfig::new(500, 18);
        let (pts, s) = scan_star(&cfg).unwrap();
        assert_eq!(s.n, 2000);
        assert_eq!(s.count_outside_circle, 0);
        for p in &pts {
            assert!(star_partner_slack(p).unwrap() >= -1e-6);
            assert_eq!(p.quarter, Some(Quarter::from_position((p.idx / 500) as usize)));
        }
        let mid = scan_star_range(&cfg, 900..1100).unwrap();
        assert_eq!(&pts[900..1100], &mid[..]);
    }

    #[test]
    fn star_quarters_are_symmetric() {
        let (pts, _) = scan_star(&StarConfig::new(10_000, 19)).unwrap();
        let ps = [0.1, 0.25, 0.5, 0.75, 0.9];
        assert!(quantile_gap(&pts, Quarter::I0Max, Quarter::I1Max, &ps) < 0.05);
        assert!(quantile_gap(&pts, Quarter::I0Min, Quarter::I1Min, &ps) < 0.05);
    }

    #[test]
    fn quantile_examples() {
        assert!(quantile(&[], 0.5).is_nan());
        assert_eq!(quantile(&[4.0], 0.9), 4.0);
        assert_eq!(quantile(&[0.0, 1.0, 2.0], 0.5), 1.0);
        assert_eq!(quantile(&[0.0, 1.0, 2.0], 0.75), 1.5);
        assert_eq!(quantile(&[0.0, 1.0], 1.0), 1.0);
    }
}
