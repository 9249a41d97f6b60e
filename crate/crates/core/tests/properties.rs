use core::f64::consts::PI;

use proptest::prelude::*;

use chsh_core::bell::{correlation_tensor, horodecki_value, quad_by_tensor, quad_by_trace, TSIRELSON};
use chsh_core::geometry::{angle_tuple, Direction, Settings};
use chsh_core::rng::stream;
use chsh_core::states::{isotropic, mix, random_mixed, SchmidtAngle, Visibility};
use chsh_core::tradeoff::{delta_gap, operator_identity_residuals, pair_radius, principal_axes, EllipseCase, Parity, VertexEllipse};

fn direction() -> impl Strategy<Value = Direction> {
    (-1.0f64..=1.0, 0.0..2.0 * PI).prop_map(|(z, phi)| Direction::from_spherical(z.acos(), phi))
}

fn settings() -> impl Strategy<Value = Settings> {
    (direction(), direction(), direction(), direction()).prop_map(|(a1, a2, b1, b2)| Settings::new(a1, a2, b1, b2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn every_pair_obeys_the_circle(seed in any::<u64>(), rank in 1usize..=4, s in settings()) {
        let rho = random_mixed(&mut stream(seed, 0), rank).unwrap();
        let q = quad_by_trace(&rho, &s);
        for mu in 0..4 {
            for nu in mu + 1..4 {
                prop_assert!(pair_radius(&q, mu, nu).unwrap() <= 8.0 + 1e-9);
            }
        }
        prop_assert!(q.max_abs() <= TSIRELSON + 1e-9);
    }

    #[test]
    fn trace_and_tensor_routes_agree(seed in any::<u64>(), s in settings()) {
        let rho = random_mixed(&mut stream(seed, 1), 4).unwrap();
        let a = quad_by_trace(&rho, &s).to_array();
        let b = quad_by_tensor(&correlation_tensor(&rho).unwrap(), &s).to_array();
        for mu in 0..4 {
            prop_assert!((a[mu] - b[mu]).abs() < 1e-12);
        }
    }

    #[test]
    fn identities_hold_for_any_settings(s in settings()) {
        prop_assert!(operator_identity_residuals(&s).max() <= 1e-12);
    }

    #[test]
    fn relabelling_permutes_the_quad(seed in any::<u64>(), s in settings()) {
        let rho = random_mixed(&mut stream(seed, 2), 3).unwrap();
        let [i0, i1, i2, i3] = quad_by_trace(&rho, &s).to_array();
        let a = quad_by_trace(&rho, &s.swap_alice()).to_array();
        let b = quad_by_trace(&rho, &s.swap_bob()).to_array();
        for (x, y) in a.iter().zip([i2, i3, i0, i1]).chain(b.iter().zip([i3, i2, i1, i0])) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn mixtures_interpolate(seed in any::<u64>(), w in 0.0f64..=1.0, s in settings()) {
        let mut rng = stream(seed, 3);
        let (r1, r2) = (random_mixed(&mut rng, 1).unwrap(), random_mixed(&mut rng, 2).unwrap());
        let m = mix(&[(w, r1), (1.0 - w, r2)]).unwrap();
        let (q, q1, q2) = (quad_by_trace(&m, &s), quad_by_trace(&r1, &s), quad_by_trace(&r2, &s));
        prop_assert!((q.i0 - (w * q1.i0 + (1.0 - w) * q2.i0)).abs() < 1e-12);
        prop_assert!((q.i1 - (w * q1.i1 + (1.0 - w) * q2.i1)).abs() < 1e-12);
    }

    #[test]
    fn isotropic_horodecki_scales_with_visibility(v in 0.0f64..=1.0, th in 0.0f64..=PI / 2.0) {
        let rho = isotropic(Visibility::new(v).unwrap(), SchmidtAngle::new(th).unwrap());
        let h = horodecki_value(&correlation_tensor(&rho).unwrap());
        let s2 = (2.0 * th).sin();
        prop_assert!((h - 2.0 * v * (1.0 + s2 * s2).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn geometric_tuples_obey_the_ellipse_bound(a1 in direction(), a2 in direction(), d in direction(), dp in direction()) {
        let t = angle_tuple(&a1, &a2, &d, &dp).unwrap();
        prop_assert!(t.admissible_box().contains(t.u, t.v, 1e-9));
        let g = delta_gap(t.alpha, t.alpha_p, t.beta, t.delta, t.delta_p).unwrap();
        prop_assert!(g.delta >= -1e-10 && g.delta_prime >= -1e-10);
        prop_assert!(g.v2 <= 8.0 + 1e-9);
        let case = EllipseCase::from_tuple(&t, 0.4).unwrap();
        if let Ok(ax) = case.even {
            prop_assert!((ax.v2 - g.v2).abs() < 1e-9);
        }
        let slack = VertexEllipse::new(t.alpha, t.alpha_p).slack(t.u, t.v);
        prop_assert!((g.delta_prime - 4.0 * slack).abs() < 1e-11);
    }

    #[test]
    fn principal_frame_preserves_the_form(a in 0.0f64..4.0, b in 0.0f64..4.0, t in -1.0f64..=1.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let c = t * (a * b).sqrt();
        for parity in [Parity::Even, Parity::Odd] {
            if let Ok(ax) = principal_axes(a, b, c, 1.0, parity) {
                let (p, q) = ax.rotate(x, y);
                let lhs = ax.a_p * p * p + ax.b_p * q * q;
                prop_assert!((lhs - (a * x * x + b * y * y + 2.0 * c * x * y)).abs() < 1e-11);
                prop_assert!((ax.a_p * ax.b_p - (a * b - c * c)).abs() < 1e-10);
            }
        }
    }
}
