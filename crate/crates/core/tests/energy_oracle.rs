//! Energy integrand and quadrature invariants.

use casimir_core::energy::{casimir_energy, logdet_integrand, EnergySolver, Geometry, QuadratureSpec};
use proptest::prelude::*;

/// Reference from an independent dense complex implementation with
/// unscaled Bessel functions.
#[test]
fn frozen_integrand() {
    let g = Geometry::new(0.5, 1.0, 0.25).unwrap();
    let v = logdet_integrand(&g, 4, 1.0).unwrap();
    assert!((v - -0.431_913_229_0).abs() < 1e-9, "{v}");
}

#[test]
fn frozen_small_sphere_energy() {
    // Same reference implementation, l_max = 6.
    let g = Geometry::new(0.05, 1.0, 0.2).unwrap();
    let e = casimir_energy(&g, 6, &QuadratureSpec::default()).unwrap().energy;
    assert!(((e - -4.637_828_7e-5) / e).abs() < 1e-6, "{e}");
}

#[test]
fn concentric_energy_is_exactly_zero() {
    for r in [0.1, 0.5, 0.9] {
        let g = Geometry::new(r, 1.0, 0.0).unwrap();
        assert_eq!(casimir_energy(&g, 10, &QuadratureSpec::default()).unwrap().energy, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integrand_is_negative(r in 0.05f64..0.9, x in 0.05f64..0.95, kappa in 0.01f64..20.0) {
        let g = Geometry::from_fraction(r, x).unwrap();
        prop_assert!(logdet_integrand(&g, 5, kappa).unwrap() < 0.0);
    }

    #[test]
    fn energy_scales_inversely_with_size(r in 0.1f64..0.8, x in 0.1f64..0.8, s in 0.3f64..4.0) {
        let g1 = Geometry::from_fraction(r, x).unwrap();
        let gs = Geometry::new(g1.r * s, g1.big_r * s, g1.a * s).unwrap();
        let quad = QuadratureSpec::default();
        let e1 = casimir_energy(&g1, 4, &quad).unwrap().energy;
        let es = casimir_energy(&gs, 4, &quad).unwrap().energy;
        prop_assert!((es * s - e1).abs() <= 1e-10 * e1.abs(), "{} vs {}", es * s, e1);
    }

    #[test]
    fn real_route_matches_complex_route(r in 0.1f64..0.8, x in 0.05f64..0.9, kappa in 0.05f64..10.0, m in 0i64..5) {
        let g = Geometry::from_fraction(r, x).unwrap();
        let s = EnergySolver::new(g, 6).unwrap();
        let real = s.block_logdet(m, kappa).unwrap().log_det;
        let cplx = s.block_logdet_complex(m, kappa).unwrap().re;
        prop_assert!((real - cplx).abs() <= 1e-11 * real.abs().max(1e-3));
    }

    #[test]
    fn energy_decreases_with_offset(r in 0.2f64..0.7, x in 0.1f64..0.8) {
        let g1 = Geometry::from_fraction(r, x).unwrap();
        let g2 = Geometry::from_fraction(r, x + 0.05).unwrap();
        let q = QuadratureSpec::default();
        let e1 = casimir_energy(&g1, 5, &q).unwrap().energy;
        let e2 = casimir_energy(&g2, 5, &q).unwrap().energy;
        prop_assert!(e2 < e1 && e1 < 0.0);
    }
}
