//! Casimir-Polder coefficients against independently computed values and
//! the exact scattering energy.

use casimir_core::cp::{cp_coefficients, cp_coefficients_default, CpCoefficients, CpOrder, MAX_L_CUT};
use casimir_core::energy::{casimir_energy, Geometry, QuadratureSpec};
use casimir_core::scattering::{pec_polarizabilities, Polarization};
use proptest::prelude::*;

/// Reference values from an independent scipy evaluation of the same
/// integrands with unscaled Bessel functions and `l < 30`.
#[test]
fn frozen_reference_values() {
    let c = cp_coefficients_default(0.2).unwrap();
    let want = [
        (c.h1_m, 1.759_541_333_208_655_8),
        (c.h1_e, -1.425_633_253_034_001_7),
        (c.h2_m, 6.263_045_381_650_62),
        (c.h2_e, -5.195_574_284_900_601_5),
    ];
    for (got, w) in want {
        assert!(((got - w) / w).abs() < 1e-8, "{got} vs {w}");
    }
}

#[test]
fn self_convergence_at_half() {
    let base = QuadratureSpec { nodes: 32, scale: None, rel_tol: 1e-11, abs_tol: 1e-14, max_nodes: 2048 };
    let fine = QuadratureSpec { nodes: 64, rel_tol: 1e-12, ..base };
    let a = cp_coefficients(0.5, MAX_L_CUT / 2 + 1, &base).unwrap();
    let b = cp_coefficients(0.5, MAX_L_CUT, &fine).unwrap();
    for pol in Polarization::BOTH {
        for (x, y) in [(a.f(pol), b.f(pol)), (a.g(pol), b.g(pol)), (a.h1(pol), b.h1(pol)), (a.h2(pol), b.h2(pol))] {
            assert!((x - y).abs() <= 1e-8 * y.abs().max(1e-3), "{x} vs {y}");
        }
    }
}

type Getter = fn(&CpCoefficients, Polarization) -> f64;

#[test]
fn central_differences_converge_at_second_order() {
    let getters: [Getter; 2] = [|c, p| c.h1(p), |c, p| c.g(p)];
    for k in 1..=9 {
        let xi = 0.095 * k as f64;
        let h = 0.04 * (1.0 - xi);
        let c = |x: f64| cp_coefficients_default(x).unwrap();
        let pairs: Vec<_> = [h, h / 2.0, h / 4.0].iter().map(|&s| (c(xi - s), c(xi + s), s)).collect();
        for pol in Polarization::BOTH {
            for get in getters {
                let d: Vec<f64> = pairs.iter().map(|(m, p, s)| (get(p, pol) - get(m, pol)) / (2.0 * s)).collect();
                let ratio = (d[0] - d[1]) / (d[1] - d[2]);
                assert!((ratio - 4.0).abs() < 0.2, "{pol:?} xi={xi}: ratio {ratio}");
            }
        }
    }
}

#[test]
fn agrees_with_exact_energy_for_small_sphere() {
    let (r, xi) = (0.05, 0.2);
    let geom = Geometry::new(r, 1.0, xi).unwrap();
    let exact = casimir_energy(&geom, 6, &QuadratureSpec::default()).unwrap().energy;
    let c = cp_coefficients_default(xi).unwrap();
    let pols = pec_polarizabilities(2, r);
    let e3 = c.spherical_energy(&pols, 1.0, CpOrder::Third);
    let e5 = c.spherical_energy(&pols, 1.0, CpOrder::Fifth);
    assert!(((exact - e5) / exact).abs() < 0.01);
    // The quadrupole term improves the dipole estimate.
    assert!((exact - e5).abs() < (exact - e3).abs());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dipole_term_scales_as_cube(r in 0.01f64..0.2, xi in 0.05f64..0.6) {
        let c = cp_coefficients_default(xi).unwrap();
        let e1 = c.spherical_energy(&pec_polarizabilities(2, r), 1.0, CpOrder::Third);
        let e2 = c.spherical_energy(&pec_polarizabilities(2, 2.0 * r), 1.0, CpOrder::Third);
        prop_assert!((e2 / e1 - 8.0).abs() < 1e-12);
    }

    #[test]
    fn energy_scales_with_cavity(xi in 0.05f64..0.6, s in 0.5f64..3.0) {
        let c = cp_coefficients_default(xi).unwrap();
        let pols = pec_polarizabilities(2, 0.1);
        let pols_s = pec_polarizabilities(2, 0.1 * s);
        let e1 = c.spherical_energy(&pols, 1.0, CpOrder::Fifth);
        let es = c.spherical_energy(&pols_s, s, CpOrder::Fifth);
        prop_assert!((es * s - e1).abs() <= 1e-12 * e1.abs());
    }
}
