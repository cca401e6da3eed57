use proptest::prelude::*;

use loxodromic::algebra::example_map;
use loxodromic::avoided::build_avoided_f;
use loxodromic::config::{format_complex, parse_complex};
use loxodromic::geometry::{h_boundary_circle_of_s, h_image_of_s, s_boundary, ConjugatorH};
use loxodromic::report::fmt_num;
use loxodromic::verify::{circle_fit, Scenario};
use loxodromic::{Complex, ExtendedComplex, LoxodromicData, MoebiusMap};

fn complex(range: f64) -> impl Strategy<Value = Complex> {
    (-range..range, -range..range).prop_map(|(re, im)| Complex::new(re, im))
}

/// Loxodromic maps with `|c|` and `|k| − 1` bounded away from zero.
fn lox_map() -> impl Strategy<Value = (MoebiusMap, LoxodromicData)> {
    [complex(3.0), complex(3.0), complex(3.0), complex(3.0)].prop_filter_map("not well-conditioned loxodromic", |[a, b, c, d]| {
        let g = MoebiusMap::new(a, b, c, d).ok()?;
        let data = g.fixed_points().ok()?;
        (g.c.norm() > 0.05 && data.k_abs() > 1.05 && data.fixed_point_distance() > 1e-3).then_some((g, data))
    })
}

fn rel(x: Complex, y: Complex, scale: f64) -> f64 {
    (x - y).norm() / scale.max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalization_preserves_action(a in complex(3.0), b in complex(3.0), c in complex(3.0), d in complex(3.0), z in complex(5.0)) {
        let det = a * d - b * c;
        prop_assume!(det.norm() > 1e-3);
        let g = MoebiusMap::new(a, b, c, d).unwrap();
        prop_assert!((g.det() - 1.0).norm() < 1e-12);
        let den = c * z + d;
        prop_assume!(den.norm() > 1e-3);
        let raw = (a * z + b) / den;
        let img = g.apply_finite(z).unwrap();
        prop_assert!(rel(img, raw, raw.norm().max(1.0)) < 1e-10);
    }

    #[test]
    fn inverse_composes_to_identity((g, _) in lox_map(), z in complex(5.0)) {
        let id = g.compose(&g.inverse());
        prop_assume!(g.inverse().apply_finite(z).is_some());
        let back = id.apply_finite(z).unwrap();
        prop_assert!(rel(back, z, z.norm().max(1.0)) < 1e-9);
    }

    #[test]
    fn fixed_points_and_multiplier((g, d) in lox_map()) {
        let scale = d.alpha.norm().max(d.beta.norm()).max(1.0);
        prop_assert!(rel(g.apply_finite(d.alpha).unwrap(), d.alpha, scale) < 1e-9);
        prop_assert!(rel(g.apply_finite(d.beta).unwrap(), d.beta, scale) < 1e-9);
        prop_assert!(rel(d.c_alpha_d * d.c_beta_d, Complex::new(1.0, 0.0), 1.0) < 1e-9);
        prop_assert!(rel(g.derivative(d.alpha).unwrap(), d.k.inv(), 1.0) < 1e-9);
        prop_assert!(g.derivative(d.alpha).unwrap().norm() < 1.0);
        prop_assert!(g.derivative(d.beta).unwrap().norm() > 1.0);
        let lhs = (g.c * (d.alpha - d.beta)).powu(2);
        let rhs = (d.k - 1.0).powu(2) / d.k;
        prop_assert!(rel(lhs, rhs, rhs.norm()) < 1e-9);
        let pole = g.pole().unwrap();
        prop_assert!(rel(pole, (d.k * d.beta - d.alpha) / (d.k - 1.0), scale.max(pole.norm())) < 1e-9);
    }

    #[test]
    fn conjugation_identity((g, d) in lox_map(), z in complex(10.0)) {
        let h = ConjugatorH::new(&d);
        let gz = g.apply_finite(z);
        let w = h.apply(ExtendedComplex::Finite(z)).finite();
        prop_assume!(gz.is_some() && w.is_some());
        let lhs = h.apply(ExtendedComplex::Finite(gz.unwrap())).finite();
        prop_assume!(lhs.is_some());
        let rhs = d.k * w.unwrap();
        prop_assume!(rhs.norm() < 1e6);
        prop_assert!(rel(lhs.unwrap(), rhs, rhs.norm().max(1.0)) < 1e-7);
    }

    #[test]
    fn b_region_is_the_exterior_of_a_w_circle((_, d) in lox_map(), z in complex(10.0), r in 0.05f64..20.0) {
        let h = ConjugatorH::new(&d);
        let w = h.apply(ExtendedComplex::Finite(z)).finite();
        prop_assume!(w.is_some());
        let w = w.unwrap();
        prop_assume!((w.norm() - r).abs() > 1e-9 * r);
        let in_b = (z - d.beta).norm() > r * (z - d.alpha).norm();
        prop_assert_eq!(in_b, w.norm() > r);
    }

    #[test]
    fn contraction_region_is_s1((g, d) in lox_map(), z in complex(10.0)) {
        let dz = g.derivative(z);
        prop_assume!(dz.is_ok());
        let dz = dz.unwrap().norm();
        prop_assume!((dz - 1.0).abs() > 1e-9);
        let w = ConjugatorH::new(&d).apply(ExtendedComplex::Finite(z));
        let s1 = h_image_of_s(&d, &g, 1.0).unwrap();
        prop_assert_eq!(dz < 1.0, s1.contains(w));
    }

    #[test]
    fn s_image_matches_circle_fit((g, d) in lox_map(), r in 0.2f64..3.0) {
        prop_assume!((r * r - d.k_abs()).abs() > 0.05 * d.k_abs());
        let closed = h_boundary_circle_of_s(&d, &g, r).unwrap();
        let h = ConjugatorH::new(&d);
        let pts: Vec<Complex> = s_boundary(&g, r).unwrap().sample(360).into_iter()
            .filter_map(|z| h.apply(ExtendedComplex::Finite(z)).finite()).collect();
        let fit = circle_fit(&pts).unwrap();
        let scale = closed.center.norm().max(closed.radius);
        prop_assert!(rel(fit.center, closed.center, scale) < 1e-8);
        prop_assert!((fit.radius - closed.radius).abs() / closed.radius < 1e-8);
    }

    #[test]
    fn f_maps_complement_into_itself(kr in 1.2f64..5.0, theta in 0.0f64..std::f64::consts::TAU, w in complex(1.5), delta0 in 1e-4f64..5e-3) {
        let k = Complex::from_polar(kr, theta);
        let region = build_avoided_f(k, delta0, 2.0);
        prop_assume!(region.is_ok());
        let region = region.unwrap();
        prop_assume!(!region.contains(w));
        prop_assert!(!region.contains(k * w));
    }

    #[test]
    fn g_maps_complement_into_itself(w in complex(2.0), delta0 in 1e-4f64..1e-2) {
        let sc = Scenario::new(&example_map(), delta0, 2.0, None).unwrap();
        let z = sc.avoided.h.inverse(ExtendedComplex::Finite(w));
        prop_assume!(!sc.avoided.contains(z));
        prop_assert!(!sc.avoided.contains(sc.g.apply(z)));
    }

    #[test]
    fn one_step_lemma(kr in 1.2f64..5.0, theta in 0.0f64..std::f64::consts::TAU, m in 1i32..8,
                      off in 1.0f64..4.0, phi in 0.0f64..std::f64::consts::TAU,
                      eta_r in 0.0f64..1.0, eta_phi in 0.0f64..std::f64::consts::TAU, delta0 in 1e-4f64..1e-2) {
        let k = Complex::from_polar(kr, theta);
        let t = 2.0;
        let delta = t * delta0 / (kr - 1.0);
        let target = k.powi(-m);
        let c = target + Complex::from_polar(delta * off * (1.0 + 1e-9), phi);
        let eta = Complex::from_polar(delta0 * eta_r, eta_phi);
        prop_assert!((k * c + eta - k.powi(1 - m)).norm() > delta);
    }

    #[test]
    fn mean_value_on_disks((g, _) in lox_map(), center in complex(10.0), frac in 0.01f64..0.9,
                           u in (0.0f64..1.0, 0.0f64..std::f64::consts::TAU), v in (0.0f64..1.0, 0.0f64..std::f64::consts::TAU)) {
        let pole = g.pole().unwrap();
        let radius = (center - pole).norm() * frac;
        let sup = 1.0 / (g.c.norm() * ((center - pole).norm() - radius)).powi(2);
        let p = center + Complex::from_polar(radius * u.0.sqrt(), u.1);
        let q = center + Complex::from_polar(radius * v.0.sqrt(), v.1);
        prop_assume!(p != q);
        let quotient = (g.apply_finite(p).unwrap() - g.apply_finite(q).unwrap()).norm() / (p - q).norm();
        prop_assert!(quotient <= 2.0 * sup * (1.0 + 1e-9));
    }

    #[test]
    fn complex_literal_round_trip(re in -1e6f64..1e6, im in -1e6f64..1e6) {
        let z = Complex::new(re, im);
        let canon = format_complex(z);
        prop_assert_eq!(parse_complex(&canon).unwrap(), z);
        prop_assert_eq!(format_complex(parse_complex(&canon).unwrap()), canon);
        let alt = format!("{re:?}{}{:?}i", if im < 0.0 { "" } else { "+" }, im);
        prop_assert_eq!(parse_complex(&alt).unwrap(), z);
    }

    #[test]
    fn formatted_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }
}
