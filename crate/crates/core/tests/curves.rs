use std::f64::consts::PI;

use legendre_core::expr::{parse_expr, Arity};
use legendre_core::func::Func;
use legendre_core::gallery::{self, GalleryEntry};
use legendre_core::legendre::{check_legendre, CurvaturePair, Domain, LegendreCurve};
use legendre_core::reconstruct::{align_congruence, curvature_from_samples, reconstruct, sample_curve};
use legendre_core::signature::{signature, SignatureConfig};
use legendre_core::transform::{
    negate, negate_law, pushforward_affine, pushforward_swap, reparam_law, reparametrize, AffineMap,
    Negate,
};
use proptest::prelude::*;

fn entries() -> Vec<GalleryEntry> {
    let mut out = gallery::reference_entries();
    out.push(gallery::get("type_nm").unwrap());
    out
}

fn f(text: &str) -> Func {
    parse_expr(text, Arity::OneVar).unwrap().into()
}

#[test]
fn negating_nu_negates_beta_only() {
    for e in entries() {
        let flipped = negate(&e.curve, Negate::Nu);
        for t in e.curve.domain.grid(200) {
            let (l, b) = e.curve.curvature(t).unwrap();
            let (l2, b2) = flipped.curvature(t).unwrap();
            assert!((l - l2).abs() < 1e-12 && (b + b2).abs() < 1e-12, "{}", e.label());
            assert_eq!(e.curve.curvature(t).unwrap(), (l, b));
        }
    }
}

#[test]
fn beta_zeros_are_singular_points() {
    let config = SignatureConfig::default();
    for e in entries() {
        let sig = signature(&e.curve, &config).unwrap();
        for z in sig.zeros.iter().filter(|z| z.ord_beta.is_some()) {
            let j = e.curve.frame_jets(z.t, 1).unwrap();
            let speed = j.x.coeffs()[1].hypot(j.y.coeffs()[1]);
            assert!(speed <= 1e-7, "{} at {}: |γ'| = {speed}", e.label(), z.t);
        }
    }
}

#[test]
fn curvature_round_trip_through_reconstruction() {
    for e in entries() {
        let steps = 4096;
        let rebuilt = reconstruct(&e.curve.curvature_pair(), e.curve.domain, steps).unwrap();
        let got = curvature_from_samples(&rebuilt).unwrap();
        for (t, (l, b)) in rebuilt.ts.iter().zip(got) {
            let (l0, b0) = e.curve.curvature(*t).unwrap();
            assert!((l - l0).abs() <= 1e-6 && (b - b0).abs() <= 1e-6, "{} at {t}", e.label());
        }
        let original = sample_curve(&e.curve, steps).unwrap();
        let fit = align_congruence(&rebuilt, &original).unwrap();
        assert!(fit.residual <= 1e-6, "{}: {}", e.label(), fit.residual);
    }
}

#[test]
fn negated_beta_reconstructs_negated_curve() {
    let dom = Domain::new(0.0, 2.0 * PI).unwrap();
    let plus = reconstruct(&CurvaturePair::new(f("1 + 0.5*sin(t)"), f("cos(3*t)")), dom, 512).unwrap();
    let minus = reconstruct(&CurvaturePair::new(f("1 + 0.5*sin(t)"), f("-cos(3*t)")), dom, 512).unwrap();
    for (g, h) in plus.gammas.iter().zip(&minus.gammas) {
        assert!((g[0] + h[0]).abs() < 1e-14 && (g[1] + h[1]).abs() < 1e-14);
    }
    assert_eq!(plus.nus, minus.nus);
}

#[test]
fn swap_and_negate_are_involutions() {
    for e in entries() {
        let twice = pushforward_swap(&pushforward_swap(&e.curve));
        let neg = negate(&negate(&e.curve, Negate::Gamma), Negate::Gamma);
        for t in e.curve.domain.grid(50) {
            let base = e.curve.curvature(t).unwrap();
            for c in [&twice, &neg] {
                let (l, b) = c.curvature(t).unwrap();
                assert!((l - base.0).abs() < 1e-12 && (b - base.1).abs() < 1e-12);
            }
            let (l, b) = negate(&e.curve, Negate::Gamma).curvature(t).unwrap();
            let law = negate_law(&e.curve, t).unwrap();
            assert!((l - law.0).abs() < 1e-12 && (b - law.1).abs() < 1e-12);
        }
    }
}

#[test]
fn reparametrization_law_matches_frenet() {
    let t_of_u = parse_expr("t + 0.3*sin(t)", Arity::OneVar).unwrap();
    let dom = Domain::new(0.0, 2.0 * PI).unwrap();
    for e in entries().into_iter().filter(|e| e.curve.domain == dom) {
        let c = reparametrize(&e.curve, &t_of_u, dom).unwrap();
        assert!(check_legendre(&c, 1024, 1e-8).unwrap().ok);
        assert_eq!(c.closed, e.curve.closed);
        for u in dom.grid(1000) {
            let (l, b) = c.curvature(u).unwrap();
            let (l0, b0) = reparam_law(&e.curve, &t_of_u, u).unwrap();
            assert!((l - l0).abs() <= 1e-8 && (b - b0).abs() <= 1e-8, "{} at {u}", e.label());
        }
    }
}

#[test]
fn non_monotone_parameter_change_is_rejected() {
    let e = gallery::get("circle").unwrap();
    let dom = Domain::new(-1.0, 1.0).unwrap();
    let cube = parse_expr("t^3", Arity::OneVar).unwrap();
    assert!(reparametrize(&e.curve, &cube, dom).is_err());
    let fold = parse_expr("t^2", Arity::OneVar).unwrap();
    assert!(reparametrize(&e.curve, &fold, dom).is_err());
}

fn curve_from(x: &str, y: &str) -> LegendreCurve {
    LegendreCurve::with_derived_nu(f(x), f(y), Domain::new(0.0, 2.0 * PI).unwrap(), true).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_pairs_round_trip(a in 0.2f64..2.0, b in -1.0f64..1.0, c in 0.5f64..2.0, d in -0.4f64..0.4) {
        let pair = CurvaturePair::new(
            f(&format!("{a} + {b}*sin(t)")),
            f(&format!("{c} + {d}*cos(2*t)")),
        );
        let dom = Domain::new(0.0, 2.0 * PI).unwrap();
        let rebuilt = reconstruct(&pair, dom, 2048).unwrap();
        let got = curvature_from_samples(&rebuilt).unwrap();
        for (t, (l, bb)) in rebuilt.ts.iter().zip(got) {
            let (l0, b0) = pair.at(*t).unwrap();
            prop_assert!((l - l0).abs() <= 1e-6 && (bb - b0).abs() <= 1e-6);
        }
    }

    #[test]
    fn affine_images_stay_legendre(
        a11 in -2.0f64..2.0, a12 in -2.0f64..2.0, a21 in -2.0f64..2.0, a22 in -2.0f64..2.0,
    ) {
        prop_assume!((a11 * a22 - a12 * a21).abs() >= 0.1);
        let map = AffineMap::new(a11, a12, a21, a22).unwrap();
        let curve = curve_from("2*cos(t) + 0.3*cos(2*t)", "sin(t)");
        let image = pushforward_affine(&curve, &map);
        prop_assert!(check_legendre(&image, 512, 1e-8).unwrap().ok);
    }
}
