//! Structural property suite: algebraic identities of the matrix algebras,
//! exterior-calculus identities, holonomy group laws, covariance of curvature
//! and characteristic forms, classifier calibration, and quadrature
//! invariants, each at the tolerance the corresponding module promises.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use gauge_core::characteristic::{chern_form, chern_number, closedness_residual, f1, f2, invariant_poly};
use gauge_core::colombeau::{
    classify_moderate, classify_negligible, shadow_pairing, CompactRegion, EpsilonFamily,
    EpsilonLadder,
};
use gauge_core::connection::{
    bianchi_residual, bracket_split_identities, bundle_curvature, canonicalize, curvature_form,
    gauge_transform, reconstruct_bundle_form, su2_join, su2_split, BundleForm, BundleTangent,
    GaugeMap, GaugePotential,
};
use gauge_core::forms::{wedge_pair, KForm, Pairing};
use gauge_core::holonomy::{holonomy, parallel_transport, ParamCurve};
use gauge_core::liealg::{
    adjoint, bracket, exp, log, matrix_product, su2_e, AlgebraTag, GroupElement, LieValue,
};
use gauge_core::quadrature::{integrate_form, SurfacePatch};
use gauge_core::sample;
use gauge_core::scenarios::{
    scenario_dirac_monopole, scenario_flat_wire, scenario_su2_singular, SmoothPart,
};

const PI: f64 = std::f64::consts::PI;

fn lie(tag: AlgebraTag, w: &[f64; 8], scale: f64) -> LieValue {
    match tag {
        AlgebraTag::U1 => LieValue::u1(w[0] * scale),
        AlgebraTag::Su2 => LieValue::su2(w[0] * scale, w[1] * scale, w[2] * scale),
        AlgebraTag::GlnC(1) => LieValue::scalar(Complex64::new(w[0], w[1]) * scale),
        AlgebraTag::GlnC(_) => {
            let e = |r: f64, i: f64| Complex64::new(r, i) * scale;
            LieValue {
                tag,
                entries: [e(w[0], w[1]), e(w[2], w[3]), e(w[4], w[5]), e(w[6], w[7])],
            }
        }
    }
}

fn coords() -> impl Strategy<Value = [f64; 8]> {
    prop::array::uniform8(-1.0f64..1.0)
}

const ALGEBRA_TAGS: [AlgebraTag; 3] = [AlgebraTag::U1, AlgebraTag::Su2, AlgebraTag::GlnC(2)];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(wa in coords(), wb in coords(), wc in coords()) {
        for tag in ALGEBRA_TAGS {
            let (a, b, c) = (lie(tag, &wa, 1.0), lie(tag, &wb, 1.0), lie(tag, &wc, 1.0));
            let anti = (bracket(&a, &b).unwrap() + bracket(&b, &a).unwrap()).max_abs_entry();
            prop_assert!(anti <= 1e-12);
            let jac = (bracket(&a, &bracket(&b, &c).unwrap()).unwrap()
                + bracket(&b, &bracket(&c, &a).unwrap()).unwrap()
                + bracket(&c, &bracket(&a, &b).unwrap()).unwrap())
            .max_abs_entry();
            prop_assert!(jac <= 1e-12);
        }
    }

    #[test]
    fn adjoint_respects_group_multiplication(wa in coords(), wg in coords(), wh in coords()) {
        for tag in ALGEBRA_TAGS {
            let a = lie(tag, &wa, 1.0);
            let g = exp(&lie(tag, &wg, 0.8));
            let h = exp(&lie(tag, &wh, 0.8));
            let lhs = adjoint(&g.mul(&h), &a).unwrap();
            let rhs = adjoint(&g, &adjoint(&h, &a).unwrap()).unwrap();
            prop_assert!((lhs - rhs).max_abs_entry() <= 1e-12);
        }
    }

    #[test]
    fn exp_of_adjoint_is_conjugated_exp(wa in coords(), wg in coords()) {
        for tag in ALGEBRA_TAGS {
            let a = lie(tag, &wa, 0.9);
            let g = exp(&lie(tag, &wg, 0.8));
            let lhs = exp(&adjoint(&g, &a).unwrap());
            let rhs = g.mul(&exp(&a)).mul(&g.inverse());
            prop_assert!(lhs.op_distance(&rhs) <= 1e-10);
        }
    }

    #[test]
    fn log_inverts_exp_inside_the_principal_ball(wa in coords()) {
        for tag in [AlgebraTag::U1, AlgebraTag::Su2, AlgebraTag::GlnC(1)] {
            let a = lie(tag, &wa, 0.9);
            let back = log(&exp(&a)).unwrap();
            prop_assert!((back - a).max_abs_entry() <= 1e-10);
        }
        // 2x2 case, away from defective spectra where the principal log is
        // ill-conditioned
        let a = lie(AlgebraTag::GlnC(2), &wa, 0.4);
        let half = a.trace() / 2.0;
        let disc = (half * half - a.det()).sqrt();
        prop_assume!(disc.norm() >= 0.1);
        let back = log(&exp(&a)).unwrap();
        prop_assert!((back - a).max_abs_entry() <= 1e-10);
    }

    #[test]
    fn evaluation_is_alternating(wa in coords(), wu in coords(), wv in coords()) {
        let c: Vec<LieValue> = (0..6)
            .map(|k| LieValue::su2(wa[k % 8], wa[(k + 1) % 8], wa[(k + 2) % 8]))
            .collect();
        let f = KForm::constant(2, 4, AlgebraTag::Su2, c);
        let u = [wu[0], wu[1], wu[2], wu[3]];
        let v = [wv[0], wv[1], wv[2], wv[3]];
        let p = [0.0; 4];
        let fuv = f.evaluate(&p, &[&u, &v]).unwrap();
        let fvu = f.evaluate(&p, &[&v, &u]).unwrap();
        prop_assert!((fuv + fvu).max_abs_entry() == 0.0);
        let fuu = f.evaluate(&p, &[&u, &u]).unwrap();
        prop_assert!(fuu.max_abs_entry() == 0.0);
    }

    #[test]
    fn trace_wedge_of_one_forms_has_unit_normalization(wa in coords(), wb in coords(), wu in coords(), wv in coords()) {
        let ca: Vec<LieValue> = (0..3).map(|k| LieValue::su2(wa[k], wa[k + 2], wa[k + 4])).collect();
        let cb: Vec<LieValue> = (0..3).map(|k| LieValue::su2(wb[k], wb[k + 2], wb[k + 4])).collect();
        let a = KForm::constant(1, 3, AlgebraTag::Su2, ca.clone());
        let b = KForm::constant(1, 3, AlgebraTag::Su2, cb.clone());
        let u = [wu[0], wu[1], wu[2]];
        let v = [wv[0], wv[1], wv[2]];
        let got = wedge_pair(&a, &b, Pairing::TracePair, &[0.0; 3], &[&u, &v]).unwrap();
        let at = |w: &[f64], c: &[LieValue]| -> LieValue {
            c[0] * w[0] + c[1] * w[1] + c[2] * w[2]
        };
        let expect = matrix_product(&at(&u, &ca), &at(&v, &cb)).trace()
            - matrix_product(&at(&v, &ca), &at(&u, &cb)).trace();
        prop_assert!((got.entry(0, 0) - expect).norm() <= 1e-12);
    }

    #[test]
    fn invariant_polys_are_ad_invariant(wa in coords(), wg in coords()) {
        for tag in [AlgebraTag::Su2, AlgebraTag::GlnC(2)] {
            let a = lie(tag, &wa, 1.0);
            let g = exp(&lie(tag, &wg, 0.8));
            let conj = adjoint(&g, &a).unwrap();
            prop_assert!((f1(&conj) - f1(&a)).norm() <= 1e-12);
            prop_assert!((f2(&conj) - f2(&a)).norm() <= 1e-12);
            let p1 = invariant_poly(2, &[conj, conj]).unwrap();
            let p2 = invariant_poly(2, &[a, a]).unwrap();
            prop_assert!((p1 - p2).norm() <= 1e-12);
        }
    }

    #[test]
    fn first_chern_coefficient_is_additive_on_blocks(wa in coords(), wb in coords()) {
        let block = LieValue {
            tag: AlgebraTag::GlnC(2),
            entries: [
                Complex64::new(0.0, wa[0]),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, wb[0]),
            ],
        };
        let split = f1(&LieValue::u1(wa[0])) + f1(&LieValue::u1(wb[0]));
        prop_assert!((f1(&block) - split).norm() <= 1e-12);
    }

    #[test]
    fn su2_split_round_trips_and_bracket_splits(wa in coords(), wb in coords()) {
        let ca: Vec<LieValue> = (0..3).map(|k| LieValue::su2(wa[k], wa[k + 2], wa[k + 4])).collect();
        let cb: Vec<LieValue> = (0..3).map(|k| LieValue::su2(wb[k], wb[k + 2], wb[k + 4])).collect();
        let a = KForm::constant(1, 3, AlgebraTag::Su2, ca);
        let b = KForm::constant(1, 3, AlgebraTag::Su2, cb);
        let (ad, at) = su2_split(&a).unwrap();
        let back = su2_join(&ad, &at).unwrap();
        let p = [0.3, -0.2, 0.5];
        for (x, y) in back.coeffs(&p).iter().zip(a.coeffs(&p).iter()) {
            prop_assert!((*x - *y).max_abs_entry() == 0.0);
        }
        let u = [1.0, 0.4, -0.3];
        let v = [-0.2, 1.1, 0.6];
        let sides = bracket_split_identities(&a, &b, &p, &u, &v).unwrap();
        prop_assert!((sides.d_direct - sides.d_formula).norm() <= 1e-12);
        prop_assert!((sides.t_direct - sides.t_formula).norm() <= 1e-12);
    }
}

// ------------------------------------------------------- exterior calculus

/// Smooth scalar 1-form with analytic partials, weights drawn by the caller.
fn smooth_one_form(w: [f64; 9], with_dcoeff: bool) -> KForm {
    let tag = AlgebraTag::scalar();
    let coeff = move |p: &[f64]| {
        (0..3)
            .map(|i| {
                let v = w[3 * i] * p[0].sin() + w[3 * i + 1] * (p[1] * p[2]).cos()
                    + w[3 * i + 2] * p[i] * p[i];
                LieValue::scalar(Complex64::new(v, 0.3 * v))
            })
            .collect()
    };
    let form = KForm::new(1, 3, tag, coeff);
    if !with_dcoeff {
        return form;
    }
    form.with_dcoeff(move |p: &[f64]| {
        (0..3)
            .map(|i| {
                let s = (p[1] * p[2]).sin();
                let mut row = vec![
                    w[3 * i] * p[0].cos(),
                    -w[3 * i + 1] * p[2] * s,
                    -w[3 * i + 1] * p[1] * s,
                ];
                row[i] += 2.0 * w[3 * i + 2] * p[i];
                row.into_iter()
                    .map(|v| LieValue::scalar(Complex64::new(v, 0.3 * v)))
                    .collect()
            })
            .collect()
    })
}

#[test]
fn exterior_derivative_squares_to_zero() {
    let mut rng = sample::rng(101);
    for trial in 0..6 {
        let mut w = [0.0; 9];
        for v in w.iter_mut() {
            *v = 2.0 * rand::Rng::gen::<f64>(&mut rng) - 1.0;
        }
        let pts = sample::uniform_points(&mut rng, 8, &[(-1.2, 1.2); 3]);
        for (form, tol) in [(smooth_one_form(w, true), 1e-8), (smooth_one_form(w, false), 1e-4)] {
            let dd = form.exterior_derivative().exterior_derivative();
            for p in &pts {
                let worst = dd
                    .coeffs(p)
                    .iter()
                    .map(|c| c.max_abs_entry())
                    .fold(0.0f64, f64::max);
                assert!(worst <= tol, "trial {trial}: |ddω| = {worst:.3e} > {tol:.0e}");
            }
        }
    }
}

#[test]
fn leibniz_rule_for_scalar_weight() {
    let mut rng = sample::rng(55);
    let mut w = [0.0; 9];
    for v in w.iter_mut() {
        *v = 2.0 * rand::Rng::gen::<f64>(&mut rng) - 1.0;
    }
    let omega = smooth_one_form(w, true);
    let f = |p: &[f64]| p[0].cos() * p[1] + 0.5 * p[2] * p[2];
    let grad = |p: &[f64]| vec![-p[0].sin() * p[1], p[0].cos(), p[2]];
    let df = KForm::new(1, 3, AlgebraTag::scalar(), move |p| {
        grad(p).into_iter().map(|v| LieValue::scalar(Complex64::new(v, 0.0))).collect()
    });
    let fo = omega.scale_by_fn(f);
    let dfo = fo.exterior_derivative();
    let do_ = omega.exterior_derivative().scale_by_fn(f);
    let pts = sample::uniform_points(&mut rng, 10, &[(-1.0, 1.0); 3]);
    for p in &pts {
        let u = [1.0, -0.3, 0.4];
        let v = [0.2, 0.9, -0.5];
        let lhs = dfo.evaluate(p, &[&u, &v]).unwrap();
        let wedge = wedge_pair(&df, &omega, Pairing::ScalarMultiply, p, &[&u, &v]).unwrap();
        let rhs = wedge + do_.evaluate(p, &[&u, &v]).unwrap();
        assert!((lhs - rhs).max_abs_entry() <= 1e-6);
    }
}

// ----------------------------------------------------------- classification

#[test]
fn classifier_recovers_pure_power_slopes() {
    let region = CompactRegion::new(vec![(-1.0, 1.0); 2], 9).unwrap();
    let ladder = EpsilonLadder::new(2f64.powi(-4), 0.5, 14).unwrap();
    let base = KForm::new(1, 2, AlgebraTag::scalar(), |p| {
        vec![
            LieValue::scalar(Complex64::new(p[0].sin() + 2.0, 0.0)),
            LieValue::scalar(Complex64::new(p[1].cos(), 0.0)),
        ]
    });
    for s in [-3i32, -1, 0, 1, 3] {
        let b = base.clone();
        let fam = EpsilonFamily::new(format!("eps^{s}"), move |e| b.scale(e.powi(s)));
        let rep = classify_moderate(&fam, &region, 0, &ladder).unwrap();
        assert!(rep.verdict, "eps^{s} must be moderate");
        let expect_order = f64::from(-s).max(0.0);
        assert!(
            (rep.order - expect_order).abs() <= 0.1,
            "eps^{s}: order {} vs {expect_order}",
            rep.order
        );
        if s >= 0 {
            let neg = classify_negligible(&fam, &region, 6, &ladder).unwrap();
            assert!(
                (neg.slope - f64::from(s)).abs() <= 0.1,
                "eps^{s}: slope {}",
                neg.slope
            );
        }
    }
}

#[test]
fn negligible_families_are_moderate() {
    let region = CompactRegion::new(vec![(-1.0, 1.0); 2], 9).unwrap();
    let ladder = EpsilonLadder::new(2f64.powi(-4), 0.5, 14).unwrap();
    let fam = EpsilonFamily::new("exp(-1/eps)", |e: f64| {
        let a = (-1.0 / e).exp();
        KForm::new(1, 2, AlgebraTag::scalar(), move |p| {
            vec![
                LieValue::scalar(Complex64::new(a * (1.0 + p[0] * p[0]), 0.0)),
                LieValue::scalar(Complex64::new(a, 0.0)),
            ]
        })
    });
    let neg = classify_negligible(&fam, &region, 6, &ladder).unwrap();
    assert!(neg.verdict && neg.negligible_up_to >= 6);
    let mo = classify_moderate(&fam, &region, 0, &ladder).unwrap();
    assert!(mo.verdict);
}

#[test]
fn shadow_is_linear_and_representative_independent() {
    let sc = scenario_flat_wire(1.0);
    let region = CompactRegion::new(vec![(-2.0, 2.0); 2], 9).unwrap();
    let ladder = EpsilonLadder::new(2f64.powi(-4), 0.5, 8).unwrap();
    let phi1 = Arc::new(|p: &[f64]| (-p[0] * p[0] - p[1] * p[1]).exp());
    let phi2 = Arc::new(|p: &[f64]| 0.5 * p[0].cos() * (-p[1] * p[1]).exp());
    let both = Arc::new(|p: &[f64]| {
        (-p[0] * p[0] - p[1] * p[1]).exp() + 0.5 * p[0].cos() * (-p[1] * p[1]).exp()
    });
    let s1 = shadow_pairing(&sc.transverse_curvature, phi1.clone(), &region, &ladder, 1e-6).unwrap();
    let s2 = shadow_pairing(&sc.transverse_curvature, phi2, &region, &ladder, 1e-6).unwrap();
    let s12 = shadow_pairing(&sc.transverse_curvature, both, &region, &ladder, 1e-6).unwrap();
    let gap = (s12.limit - s1.limit - s2.limit).norm();
    assert!(gap <= s1.err_est + s2.err_est + s12.err_est + 1e-5, "{gap}");

    // same class, different representative: add an eps^2-small smooth term
    let alpha = 1.0;
    let shifted = EpsilonFamily::new("shifted representative", move |eps: f64| {
        let e2 = eps * eps;
        KForm::new(2, 2, AlgebraTag::U1, move |p| {
            let d = p[0] * p[0] + p[1] * p[1] + e2;
            vec![LieValue::u1(2.0 * alpha * e2 / (d * d) + e2 * 0.7 * p[0].cos())]
        })
    });
    let s1b = shadow_pairing(&shifted, phi1, &region, &ladder, 1e-6).unwrap();
    let gap2 = (s1b.limit - s1.limit).norm();
    assert!(gap2 <= s1.err_est + s1b.err_est + 1e-5, "{gap2}");
    // and the shadow itself is the delta pairing 2 pi i alpha phi(0)
    assert!((s1.limit - Complex64::new(0.0, 2.0 * PI)).norm() <= 1e-3);
}

// ------------------------------------------------- curvature and covariance

#[test]
fn bianchi_residual_vanishes_for_scenario_potentials() {
    let eps = 2f64.powi(-4);
    let mut rng = sample::rng(7);
    let su2 = scenario_su2_singular(0.3, SmoothPart::Poly);
    let mono = scenario_dirac_monopole(1.0);
    for (pot, bounds) in [
        (&su2.potential, vec![(0.4, 1.8), (0.4, 1.8), (-1.0, 1.0), (-1.0, 1.0)]),
        (&mono.potential, vec![(0.4, 1.4), (0.4, 1.4), (-1.2, 1.2)]),
    ] {
        let dim = bounds.len();
        for p in sample::uniform_points(&mut rng, 15, &bounds) {
            let vs: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..dim).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect())
                .collect();
            let r = bianchi_residual(pot, eps, &p, &[&vs[0], &vs[1], &vs[2]]).unwrap();
            assert!(r.max_abs_entry() <= 1e-6, "{}", r.max_abs_entry());
        }
    }
}

#[test]
fn curvature_transforms_by_adjoint_under_gauge_maps() {
    let sc = scenario_su2_singular(0.4, SmoothPart::Poly);
    let eps = 0.5;
    let g0 = exp(&LieValue::su2(0.7, -0.3, 0.4));
    let gmap = GaugeMap {
        tag: AlgebraTag::Su2,
        value: {
            let g = g0.clone();
            Arc::new(move |_p: &[f64]| g.clone())
        },
        differential: Some(Arc::new(|_p: &[f64]| vec![LieValue::zero(AlgebraTag::Su2); 4])),
    };
    let transformed = gauge_transform(&sc.potential, &gmap).unwrap();
    let f = curvature_form(&sc.potential, eps);
    let ft = curvature_form(&transformed, eps);
    let ginv = g0.inverse();
    for p in sample::halton_points(20, &[(0.5, 1.8), (0.5, 1.8), (-1.0, 1.0), (-1.0, 1.0)]) {
        for (orig, got) in f.coeffs(&p).iter().zip(ft.coeffs(&p).iter()) {
            let expect = adjoint(&ginv, orig).unwrap();
            assert!((*got - expect).max_abs_entry() <= 1e-8);
        }
    }
}

#[test]
fn bundle_curvature_is_horizontal() {
    let sc = scenario_su2_singular(0.3, SmoothPart::Poly);
    let form = reconstruct_bundle_form(&sc.potential, 0.5);
    let mut rng = sample::rng(13);
    for _ in 0..10 {
        let x: Vec<f64> = vec![
            rand::Rng::gen_range(&mut rng, 0.5..1.5),
            rand::Rng::gen_range(&mut rng, 0.5..1.5),
            rand::Rng::gen_range(&mut rng, -1.0..1.0),
            rand::Rng::gen_range(&mut rng, -1.0..1.0),
        ];
        let g = sample::random_su2(&mut rng);
        let vert = BundleTangent::vertical(sample::random_algebra(&mut rng, AlgebraTag::Su2, 1.0), 4);
        let mixed = BundleTangent {
            base: (0..4).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect(),
            fiber: sample::random_algebra(&mut rng, AlgebraTag::Su2, 1.0),
        };
        let omega = bundle_curvature(&form, &x, &g, &vert, &mixed).unwrap();
        assert!(omega.max_abs_entry() <= 1e-10, "{}", omega.max_abs_entry());
    }
}

#[test]
fn canonicalize_is_idempotent() {
    let sc = scenario_su2_singular(0.3, SmoothPart::Constant);
    let base = reconstruct_bundle_form(&sc.potential, 0.5);
    // knock the form off canonical shape with a benign vertical distortion
    let skew = BundleForm {
        base_dim: 4,
        tag: AlgebraTag::Su2,
        eval: {
            let inner = base.clone();
            Arc::new(move |x: &[f64], g: &GroupElement, t: &BundleTangent| {
                let v = inner.value(x, g, t)?;
                Ok(v + v * 0.25 + su2_e(3) * (0.1 * t.base[0]))
            })
        },
    };
    let once = canonicalize(&skew).unwrap();
    let twice = canonicalize(&once).unwrap();
    let mut rng = sample::rng(29);
    for _ in 0..8 {
        let x: Vec<f64> = (0..4).map(|_| rand::Rng::gen_range(&mut rng, 0.4..1.4)).collect();
        let g = sample::random_su2(&mut rng);
        let t = BundleTangent {
            base: (0..4).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect(),
            fiber: sample::random_algebra(&mut rng, AlgebraTag::Su2, 0.8),
        };
        let a = once.value(&x, &g, &t).unwrap();
        let b = twice.value(&x, &g, &t).unwrap();
        assert!((a - b).max_abs_entry() <= 1e-12);
    }
}

// ------------------------------------------------------------ holonomy laws

#[test]
fn holonomy_group_laws() {
    let sc = scenario_su2_singular(0.3, SmoothPart::Poly);
    let eps = 0.5;
    let n = 4096;

    let fwd = holonomy(&sc.potential, eps, &sc.default_loop, n, false).unwrap();
    let bwd = holonomy(&sc.potential, eps, &sc.default_loop.reversed(), n, false).unwrap();
    assert!(fwd.g_end.mul(&bwd.g_end).op_distance(&GroupElement::identity(AlgebraTag::Su2)) <= 1e-9);

    let quarter = [1.0, 0.0, 0.3, -0.2];
    let seg1 = ParamCurve::segment(&[1.3, -0.4, 0.0, 0.0], &quarter);
    let seg2 = ParamCurve::segment(&quarter, &[0.2, 1.1, -0.3, 0.5]);
    let t1 = parallel_transport(&sc.potential, eps, &seg1, n, false).unwrap();
    let t2 = parallel_transport(&sc.potential, eps, &seg2, n, false).unwrap();
    let joined = parallel_transport(&sc.potential, eps, &seg1.then(&seg2), n, false).unwrap();
    assert!(joined.g_end.op_distance(&t2.g_end.mul(&t1.g_end)) <= 1e-9);
}

#[test]
fn holonomy_ignores_reparameterization() {
    let sc = scenario_flat_wire(0.4);
    let eps = 0.5;
    let base = &sc.default_loop;
    let (a, b) = (base.a, base.b);
    let inner = base.clone();
    let inner_v = base.clone();
    // phi(t) = t + 0.8 sin^2(t/2) is smooth, increasing, and fixes both ends
    let warped = ParamCurve::new(
        a,
        b,
        move |t: f64| inner.point(t + 0.8 * (0.5 * t).sin().powi(2)),
        move |t: f64| {
            let phi = t + 0.8 * (0.5 * t).sin().powi(2);
            let dphi = 1.0 + 0.4 * t.sin();
            inner_v.speed(phi).into_iter().map(|v| v * dphi).collect()
        },
    );
    let h1 = holonomy(&sc.potential, eps, base, 4096, false).unwrap();
    let h2 = holonomy(&sc.potential, eps, &warped, 4096, false).unwrap();
    assert!(h1.g_end.op_distance(&h2.g_end) <= 1e-8);
}

#[test]
fn holonomy_conjugates_under_gauge_maps() {
    let sc = scenario_su2_singular(0.25, SmoothPart::Constant);
    let eps = 0.6;
    let g0 = exp(&LieValue::su2(0.4, 0.9, -0.2));
    let gmap = GaugeMap {
        tag: AlgebraTag::Su2,
        value: {
            let g = g0.clone();
            Arc::new(move |_p: &[f64]| g.clone())
        },
        differential: Some(Arc::new(|_p: &[f64]| vec![LieValue::zero(AlgebraTag::Su2); 4])),
    };
    let transformed = gauge_transform(&sc.potential, &gmap).unwrap();
    let h = holonomy(&sc.potential, eps, &sc.default_loop, 4096, false).unwrap();
    let ht = holonomy(&transformed, eps, &sc.default_loop, 4096, false).unwrap();
    let expect = g0.inverse().mul(&h.g_end).mul(&g0);
    assert!(ht.g_end.op_distance(&expect) <= 1e-8, "{}", ht.g_end.op_distance(&expect));

    // abelian sanity: a position-dependent pure phase leaves loop holonomy fixed
    let wire = scenario_flat_wire(0.3);
    let phase = GaugeMap {
        tag: AlgebraTag::U1,
        value: Arc::new(|p: &[f64]| {
            GroupElement::new(
                AlgebraTag::U1,
                &[Complex64::new((0.7 * p[0]).cos(), (0.7 * p[0]).sin())],
            )
            .unwrap()
        }),
        differential: Some(Arc::new(|_p: &[f64]| {
            let mut row = vec![LieValue::zero(AlgebraTag::U1); 4];
            row[0] = LieValue::u1(0.7);
            row
        })),
    };
    let wt = gauge_transform(&wire.potential, &phase).unwrap();
    let h1 = holonomy(&wire.potential, eps, &wire.default_loop, 4096, false).unwrap();
    let h2 = holonomy(&wt, eps, &wire.default_loop, 4096, false).unwrap();
    assert!(h1.g_end.op_distance(&h2.g_end) <= 1e-8);
}

#[test]
fn transport_converges_at_fourth_order_and_stays_on_group() {
    let sc = scenario_flat_wire(0.7);
    let eps: f64 = 0.5;
    let exact_phase = -2.0 * PI * 0.7 / (1.0 + eps * eps);
    let expect = GroupElement::new(
        AlgebraTag::U1,
        &[Complex64::new(exact_phase.cos(), exact_phase.sin())],
    )
    .unwrap();
    let defect = |n: usize| -> f64 {
        holonomy(&sc.potential, eps, &sc.default_loop, n, false)
            .unwrap()
            .g_end
            .op_distance(&expect)
    };
    let (c, f) = (defect(256), defect(512));
    assert!(c / f >= 12.0, "step halving gained only {:.2}x", c / f);

    let su2 = scenario_su2_singular(0.3, SmoothPart::Poly);
    let out = holonomy(&su2.potential, 0.5, &su2.default_loop, 4096, true).unwrap();
    for (_, g) in out.trace.as_ref().unwrap() {
        assert!(g.constraint_defect() <= 1e-10);
    }
}

// --------------------------------------------------- characteristic numbers

#[test]
fn chern_number_is_gauge_invariant_and_representative_independent() {
    let sc = scenario_dirac_monopole(1.0);
    let ladder = EpsilonLadder::new(2f64.powi(-4), 0.5, 8).unwrap();
    let base = chern_number(&sc.potential, 1, &sc.default_closed_patches, &ladder, 1e-6).unwrap();

    // smooth abelian gauge map: A -> A + i 0.4 dx
    let gmap = GaugeMap {
        tag: AlgebraTag::scalar(),
        value: Arc::new(|p: &[f64]| {
            GroupElement::new(
                AlgebraTag::scalar(),
                &[Complex64::new((0.4 * p[0]).cos(), (0.4 * p[0]).sin())],
            )
            .unwrap()
        }),
        differential: Some(Arc::new(|_p: &[f64]| {
            let mut row = vec![LieValue::zero(AlgebraTag::scalar()); 3];
            row[0] = LieValue::scalar(Complex64::new(0.0, 0.4));
            row
        })),
    };
    let transformed = gauge_transform(&sc.potential, &gmap).unwrap();
    let gauged = chern_number(&transformed, 1, &sc.default_closed_patches, &ladder, 1e-6).unwrap();
    let gap = (base.limit - gauged.limit).norm();
    assert!(gap <= base.err_est + gauged.err_est + 1e-6, "{gap}");

    // negligible-difference representative: A + eps^2 * 0.3 x dy
    let alpha = 1.0;
    let mono = scenario_dirac_monopole(alpha);
    let shifted = GaugePotential::new(AlgebraTag::scalar(), 3, move |eps| {
        let a = mono.potential.at(eps);
        let e2 = eps * eps;
        let base_form = a.clone();
        let coeff = move |p: &[f64]| {
            let mut c = base_form.coeffs(p);
            c[1] = c[1] + LieValue::scalar(Complex64::new(e2 * 0.3 * p[0], 0.0));
            c
        };
        let a2 = a.clone();
        let dcoeff = move |p: &[f64]| {
            let mut rows = a2.coeff_partials(p);
            rows[1][0] = rows[1][0] + LieValue::scalar(Complex64::new(e2 * 0.3, 0.0));
            rows
        };
        KForm::new(1, 3, AlgebraTag::scalar(), coeff).with_dcoeff(dcoeff)
    });
    let other = chern_number(&shifted, 1, &sc.default_closed_patches, &ladder, 1e-6).unwrap();
    let gap2 = (base.limit - other.limit).norm();
    assert!(gap2 <= base.err_est + other.err_est + 1e-6, "{gap2}");
    assert!(base.limit.norm() <= 1e-2);
}

#[test]
fn first_chern_form_is_closed() {
    let sc = scenario_flat_wire(1.0);
    let cf = chern_form(&sc.potential, 0.25, 1).unwrap();
    let samples = sample::halton_points(15, &[(-1.5, 1.5), (-1.5, 1.5), (-1.0, 1.0), (-1.0, 1.0)]);
    assert!(closedness_residual(&cf, &samples) <= 1e-6);

    let su2 = scenario_su2_singular(0.3, SmoothPart::Poly);
    let cf2 = chern_form(&su2.potential, 0.25, 1).unwrap();
    assert!(closedness_residual(&cf2, &samples) <= 1e-10, "traceless c1 vanishes");
}

// ----------------------------------------------------------------- quadrature

#[test]
fn orientation_reversal_negates_integrals_exactly() {
    let sc = scenario_flat_wire(0.8);
    let f = (sc.curvature_pieces[0].1.make)(0.3);
    let disk = SurfacePatch::disk(1.2, vec![0.0; 4], 4, (0, 1));
    let mut flipped = disk.clone();
    flipped.orientation = -flipped.orientation;
    let plus = integrate_form(&f, &disk, 1e-8).unwrap();
    let minus = integrate_form(&f, &flipped, 1e-8).unwrap();
    assert!(plus == -minus);
}

#[test]
fn integrals_add_over_split_boxes() {
    let f = KForm::new(2, 2, AlgebraTag::scalar(), |p: &[f64]| {
        vec![LieValue::scalar(Complex64::new((p[0] * 2.1).exp() * (3.0 * p[1]).cos(), 0.0))]
    });
    let tol = 1e-8;
    let whole = SurfacePatch::box_embed(vec![(0.0, 1.0), (0.0, 1.0)], 2, vec![0, 1], vec![0.0; 2]);
    let left = SurfacePatch::box_embed(vec![(0.0, 0.5), (0.0, 1.0)], 2, vec![0, 1], vec![0.0; 2]);
    let right = SurfacePatch::box_embed(vec![(0.5, 1.0), (0.0, 1.0)], 2, vec![0, 1], vec![0.0; 2]);
    let a = integrate_form(&f, &whole, tol).unwrap();
    let b = integrate_form(&f, &left, tol).unwrap() + integrate_form(&f, &right, tol).unwrap();
    assert!((a - b).norm() <= 2.0 * tol);
}

#[test]
fn base_rule_integrates_degree_thirteen_exactly() {
    let f = KForm::new(1, 1, AlgebraTag::scalar(), |p: &[f64]| {
        vec![LieValue::scalar(Complex64::new(p[0].powi(13), 0.0))]
    });
    let line = SurfacePatch::box_embed(vec![(0.0, 1.0)], 1, vec![0], vec![0.0]);
    let got = integrate_form(&f, &line, 1e-12).unwrap();
    assert!((got - Complex64::new(1.0 / 14.0, 0.0)).norm() <= 1e-13);
}

#[test]
fn near_singular_peak_is_resolved_within_budget() {
    let eps = 2f64.powi(-14);
    let sc = scenario_flat_wire(1.0);
    let f = (sc.transverse_curvature.make)(eps);
    let disk = SurfacePatch::disk(1.0, vec![0.0; 2], 2, (0, 1));
    let got = integrate_form(&f, &disk, 1e-6).unwrap();
    let expect = Complex64::new(0.0, 2.0 * PI / (1.0 + eps * eps));
    assert!((got - expect).norm() <= 5e-6, "{got}");
}
