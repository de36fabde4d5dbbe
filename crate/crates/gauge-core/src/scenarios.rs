//! Catalog of closed-form singular gauge fields with mollified families:
//! the flat abelian wire A_eps = i*alpha (x dy - y dx)/(x^2+y^2+eps^2), the
//! Dirac monopole with its three-piece curvature split, and an SU(2)
//! connection singular along a codimension-two plane, ω_eps = ω̃_eps + a.
//! Every potential ships analytic coefficient derivatives, and each scenario
//! names the closed-form curvature pieces that sum to the structure-equation
//! curvature pointwise.

use num_complex::Complex64;

use crate::colombeau::{CompactRegion, EpsilonFamily};
use crate::connection::{curvature_form, su2_from_parts, GaugePotential};
use crate::forms::KForm;
use crate::holonomy::ParamCurve;
use crate::liealg::{su2_e, AlgebraTag, LieValue};
use crate::quadrature::SurfacePatch;

/// A named singular field together with its regularization, analytic
/// curvature pieces, and default integration geometry.
pub struct Scenario {
    pub name: &'static str,
    pub tag: AlgebraTag,
    pub dim: usize,
    pub alpha: f64,
    /// Mollified potential with analytic coefficient derivatives.
    pub potential: GaugePotential,
    /// The unregularized field, where a closed form exists away from the
    /// singular set (eps = 0 in the mollified formulas).
    pub exact_potential: Option<GaugePotential>,
    /// Named closed-form curvature pieces; their sum equals the
    /// structure-equation curvature of `potential` at every chart point.
    pub curvature_pieces: Vec<(&'static str, EpsilonFamily)>,
    /// Scalar restriction of the singular curvature term to a transverse
    /// plane, for pairing against test functions.
    pub transverse_curvature: EpsilonFamily,
    pub default_region: CompactRegion,
    /// Default flux surface.
    pub default_patches: Vec<SurfacePatch>,
    /// Default closed surface (two polar caps, inward normal).
    pub default_closed_patches: Vec<SurfacePatch>,
    pub default_loop: ParamCurve,
}

impl Scenario {
    /// Sum of the analytic curvature pieces at a fixed eps.
    pub fn piece_sum(&self, eps: f64) -> KForm {
        let mut it = self.curvature_pieces.iter();
        let (_, first) = it.next().expect("every scenario has at least one curvature piece");
        let mut acc = (first.make)(eps);
        for (_, fam) in it {
            acc = acc.add(&(fam.make)(eps)).expect("pieces share shape");
        }
        acc
    }
}

pub const SCENARIO_NAMES: [&str; 3] = ["flat_wire", "dirac_monopole", "su2_singular"];

/// Look a scenario up by its CLI name. The smooth part is only consulted by
/// `su2_singular`.
pub fn by_name(name: &str, alpha: f64, smooth: SmoothPart) -> Option<Scenario> {
    match name {
        "flat_wire" => Some(scenario_flat_wire(alpha)),
        "dirac_monopole" => Some(scenario_dirac_monopole(alpha)),
        "su2_singular" => Some(scenario_su2_singular(alpha, smooth)),
        _ => None,
    }
}

fn origin(dim: usize) -> Vec<f64> {
    vec![0.0; dim]
}

// ---------------------------------------------------------------- flat wire

/// u(1) wire potential on a 4-dimensional chart, with eps^2 passed explicitly
/// so eps = 0 yields the exact singular field.
fn wire_form(alpha: f64, eps2: f64) -> KForm {
    let coeff = move |p: &[f64]| {
        let d = p[0] * p[0] + p[1] * p[1] + eps2;
        let mut c = vec![LieValue::zero(AlgebraTag::U1); 4];
        c[0] = LieValue::u1(-alpha * p[1] / d);
        c[1] = LieValue::u1(alpha * p[0] / d);
        c
    };
    let dcoeff = move |p: &[f64]| {
        let (x, y) = (p[0], p[1]);
        let d = x * x + y * y + eps2;
        let d2 = d * d;
        let mut rows = vec![vec![LieValue::zero(AlgebraTag::U1); 4]; 4];
        rows[0][0] = LieValue::u1(2.0 * alpha * x * y / d2);
        rows[0][1] = LieValue::u1(-alpha * (x * x - y * y + eps2) / d2);
        rows[1][0] = LieValue::u1(alpha * (y * y - x * x + eps2) / d2);
        rows[1][1] = LieValue::u1(-2.0 * alpha * x * y / d2);
        rows
    };
    KForm::new(1, 4, AlgebraTag::U1, coeff).with_dcoeff(dcoeff)
}

pub fn scenario_flat_wire(alpha: f64) -> Scenario {
    let potential =
        GaugePotential::new(AlgebraTag::U1, 4, move |eps| wire_form(alpha, eps * eps));
    let exact = GaugePotential::new(AlgebraTag::U1, 4, move |_| wire_form(alpha, 0.0));

    let f_family = EpsilonFamily::new("2 i alpha eps^2 dx^dy / (x^2+y^2+eps^2)^2", move |eps| {
        let e2 = eps * eps;
        KForm::new(2, 4, AlgebraTag::U1, move |p| {
            let d = p[0] * p[0] + p[1] * p[1] + e2;
            let mut c = vec![LieValue::zero(AlgebraTag::U1); 6];
            c[0] = LieValue::u1(2.0 * alpha * e2 / (d * d));
            c
        })
    });
    let transverse = EpsilonFamily::new("wire curvature on the transverse plane", move |eps| {
        let e2 = eps * eps;
        KForm::new(2, 2, AlgebraTag::U1, move |p| {
            let d = p[0] * p[0] + p[1] * p[1] + e2;
            vec![LieValue::u1(2.0 * alpha * e2 / (d * d))]
        })
    });

    Scenario {
        name: "flat_wire",
        tag: AlgebraTag::U1,
        dim: 4,
        alpha,
        potential,
        exact_potential: Some(exact),
        curvature_pieces: vec![("F", f_family)],
        transverse_curvature: transverse,
        default_region: CompactRegion::new(
            vec![(-2.0, 2.0), (-2.0, 2.0), (-1.0, 1.0), (-1.0, 1.0)],
            17,
        )
        .unwrap()
        .with_refine_at(0, 0.0)
        .with_refine_at(1, 0.0),
        default_patches: vec![SurfacePatch::disk(2.0, origin(4), 4, (0, 1))],
        default_closed_patches: SurfacePatch::sphere_caps(1.0, origin(4), 4, (0, 1, 2), true),
        default_loop: ParamCurve::circle(1.0, &origin(4), (0, 1), 4),
    }
}

// ----------------------------------------------------------------- monopole

fn scalar(v: f64) -> LieValue {
    LieValue::scalar(Complex64::new(v, 0.0))
}

pub fn scenario_dirac_monopole(alpha: f64) -> Scenario {
    let tag = AlgebraTag::scalar();
    let make = move |eps: f64| {
        let e2 = eps * eps;
        let coeff = move |p: &[f64]| {
            let (x, y, z) = (p[0], p[1], p[2]);
            let s = (x * x + y * y + z * z + e2).sqrt();
            let pp = x * x + y * y + e2;
            let pref = 0.5 * alpha * (z / s - 1.0) / pp;
            vec![scalar(-y * pref), scalar(x * pref), scalar(0.0)]
        };
        let dcoeff = move |p: &[f64]| {
            let (x, y, z) = (p[0], p[1], p[2]);
            let s2 = x * x + y * y + z * z + e2;
            let s3 = s2 * s2.sqrt();
            let pp = x * x + y * y + e2;
            let pp2 = pp * pp;
            let u = z / s2.sqrt() - 1.0;
            let ha = 0.5 * alpha;
            let rows = vec![
                vec![
                    scalar(-ha * y * (-z * x / (s3 * pp) - 2.0 * x * u / pp2)),
                    scalar(-ha * (u / pp - z * y * y / (s3 * pp) - 2.0 * y * y * u / pp2)),
                    scalar(-ha * y / s3),
                ],
                vec![
                    scalar(ha * (u / pp - z * x * x / (s3 * pp) - 2.0 * x * x * u / pp2)),
                    scalar(ha * x * (-z * y / (s3 * pp) - 2.0 * y * u / pp2)),
                    scalar(ha * x / s3),
                ],
                vec![scalar(0.0); 3],
            ];
            rows
        };
        KForm::new(1, 3, tag, coeff).with_dcoeff(dcoeff)
    };
    let potential = GaugePotential::new(tag, 3, make);

    // Coefficient order in 3 dimensions: (xy, xz, yz).
    let f1 = EpsilonFamily::new("radial piece -alpha/(2 S^3) (z dx^dy - y dx^dz + x dy^dz)", {
        move |eps| {
            let e2 = eps * eps;
            KForm::new(2, 3, tag, move |p| {
                let (x, y, z) = (p[0], p[1], p[2]);
                let s2 = x * x + y * y + z * z + e2;
                let s3 = s2 * s2.sqrt();
                vec![
                    scalar(-0.5 * alpha * z / s3),
                    scalar(0.5 * alpha * y / s3),
                    scalar(-0.5 * alpha * x / s3),
                ]
            })
        }
    });
    let f2 = EpsilonFamily::new("axis counterterm alpha eps^2 z/(2 S^3 P) dx^dy", move |eps| {
        let e2 = eps * eps;
        KForm::new(2, 3, tag, move |p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            let s2 = x * x + y * y + z * z + e2;
            let s3 = s2 * s2.sqrt();
            let pp = x * x + y * y + e2;
            vec![scalar(0.5 * alpha * e2 * z / (s3 * pp)), scalar(0.0), scalar(0.0)]
        })
    });
    let f3 = EpsilonFamily::new("wire piece alpha eps^2 (z/S - 1)/P^2 dx^dy", move |eps| {
        let e2 = eps * eps;
        KForm::new(2, 3, tag, move |p| {
            let (x, y, z) = (p[0], p[1], p[2]);
            let s = (x * x + y * y + z * z + e2).sqrt();
            let pp = x * x + y * y + e2;
            vec![scalar(alpha * e2 * (z / s - 1.0) / (pp * pp)), scalar(0.0), scalar(0.0)]
        })
    });

    let transverse =
        EpsilonFamily::new("monopole curvature on the plane z = -1/2", move |eps| {
            let e2 = eps * eps;
            KForm::new(2, 2, tag, move |p| {
                let (x, y, z) = (p[0], p[1], -0.5);
                let s2 = x * x + y * y + z * z + e2;
                let s = s2.sqrt();
                let s3 = s2 * s;
                let pp = x * x + y * y + e2;
                let c = -0.5 * alpha * z / s3
                    + 0.5 * alpha * e2 * z / (s3 * pp)
                    + alpha * e2 * (z / s - 1.0) / (pp * pp);
                vec![scalar(c)]
            })
        });

    Scenario {
        name: "dirac_monopole",
        tag,
        dim: 3,
        alpha,
        potential,
        exact_potential: None,
        curvature_pieces: vec![("F1", f1), ("F2", f2), ("F3", f3)],
        transverse_curvature: transverse,
        default_region: CompactRegion::new(vec![(-1.5, 1.5); 3], 17)
            .unwrap()
            .with_refine_at(0, 0.0)
            .with_refine_at(1, 0.0)
            .with_refine_at(2, 0.0),
        default_patches: SurfacePatch::sphere_caps(1.0, origin(3), 3, (0, 1, 2), true),
        default_closed_patches: SurfacePatch::sphere_caps(1.0, origin(3), 3, (0, 1, 2), true),
        default_loop: ParamCurve::circle(1.0, &[0.0, 0.0, -0.5], (0, 1), 3),
    }
}

// ------------------------------------------------------------- su2 singular

/// Built-in menu of regular su(2) 1-forms added to the singular cone
/// connection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmoothPart {
    Zero,
    Constant,
    Poly,
}

impl SmoothPart {
    pub fn name(&self) -> &'static str {
        match self {
            SmoothPart::Zero => "zero",
            SmoothPart::Constant => "constant",
            SmoothPart::Poly => "poly",
        }
    }

    pub fn from_name(s: &str) -> Option<SmoothPart> {
        match s {
            "zero" => Some(SmoothPart::Zero),
            "constant" => Some(SmoothPart::Constant),
            "poly" => Some(SmoothPart::Poly),
            _ => None,
        }
    }

    /// The 1-form itself, with analytic derivatives.
    pub fn form(&self) -> KForm {
        let tag = AlgebraTag::Su2;
        match self {
            SmoothPart::Zero => KForm::zero(1, 4, tag),
            SmoothPart::Constant => {
                let mut c = vec![LieValue::zero(tag); 4];
                c[0] = su2_e(1) * 0.2;
                c[1] = su2_e(2) * 0.2;
                KForm::constant(1, 4, tag, c)
            }
            SmoothPart::Poly => {
                let coeff = |p: &[f64]| {
                    vec![
                        su2_e(1) * (0.3 * p[2]),
                        su2_e(2) * (0.2 * p[0]),
                        su2_e(3) * (0.1 * p[1]),
                        LieValue::zero(AlgebraTag::Su2),
                    ]
                };
                let dcoeff = |_p: &[f64]| {
                    let z = LieValue::zero(AlgebraTag::Su2);
                    vec![
                        vec![z, z, su2_e(1) * 0.3, z],
                        vec![su2_e(2) * 0.2, z, z, z],
                        vec![z, su2_e(3) * 0.1, z, z],
                        vec![z; 4],
                    ]
                };
                KForm::new(1, 4, tag, coeff).with_dcoeff(dcoeff)
            }
        }
    }
}

/// ω̃ + a with eps^2 explicit; eps = 0 gives the exact cone connection.
fn su2_form(alpha: f64, eps2: f64, a: &KForm) -> KForm {
    let a1 = a.clone();
    let a2 = a.clone();
    let coeff = move |p: &[f64]| {
        let d = p[0] * p[0] + p[1] * p[1] + eps2;
        let mut c = a1.coeffs(p);
        c[0] = c[0] + su2_e(3) * (2.0 * alpha * (-p[1] / d));
        c[1] = c[1] + su2_e(3) * (2.0 * alpha * (p[0] / d));
        c
    };
    let dcoeff = move |p: &[f64]| {
        let (x, y) = (p[0], p[1]);
        let d = x * x + y * y + eps2;
        let d2 = d * d;
        let s = 2.0 * alpha;
        let mut rows = a2.coeff_partials(p);
        rows[0][0] = rows[0][0] + su2_e(3) * (s * 2.0 * x * y / d2);
        rows[0][1] = rows[0][1] + su2_e(3) * (-s * (x * x - y * y + eps2) / d2);
        rows[1][0] = rows[1][0] + su2_e(3) * (s * (y * y - x * x + eps2) / d2);
        rows[1][1] = rows[1][1] + su2_e(3) * (-s * 2.0 * x * y / d2);
        rows
    };
    KForm::new(1, 4, AlgebraTag::Su2, coeff).with_dcoeff(dcoeff)
}

pub fn scenario_su2_singular(alpha: f64, smooth: SmoothPart) -> Scenario {
    let a = smooth.form();
    let potential = GaugePotential::new(AlgebraTag::Su2, 4, {
        let a = a.clone();
        move |eps| su2_form(alpha, eps * eps, &a)
    });
    let exact = GaugePotential::new(AlgebraTag::Su2, 4, {
        let a = a.clone();
        move |_| su2_form(alpha, 0.0, &a)
    });

    // F1 carries the singular family: diagonal part i alpha dA_eps, transverse
    // part -2 i alpha (a_T ^ A_eps).
    let pairs: Vec<(usize, usize)> = vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let f1 = EpsilonFamily::new("singular piece: i alpha dA on the diagonal, -2 i alpha a_T^A off it", {
        let a = a.clone();
        let pairs = pairs.clone();
        move |eps| {
            let e2 = eps * eps;
            let a = a.clone();
            let pairs = pairs.clone();
            KForm::new(2, 4, AlgebraTag::Su2, move |p| {
                let d = p[0] * p[0] + p[1] * p[1] + e2;
                let asv = [-p[1] / d, p[0] / d, 0.0, 0.0];
                let at: Vec<Complex64> = a.coeffs(p).iter().map(|c| c.entry(0, 1)).collect();
                let ia = Complex64::new(0.0, alpha);
                let das = 2.0 * e2 / (d * d);
                pairs
                    .iter()
                    .map(|&(i, j)| {
                        let dpart =
                            if (i, j) == (0, 1) { ia * das } else { Complex64::new(0.0, 0.0) };
                        let tpart = -2.0 * ia * (at[i] * asv[j] - at[j] * asv[i]);
                        su2_from_parts(dpart, tpart)
                    })
                    .collect()
            })
        }
    });

    // F2 = da + [a, a] is eps-independent; evaluate it through the structure
    // equation once and reuse the form.
    let a_static = GaugePotential::new(AlgebraTag::Su2, 4, {
        let a = a.clone();
        move |_| a.clone()
    });
    let f2_form = curvature_form(&a_static, 0.0);
    let f2 = EpsilonFamily::new("regular piece da + [a,a]", move |_| f2_form.clone());

    let transverse =
        EpsilonFamily::new("diagonal curvature entry on the transverse plane", move |eps| {
            let e2 = eps * eps;
            KForm::new(2, 2, AlgebraTag::U1, move |p| {
                let d = p[0] * p[0] + p[1] * p[1] + e2;
                vec![LieValue::u1(alpha * 2.0 * e2 / (d * d))]
            })
        });

    Scenario {
        name: "su2_singular",
        tag: AlgebraTag::Su2,
        dim: 4,
        alpha,
        potential,
        exact_potential: Some(exact),
        curvature_pieces: vec![("F1", f1), ("F2", f2)],
        transverse_curvature: transverse,
        default_region: CompactRegion::new(
            vec![(-2.0, 2.0), (-2.0, 2.0), (-1.0, 1.0), (-1.0, 1.0)],
            17,
        )
        .unwrap()
        .with_refine_at(0, 0.0)
        .with_refine_at(1, 0.0),
        default_patches: vec![SurfacePatch::disk(1.0, origin(4), 4, (0, 1))],
        default_closed_patches: SurfacePatch::sphere_caps(1.0, origin(4), 4, (0, 1, 2), true),
        default_loop: ParamCurve::circle(1.0, &origin(4), (0, 1), 4),
    }
}
