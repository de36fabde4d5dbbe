//! Invariant polynomials of curvature and the Chern forms they induce. The
//! normalization comes from the characteristic polynomial
//! det(lambda I - A/(2 pi i)) = sum_k f_k(A) lambda^(n-k), so
//! f1(A) = -tr(A)/(2 pi i) and f2(A) = det(A)/(2 pi i)^2, with f2 polarized
//! to a symmetric bilinear form for use on curvature pairs. Chern forms are
//! closed scalar forms c_k of degree 2k; their integrals over closed
//! surfaces extrapolate to Chern numbers as the regularization is removed.
//!
//! The antisymmetrization constant for c2 is fixed so that the determinant
//! wedge convention (dx^dy(e_x, e_y) = 1) makes the Whitney identity exact:
//! for block-diagonal u(1)+u(1) curvature, c2 = c1' ^ c1'' pointwise. A unit
//! test derives the constant that way.

use num_complex::Complex64;

use crate::colombeau::{EpsilonFamily, EpsilonLadder};
use crate::connection::{curvature_form, GaugePotential};
use crate::error::{Error, Result};
use crate::forms::{
    increasing_multi_indices, multi_index_rank, permutations_with_sign, KForm,
};
use crate::liealg::{AlgebraTag, LieValue};
use crate::quadrature::{flux_limit, integrate_over_patches, FluxLimit, SurfacePatch};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// First elementary invariant: -tr(A)/(2 pi i).
pub fn f1(a: &LieValue) -> Complex64 {
    -a.trace() / Complex64::new(0.0, TWO_PI)
}

/// Second elementary invariant: det(A)/(2 pi i)^2.
pub fn f2(a: &LieValue) -> Complex64 {
    let denom = Complex64::new(0.0, TWO_PI) * Complex64::new(0.0, TWO_PI);
    a.det() / denom
}

/// Symmetric bilinear polarization of f2: (tr A tr B - tr(AB)) / (2 (2 pi i)^2).
pub fn f2_polarized(a: &LieValue, b: &LieValue) -> Complex64 {
    let denom = Complex64::new(0.0, TWO_PI) * Complex64::new(0.0, TWO_PI) * 2.0;
    let tr_ab = (0..a.n())
        .flat_map(|r| (0..a.n()).map(move |c| (r, c)))
        .map(|(r, c)| a.entry(r, c) * b.entry(c, r))
        .sum::<Complex64>();
    (a.trace() * b.trace() - tr_ab) / denom
}

/// Elementary invariant f_k on one argument, or its polarization on k
/// arguments. Defined for k <= n <= 2.
pub fn invariant_poly(k: usize, args: &[LieValue]) -> Result<Complex64> {
    if args.is_empty() {
        return Err(Error::Invalid("invariant polynomial needs arguments".into()));
    }
    let n = args[0].n();
    if k > n || !(1..=2).contains(&k) {
        return Err(Error::Invalid(format!(
            "f_{k} undefined for {n}x{n} arguments"
        )));
    }
    match (k, args.len()) {
        (1, 1) => Ok(f1(&args[0])),
        (2, 1) => Ok(f2(&args[0])),
        (2, 2) => Ok(f2_polarized(&args[0], &args[1])),
        _ => Err(Error::Invalid(format!(
            "f_{k} takes one argument or {k} for polarization, got {}",
            args.len()
        ))),
    }
}

/// Closed scalar 2k-form built from an invariant polynomial of curvature.
#[derive(Clone)]
pub struct ChernForm {
    pub k: usize,
    pub form: KForm,
}

/// Value of a 2-form on (e_i, e_j) from its increasing coefficients.
fn two_form_on_axes(
    coeffs: &[LieValue],
    pairs: &[Vec<usize>],
    tag: AlgebraTag,
    i: usize,
    j: usize,
) -> LieValue {
    use std::cmp::Ordering;
    match i.cmp(&j) {
        Ordering::Less => coeffs[multi_index_rank(pairs, &[i, j])],
        Ordering::Greater => -coeffs[multi_index_rank(pairs, &[j, i])],
        Ordering::Equal => LieValue::zero(tag),
    }
}

/// Chern form c_k of the potential at one epsilon. c1 applies f1 to each
/// curvature coefficient; c2 antisymmetrizes f2 over curvature pairs with
/// the constant 1/(2! 2!) matching the determinant wedge convention.
pub fn chern_form(a: &GaugePotential, eps: f64, k: usize) -> Result<ChernForm> {
    let n = a.tag.n();
    if !(1..=2).contains(&k) || k > n {
        return Err(Error::Invalid(format!(
            "c_{k} undefined for structure group of {n}x{n} matrices"
        )));
    }
    let f = curvature_form(a, eps);
    let scalar = AlgebraTag::scalar();
    let form = match k {
        1 => {
            let dim = a.dim;
            KForm::new(2, dim, scalar, move |p| {
                f.coeffs(p).iter().map(|c| LieValue::scalar(f1(c))).collect()
            })
        }
        _ => {
            let dim = a.dim;
            let tag = a.tag;
            let pairs = increasing_multi_indices(dim, 2);
            let quads = increasing_multi_indices(dim, 4);
            let perms = permutations_with_sign(4);
            KForm::new(4, dim, scalar, move |p| {
                let coeffs = f.coeffs(p);
                quads
                    .iter()
                    .map(|q| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (perm, sign) in &perms {
                            let fa = two_form_on_axes(&coeffs, &pairs, tag, q[perm[0]], q[perm[1]]);
                            let fb = two_form_on_axes(&coeffs, &pairs, tag, q[perm[2]], q[perm[3]]);
                            acc += f2_polarized(&fa, &fb) * *sign;
                        }
                        LieValue::scalar(acc * 0.25)
                    })
                    .collect()
            })
        }
    };
    Ok(ChernForm { k, form })
}

/// Largest exact-form integral over the patch collection; zero within
/// tolerance exactly when the collection closes up. Every constant
/// coefficient d-form is exact, so their integrals probe the boundary.
pub fn boundary_residual(patches: &[SurfacePatch], dim_form: usize) -> Result<f64> {
    let ambient = patches
        .first()
        .ok_or_else(|| Error::Invalid("no patches given".into()))?
        .ambient;
    let scalar = AlgebraTag::scalar();
    let n_coeffs = increasing_multi_indices(ambient, dim_form).len();
    let mut worst = 0.0f64;
    for idx in 0..n_coeffs {
        let mut coeffs = vec![LieValue::zero(scalar); n_coeffs];
        coeffs[idx] = LieValue::scalar(Complex64::new(1.0, 0.0));
        let form = KForm::constant(dim_form, ambient, scalar, coeffs);
        let total = integrate_over_patches(&form, patches, 1e-9)?;
        worst = worst.max(total.norm());
    }
    Ok(worst)
}

/// Chern number: integral of c_k over a closed collection of 2k-patches,
/// per ladder entry, extrapolated to epsilon -> 0. Rejects patch collections
/// with a visible boundary.
pub fn chern_number(
    a: &GaugePotential,
    k: usize,
    patches: &[SurfacePatch],
    ladder: &EpsilonLadder,
    tol: f64,
) -> Result<FluxLimit> {
    if patches.iter().any(|p| p.dim != 2 * k) {
        return Err(Error::DimensionMismatch(format!(
            "c_{k} integrates over {}-dimensional patches",
            2 * k
        )));
    }
    let residual = boundary_residual(patches, 2 * k)?;
    if residual > 1e-6 {
        return Err(Error::Invalid(format!(
            "patch collection is not closed: exact-form residual {residual:.3e}"
        )));
    }
    chern_form(a, ladder.eps0, k)?;
    let a2 = a.clone();
    let fam = EpsilonFamily::new(format!("c_{k}"), move |eps| {
        chern_form(&a2, eps, k).expect("validated").form
    });
    flux_limit(&fam, patches, ladder, tol)
}

/// Max norm of the exterior derivative's coefficients over sample points.
pub fn closedness_residual(cf: &ChernForm, samples: &[Vec<f64>]) -> f64 {
    let d = cf.form.exterior_derivative();
    samples
        .iter()
        .flat_map(|p| d.coeffs(p))
        .map(|c| c.max_abs_entry())
        .fold(0.0, f64::max)
}
