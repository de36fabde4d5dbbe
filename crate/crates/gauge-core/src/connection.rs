//! Gauge potentials as epsilon-families of algebra-valued 1-forms on a base
//! chart, their curvature F(u,v) = dA(u,v) + [A(u), A(v)], gauge
//! transformations, and the trivial-bundle picture on U x G: reconstruction
//! of a bundle connection form from a potential, connection-axiom residuals,
//! and the canonical representative built from the kernel of the form at the
//! identity section.
//!
//! Bundle tangents are left-trivialized: (v, B) stands for the tangent at
//! (x, g) moving the base along v and the fiber along d/dt g exp(tB). In
//! these coordinates the right action by h sends (v, B) to (v, ad(h^-1) B),
//! which makes both connection axioms pointwise linear algebra.

use std::sync::Arc;

use crate::colombeau::{EpsilonFamily, EpsilonLadder};
use crate::error::{Error, Result};
use crate::forms::{increasing_multi_indices, wedge_pair, KForm, Pairing};
use crate::liealg::{adjoint, bracket, matrix_product, AlgebraTag, GroupElement, LieValue};

/// Net of 1-form gauge potentials on a chart of the given dimension.
#[derive(Clone)]
pub struct GaugePotential {
    pub tag: AlgebraTag,
    pub dim: usize,
    pub make: Arc<dyn Fn(f64) -> KForm + Send + Sync>,
    /// Chart box; curves leaving it abort parallel transport.
    pub chart_bounds: Option<Vec<(f64, f64)>>,
}

impl GaugePotential {
    pub fn new<F>(tag: AlgebraTag, dim: usize, make: F) -> GaugePotential
    where
        F: Fn(f64) -> KForm + Send + Sync + 'static,
    {
        GaugePotential { tag, dim, make: Arc::new(make), chart_bounds: None }
    }

    pub fn with_chart_bounds(mut self, bounds: Vec<(f64, f64)>) -> GaugePotential {
        self.chart_bounds = Some(bounds);
        self
    }

    /// The potential at one ladder value.
    pub fn at(&self, eps: f64) -> KForm {
        let f = (self.make)(eps);
        debug_assert_eq!(f.degree, 1);
        debug_assert_eq!(f.dim, self.dim);
        debug_assert_eq!(f.tag, self.tag);
        f
    }

    pub fn family(&self, meta: impl Into<String>) -> EpsilonFamily {
        let make = self.make.clone();
        EpsilonFamily { make, meta: meta.into() }
    }
}

/// Curvature of the potential at one epsilon, as a 2-form with coefficients
/// F_ij = d_i A_j - d_j A_i + [A_i, A_j].
pub fn curvature_form(a: &GaugePotential, eps: f64) -> KForm {
    let form = a.at(eps);
    let dim = a.dim;
    let tag = a.tag;
    let pairs = increasing_multi_indices(dim, 2);
    KForm::new(2, dim, tag, move |p| {
        let coeffs = form.coeffs(p);
        let partials = form.coeff_partials(p);
        pairs
            .iter()
            .map(|ij| {
                let (i, j) = (ij[0], ij[1]);
                let da = partials[j][i] - partials[i][j];
                let br = bracket(&coeffs[i], &coeffs[j]).expect("same algebra");
                da + br
            })
            .collect()
    })
}

/// Pointwise curvature value F_eps(u, v) at p.
pub fn curvature(a: &GaugePotential, eps: f64, p: &[f64], u: &[f64], v: &[f64]) -> Result<LieValue> {
    curvature_form(a, eps).evaluate(p, &[u, v])
}

/// Local Bianchi residual dF + [A ^ F] evaluated on three vectors; decays to
/// rounding level for potentials with analytic coefficient derivatives.
pub fn bianchi_residual(
    a: &GaugePotential,
    eps: f64,
    p: &[f64],
    vs: &[&[f64]; 3],
) -> Result<LieValue> {
    let f = curvature_form(a, eps);
    let df = f.exterior_derivative().evaluate(p, &vs[..])?;
    let af = wedge_pair(&a.at(eps), &f, Pairing::Bracket, p, &vs[..])?;
    Ok(df + af)
}

/// Pointwise map into the structure group with analytic entrywise partials
/// (the partials are required by `gauge_transform`).
#[derive(Clone)]
pub struct GaugeMap {
    pub tag: AlgebraTag,
    pub value: Arc<dyn Fn(&[f64]) -> GroupElement + Send + Sync>,
    /// d_i g as raw matrices, one per chart direction.
    pub differential: Option<Arc<dyn Fn(&[f64]) -> Vec<LieValue> + Send + Sync>>,
}

/// Transform the potential by a pointwise change of gauge:
/// A~ = ad(g^-1) A + g^-1 dg.
pub fn gauge_transform(a: &GaugePotential, g: &GaugeMap) -> Result<GaugePotential> {
    if g.tag != a.tag {
        return Err(Error::AlgebraMismatch);
    }
    let dg = g.differential.clone().ok_or(Error::MissingDifferential)?;
    let gval = g.value.clone();
    let make = a.make.clone();
    let (tag, dim) = (a.tag, a.dim);
    let out = GaugePotential::new(tag, dim, move |eps| {
        let form = make(eps);
        let gv = gval.clone();
        let dgv = dg.clone();
        KForm::new(1, dim, tag, move |p| {
            let h = gv(p);
            let hinv = h.inverse();
            let parts = dgv(p);
            form.coeffs(p)
                .iter()
                .zip(parts.iter())
                .map(|(ai, dgi)| {
                    let rotated = adjoint(&hinv, ai).expect("tags match");
                    let pure = matrix_product(&hinv.as_value(), dgi).structural_projection();
                    rotated + pure
                })
                .collect()
        })
    });
    Ok(match &a.chart_bounds {
        Some(b) => out.with_chart_bounds(b.clone()),
        None => out,
    })
}

/// Split an su(2)-valued form a = [[a_D, a_T], [-conj(a_T), -a_D]] into its
/// diagonal and transverse complex-valued parts. Analytic coefficient
/// derivatives survive the split.
pub fn su2_split(a: &KForm) -> Result<(KForm, KForm)> {
    if a.tag != AlgebraTag::Su2 {
        return Err(Error::AlgebraMismatch);
    }
    let scalar = AlgebraTag::scalar();
    let mk = |slot: (usize, usize)| -> KForm {
        let inner = a.clone();
        let mut out = KForm::new(a.degree, a.dim, scalar, move |p| {
            inner
                .coeffs(p)
                .iter()
                .map(|c| LieValue::scalar(c.entry(slot.0, slot.1)))
                .collect()
        });
        if a.has_dcoeff() {
            let inner = a.clone();
            out = out.with_dcoeff(move |p| {
                inner
                    .coeff_partials(p)
                    .iter()
                    .map(|row| {
                        row.iter().map(|c| LieValue::scalar(c.entry(slot.0, slot.1))).collect()
                    })
                    .collect()
            });
        }
        out
    };
    Ok((mk((0, 0)), mk((0, 1))))
}

/// Inverse of `su2_split`: assemble [[d, t], [-conj t, -d]] from scalar-valued
/// forms. Exact on the image of the split; the caller is responsible for d
/// staying purely imaginary.
pub fn su2_join(a_d: &KForm, a_t: &KForm) -> Result<KForm> {
    if a_d.degree != a_t.degree || a_d.dim != a_t.dim {
        return Err(Error::DimensionMismatch("split parts have different shapes".into()));
    }
    let (d, t) = (a_d.clone(), a_t.clone());
    Ok(KForm::new(a_d.degree, a_d.dim, AlgebraTag::Su2, move |p| {
        d.coeffs(p)
            .iter()
            .zip(t.coeffs(p).iter())
            .map(|(cd, ct)| su2_from_parts(cd.entries[0], ct.entries[0]))
            .collect()
    }))
}

/// su(2) matrix [[d, t], [-conj t, -d]] from its diagonal and transverse
/// complex entries (d purely imaginary for a true algebra element).
pub fn su2_from_parts(d: num_complex::Complex64, t: num_complex::Complex64) -> LieValue {
    LieValue {
        tag: AlgebraTag::Su2,
        entries: [d, t, -t.conj(), -d],
    }
}

pub struct BracketSplitSides {
    pub d_direct: num_complex::Complex64,
    pub d_formula: num_complex::Complex64,
    pub t_direct: num_complex::Complex64,
    pub t_formula: num_complex::Complex64,
}

/// Both sides of the su(2) bracket split identities
///   [a,b]_D = -2i Im(a_T ^ conj(b_T)),
///   [a,b]_T = 2 (a_D ^ b_T - a_T ^ b_D),
/// where [a,b](u,v) = [a(u), b(v)] - [a(v), b(u)] and ^ is the scalar wedge
/// X ^ Y (u,v) = X(u)Y(v) - X(v)Y(u).
pub fn bracket_split_identities(
    a: &KForm,
    b: &KForm,
    p: &[f64],
    u: &[f64],
    v: &[f64],
) -> Result<BracketSplitSides> {
    if a.tag != AlgebraTag::Su2 || b.tag != AlgebraTag::Su2 {
        return Err(Error::AlgebraMismatch);
    }
    let au = a.evaluate(p, &[u])?;
    let av = a.evaluate(p, &[v])?;
    let bu = b.evaluate(p, &[u])?;
    let bv = b.evaluate(p, &[v])?;
    let direct = bracket(&au, &bv)? - bracket(&av, &bu)?;
    let (d_direct, t_direct) = (direct.entry(0, 0), direct.entry(0, 1));

    let (ad_, at_) = (au.entry(0, 0), au.entry(0, 1));
    let (ad2, at2) = (av.entry(0, 0), av.entry(0, 1));
    let (bd_, bt_) = (bu.entry(0, 0), bu.entry(0, 1));
    let (bd2, bt2) = (bv.entry(0, 0), bv.entry(0, 1));
    let i2 = num_complex::Complex64::new(0.0, -2.0);
    let wedge_t_conj = at_ * bt2.conj() - at2 * bt_.conj();
    let d_formula = i2 * num_complex::Complex64::new(wedge_t_conj.im, 0.0);
    let t_formula = ((ad_ * bt2 - ad2 * bt_) - (at_ * bd2 - at2 * bd_)) * 2.0;
    Ok(BracketSplitSides { d_direct, d_formula, t_direct, t_formula })
}

/// Left-trivialized tangent (v, B) at a bundle point (x, g).
#[derive(Clone, Debug)]
pub struct BundleTangent {
    pub base: Vec<f64>,
    pub fiber: LieValue,
}

impl BundleTangent {
    pub fn vertical(fiber: LieValue, base_dim: usize) -> BundleTangent {
        BundleTangent { base: vec![0.0; base_dim], fiber }
    }
}

/// Algebra-valued 1-form on the trivial bundle U x G, evaluated through a
/// callback on (base point, group element, tangent).
#[derive(Clone)]
pub struct BundleForm {
    pub base_dim: usize,
    pub tag: AlgebraTag,
    pub eval: Arc<dyn Fn(&[f64], &GroupElement, &BundleTangent) -> Result<LieValue> + Send + Sync>,
}

impl BundleForm {
    pub fn value(&self, x: &[f64], g: &GroupElement, t: &BundleTangent) -> Result<LieValue> {
        (self.eval)(x, g, t)
    }
}

/// Classical connection form of a potential on U x G:
/// omega_(x,g)(v, B) = ad(g^-1) A_x(v) + B. Reproduces B on verticals exactly
/// and is exactly equivariant.
pub fn reconstruct_bundle_form(a: &GaugePotential, eps: f64) -> BundleForm {
    let form = a.at(eps);
    let tag = a.tag;
    BundleForm {
        base_dim: a.dim,
        tag,
        eval: Arc::new(move |x, g, t| {
            let av = form.evaluate(x, &[&t.base])?;
            let rotated = adjoint(&g.inverse(), &av)?;
            Ok(rotated + t.fiber)
        }),
    }
}

/// One probe for the axiom residuals: a bundle point and a tangent.
#[derive(Clone)]
pub struct AxiomSample {
    pub x: Vec<f64>,
    pub g: GroupElement,
    pub tangent: BundleTangent,
}

#[derive(Clone, Debug)]
pub struct AxiomResiduals {
    pub epsilons: Vec<f64>,
    /// sup over samples of |omega(sigma(B)) - B|.
    pub res_i: Vec<f64>,
    /// sup over samples x group lattice of the equivariance defect.
    pub res_ii: Vec<f64>,
}

/// Residuals of the two connection axioms along the ladder: (i) the form
/// reproduces fiber generators, (ii) it intertwines the right action with
/// ad(h^-1) up to a defect. Feed the ladders to `certify_decay` to grade the
/// defect.
pub fn check_axioms<F>(
    make: F,
    samples: &[AxiomSample],
    g_lattice: &[GroupElement],
    ladder: &EpsilonLadder,
) -> Result<AxiomResiduals>
where
    F: Fn(f64) -> BundleForm,
{
    let eps = ladder.values();
    let mut res_i = Vec::with_capacity(eps.len());
    let mut res_ii = Vec::with_capacity(eps.len());
    for &e in &eps {
        let form = make(e);
        let mut r1 = 0.0f64;
        let mut r2 = 0.0f64;
        for s in samples {
            let vert = BundleTangent::vertical(s.tangent.fiber, form.base_dim);
            let got = form.value(&s.x, &s.g, &vert)?;
            r1 = r1.max((got - s.tangent.fiber).max_abs_entry());

            let base_val = form.value(&s.x, &s.g, &s.tangent)?;
            for h in g_lattice {
                let gh = s.g.mul(h);
                let moved = BundleTangent {
                    base: s.tangent.base.clone(),
                    fiber: adjoint(&h.inverse(), &s.tangent.fiber)?,
                };
                let lhs = form.value(&s.x, &gh, &moved)?;
                let rhs = adjoint(&h.inverse(), &base_val)?;
                r2 = r2.max((lhs - rhs).max_abs_entry());
            }
        }
        res_i.push(r1);
        res_ii.push(r2);
    }
    Ok(AxiomResiduals { epsilons: eps, res_i, res_ii })
}

/// Solve M x = b for small dense systems (dim <= 8) by Gaussian elimination
/// with partial pivoting.
fn solve_dense(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = m
        .iter()
        .flat_map(|r| r.iter().map(|x| x.abs()))
        .fold(0.0f64, f64::max)
        .max(1e-30);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col].abs() < 1e-10 * scale {
            return Err(Error::DegenerateVerticalBlock);
        }
        m.swap(piv, col);
        b.swap(piv, col);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for c in row + 1..n {
            s -= m[row][c] * x[c];
        }
        x[row] = s / m[row][row];
    }
    Ok(x)
}

/// Canonical classical representative of an approximate connection form: at
/// each base point the fiber block B -> omega_(x,e)(0,B) is inverted, the
/// base block defines the local potential A~(v), and the result
/// omega~_(x,g)(v,B) = ad(g^-1) A~(v) + B satisfies both axioms by
/// construction. Errors when the fiber block degenerates (regularization too
/// coarse).
pub fn canonicalize(form: &BundleForm) -> Result<BundleForm> {
    let tag = form.tag;
    let base_dim = form.base_dim;
    let basis = tag.basis();
    let d = basis.len();
    let inner = form.clone();
    let eval = move |x: &[f64], g: &GroupElement, t: &BundleTangent| -> Result<LieValue> {
        let e = GroupElement::identity(tag);
        // fiber block at the identity section, column per basis direction
        let mut m = vec![vec![0.0; d]; d];
        for (j, bj) in basis.iter().enumerate() {
            let col = inner
                .value(x, &e, &BundleTangent::vertical(*bj, base_dim))?
                .real_coords();
            for (r, val) in col.iter().enumerate() {
                m[r][j] = *val;
            }
        }
        let horiz = inner
            .value(x, &e, &BundleTangent { base: t.base.clone(), fiber: LieValue::zero(tag) })?
            .real_coords();
        let coords = solve_dense(m, horiz)?;
        let a_tilde = LieValue::from_real_coords(tag, &coords);
        let rotated = adjoint(&g.inverse(), &a_tilde)?;
        Ok(rotated + t.fiber)
    };
    Ok(BundleForm { base_dim, tag, eval: Arc::new(eval) })
}

/// Curvature of a bundle form at (x, g) on two left-trivialized tangents,
/// via the structure equation with directional derivatives along the tangent
/// flows t -> (x + t v, g exp(tB)). The commutator of two such extended
/// fields is purely vertical with fiber [B1, B2].
pub fn bundle_curvature(
    form: &BundleForm,
    x: &[f64],
    g: &GroupElement,
    v1: &BundleTangent,
    v2: &BundleTangent,
) -> Result<LieValue> {
    let h = 1e-4;
    let flow_eval = |along: &BundleTangent, at: &BundleTangent, t: f64| -> Result<LieValue> {
        let xt: Vec<f64> = x.iter().zip(&along.base).map(|(a, b)| a + t * b).collect();
        let gt = g.mul(&crate::liealg::exp(&(along.fiber * t)));
        form.value(&xt, &gt, at)
    };
    let deriv = |along: &BundleTangent, at: &BundleTangent| -> Result<LieValue> {
        let f2p = flow_eval(along, at, 2.0 * h)?;
        let f1p = flow_eval(along, at, h)?;
        let f1m = flow_eval(along, at, -h)?;
        let f2m = flow_eval(along, at, -2.0 * h)?;
        Ok(((f2m - f2p) + (f1p - f1m) * 8.0) * (1.0 / (12.0 * h)))
    };
    let d1 = deriv(v1, v2)?;
    let d2 = deriv(v2, v1)?;
    let comm = BundleTangent::vertical(bracket(&v1.fiber, &v2.fiber)?, form.base_dim);
    let omega_comm = form.value(x, g, &comm)?;
    let w1 = form.value(x, g, v1)?;
    let w2 = form.value(x, g, v2)?;
    Ok(d1 - d2 - omega_comm + bracket(&w1, &w2)?)
}
