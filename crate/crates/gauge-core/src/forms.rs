//! Lie-algebra valued differential k-forms on open chart domains of R^m.
//!
//! A k-form is stored as a callback producing one coefficient per increasing
//! multi-index (lexicographic order), so that
//!   f = sum_I c_I(p) dx_{I_1} ^ ... ^ dx_{I_k},
//! and evaluation on vectors v_1..v_k contracts each c_I with the determinant
//! of the selected vector components. An optional second callback supplies
//! analytic partial derivatives of the coefficients; without it, exterior
//! derivatives fall back to 4th-order central finite differences with one
//! Richardson step.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::liealg::{bracket, matrix_product, AlgebraTag, LieValue};
use crate::quadrature::SurfacePatch;

pub type ChartPoint = Vec<f64>;

/// Coefficients at a point, one per increasing multi-index.
pub type CoeffFn = Arc<dyn Fn(&[f64]) -> Vec<LieValue> + Send + Sync>;
/// Partial derivatives of the coefficients: out[index][direction].
pub type DCoeffFn = Arc<dyn Fn(&[f64]) -> Vec<Vec<LieValue>> + Send + Sync>;

pub const MAX_DEGREE: usize = 4;
pub const MAX_DIM: usize = 7;

/// All increasing multi-indices of length k in 0..dim, lexicographic.
pub fn increasing_multi_indices(dim: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(dim: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(dim, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(dim, k, 0, &mut cur, &mut out);
    out
}

/// Position of an increasing multi-index in the lexicographic enumeration.
pub fn multi_index_rank(sorted: &[Vec<usize>], idx: &[usize]) -> usize {
    sorted
        .binary_search_by(|probe| probe.as_slice().cmp(idx))
        .expect("multi-index out of range")
}

#[derive(Clone)]
pub struct KForm {
    pub degree: usize,
    pub dim: usize,
    pub tag: AlgebraTag,
    coeff: CoeffFn,
    dcoeff: Option<DCoeffFn>,
}

impl KForm {
    pub fn new<F>(degree: usize, dim: usize, tag: AlgebraTag, coeff: F) -> KForm
    where
        F: Fn(&[f64]) -> Vec<LieValue> + Send + Sync + 'static,
    {
        assert!(degree <= MAX_DEGREE, "degree capped at {MAX_DEGREE}");
        assert!(dim <= MAX_DIM && dim >= 1, "chart dimension capped at {MAX_DIM}");
        KForm { degree, dim, tag, coeff: Arc::new(coeff), dcoeff: None }
    }

    pub fn with_dcoeff<F>(mut self, dcoeff: F) -> KForm
    where
        F: Fn(&[f64]) -> Vec<Vec<LieValue>> + Send + Sync + 'static,
    {
        self.dcoeff = Some(Arc::new(dcoeff));
        self
    }

    pub fn has_dcoeff(&self) -> bool {
        self.dcoeff.is_some()
    }

    /// Form with coefficients constant in p.
    pub fn constant(degree: usize, dim: usize, tag: AlgebraTag, coeffs: Vec<LieValue>) -> KForm {
        let n = increasing_multi_indices(dim, degree).len();
        assert_eq!(coeffs.len(), n, "expected {n} coefficients");
        let c2 = coeffs.clone();
        let zero_partials: Vec<Vec<LieValue>> =
            coeffs.iter().map(|_| vec![LieValue::zero(tag); dim]).collect();
        KForm::new(degree, dim, tag, move |_p| c2.clone())
            .with_dcoeff(move |_p| zero_partials.clone())
    }

    pub fn zero(degree: usize, dim: usize, tag: AlgebraTag) -> KForm {
        let n = increasing_multi_indices(dim, degree).len();
        KForm::constant(degree, dim, tag, vec![LieValue::zero(tag); n])
    }

    pub fn n_coeffs(&self) -> usize {
        increasing_multi_indices(self.dim, self.degree).len()
    }

    pub fn coeffs(&self, p: &[f64]) -> Vec<LieValue> {
        let c = (self.coeff)(p);
        debug_assert_eq!(c.len(), self.n_coeffs(), "coefficient callback arity");
        c
    }

    /// Partials of every coefficient in every direction: out[index][dir].
    /// Uses the analytic callback when present, otherwise finite differences.
    pub fn coeff_partials(&self, p: &[f64]) -> Vec<Vec<LieValue>> {
        match &self.dcoeff {
            Some(d) => d(p),
            None => fd_partials(&self.coeff, p, self.dim, self.tag, self.n_coeffs()),
        }
    }

    /// Evaluate on k vectors: sum over increasing multi-indices of
    /// coefficient times det of the selected vector components.
    pub fn evaluate(&self, p: &[f64], vectors: &[&[f64]]) -> Result<LieValue> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coords, chart dimension is {}",
                p.len(),
                self.dim
            )));
        }
        if vectors.len() != self.degree {
            return Err(Error::DimensionMismatch(format!(
                "degree {} form applied to {} vectors",
                self.degree,
                vectors.len()
            )));
        }
        for v in vectors {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch(format!(
                    "vector has {} components, chart dimension is {}",
                    v.len(),
                    self.dim
                )));
            }
        }
        let coeffs = self.coeffs(p);
        let indices = increasing_multi_indices(self.dim, self.degree);
        let mut acc = LieValue::zero(self.tag);
        for (c, idx) in coeffs.iter().zip(indices.iter()) {
            let d = selection_det(idx, vectors);
            if d != 0.0 {
                acc = acc + *c * d;
            }
        }
        Ok(acc)
    }

    /// Exterior derivative as a (k+1)-form. The coefficient for an increasing
    /// index J is sum_m (-1)^m (d/dx_{J_m}) c_{J \ J_m}.
    pub fn exterior_derivative(&self) -> KForm {
        assert!(self.degree < MAX_DEGREE, "exterior derivative degree cap");
        let inner = self.clone();
        let dim = self.dim;
        let tag = self.tag;
        let k = self.degree;
        let lower = increasing_multi_indices(dim, k);
        let upper = increasing_multi_indices(dim, k + 1);
        KForm::new(k + 1, dim, tag, move |p| {
            let partials = inner.coeff_partials(p);
            upper
                .iter()
                .map(|j_idx| {
                    let mut acc = LieValue::zero(tag);
                    for (m, &jm) in j_idx.iter().enumerate() {
                        let rest: Vec<usize> =
                            j_idx.iter().enumerate().filter(|&(q, _)| q != m).map(|(_, &x)| x).collect();
                        let pos = multi_index_rank(&lower, &rest);
                        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                        acc = acc + partials[pos][jm] * sign;
                    }
                    acc
                })
                .collect()
        })
    }

    /// Pointwise sum (same shape and tag).
    pub fn add(&self, other: &KForm) -> Result<KForm> {
        if self.degree != other.degree || self.dim != other.dim {
            return Err(Error::DimensionMismatch("form shapes differ".into()));
        }
        if self.tag != other.tag {
            return Err(Error::AlgebraMismatch);
        }
        let (a, b) = (self.clone(), other.clone());
        let mut out = KForm::new(self.degree, self.dim, self.tag, move |p| {
            a.coeffs(p)
                .into_iter()
                .zip(b.coeffs(p))
                .map(|(x, y)| x + y)
                .collect()
        });
        if self.dcoeff.is_some() && other.dcoeff.is_some() {
            let (a, b) = (self.clone(), other.clone());
            out = out.with_dcoeff(move |p| {
                a.coeff_partials(p)
                    .into_iter()
                    .zip(b.coeff_partials(p))
                    .map(|(ra, rb)| ra.into_iter().zip(rb).map(|(x, y)| x + y).collect())
                    .collect()
            });
        }
        Ok(out)
    }

    /// Pointwise real scaling.
    pub fn scale(&self, s: f64) -> KForm {
        let a = self.clone();
        let mut out = KForm::new(self.degree, self.dim, self.tag, move |p| {
            a.coeffs(p).into_iter().map(|x| x * s).collect()
        });
        if self.dcoeff.is_some() {
            let a = self.clone();
            out = out.with_dcoeff(move |p| {
                a.coeff_partials(p)
                    .into_iter()
                    .map(|row| row.into_iter().map(|x| x * s).collect())
                    .collect()
            });
        }
        out
    }

    /// Multiply by a real scalar function of the point (no derivative data on
    /// the result).
    pub fn scale_by_fn<F>(&self, weight: F) -> KForm
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let a = self.clone();
        KForm::new(self.degree, self.dim, self.tag, move |p| {
            let w = weight(p);
            a.coeffs(p).into_iter().map(|x| x * w).collect()
        })
    }
}

/// det of the k x k matrix M[l][j] = vectors[j][idx[l]].
fn selection_det(idx: &[usize], vectors: &[&[f64]]) -> f64 {
    let k = idx.len();
    match k {
        0 => 1.0,
        1 => vectors[0][idx[0]],
        2 => {
            let (a, b) = (idx[0], idx[1]);
            vectors[0][a] * vectors[1][b] - vectors[1][a] * vectors[0][b]
        }
        _ => {
            let mut m = [[0.0f64; 4]; 4];
            for (l, &i) in idx.iter().enumerate() {
                for (j, v) in vectors.iter().enumerate() {
                    m[l][j] = v[i];
                }
            }
            det_small(&mut m, k)
        }
    }
}

/// Gaussian elimination with partial pivoting for n <= 4.
fn det_small(m: &mut [[f64; 4]; 4], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[r][col].abs() > m[piv][col].abs() {
                piv = r;
            }
        }
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
}

/// Finite-difference coefficient partials: 4th-order central differences with
/// step h = 1e-4 * max(1, |p|_inf), refined by one Richardson step
/// (16 D_{h/2} - D_h)/15.
pub fn fd_partials(
    coeff: &CoeffFn,
    p: &[f64],
    dim: usize,
    tag: AlgebraTag,
    n_coeffs: usize,
) -> Vec<Vec<LieValue>> {
    let pmax = p.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let h = 1e-4 * pmax.max(1.0);
    let stencil = |dir: usize, step: f64| -> Vec<LieValue> {
        let shifted = |offset: f64| {
            let mut q = p.to_vec();
            q[dir] += offset;
            coeff(&q)
        };
        let (f2p, f1p, f1m, f2m) = (
            shifted(2.0 * step),
            shifted(step),
            shifted(-step),
            shifted(-2.0 * step),
        );
        (0..n_coeffs)
            .map(|i| {
                ((f2m[i] - f2p[i]) + (f1p[i] - f1m[i]) * 8.0) * (1.0 / (12.0 * step))
            })
            .collect()
    };
    let mut out = vec![vec![LieValue::zero(tag); dim]; n_coeffs];
    for dir in 0..dim {
        let dh = stencil(dir, h);
        let dh2 = stencil(dir, h / 2.0);
        for i in 0..n_coeffs {
            out[i][dir] = (dh2[i] * 16.0 - dh[i]) * (1.0 / 15.0);
        }
    }
    out
}

/// How two form values are combined inside an antisymmetrized product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// Lie bracket of same-tag values.
    Bracket,
    /// Multiplication where at least one factor is 1x1.
    ScalarMultiply,
    /// trace(a b) as a complex scalar.
    TracePair,
}

fn apply_pairing(pairing: Pairing, a: &LieValue, b: &LieValue) -> Result<LieValue> {
    match pairing {
        Pairing::Bracket => bracket(a, b),
        Pairing::ScalarMultiply => {
            if a.n() == 1 && b.n() == 1 {
                Ok(LieValue::scalar(a.entries[0] * b.entries[0]))
            } else if a.n() == 1 {
                Ok(b.retag(AlgebraTag::GlnC(b.n())).scale_complex(a.entries[0]))
            } else if b.n() == 1 {
                Ok(a.retag(AlgebraTag::GlnC(a.n())).scale_complex(b.entries[0]))
            } else {
                Err(Error::Invalid(
                    "scalar-multiply pairing needs a 1x1-valued factor".into(),
                ))
            }
        }
        Pairing::TracePair => {
            if a.n() != b.n() {
                return Err(Error::AlgebraMismatch);
            }
            Ok(LieValue::scalar(matrix_product(a, b).trace()))
        }
    }
}

/// Permutations of 0..n with signs, in a fixed deterministic order.
pub fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn rec(items: &mut Vec<usize>, k: usize, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if k == items.len() {
            out.push((items.clone(), sign));
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            let s = if i == k { sign } else { -sign };
            rec(items, k + 1, s, out);
            items.swap(k, i);
        }
    }
    rec(&mut items, 0, 1.0, &mut out);
    out
}

/// Antisymmetrized product of two forms under a pairing, evaluated on
/// j+k vectors:
///   1/(j! k!) sum_{sigma} sign(sigma)
///     pairing(f(v_{sigma(1..j)}), g(v_{sigma(j+1..j+k)})).
/// The shuffle normalization 1/(j! k!) makes dx ^ dy evaluate to 1 on
/// (e_x, e_y) under the scalar pairing.
pub fn wedge_pair(
    f: &KForm,
    g: &KForm,
    pairing: Pairing,
    p: &[f64],
    vectors: &[&[f64]],
) -> Result<LieValue> {
    let (j, k) = (f.degree, g.degree);
    if vectors.len() != j + k {
        return Err(Error::DimensionMismatch(format!(
            "wedge of degrees {j}+{k} applied to {} vectors",
            vectors.len()
        )));
    }
    if j + k > MAX_DEGREE {
        return Err(Error::DimensionMismatch("wedge degree exceeds cap".into()));
    }
    let mut acc: Option<LieValue> = None;
    for (perm, sign) in permutations_with_sign(j + k) {
        let left: Vec<&[f64]> = perm[..j].iter().map(|&i| vectors[i]).collect();
        let right: Vec<&[f64]> = perm[j..].iter().map(|&i| vectors[i]).collect();
        let fa = f.evaluate(p, &left)?;
        let gb = g.evaluate(p, &right)?;
        let term = apply_pairing(pairing, &fa, &gb)? * sign;
        acc = Some(match acc {
            None => term,
            Some(a) => a + term,
        });
    }
    let norm = 1.0 / (factorial(j) * factorial(k));
    Ok(acc.expect("at least one permutation") * norm)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product::<f64>().max(1.0)
}

/// Pullback of f along a parameterized patch, evaluated at parameter point q
/// on parameter-space vectors w_i: pushes each w_i through the Jacobian and
/// evaluates f at patch(q). Orientation is not applied here; it belongs to
/// integration.
pub fn pullback(f: &KForm, patch: &SurfacePatch, q: &[f64], ws: &[&[f64]]) -> Result<LieValue> {
    if ws.len() != f.degree {
        return Err(Error::DimensionMismatch(format!(
            "degree {} form pulled back onto {} vectors",
            f.degree,
            ws.len()
        )));
    }
    let x = (patch.map)(q);
    if x.len() != f.dim {
        return Err(Error::DimensionMismatch(format!(
            "patch lands in dimension {}, form lives in {}",
            x.len(),
            f.dim
        )));
    }
    let jac = (patch.jacobian)(q);
    let pushed: Vec<Vec<f64>> = ws
        .iter()
        .map(|w| {
            (0..f.dim)
                .map(|r| (0..patch.dim).map(|c| jac[r][c] * w[c]).sum())
                .collect()
        })
        .collect();
    let refs: Vec<&[f64]> = pushed.iter().map(|v| v.as_slice()).collect();
    f.evaluate(&x, &refs)
}
