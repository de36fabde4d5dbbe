//! Integration of pulled-back k-forms over parameterized patches (loops,
//! disks, spheres, balls) with adaptive tensor-product Gauss-Legendre
//! quadrature, plus flux limits along a regularization ladder.
//!
//! The sphere is covered by two polar caps with a rim-flattened
//! parameterization: the closed square [-1,1]^2 is mapped to the closed disk
//! by an elliptical map, then radially reparameterized so that the cap meets
//! its rim with bounded derivatives. This keeps integrands that concentrate
//! near the poles (the interesting case here) smooth in parameter space.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::colombeau::{extrapolate, EpsilonFamily, EpsilonLadder, Extrapolation, GeneralizedNumber};
use crate::error::{Error, Result};
use crate::forms::{pullback, KForm};

/// Parameterized integration domain: a smooth map from a parameter box into a
/// chart, with an analytic Jacobian (rows indexed by ambient coordinate,
/// columns by parameter).
#[derive(Clone)]
pub struct SurfacePatch {
    pub dim: usize,
    pub ambient: usize,
    pub bounds: Vec<(f64, f64)>,
    pub map: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    pub jacobian: Arc<dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync>,
    pub orientation: f64,
    pub label: String,
    /// Parameter values (axis, value) toward which pulled-back integrands may
    /// concentrate, e.g. where a mollified singular locus meets the patch.
    /// Graded integration pre-refines cells containing these values.
    pub refine_at: Vec<(usize, f64)>,
}

impl SurfacePatch {
    /// Circle of given radius in the (axes.0, axes.1) plane, parameterized by
    /// t in [0, 2pi].
    pub fn circle(radius: f64, center: Vec<f64>, ambient: usize, axes: (usize, usize)) -> SurfacePatch {
        let c = center.clone();
        let (i, j) = axes;
        let map = move |q: &[f64]| {
            let mut x = c.clone();
            x[i] += radius * q[0].cos();
            x[j] += radius * q[0].sin();
            x
        };
        let jac = move |q: &[f64]| {
            let mut rows = vec![vec![0.0]; ambient];
            rows[i][0] = -radius * q[0].sin();
            rows[j][0] = radius * q[0].cos();
            rows
        };
        SurfacePatch {
            dim: 1,
            ambient,
            bounds: vec![(0.0, 2.0 * std::f64::consts::PI)],
            map: Arc::new(map),
            jacobian: Arc::new(jac),
            orientation: 1.0,
            label: format!("circle R={radius}"),
            refine_at: Vec::new(),
        }
    }

    /// Replace the marked concentration values.
    pub fn with_refine_at(mut self, refine_at: Vec<(usize, f64)>) -> SurfacePatch {
        self.refine_at = refine_at;
        self
    }

    /// Disk of given radius in the (axes.0, axes.1) plane, polar parameters
    /// (r, t) in [0, R] x [0, 2pi], standard orientation.
    pub fn disk(radius: f64, center: Vec<f64>, ambient: usize, axes: (usize, usize)) -> SurfacePatch {
        let c = center.clone();
        let (i, j) = axes;
        let map = move |q: &[f64]| {
            let mut x = c.clone();
            x[i] += q[0] * q[1].cos();
            x[j] += q[0] * q[1].sin();
            x
        };
        let jac = move |q: &[f64]| {
            let mut rows = vec![vec![0.0, 0.0]; ambient];
            rows[i] = vec![q[1].cos(), -q[0] * q[1].sin()];
            rows[j] = vec![q[1].sin(), q[0] * q[1].cos()];
            rows
        };
        SurfacePatch {
            dim: 2,
            ambient,
            bounds: vec![(0.0, radius), (0.0, 2.0 * std::f64::consts::PI)],
            map: Arc::new(map),
            jacobian: Arc::new(jac),
            orientation: 1.0,
            label: format!("disk R={radius}"),
            refine_at: vec![(0, 0.0)],
        }
    }

    /// Axis-aligned box embedded along the given chart axes; remaining
    /// coordinates are taken from `base`.
    pub fn box_embed(bounds: Vec<(f64, f64)>, ambient: usize, axes: Vec<usize>, base: Vec<f64>) -> SurfacePatch {
        let dim = bounds.len();
        assert_eq!(axes.len(), dim);
        let axes2 = axes.clone();
        let base2 = base.clone();
        let map = move |q: &[f64]| {
            let mut x = base2.clone();
            for (k, &ax) in axes2.iter().enumerate() {
                x[ax] = q[k];
            }
            x
        };
        let jac = move |_q: &[f64]| {
            let mut rows = vec![vec![0.0; dim]; ambient];
            for (k, &ax) in axes.iter().enumerate() {
                rows[ax][k] = 1.0;
            }
            rows
        };
        SurfacePatch {
            dim,
            ambient,
            bounds,
            map: Arc::new(map),
            jacobian: Arc::new(jac),
            orientation: 1.0,
            label: "box".into(),
            refine_at: Vec::new(),
        }
    }

    /// Ball of given radius in the (axes) 3-space, spherical parameters
    /// (rho, theta, phi).
    pub fn ball(radius: f64, center: Vec<f64>, ambient: usize, axes: (usize, usize, usize)) -> SurfacePatch {
        let c = center.clone();
        let (i, j, k) = axes;
        let map = move |q: &[f64]| {
            let (rho, th, ph) = (q[0], q[1], q[2]);
            let mut x = c.clone();
            x[i] += rho * th.sin() * ph.cos();
            x[j] += rho * th.sin() * ph.sin();
            x[k] += rho * th.cos();
            x
        };
        let jac = move |q: &[f64]| {
            let (rho, th, ph) = (q[0], q[1], q[2]);
            let mut rows = vec![vec![0.0; 3]; ambient];
            rows[i] = vec![
                th.sin() * ph.cos(),
                rho * th.cos() * ph.cos(),
                -rho * th.sin() * ph.sin(),
            ];
            rows[j] = vec![
                th.sin() * ph.sin(),
                rho * th.cos() * ph.sin(),
                rho * th.sin() * ph.cos(),
            ];
            rows[k] = vec![th.cos(), -rho * th.sin(), 0.0];
            rows
        };
        SurfacePatch {
            dim: 3,
            ambient,
            bounds: vec![
                (0.0, radius),
                (0.0, std::f64::consts::PI),
                (0.0, 2.0 * std::f64::consts::PI),
            ],
            map: Arc::new(map),
            jacobian: Arc::new(jac),
            orientation: 1.0,
            label: format!("ball R={radius}"),
            refine_at: vec![(0, 0.0)],
        }
    }

    /// Sphere of given radius in the (axes) 3-space as two rim-flattened polar
    /// caps. With `inward` true the pair is oriented by the inward normal
    /// (both caps pull dx^dy back with the sign of the projection to the
    /// equatorial plane on the lower cap).
    pub fn sphere_caps(
        radius: f64,
        center: Vec<f64>,
        ambient: usize,
        axes: (usize, usize, usize),
        inward: bool,
    ) -> Vec<SurfacePatch> {
        let mut out = Vec::with_capacity(2);
        for upper in [true, false] {
            let natural_outward = upper;
            let orientation = if inward == natural_outward { -1.0 } else { 1.0 };
            out.push(sphere_cap(radius, center.clone(), ambient, axes, upper, orientation));
        }
        out
    }
}

/// Half-angle scale of the cap map.
const CAP_C: f64 = std::f64::consts::FRAC_PI_2;

/// sin(c*r)/r as a function of s = r^2, with series fallback near 0.
fn cap_h(s: f64) -> f64 {
    if s < 1e-8 {
        CAP_C * (1.0 - CAP_C * CAP_C * s / 6.0 + CAP_C.powi(4) * s * s / 120.0)
    } else {
        let r = s.sqrt();
        (CAP_C * r).sin() / r
    }
}

/// dh/ds.
fn cap_dh(s: f64) -> f64 {
    if s < 1e-6 {
        -CAP_C.powi(3) / 6.0 + CAP_C.powi(5) * s / 60.0
    } else {
        let r = s.sqrt();
        (CAP_C * (CAP_C * r).cos() - cap_h(s)) / (2.0 * s)
    }
}

fn sphere_cap(
    radius: f64,
    center: Vec<f64>,
    ambient: usize,
    axes: (usize, usize, usize),
    upper: bool,
    orientation: f64,
) -> SurfacePatch {
    let (ix, iy, iz) = axes;
    let zsign = if upper { 1.0 } else { -1.0 };
    let c0 = center.clone();
    let map = move |q: &[f64]| {
        let (a, b) = (q[0], q[1]);
        let p = a * (1.0 - b * b / 2.0).sqrt();
        let qq = b * (1.0 - a * a / 2.0).sqrt();
        let s = p * p + qq * qq;
        let h = cap_h(s);
        let mut x = c0.clone();
        x[ix] += radius * h * p;
        x[iy] += radius * h * qq;
        x[iz] += zsign * radius * (CAP_C * s.sqrt()).cos();
        x
    };
    let jac = move |q: &[f64]| {
        let (a, b) = (q[0], q[1]);
        let fa = (1.0 - b * b / 2.0).sqrt();
        let fb = (1.0 - a * a / 2.0).sqrt();
        let p = a * fa;
        let qq = b * fb;
        let s = p * p + qq * qq;
        let h = cap_h(s);
        let dh = cap_dh(s);
        // derivatives of (u, v, z) with respect to (p, q)
        let du_dp = radius * (h + 2.0 * p * p * dh);
        let du_dq = radius * 2.0 * p * qq * dh;
        let dv_dp = du_dq;
        let dv_dq = radius * (h + 2.0 * qq * qq * dh);
        let dz_dp = -zsign * radius * CAP_C * p * h;
        let dz_dq = -zsign * radius * CAP_C * qq * h;
        // elliptical square-to-disk chain
        let dp_da = fa;
        let dp_db = if fa > 0.0 { -a * b / (2.0 * fa) } else { 0.0 };
        let dq_da = if fb > 0.0 { -a * b / (2.0 * fb) } else { 0.0 };
        let dq_db = fb;
        let mut rows = vec![vec![0.0, 0.0]; ambient];
        rows[ix] = vec![du_dp * dp_da + du_dq * dq_da, du_dp * dp_db + du_dq * dq_db];
        rows[iy] = vec![dv_dp * dp_da + dv_dq * dq_da, dv_dp * dp_db + dv_dq * dq_db];
        rows[iz] = vec![dz_dp * dp_da + dz_dq * dq_da, dz_dp * dp_db + dz_dq * dq_db];
        rows
    };
    SurfacePatch {
        dim: 2,
        ambient,
        bounds: vec![(-1.0, 1.0), (-1.0, 1.0)],
        map: Arc::new(map),
        jacobian: Arc::new(jac),
        orientation,
        label: format!(
            "sphere cap R={radius} {}",
            if upper { "upper" } else { "lower" }
        ),
        refine_at: vec![(0, 0.0), (1, 0.0)],
    }
}

/// 7-point Gauss-Legendre nodes and weights on [-1, 1].
pub const GL7_NODES: [f64; 7] = [
    -0.9491079123427585,
    -0.7415311855993945,
    -0.4058451513773972,
    0.0,
    0.4058451513773972,
    0.7415311855993945,
    0.9491079123427585,
];
pub const GL7_WEIGHTS: [f64; 7] = [
    0.1294849661688697,
    0.2797053914892766,
    0.3818300505051189,
    0.4179591836734694,
    0.3818300505051189,
    0.2797053914892766,
    0.1294849661688697,
];

pub const DEFAULT_CELL_BUDGET: usize = 1 << 20;
pub const DEFAULT_TOL: f64 = 1e-8;

/// Tensor-product Gauss-Legendre over one parameter cell.
fn cell_integral(
    integrand: &mut dyn FnMut(&[f64]) -> Result<Complex64>,
    lo: &[f64],
    hi: &[f64],
) -> Result<Complex64> {
    let dim = lo.len();
    let mut total = Complex64::new(0.0, 0.0);
    let mut q = vec![0.0f64; dim];
    let mut idx = vec![0usize; dim];
    let scale: f64 = (0..dim).map(|d| (hi[d] - lo[d]) / 2.0).product();
    loop {
        let mut w = 1.0;
        for d in 0..dim {
            let mid = (lo[d] + hi[d]) / 2.0;
            let half = (hi[d] - lo[d]) / 2.0;
            q[d] = mid + half * GL7_NODES[idx[d]];
            w *= GL7_WEIGHTS[idx[d]];
        }
        total += integrand(&q)? * w;
        // odometer over the tensor grid
        let mut d = 0;
        loop {
            if d == dim {
                return Ok(total * scale);
            }
            idx[d] += 1;
            if idx[d] < 7 {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

struct QEntry {
    est: f64,
    id: usize,
}

impl PartialEq for QEntry {
    fn eq(&self, other: &Self) -> bool {
        self.est.total_cmp(&other.est) == Ordering::Equal && self.id == other.id
    }
}
impl Eq for QEntry {}
impl PartialOrd for QEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // larger estimate first; ties broken toward the older cell
        self.est
            .total_cmp(&other.est)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Leaf {
    /// Children along the axis with the largest refinement indicator.
    kid_bounds: [Vec<(f64, f64)>; 2],
    kid_vals: [Complex64; 2],
    /// Sum over axes of the parent-vs-children differences.
    est: f64,
}

fn eval_cell(
    integrand: &mut dyn FnMut(&[f64]) -> Result<Complex64>,
    b: &[(f64, f64)],
    evals: &mut usize,
) -> Result<Complex64> {
    *evals += 1;
    let lo: Vec<f64> = b.iter().map(|x| x.0).collect();
    let hi: Vec<f64> = b.iter().map(|x| x.1).collect();
    cell_integral(integrand, &lo, &hi)
}

/// Bisect along the given axis.
fn split_cell(b: &[(f64, f64)], axis: usize) -> [Vec<(f64, f64)>; 2] {
    let mid = (b[axis].0 + b[axis].1) / 2.0;
    let mut left = b.to_vec();
    let mut right = b.to_vec();
    left[axis].1 = mid;
    right[axis].0 = mid;
    [left, right]
}

struct AdaptState {
    leaves: Vec<Option<Leaf>>,
    heap: BinaryHeap<QEntry>,
    total_est: f64,
    evals: usize,
}

/// Probe a bisection of every axis; keep the children of the axis with the
/// largest parent-vs-children difference (this sees error in directions a
/// single longest-edge rule would miss, e.g. rotationally symmetric
/// integrands) and score the leaf by the summed per-axis differences.
fn make_leaf(
    integrand: &mut dyn FnMut(&[f64]) -> Result<Complex64>,
    bounds: &[(f64, f64)],
    self_val: Complex64,
    st: &mut AdaptState,
) -> Result<()> {
    let dim = bounds.len();
    let mut est = 0.0f64;
    let mut best: Option<(f64, [Vec<(f64, f64)>; 2], [Complex64; 2])> = None;
    for axis in 0..dim {
        let kids = split_cell(bounds, axis);
        let v0 = eval_cell(integrand, &kids[0], &mut st.evals)?;
        let v1 = eval_cell(integrand, &kids[1], &mut st.evals)?;
        let d = (self_val - (v0 + v1)).norm();
        est += d;
        if best.as_ref().map_or(true, |(bd, _, _)| d > *bd) {
            best = Some((d, kids, [v0, v1]));
        }
    }
    let (_, kid_bounds, kid_vals) = best.expect("at least one axis");
    let id = st.leaves.len();
    st.leaves.push(Some(Leaf { kid_bounds, kid_vals, est }));
    st.heap.push(QEntry { est, id });
    st.total_est += est;
    Ok(())
}

/// Adaptive integration of `integrand` over the box, refining the cell with
/// the largest two-level error estimate until the summed estimate is at or
/// below `tol` or the evaluation budget is exhausted. Deterministic: the
/// refinement order and the final summation order depend only on the inputs.
pub fn adaptive_box_integral(
    integrand: &mut dyn FnMut(&[f64]) -> Result<Complex64>,
    bounds: &[(f64, f64)],
    tol: f64,
    budget: usize,
) -> Result<Complex64> {
    let (value, achieved) = adaptive_box_integral_graded(integrand, bounds, tol, budget, &[], 0.0)?;
    if achieved > tol {
        return Err(Error::CellBudgetExhausted { achieved, tol });
    }
    Ok(value)
}

/// Adaptive integration with graded pre-refinement: cells containing a marked
/// parameter value are bisected along the marked axis until the axis extent
/// drops to `floor`, so a peak of that width stays visible to the two-level
/// error indicator no matter how far below the node spacing it starts. A
/// nonpositive `floor` skips the grading stage. Returns the integral together
/// with the final summed error estimate; an exhausted budget is reported, not
/// failed, so callers can decide what estimate they accept.
pub fn adaptive_box_integral_graded(
    integrand: &mut dyn FnMut(&[f64]) -> Result<Complex64>,
    bounds: &[(f64, f64)],
    tol: f64,
    budget: usize,
    refine_at: &[(usize, f64)],
    floor: f64,
) -> Result<(Complex64, f64)> {
    let mut st = AdaptState {
        leaves: Vec::new(),
        heap: BinaryHeap::new(),
        total_est: 0.0,
        evals: 0,
    };

    let mut work: Vec<Vec<(f64, f64)>> = vec![bounds.to_vec()];
    while let Some(cell) = work.pop() {
        let mut graded_axis = None;
        if floor > 0.0 {
            let mut widest = floor;
            for &(ax, v) in refine_at {
                if ax >= cell.len() {
                    continue;
                }
                let (lo, hi) = cell[ax];
                if lo <= v && v <= hi && hi - lo > widest {
                    widest = hi - lo;
                    graded_axis = Some(ax);
                }
            }
        }
        match graded_axis {
            Some(ax) => {
                let [left, right] = split_cell(&cell, ax);
                work.push(right);
                work.push(left);
            }
            None => {
                let val = eval_cell(integrand, &cell, &mut st.evals)?;
                make_leaf(integrand, &cell, val, &mut st)?;
            }
        }
        if st.evals >= budget && !work.is_empty() {
            return Err(Error::CellBudgetExhausted { achieved: f64::INFINITY, tol });
        }
    }

    while st.total_est > tol && st.evals < budget {
        let top = match st.heap.pop() {
            Some(t) => t,
            None => break,
        };
        let leaf = st.leaves[top.id].take().expect("heap ids are unique");
        st.total_est -= leaf.est;
        for k in 0..2 {
            make_leaf(integrand, &leaf.kid_bounds[k], leaf.kid_vals[k], &mut st)?;
        }
    }
    let AdaptState { leaves, total_est, .. } = st;

    // Sum refined leaf values in creation order for a deterministic reduction.
    let mut total = Complex64::new(0.0, 0.0);
    for leaf in leaves.iter().flatten() {
        total += leaf.kid_vals[0] + leaf.kid_vals[1];
    }
    Ok((total, total_est))
}

/// Integrate a scalar- or u(1)-valued k-form over a k-dimensional patch.
pub fn integrate_form(f: &KForm, patch: &SurfacePatch, tol: f64) -> Result<Complex64> {
    integrate_form_with_budget(f, patch, tol, DEFAULT_CELL_BUDGET)
}

pub fn integrate_form_with_budget(
    f: &KForm,
    patch: &SurfacePatch,
    tol: f64,
    budget: usize,
) -> Result<Complex64> {
    integrate_form_graded(f, patch, tol, tol, budget, 0.0)
}

/// Integration with graded pre-refinement toward the patch's marked values
/// and a two-tier tolerance: the integrator aims for `tol`, and a
/// budget-limited result is still accepted while its error estimate is
/// within `accept`.
pub fn integrate_form_graded(
    f: &KForm,
    patch: &SurfacePatch,
    tol: f64,
    accept: f64,
    budget: usize,
    floor: f64,
) -> Result<Complex64> {
    if f.degree != patch.dim {
        return Err(Error::DimensionMismatch(format!(
            "degree {} form over dimension {} patch",
            f.degree, patch.dim
        )));
    }
    if f.tag.n() != 1 {
        return Err(Error::Invalid(
            "integrand must be scalar or u(1) valued".into(),
        ));
    }
    let dim = patch.dim;
    let basis: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let refs: Vec<&[f64]> = basis.iter().map(|v| v.as_slice()).collect();
    let mut integrand = |q: &[f64]| -> Result<Complex64> {
        let v = pullback(f, patch, q, &refs)?;
        let z = v.entries[0];
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Invalid(format!(
                "non-finite integrand at parameter {q:?}"
            )));
        }
        Ok(z)
    };
    let (raw, achieved) = adaptive_box_integral_graded(
        &mut integrand,
        &patch.bounds,
        tol,
        budget,
        &patch.refine_at,
        floor,
    )?;
    if achieved > accept {
        return Err(Error::CellBudgetExhausted { achieved, tol: accept });
    }
    Ok(raw * patch.orientation)
}

/// Sum of integrals over several patches (e.g. the two sphere caps).
pub fn integrate_over_patches(f: &KForm, patches: &[SurfacePatch], tol: f64) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for p in patches {
        total += integrate_form(f, p, tol)?;
    }
    Ok(total)
}

/// Quadrature tolerance for a ladder entry: fixed above 2^-10, relaxed
/// proportionally to 1/epsilon below (integrand peaks sharpen like 1/eps^2).
pub fn ladder_tol(tol: f64, eps: f64) -> f64 {
    let knee = 2f64.powi(-10);
    if eps >= knee {
        tol
    } else {
        tol * (knee / eps)
    }
}

pub struct FluxLimit {
    pub net: GeneralizedNumber,
    pub limit: Complex64,
    pub order: f64,
    pub err_est: f64,
}

fn median_component(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Integrate each ladder member over the patches and extrapolate the flux to
/// the zero-regularization limit. Each rung integrates on a mesh graded
/// toward the patches' marked values down to that rung's scale, aiming for
/// `tol` but accepting the relaxed per-rung allowance. A net that is constant
/// at quadrature resolution (closed-surface fluxes of exact forms, say)
/// carries no decay signal to fit; it is reported directly with the spread as
/// the error.
pub fn flux_limit(
    fam: &EpsilonFamily,
    patches: &[SurfacePatch],
    ladder: &EpsilonLadder,
    tol: f64,
) -> Result<FluxLimit> {
    let eps = ladder.values();
    let mut values = Vec::with_capacity(eps.len());
    for &e in &eps {
        let form = (fam.make)(e);
        let mut total = Complex64::new(0.0, 0.0);
        for p in patches {
            total += integrate_form_graded(
                &form,
                p,
                tol,
                ladder_tol(tol, e),
                DEFAULT_CELL_BUDGET,
                e / 4.0,
            )?;
        }
        values.push(total);
    }
    let net = GeneralizedNumber::new(ladder.clone(), values.clone())?;
    let max_tol = eps.iter().map(|&e| ladder_tol(tol, e)).fold(0.0f64, f64::max);
    let median = Complex64::new(
        median_component(values.iter().map(|v| v.re).collect()),
        median_component(values.iter().map(|v| v.im).collect()),
    );
    let spread = values.iter().map(|v| (v - median).norm()).fold(0.0f64, f64::max);
    if spread <= 10.0 * max_tol {
        return Ok(FluxLimit { net, limit: median, order: 0.0, err_est: spread + max_tol });
    }
    let Extrapolation { limit, order, err_est } = extrapolate(&net)?;
    Ok(FluxLimit { net, limit, order, err_est })
}
