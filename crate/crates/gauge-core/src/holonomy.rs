//! Parallel transport along parametrized curves: the left-invariant linear
//! ODE g' = -A_gamma(t)(gamma'(t)) g with g(a) = e, integrated by classical
//! RK4 with a projection back onto the structure group after every step.
//! Transport around a closed loop is the holonomy; reversing the curve
//! inverts it and concatenation composes it in path order (second factor on
//! the left).

use std::sync::Arc;

use num_complex::Complex64;

use crate::connection::GaugePotential;
use crate::error::{Error, Result};
use crate::liealg::{matrix_product, GroupElement, LieValue};

/// Smooth curve t -> R^dim on [a, b] with an explicit velocity.
#[derive(Clone)]
pub struct ParamCurve {
    pub a: f64,
    pub b: f64,
    pub map: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    pub velocity: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
}

impl ParamCurve {
    pub fn new<M, V>(a: f64, b: f64, map: M, velocity: V) -> ParamCurve
    where
        M: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        V: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        ParamCurve { a, b, map: Arc::new(map), velocity: Arc::new(velocity) }
    }

    /// Circle of the given radius in the (axes.0, axes.1) coordinate plane,
    /// parametrized by angle on [0, 2 pi].
    pub fn circle(radius: f64, center: &[f64], axes: (usize, usize), ambient: usize) -> ParamCurve {
        let c: Vec<f64> = center.to_vec();
        let c2 = c.clone();
        ParamCurve::new(
            0.0,
            2.0 * std::f64::consts::PI,
            move |t| {
                let mut p = c.clone();
                p[axes.0] += radius * t.cos();
                p[axes.1] += radius * t.sin();
                p
            },
            move |t| {
                let mut v = vec![0.0; ambient.max(c2.len())];
                v[axes.0] = -radius * t.sin();
                v[axes.1] = radius * t.cos();
                v
            },
        )
    }

    /// Straight segment from one point to another on [0, 1].
    pub fn segment(from: &[f64], to: &[f64]) -> ParamCurve {
        let f: Vec<f64> = from.to_vec();
        let d: Vec<f64> = to.iter().zip(from.iter()).map(|(t, s)| t - s).collect();
        let d2 = d.clone();
        ParamCurve::new(
            0.0,
            1.0,
            move |t| f.iter().zip(d.iter()).map(|(s, v)| s + t * v).collect(),
            move |_t| d2.clone(),
        )
    }

    /// Same trace run backwards; transport along it inverts the original.
    pub fn reversed(&self) -> ParamCurve {
        let (a, b) = (self.a, self.b);
        let map = self.map.clone();
        let vel = self.velocity.clone();
        ParamCurve::new(
            a,
            b,
            move |t| map(a + b - t),
            move |t| vel(a + b - t).iter().map(|v| -v).collect(),
        )
    }

    /// Path-order concatenation on [0, 1]: this curve first, then `next`.
    /// Each piece is reparametrized by a quintic ramp so the composite
    /// velocity vanishes at the junction; transport does not see the
    /// reparametrization but the integrator keeps its full order across the
    /// kink. Best paired with an even step count so the junction lands on a
    /// grid node.
    pub fn then(&self, next: &ParamCurve) -> ParamCurve {
        let (a1, b1, m1, v1) = (self.a, self.b, self.map.clone(), self.velocity.clone());
        let (a2, b2, m2, v2) = (next.a, next.b, next.map.clone(), next.velocity.clone());
        ParamCurve::new(
            0.0,
            1.0,
            move |t| {
                if t < 0.5 {
                    let (s, _) = smooth_ramp(2.0 * t);
                    m1(a1 + s * (b1 - a1))
                } else {
                    let (s, _) = smooth_ramp(2.0 * t - 1.0);
                    m2(a2 + s * (b2 - a2))
                }
            },
            move |t| {
                if t < 0.5 {
                    let (s, ds) = smooth_ramp(2.0 * t);
                    v1(a1 + s * (b1 - a1))
                        .iter()
                        .map(|v| 2.0 * ds * (b1 - a1) * v)
                        .collect()
                } else {
                    let (s, ds) = smooth_ramp(2.0 * t - 1.0);
                    v2(a2 + s * (b2 - a2))
                        .iter()
                        .map(|v| 2.0 * ds * (b2 - a2) * v)
                        .collect()
                }
            },
        )
    }

    /// Piecewise-linear path through the points on [0, 1], each leg ramped
    /// like in `then` so corners do not cost integration order. Repeat the
    /// first point at the end for a closed loop.
    pub fn polyline(points: &[Vec<f64>]) -> ParamCurve {
        assert!(points.len() >= 2, "polyline needs at least two points");
        let pts: Vec<Vec<f64>> = points.to_vec();
        let pts2 = pts.clone();
        let n = pts.len() - 1;
        let piece = move |t: f64| -> (usize, f64) {
            let x = (t * n as f64).clamp(0.0, n as f64);
            let i = (x.floor() as usize).min(n - 1);
            (i, x - i as f64)
        };
        ParamCurve::new(
            0.0,
            1.0,
            move |t| {
                let (i, u) = piece(t);
                let (s, _) = smooth_ramp(u);
                pts[i].iter().zip(pts[i + 1].iter()).map(|(a, b)| a + s * (b - a)).collect()
            },
            move |t| {
                let (i, u) = piece(t);
                let (_, ds) = smooth_ramp(u);
                pts2[i]
                    .iter()
                    .zip(pts2[i + 1].iter())
                    .map(|(a, b)| (b - a) * ds * n as f64)
                    .collect()
            },
        )
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        (self.map)(t)
    }

    pub fn speed(&self, t: f64) -> Vec<f64> {
        (self.velocity)(t)
    }
}

/// C^2 monotone ramp [0,1] -> [0,1] with flat ends, and its derivative.
fn smooth_ramp(u: f64) -> (f64, f64) {
    let s = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
    let ds = 30.0 * u * u * (1.0 - u) * (1.0 - u);
    (s, ds)
}

pub const DEFAULT_TRANSPORT_STEPS: usize = 4096;

#[derive(Clone, Debug)]
pub struct TransportResult {
    pub g_end: GroupElement,
    /// Sampled (t, g(t)) states, one per step, when requested.
    pub trace: Option<Vec<(f64, GroupElement)>>,
    pub steps: usize,
    /// Largest distance an RK4 step strayed from the group before projection.
    pub max_defect: f64,
}

/// Integrate g' = -A(gamma'(t)) g from the identity along the curve.
pub fn parallel_transport(
    a: &GaugePotential,
    eps: f64,
    curve: &ParamCurve,
    n_steps: usize,
    record_trace: bool,
) -> Result<TransportResult> {
    if n_steps == 0 {
        return Err(Error::Invalid("transport needs at least one step".into()));
    }
    let form = a.at(eps);
    let bounds = a.chart_bounds.clone();
    let rhs = |t: f64, g: &LieValue| -> Result<LieValue> {
        let x = curve.point(t);
        if let Some(b) = &bounds {
            if x.iter().zip(b.iter()).any(|(xi, (lo, hi))| xi < lo || xi > hi) {
                return Err(Error::CurveExitsChart(t));
            }
        }
        let v = curve.speed(t);
        let av = form.evaluate(&x, &[&v])?;
        if !av.is_finite() {
            return Err(Error::CurveExitsChart(t));
        }
        Ok(matrix_product(&(-av), g))
    };

    let h = (curve.b - curve.a) / n_steps as f64;
    let mut g = GroupElement::identity(a.tag);
    let mut trace = if record_trace {
        let mut v = Vec::with_capacity(n_steps + 1);
        v.push((curve.a, g.clone()));
        Some(v)
    } else {
        None
    };
    let mut max_defect = 0.0f64;
    for k in 0..n_steps {
        let t = curve.a + k as f64 * h;
        let gv = g.as_value();
        let k1 = rhs(t, &gv)?;
        let k2 = rhs(t + 0.5 * h, &(gv + k1 * (0.5 * h)))?;
        let k3 = rhs(t + 0.5 * h, &(gv + k2 * (0.5 * h)))?;
        let k4 = rhs(t + h, &(gv + k3 * h))?;
        let raw = gv + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let projected = GroupElement::project(a.tag, &raw);
        max_defect = max_defect.max((raw - projected.as_value()).max_abs_entry());
        g = projected;
        if let Some(tr) = trace.as_mut() {
            tr.push((t + h, g.clone()));
        }
    }
    Ok(TransportResult { g_end: g, trace, steps: n_steps, max_defect })
}

/// Transport around a closed curve. Errors with the endpoint gap if the
/// curve does not close.
pub fn holonomy(
    a: &GaugePotential,
    eps: f64,
    loop_curve: &ParamCurve,
    n_steps: usize,
    record_trace: bool,
) -> Result<TransportResult> {
    let start = loop_curve.point(loop_curve.a);
    let end = loop_curve.point(loop_curve.b);
    let scale = start.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let gap = start
        .iter()
        .zip(end.iter())
        .map(|(s, e)| (s - e).abs())
        .fold(0.0f64, f64::max);
    if gap > 1e-12 * scale {
        return Err(Error::OpenCurve(gap));
    }
    parallel_transport(a, eps, loop_curve, n_steps, record_trace)
}

/// Holonomy at every rung of the ladder.
pub fn holonomy_ladder(
    a: &GaugePotential,
    loop_curve: &ParamCurve,
    epsilons: &[f64],
    n_steps: usize,
) -> Result<Vec<(f64, GroupElement)>> {
    epsilons
        .iter()
        .map(|&e| holonomy(a, e, loop_curve, n_steps, false).map(|r| (e, r.g_end)))
        .collect()
}

/// How the structure group acts on transported fiber vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    /// Matrix action on C^n.
    Defining,
    /// Trivial action; vectors ride along unchanged.
    Trivial,
}

/// Apply the holonomy to a fiber vector in the chosen representation.
pub fn transport_vector(
    g: &GroupElement,
    xi: &[Complex64],
    rep: Representation,
) -> Result<Vec<Complex64>> {
    match rep {
        Representation::Trivial => Ok(xi.to_vec()),
        Representation::Defining => {
            let n = g.tag.n();
            if xi.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "fiber vector has {} components, representation needs {}",
                    xi.len(),
                    n
                )));
            }
            Ok((0..n)
                .map(|r| (0..n).map(|c| g.entry(r, c) * xi[c]).sum())
                .collect())
        }
    }
}

/// Connection coefficients at a point: Gamma_i = A(d_i), so the matrix
/// entry (B, A) of the i-th value is Gamma^B_{iA}.
pub fn connection_coefficients(a: &GaugePotential, eps: f64, p: &[f64]) -> Vec<LieValue> {
    a.at(eps).coeffs(p)
}

/// Local section of the associated vector bundle with optional analytic
/// partials (indexed [direction][component]); finite differences otherwise.
#[derive(Clone)]
pub struct Section {
    pub dim: usize,
    pub components: usize,
    pub value: Arc<dyn Fn(&[f64]) -> Vec<Complex64> + Send + Sync>,
    pub partials: Option<Arc<dyn Fn(&[f64]) -> Vec<Vec<Complex64>> + Send + Sync>>,
}

impl Section {
    fn partials_at(&self, p: &[f64]) -> Vec<Vec<Complex64>> {
        if let Some(dp) = &self.partials {
            return dp(p);
        }
        let scale = p.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let h = 1e-4 * scale;
        (0..self.dim)
            .map(|i| {
                let eval = |off: f64| -> Vec<Complex64> {
                    let mut q = p.to_vec();
                    q[i] += off;
                    (self.value)(&q)
                };
                let (p2, p1, m1, m2) = (eval(2.0 * h), eval(h), eval(-h), eval(-2.0 * h));
                (0..self.components)
                    .map(|c| (m2[c] - p2[c] + (p1[c] - m1[c]) * 8.0) / (12.0 * h))
                    .collect()
            })
            .collect()
    }
}

/// Covariant derivative of a section along a direction:
/// (nabla_X V)^B = X^i d_i V^B + (A_i)^B_A V^A X^i.
pub fn covariant_derivative(
    a: &GaugePotential,
    eps: f64,
    section: &Section,
    p: &[f64],
    x_dir: &[f64],
) -> Result<Vec<Complex64>> {
    let n = a.tag.n();
    if section.components != n {
        return Err(Error::DimensionMismatch(format!(
            "section has {} components, fiber needs {}",
            section.components, n
        )));
    }
    if section.dim != a.dim || x_dir.len() != a.dim {
        return Err(Error::DimensionMismatch("section and potential charts differ".into()));
    }
    let v = (section.value)(p);
    let dv = section.partials_at(p);
    let gammas = connection_coefficients(a, eps, p);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..a.dim {
        for b in 0..n {
            out[b] += x_dir[i] * dv[i][b];
            for c in 0..n {
                out[b] += x_dir[i] * gammas[i].entry(b, c) * v[c];
            }
        }
    }
    Ok(out)
}
