//! Regularization ladders and the numerical counterparts of moderateness,
//! negligibility, and association for epsilon-indexed families of forms.
//!
//! A family is moderate when sup-norms over compact boxes grow at most like a
//! power of 1/epsilon, and negligible when they decay faster than any power;
//! both are probed here by fitting log-log slopes along a geometric ladder
//! eps_k = eps0 * ratio^k. Association (the distributional shadow) pairs each
//! ladder member against a test function and extrapolates the integrals to
//! epsilon -> 0.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forms::KForm;
use crate::quadrature::{integrate_form_graded, ladder_tol, SurfacePatch, DEFAULT_CELL_BUDGET};

/// Geometric sampling ladder eps_k = eps0 * ratio^k, k = 0..count.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonLadder {
    pub eps0: f64,
    pub ratio: f64,
    pub count: usize,
}

impl EpsilonLadder {
    pub fn new(eps0: f64, ratio: f64, count: usize) -> Result<EpsilonLadder> {
        if !(eps0 > 0.0 && eps0.is_finite()) {
            return Err(Error::Invalid("ladder eps0 must be positive".into()));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Invalid("ladder ratio must lie in (0,1)".into()));
        }
        if count < 8 {
            return Err(Error::Invalid("ladder needs at least 8 samples".into()));
        }
        Ok(EpsilonLadder { eps0, ratio, count })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.eps0 * self.ratio.powi(k as i32)).collect()
    }
}

impl Default for EpsilonLadder {
    /// eps0 = 2^-4, ratio 1/2, 14 samples: four decades of regularization
    /// before double-precision cancellation dominates.
    fn default() -> Self {
        EpsilonLadder { eps0: 2f64.powi(-4), ratio: 0.5, count: 14 }
    }
}

/// A net of k-forms indexed by the regularization parameter.
#[derive(Clone)]
pub struct EpsilonFamily {
    pub make: Arc<dyn Fn(f64) -> KForm + Send + Sync>,
    pub meta: String,
}

impl EpsilonFamily {
    pub fn new<F>(meta: impl Into<String>, make: F) -> EpsilonFamily
    where
        F: Fn(f64) -> KForm + Send + Sync + 'static,
    {
        EpsilonFamily { make: Arc::new(make), meta: meta.into() }
    }

    /// Constant net: every ladder member is the same form.
    pub fn constant(meta: impl Into<String>, form: KForm) -> EpsilonFamily {
        EpsilonFamily::new(meta, move |_eps| form.clone())
    }
}

/// Sampled net of scalars on a ladder.
#[derive(Clone, Debug)]
pub struct GeneralizedNumber {
    pub ladder: EpsilonLadder,
    pub values: Vec<Complex64>,
}

impl GeneralizedNumber {
    pub fn new(ladder: EpsilonLadder, values: Vec<Complex64>) -> Result<GeneralizedNumber> {
        if values.len() != ladder.count {
            return Err(Error::DimensionMismatch(format!(
                "{} values on a ladder of {} samples",
                values.len(),
                ladder.count
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Invalid("generalized number values must be finite".into()));
        }
        Ok(GeneralizedNumber { ladder, values })
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.ladder.values()
    }
}

/// Axis-aligned compact box with a deterministic sampling lattice.
#[derive(Clone, Debug)]
pub struct CompactRegion {
    pub bounds: Vec<(f64, f64)>,
    pub grid_per_axis: usize,
    /// Coordinate values (axis, value) toward which families over this region
    /// may concentrate; quadrature over the region grades its mesh there.
    pub refine_at: Vec<(usize, f64)>,
}

impl CompactRegion {
    pub fn new(bounds: Vec<(f64, f64)>, grid_per_axis: usize) -> Result<CompactRegion> {
        if bounds.is_empty() {
            return Err(Error::Invalid("region needs at least one axis".into()));
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Invalid("region bounds must be finite with lower < upper".into()));
            }
        }
        if grid_per_axis < 9 {
            return Err(Error::Invalid("sampling lattice needs at least 9 points per axis".into()));
        }
        Ok(CompactRegion { bounds, grid_per_axis, refine_at: Vec::new() })
    }

    /// Mark a coordinate value a family concentrates at.
    pub fn with_refine_at(mut self, axis: usize, value: f64) -> CompactRegion {
        self.refine_at.push((axis, value));
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Identity embedding of the box as an integration patch.
    pub fn to_patch(&self) -> SurfacePatch {
        let dim = self.dim();
        SurfacePatch::box_embed(self.bounds.clone(), dim, (0..dim).collect(), vec![0.0; dim])
            .with_refine_at(self.refine_at.clone())
    }

    /// Full lattice, iterated in row-major order.
    pub fn lattice(&self) -> Vec<Vec<f64>> {
        let g = self.grid_per_axis;
        let dim = self.dim();
        let axis_points: Vec<Vec<f64>> = self
            .bounds
            .iter()
            .map(|&(lo, hi)| (0..g).map(|j| lo + (hi - lo) * j as f64 / (g - 1) as f64).collect())
            .collect();
        let mut out = Vec::with_capacity(g.pow(dim as u32));
        let mut idx = vec![0usize; dim];
        loop {
            out.push((0..dim).map(|d| axis_points[d][idx[d]]).collect());
            let mut d = 0;
            loop {
                if d == dim {
                    return out;
                }
                idx[d] += 1;
                if idx[d] < g {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

/// Magnitude probed by the sup estimates: coefficients plus coordinate
/// derivatives up to the requested order.
fn local_magnitude(form: &KForm, p: &[f64], deriv_order: usize) -> f64 {
    let mut m = form
        .coeffs(p)
        .iter()
        .map(|c| c.max_abs_entry())
        .fold(0.0f64, f64::max);
    if deriv_order >= 1 {
        let partials = form.coeff_partials(p);
        for row in &partials {
            for v in row {
                m = m.max(v.max_abs_entry());
            }
        }
        if deriv_order >= 2 {
            // second derivatives via central differences of the first ones
            let pmax = p.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let h = 1e-3 * pmax.max(1.0);
            for dir in 0..form.dim {
                let mut qp = p.to_vec();
                let mut qm = p.to_vec();
                qp[dir] += h;
                qm[dir] -= h;
                let pp = form.coeff_partials(&qp);
                let pm = form.coeff_partials(&qm);
                for (rp, rm) in pp.iter().zip(pm.iter()) {
                    for (vp, vm) in rp.iter().zip(rm.iter()) {
                        m = m.max((*vp - *vm).max_abs_entry() / (2.0 * h));
                    }
                }
            }
        }
    }
    m
}

/// Sup of the local magnitude over the region: a lattice pass followed by a
/// deterministic compass (pattern) search started from the best lattice
/// points, so sharp off-lattice peaks (heights growing like 1/eps) are still
/// captured.
pub fn sup_over_region(form: &KForm, region: &CompactRegion, deriv_order: usize) -> f64 {
    let lattice = region.lattice();
    let mut scored: Vec<(f64, usize)> = lattice
        .iter()
        .enumerate()
        .map(|(i, p)| (local_magnitude(form, p, deriv_order), i))
        .collect();
    let mut best = scored.iter().map(|&(v, _)| v).fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return best.max(f64::INFINITY * best.signum());
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let dim = region.dim();
    let widths: Vec<f64> = region.bounds.iter().map(|&(lo, hi)| hi - lo).collect();
    for &(_, start_idx) in scored.iter().take(4) {
        let mut p = lattice[start_idx].clone();
        let mut val = local_magnitude(form, &p, deriv_order);
        let mut radius: Vec<f64> = widths
            .iter()
            .map(|w| w / (region.grid_per_axis - 1) as f64)
            .collect();
        for _ in 0..80 {
            if radius.iter().zip(&widths).all(|(r, w)| *r < 1e-9 * w) {
                break;
            }
            let mut improved = false;
            let mut best_q = p.clone();
            let mut best_v = val;
            for d in 0..dim {
                for sgn in [-1.0, 1.0] {
                    let mut q = p.clone();
                    q[d] = (q[d] + sgn * radius[d])
                        .clamp(region.bounds[d].0, region.bounds[d].1);
                    let v = local_magnitude(form, &q, deriv_order);
                    if v > best_v {
                        best_v = v;
                        best_q = q;
                        improved = true;
                    }
                }
            }
            if improved {
                p = best_q;
                val = best_v;
            } else {
                for r in &mut radius {
                    *r /= 2.0;
                }
            }
        }
        best = best.max(val);
    }
    best
}

/// Least-squares slope of ln(y) against ln(x).
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let sx: f64 = lx.iter().sum();
    let sy: f64 = ly.iter().sum();
    let sxx: f64 = lx.iter().map(|x| x * x).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Largest polynomial growth certified as moderate.
pub const MODERATE_MAX_ORDER: f64 = 40.0;

#[derive(Clone, Debug)]
pub struct ModerateReport {
    pub order: f64,
    pub verdict: bool,
    pub epsilons: Vec<f64>,
    pub sups: Vec<f64>,
}

/// Fit window: the smaller-epsilon half of the given indices.
fn tail_range(len: usize) -> std::ops::Range<usize> {
    len / 2..len
}

/// Probe sup_K of coefficients (and derivatives up to `deriv_order`) along the
/// ladder and fit the growth exponent. Verdict is true when the growth is at
/// most polynomial of degree `MODERATE_MAX_ORDER`.
pub fn classify_moderate(
    fam: &EpsilonFamily,
    region: &CompactRegion,
    deriv_order: usize,
    ladder: &EpsilonLadder,
) -> Result<ModerateReport> {
    assert!(deriv_order <= 2, "derivative order capped at 2");
    let eps = ladder.values();
    let sups: Vec<f64> = eps
        .iter()
        .map(|&e| sup_over_region(&(fam.make)(e), region, deriv_order))
        .collect();
    let finite = sups.iter().take_while(|s| s.is_finite()).count();
    let saturated = finite < sups.len();
    if finite < 4 {
        return Err(Error::NonPolynomialBlowup);
    }
    let window = tail_range(finite);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in window {
        if sups[k] > 1e-300 {
            xs.push(eps[k]);
            ys.push(sups[k]);
        }
    }
    let (order, slope_ok) = if xs.len() < 2 {
        // sup identically ~0 on the fit window: trivially moderate
        (0.0, true)
    } else {
        let slope = loglog_slope(&xs, &ys);
        ((-slope).max(0.0), slope >= -MODERATE_MAX_ORDER)
    };
    Ok(ModerateReport {
        order,
        verdict: slope_ok && !saturated,
        epsilons: eps,
        sups,
    })
}

#[derive(Clone, Debug)]
pub struct DecayCertificate {
    pub slope: f64,
    pub negligible_up_to: i64,
    pub verdict: bool,
}

/// Shared decay-certification core: fit the decay exponent of a nonnegative
/// ladder of sup values and certify negligibility up to `max_order`. Exact
/// zeros (underflow of a super-polynomially decaying family) certify the
/// maximal order when they dominate the fit window.
pub fn certify_decay(epsilons: &[f64], sups: &[f64], max_order: i64) -> DecayCertificate {
    let window = tail_range(sups.len());
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut zeros = 0usize;
    for k in window {
        if sups[k] > 1e-300 {
            xs.push(epsilons[k]);
            ys.push(sups[k]);
        } else {
            zeros += 1;
        }
    }
    if zeros >= xs.len() {
        return DecayCertificate {
            slope: f64::INFINITY,
            negligible_up_to: max_order,
            verdict: true,
        };
    }
    let slope = loglog_slope(&xs, &ys);
    let verdict = slope >= max_order as f64 - 0.5;
    let up_to = ((slope + 0.5).floor() as i64).clamp(0, max_order);
    DecayCertificate { slope, negligible_up_to: up_to, verdict }
}

#[derive(Clone, Debug)]
pub struct NegligibleReport {
    pub negligible_up_to: i64,
    pub verdict: bool,
    pub slope: f64,
    pub epsilons: Vec<f64>,
    pub sups: Vec<f64>,
}

/// Probe sup_K along the ladder and certify decay up to `max_order`.
pub fn classify_negligible(
    fam: &EpsilonFamily,
    region: &CompactRegion,
    max_order: i64,
    ladder: &EpsilonLadder,
) -> Result<NegligibleReport> {
    assert!((0..=8).contains(&max_order), "certification order capped at 8");
    let eps = ladder.values();
    let sups: Vec<f64> = eps
        .iter()
        .map(|&e| sup_over_region(&(fam.make)(e), region, 0))
        .collect();
    let finite = sups.iter().take_while(|s| s.is_finite()).count();
    if finite < 4 {
        return Err(Error::NonPolynomialBlowup);
    }
    if finite < sups.len() {
        return Ok(NegligibleReport {
            negligible_up_to: 0,
            verdict: false,
            slope: f64::NEG_INFINITY,
            epsilons: eps,
            sups,
        });
    }
    let cert = certify_decay(&eps, &sups, max_order);
    Ok(NegligibleReport {
        negligible_up_to: cert.negligible_up_to,
        verdict: cert.verdict,
        slope: cert.slope,
        epsilons: eps,
        sups,
    })
}

#[derive(Clone, Debug)]
pub struct Extrapolation {
    pub limit: Complex64,
    pub order: f64,
    pub err_est: f64,
}

/// Fit v_k = L + c * eps_k^p on the ladder tail: the decay exponent comes
/// from the median log-ratio of successive differences, the limit from a
/// linear least-squares solve at that exponent, and the error estimate from
/// the spread of Richardson extrapolants plus the fit residual.
pub fn extrapolate(gn: &GeneralizedNumber) -> Result<Extrapolation> {
    let v = &gn.values;
    let n = v.len();
    if n < 6 {
        return Err(Error::Invalid("extrapolation needs at least 6 ladder points".into()));
    }
    let eps = gn.epsilons();
    let ratio = gn.ladder.ratio;
    let scale = v.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let diffs: Vec<f64> = (0..n - 1).map(|k| (v[k + 1] - v[k]).norm()).collect();
    if diffs.iter().all(|&d| d <= 1e-13 * scale.max(1e-300)) {
        return Ok(Extrapolation { limit: v[n - 1], order: 0.0, err_est: 0.0 });
    }

    let dstart = (n - 1) / 2;
    let mut orders = Vec::new();
    for k in dstart..n - 2 {
        if diffs[k] > 0.0 && diffs[k + 1] > 0.0 {
            orders.push((diffs[k + 1] / diffs[k]).ln() / ratio.ln());
        }
    }
    if orders.len() < 2 {
        // tail differences at rounding level: converged as far as resolvable
        return Ok(Extrapolation { limit: v[n - 1], order: 0.0, err_est: diffs[n - 2] });
    }
    orders.sort_by(f64::total_cmp);
    let p_hat = orders[orders.len() / 2];
    if !(p_hat > 0.05) {
        return Err(Error::ExtrapolationFailed(format!(
            "fitted decay order {p_hat:.3}; tail differences {:?} do not shrink",
            &diffs[dstart..]
        )));
    }

    let q = ratio.powf(p_hat);
    let r_last = (v[n - 1] - v[n - 2] * q) / (1.0 - q);
    let r_prev = (v[n - 2] - v[n - 3] * q) / (1.0 - q);

    // least squares for v = L + c * eps^p on the tail
    let tail = dstart..n;
    let ts: Vec<f64> = tail.clone().map(|k| eps[k].powf(p_hat)).collect();
    let m = ts.len() as f64;
    let s1: f64 = ts.iter().sum();
    let s2: f64 = ts.iter().map(|t| t * t).sum();
    let b0: Complex64 = tail.clone().map(|k| v[k]).sum();
    let b1: Complex64 = tail.clone().zip(&ts).map(|(k, &t)| v[k] * t).sum();
    let det = m * s2 - s1 * s1;
    let limit = (b0 * s2 - b1 * s1) / det;
    let c = (b1 * m - b0 * s1) / det;
    let resid = (tail
        .zip(&ts)
        .map(|(k, &t)| (v[k] - limit - c * t).norm_sqr())
        .sum::<f64>()
        / m)
        .sqrt();
    let err_est = (r_last - r_prev).norm().max(resid);
    Ok(Extrapolation { limit, order: p_hat, err_est })
}

#[derive(Clone)]
pub struct ShadowResult {
    pub net: GeneralizedNumber,
    pub limit: Complex64,
    pub order: f64,
    pub err_est: f64,
}

/// Pair each ladder member against a test function over the region and
/// extrapolate: the distributional shadow of the family, when it exists.
pub fn shadow_pairing(
    fam: &EpsilonFamily,
    test: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    region: &CompactRegion,
    ladder: &EpsilonLadder,
    tol: f64,
) -> Result<ShadowResult> {
    let patch = region.to_patch();
    let eps = ladder.values();
    let mut values = Vec::with_capacity(eps.len());
    for &e in &eps {
        let form = (fam.make)(e);
        if form.degree != region.dim() {
            return Err(Error::DimensionMismatch(format!(
                "degree {} family paired over a {}-dimensional region",
                form.degree,
                region.dim()
            )));
        }
        let t = test.clone();
        let weighted = form.scale_by_fn(move |p| t(p));
        values.push(integrate_form_graded(
            &weighted,
            &patch,
            tol,
            ladder_tol(tol, e),
            DEFAULT_CELL_BUDGET,
            e / 4.0,
        )?);
    }
    let net = GeneralizedNumber::new(ladder.clone(), values)?;
    match extrapolate(&net) {
        Ok(Extrapolation { limit, order, err_est }) => {
            Ok(ShadowResult { net, limit, order, err_est })
        }
        Err(Error::ExtrapolationFailed(_)) => Err(Error::NoShadow),
        Err(e) => Err(e),
    }
}

/// CSV serialization of a sampled ladder: header plus one row per entry.
pub fn ladder_csv(epsilons: &[f64], values: &[Complex64]) -> String {
    let mut out = String::from("epsilon,value_re,value_im\n");
    for (e, v) in epsilons.iter().zip(values) {
        out.push_str(&format!("{e},{},{}\n", v.re, v.im));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{AlgebraTag, LieValue};
    use crate::quadrature::integrate_form;

    fn const_family(value: f64) -> EpsilonFamily {
        EpsilonFamily::new("const", move |_eps| {
            KForm::constant(0, 2, AlgebraTag::scalar(), vec![LieValue::scalar(value.into())])
        })
    }

    fn power_family(s: f64) -> EpsilonFamily {
        EpsilonFamily::new("power", move |eps: f64| {
            let v = eps.powf(s);
            KForm::constant(0, 2, AlgebraTag::scalar(), vec![LieValue::scalar(v.into())])
        })
    }

    fn region2() -> CompactRegion {
        CompactRegion::new(vec![(-1.0, 1.0), (-1.0, 1.0)], 9).unwrap()
    }

    #[test]
    fn ladder_validation() {
        assert!(EpsilonLadder::new(0.1, 0.5, 8).is_ok());
        assert!(EpsilonLadder::new(0.1, 0.5, 7).is_err());
        assert!(EpsilonLadder::new(0.0, 0.5, 9).is_err());
        assert!(EpsilonLadder::new(0.1, 1.0, 9).is_err());
        let vals = EpsilonLadder::default().values();
        assert_eq!(vals.len(), 14);
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn sup_finds_off_lattice_peak() {
        let form = KForm::new(0, 2, AlgebraTag::scalar(), |p| {
            let d2 = (p[0] - 0.123).powi(2) + (p[1] + 0.456).powi(2);
            vec![LieValue::scalar((-50.0 * d2).exp().into())]
        });
        let s = sup_over_region(&form, &region2(), 0);
        assert!(s >= 0.9999, "compass refinement missed the peak: {s}");
    }

    #[test]
    fn moderate_constant_family() {
        let rep = classify_moderate(&const_family(3.0), &region2(), 0, &EpsilonLadder::default()).unwrap();
        assert!(rep.verdict);
        assert!(rep.order.abs() <= 0.05, "{}", rep.order);
    }

    #[test]
    fn moderate_vortex_potential_order_one() {
        let fam = EpsilonFamily::new("vortex", |eps: f64| {
            KForm::new(1, 2, AlgebraTag::U1, move |p| {
                let d = p[0] * p[0] + p[1] * p[1] + eps * eps;
                vec![LieValue::u1(-p[1] / d), LieValue::u1(p[0] / d)]
            })
        });
        let region = CompactRegion::new(vec![(-1.0, 1.0), (-1.0, 1.0)], 17).unwrap();
        let rep = classify_moderate(&fam, &region, 0, &EpsilonLadder::default()).unwrap();
        assert!(rep.verdict);
        assert!((rep.order - 1.0).abs() <= 0.15, "order {}", rep.order);
    }

    #[test]
    fn moderate_rejects_exponential_blowup() {
        let fam = EpsilonFamily::new("exp", |eps: f64| {
            let v = (1.0 / eps).exp();
            KForm::constant(0, 2, AlgebraTag::scalar(), vec![LieValue::scalar(v.into())])
        });
        let rep = classify_moderate(&fam, &region2(), 0, &EpsilonLadder::default()).unwrap();
        assert!(!rep.verdict);
    }

    #[test]
    fn negligible_zero_family() {
        let rep =
            classify_negligible(&const_family(0.0), &region2(), 6, &EpsilonLadder::default()).unwrap();
        assert!(rep.verdict);
        assert_eq!(rep.negligible_up_to, 6);
    }

    #[test]
    fn negligible_exponential_decay() {
        let fam = EpsilonFamily::new("expdecay", |eps: f64| {
            let v = (-1.0 / eps).exp();
            KForm::constant(0, 2, AlgebraTag::scalar(), vec![LieValue::scalar(v.into())])
        });
        let rep = classify_negligible(&fam, &region2(), 6, &EpsilonLadder::default()).unwrap();
        assert!(rep.verdict);
        assert_eq!(rep.negligible_up_to, 6);
    }

    #[test]
    fn negligible_linear_family_certifies_order_one_only() {
        let rep = classify_negligible(&power_family(1.0), &region2(), 6, &EpsilonLadder::default()).unwrap();
        assert!(!rep.verdict);
        assert_eq!(rep.negligible_up_to, 1);
    }

    #[test]
    fn classifier_power_calibration() {
        for s in [-3.0, -1.0, 0.0, 1.0, 3.0] {
            let rep =
                classify_moderate(&power_family(s), &region2(), 0, &EpsilonLadder::default()).unwrap();
            let fitted_slope = -rep.order;
            let expect = s.min(0.0); // order clamps positive decay to 0
            assert!(
                (fitted_slope - expect).abs() <= 0.1,
                "s = {s}: fitted {fitted_slope}"
            );
            assert!(rep.verdict);
        }
    }

    #[test]
    fn extrapolate_synthetic_sequences() {
        let ladder = EpsilonLadder::default();
        let eps = ladder.values();

        let constant: Vec<Complex64> = eps.iter().map(|_| Complex64::new(2.5, -1.0)).collect();
        let r = extrapolate(&GeneralizedNumber::new(ladder.clone(), constant).unwrap()).unwrap();
        assert_eq!(r.limit, Complex64::new(2.5, -1.0));
        assert_eq!(r.err_est, 0.0);

        let lorentz: Vec<Complex64> =
            eps.iter().map(|e| Complex64::new(1.0 / (1.0 + e * e), 0.0)).collect();
        let r = extrapolate(&GeneralizedNumber::new(ladder.clone(), lorentz).unwrap()).unwrap();
        assert!((r.limit.re - 1.0).abs() <= 1e-9, "{}", r.limit.re);
        assert!((r.order - 2.0).abs() <= 0.1, "{}", r.order);

        let linear: Vec<Complex64> = eps.iter().map(|e| Complex64::new(*e, 0.0)).collect();
        let r = extrapolate(&GeneralizedNumber::new(ladder.clone(), linear).unwrap()).unwrap();
        assert!(r.limit.norm() <= 1e-12);
        assert!((r.order - 1.0).abs() <= 0.05);

        let diverging: Vec<Complex64> =
            eps.iter().map(|e| Complex64::new(1.0 / e, 0.0)).collect();
        let r = extrapolate(&GeneralizedNumber::new(ladder, diverging).unwrap());
        assert!(matches!(r, Err(Error::ExtrapolationFailed(_))));
    }

    #[test]
    fn shadow_of_constant_net_is_plain_integral() {
        let form = KForm::new(2, 2, AlgebraTag::scalar(), |p| {
            vec![LieValue::scalar(Complex64::new(p[0] * p[0] + 1.0, 0.5 * p[1]))]
        });
        let fam = EpsilonFamily::constant("smooth", form.clone());
        let region = region2();
        let ladder = EpsilonLadder::default();
        let test: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = Arc::new(|p: &[f64]| p[1] + 2.0);
        let got = shadow_pairing(&fam, test.clone(), &region, &ladder, 1e-9).unwrap();
        let t2 = test.clone();
        let direct = integrate_form(&form.scale_by_fn(move |p| t2(p)), &region.to_patch(), 1e-10).unwrap();
        assert!((got.limit - direct).norm() <= 1e-8);
    }

    #[test]
    fn shadow_of_vortex_curvature() {
        let fam = EpsilonFamily::new("vortex curvature", |eps: f64| {
            KForm::new(2, 2, AlgebraTag::U1, move |p| {
                let d = p[0] * p[0] + p[1] * p[1] + eps * eps;
                vec![LieValue::u1(2.0 * eps * eps / (d * d))]
            })
        });
        let region = region2();
        let test: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> =
            Arc::new(|p: &[f64]| (-(p[0] * p[0]) - p[1] * p[1]).exp());
        let ladder = EpsilonLadder::new(2f64.powi(-4), 0.5, 10).unwrap();
        let got = shadow_pairing(&fam, test, &region, &ladder, 1e-8).unwrap();
        let expect = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        assert!(
            (got.limit - expect).norm() <= 2e-3,
            "{} vs {expect}, err {}",
            got.limit,
            got.err_est
        );
    }

    #[test]
    fn shadow_is_representative_independent() {
        let base = |eps: f64| {
            KForm::new(2, 2, AlgebraTag::U1, move |p| {
                let d = p[0] * p[0] + p[1] * p[1] + eps * eps;
                vec![LieValue::u1(2.0 * eps * eps / (d * d))]
            })
        };
        let fam1 = EpsilonFamily::new("rep1", base);
        let fam2 = EpsilonFamily::new("rep2", move |eps: f64| {
            let b = base(eps);
            let bump = KForm::new(2, 2, AlgebraTag::U1, move |p| {
                vec![LieValue::u1(eps * eps * (p[0] + 0.3))]
            });
            b.add(&bump).unwrap()
        });
        let region = region2();
        let test: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = Arc::new(|_p: &[f64]| 1.0);
        let ladder = EpsilonLadder::new(2f64.powi(-4), 0.5, 10).unwrap();
        let a = shadow_pairing(&fam1, test.clone(), &region, &ladder, 1e-8).unwrap();
        let b = shadow_pairing(&fam2, test, &region, &ladder, 1e-8).unwrap();
        assert!(
            (a.limit - b.limit).norm() <= (a.err_est + b.err_est).max(1e-6),
            "{} vs {}",
            a.limit,
            b.limit
        );
    }

    #[test]
    fn csv_round_shape() {
        let eps = [0.5, 0.25];
        let vals = [Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)];
        let csv = ladder_csv(&eps, &vals);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines[0], "epsilon,value_re,value_im");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "0.5,1,-2");
    }
}
