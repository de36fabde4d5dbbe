//! Command implementations over the scenario catalog.
//!
//! Each command resolves its geometry (patches, loop, region) from the run
//! configuration, drives the corresponding gauge-core routine along the
//! epsilon ladder, and packs the result into a `Report`.

use std::collections::HashMap;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use gauge_core::characteristic::chern_number;
use gauge_core::colombeau::{
    certify_decay, classify_moderate, shadow_pairing, CompactRegion, EpsilonFamily, EpsilonLadder,
};
use gauge_core::connection::{
    canonicalize, check_axioms, reconstruct_bundle_form, AxiomSample, BundleForm, BundleTangent,
};
use gauge_core::forms::KForm;
use gauge_core::holonomy::{holonomy, ParamCurve};
use gauge_core::liealg::{AlgebraTag, GroupElement, LieValue};
use gauge_core::quadrature::{flux_limit, SurfacePatch};
use gauge_core::sample;
use gauge_core::scenarios::{by_name, Scenario, SmoothPart, SCENARIO_NAMES};

use crate::config::{Command, RunConfig};
use crate::report::{num, pair, Report};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(gauge_core::Error),
}

impl From<gauge_core::Error> for CliError {
    fn from(e: gauge_core::Error) -> CliError {
        CliError::Numeric(e)
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let smooth = SmoothPart::from_name(&cfg.smooth)
        .ok_or_else(|| usage(format!("unknown smooth part `{}` (zero|constant|poly)", cfg.smooth)))?;
    let sc = by_name(&cfg.scenario, cfg.alpha, smooth).ok_or_else(|| {
        usage(format!("unknown scenario `{}`; see `gauge list-scenarios`", cfg.scenario))
    })?;
    let ladder = EpsilonLadder::new(cfg.eps0, cfg.ratio, cfg.count)
        .map_err(|e| usage(e.to_string()))?;
    let mut rep = match cfg.command {
        Command::Flux => flux(cfg, sc, &ladder),
        Command::Holonomy => holonomy_cmd(cfg, sc, &ladder),
        Command::Classify => classify(cfg, sc, &ladder),
        Command::Shadow => shadow(cfg, sc, &ladder),
        Command::Chern => chern(cfg, sc, &ladder),
        Command::Decompose => decompose(cfg, sc, &ladder),
        Command::Axioms => axioms(cfg, sc, &ladder),
        Command::Canonicalize => canonicalize_cmd(cfg, sc, &ladder),
    }?;
    // a replayable `key = value` config for this exact run
    rep.diagnostics.insert("config".into(), json!(cfg.to_lines()));
    Ok(rep)
}

pub fn list_scenarios() -> String {
    let mut out = String::new();
    for name in SCENARIO_NAMES {
        let sc = by_name(name, 1.0, SmoothPart::Zero).expect("catalog name");
        let group = match sc.tag {
            AlgebraTag::U1 => "U(1)",
            AlgebraTag::Su2 => "SU(2)",
            AlgebraTag::GlnC(1) => "scalar",
            AlgebraTag::GlnC(_) => "GL(n,C)",
        };
        let blurb = match name {
            "flat_wire" => "line current through the x-y plane",
            "dirac_monopole" => "radial field with a singular ray",
            "su2_singular" => "abelian singular layer plus a smooth part",
            _ => "",
        };
        out.push_str(&format!("{name:16} {group:7} dim {}  {blurb}\n", sc.dim));
    }
    out
}

/// `kind:R=<radius>` specs for patches and loops.
fn split_spec(spec: &str) -> Result<(&str, f64), CliError> {
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| usage(format!("expected `kind:R=<radius>`, got `{spec}`")))?;
    let raw = body
        .strip_prefix("R=")
        .ok_or_else(|| usage(format!("expected `R=<radius>` after `{kind}:`, got `{body}`")))?;
    let r: f64 = raw.parse().map_err(|_| usage(format!("bad radius `{raw}`")))?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(usage("radius must be positive and finite"));
    }
    Ok((kind, r))
}

fn resolve_patches(cfg: &RunConfig, sc: &Scenario, closed: bool) -> Result<Vec<SurfacePatch>, CliError> {
    let Some(spec) = &cfg.patch else {
        return Ok(if closed { sc.default_closed_patches.clone() } else { sc.default_patches.clone() });
    };
    let (kind, r) = split_spec(spec)?;
    match kind {
        "disk" => Ok(vec![SurfacePatch::disk(r, vec![0.0; sc.dim], sc.dim, (0, 1))]),
        "sphere" => {
            if sc.dim < 3 {
                return Err(usage("sphere patches need at least three ambient dimensions"));
            }
            Ok(SurfacePatch::sphere_caps(r, vec![0.0; sc.dim], sc.dim, (0, 1, 2), true))
        }
        other => Err(usage(format!("unknown patch kind `{other}` (disk|sphere)"))),
    }
}

fn resolve_loop(cfg: &RunConfig, sc: &Scenario) -> Result<ParamCurve, CliError> {
    let Some(spec) = &cfg.loop_spec else {
        return Ok(sc.default_loop.clone());
    };
    let (kind, r) = split_spec(spec)?;
    if kind != "circle" {
        return Err(usage(format!("unknown loop kind `{kind}` (circle)")));
    }
    let mut center = vec![0.0; sc.dim];
    if sc.name == "dirac_monopole" {
        // keep the loop plane off the singular ray
        center[2] = -0.5;
    }
    Ok(ParamCurve::circle(r, &center, (0, 1), sc.dim))
}

fn resolve_region(cfg: &RunConfig, sc: &Scenario) -> Result<CompactRegion, CliError> {
    match cfg.region.as_deref() {
        None | Some("box") => Ok(sc.default_region.clone()),
        Some(other) => Err(usage(format!("unknown region `{other}` (box)"))),
    }
}

/// Diagonal u(1) part of the su2 curvature, which is what a surface
/// integral of the full matrix field would pick out componentwise.
fn su2_diagonal_family(alpha: f64) -> EpsilonFamily {
    EpsilonFamily::new("su2 diagonal singular curvature", move |e| {
        KForm::new(2, 4, AlgebraTag::U1, move |x: &[f64]| {
            let d = x[0] * x[0] + x[1] * x[1] + e * e;
            let mut c = vec![LieValue::zero(AlgebraTag::U1); 6];
            c[0] = LieValue::u1(alpha * 2.0 * e * e / (d * d));
            c
        })
    })
}

fn curvature_family(sc: Scenario) -> EpsilonFamily {
    match sc.tag {
        AlgebraTag::Su2 => su2_diagonal_family(sc.alpha),
        _ => EpsilonFamily::new(format!("{} curvature", sc.name), move |e| sc.piece_sum(e)),
    }
}

fn flux(cfg: &RunConfig, sc: Scenario, ladder: &EpsilonLadder) -> Result<Report, CliError> {
    let patches = resolve_patches(cfg, &sc, false)?;
    let mut rep = Report::new(cfg);
    let fam = curvature_family(sc);
    rep.diagnostics.insert("family".into(), json!(fam.meta));
    rep.diagnostics.insert("patch_count".into(), json!(patches.len()));
    let out = flux_limit(&fam, &patches, ladder, cfg.tol)?;
    rep.set_ladder(&out.net.ladder.values(), &out.net.values);
    rep.limit = out.limit;
    rep.order = out.order;
    rep.err_est = out.err_est;
    Ok(rep)
}

fn matrix(g: &GroupElement) -> Value {
    let n = g.n();
    Value::Array(
        (0..n)
            .map(|r| Value::Array((0..n).map(|c| pair(g.entry(r, c))).collect()))
            .collect(),
    )
}

fn holonomy_cmd(cfg: &RunConfig, sc: Scenario, ladder: &EpsilonLadder) -> Result<Report, CliError> {
    let curve = resolve_loop(cfg, &sc)?;
    let span = curve.b - curve.a;
    let step = cfg.step.unwrap_or(span / 4096.0);
    let n_steps = ((span / step).round() as usize).max(4);
    let eps = *ladder.values().last().expect("ladder has rungs");
    let out = holonomy(&sc.potential, eps, &curve, n_steps, cfg.trace)?;
    let mut rep = Report::new(cfg);
    rep.params.insert("step".into(), num(step));
    let g00 = out.g_end.entry(0, 0);
    rep.ladder = vec![(eps, g00)];
    rep.limit = g00;
    rep.err_est = out.max_defect;
    rep.diagnostics.insert("epsilon".into(), num(eps));
    rep.diagnostics.insert("g_end".into(), matrix(&out.g_end));
    rep.diagnostics.insert("steps".into(), json!(out.steps));
    rep.diagnostics.insert("max_defect".into(), num(out.max_defect));
    if let Some(trace) = &out.trace {
        let stride = ((trace.len() + 127) / 128).max(1);
        let samples: Vec<Value> = trace
            .iter()
            .step_by(stride)
            .map(|(t, g)| json!([num(*t), pair(g.entry(0, 0))]))
            .collect();
        rep.diagnostics.insert("trace".into(), Value::Array(samples));
    }
    Ok(rep)
}

fn classify(cfg: &RunConfig, sc: Scenario, ladder: &EpsilonLadder) -> Result<Report, CliError> {
    let region = resolve_region(cfg, &sc)?;
    let fam = sc.potential.family(format!("{} potential", sc.name));
    let out = classify_moderate(&fam, &region, 0, ladder)?;
    let mut rep = Report::new(cfg);
    rep.set_real_ladder(&out.epsilons, &out.sups);
    rep.order = out.order;
    rep.verdict = Some(out.verdict);
    rep.diagnostics.insert("family".into(), json!(fam.meta));
    rep.diagnostics.insert("deriv_order".into(), json!(0));
    Ok(rep)
}

fn shadow(cfg: &RunConfig, sc: Scenario, ladder: &EpsilonLadder) -> Result<Report, CliError> {
    let region = CompactRegion::new(vec![(-2.0, 2.0); 2], 17)
        .expect("fixed transverse window")
        .with_refine_at(0, 0.0)
        .with_refine_at(1, 0.0);
    let test: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> =
        Arc::new(|x: &[f64]| (-(x[0] * x[0] + x[1] * x[1])).exp());
    let out = shadow_pairing(&sc.transverse_curvature, test, &region, ladder, cfg.tol)?;
    let mut rep = Report::new(cfg);
    rep.set_ladder(&out.net.ladder.values(), &out.net.values);
    rep.limit = out.limit;
    rep.order = out.order;
    rep.err_est = out.err_est;
    rep.diagnostics.insert("family".into(), json!(sc.transverse_curvature.meta));
    rep.diagnostics.insert("test_function".into(), json!("exp(-|x|^2)"));
    rep.diagnostics.insert("window".into(), json!("[-2,2]^2"));
    Ok(rep)
}

fn chern(cfg: &RunConfig, sc: Scenario, ladder: &EpsilonLadder) -> Result<Report, CliError> {
    let patches = resolve_patches(cfg, &sc, true)?;
    let out = chern_number(&sc.potential, 1, &patches, ladder, cfg.tol)?;
    let mut rep = Report::new(cfg);
    rep.set_ladder(&out.net.ladder.values(), &out.net.values);
    rep.limit = out.limit;
    rep.order = out.order;
    rep.err_est = out.err_est;
    rep.diagnostics.insert("k".into(), json!(1));
    rep.diagnostics.insert("patch_count".into(), json!(patches.len()));
    Ok(rep)
}

fn decompose(cfg: &RunConfig, sc: Scenario, ladder: &EpsilonLadder) -> Result<Report, CliError> {
    let region = resolve_region(cfg, &sc)?;
    let mut pieces = Map::new();
    for (name, fam) in &sc.curvature_pieces {
        let out = classify_moderate(fam, &region, 0, ladder)?;
        pieces.insert(
            (*name).into(),
            json!({
                "order": num(out.order),
                "verdict": out.verdict,
                "sup_finest": num(*out.sups.last().expect("ladder has rungs")),
            }),
        );
    }
    let total_name = format!("{} total curvature", sc.name);
    let total_fam = EpsilonFamily::new(total_name, move |e| sc.piece_sum(e));
    let total = classify_moderate(&total_fam, &region, 0, ladder)?;
    let mut rep = Report::new(cfg);
    rep.set_real_ladder(&total.epsilons, &total.sups);
    rep.order = total.order;
    rep.verdict = Some(total.verdict);
    rep.diagnostics.insert("pieces".into(), Value::Object(pieces));
    Ok(rep)
}

/// Deterministic bundle samples clear of the singular transverse locus.
fn axiom_samples(sc: &Scenario, n: usize, seed: u64) -> Vec<AxiomSample> {
    let mut rng = sample::rng(seed);
    let bounds = sc.default_region.bounds.clone();
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        for p in sample::uniform_points(&mut rng, n, &bounds) {
            if p[0] * p[0] + p[1] * p[1] >= 0.25 && points.len() < n {
                points.push(p);
            }
        }
    }
    let tangents = sample::uniform_points(&mut rng, n, &vec![(-1.0, 1.0); sc.dim]);
    let lattice = group_lattice(sc.tag, n, seed + 1);
    points
        .into_iter()
        .zip(tangents)
        .zip(lattice)
        .map(|((x, base), g)| AxiomSample {
            x,
            g,
            tangent: BundleTangent { base, fiber: sample::random_algebra(&mut rng, sc.tag, 0.8) },
        })
        .collect()
}

fn group_lattice(tag: AlgebraTag, n: usize, seed: u64) -> Vec<GroupElement> {
    match tag {
        AlgebraTag::U1 => sample::u1_lattice(n),
        AlgebraTag::Su2 => sample::su2_lattice(n),
        AlgebraTag::GlnC(_) => {
            let mut rng = sample::rng(seed);
            (0..n).map(|_| sample::random_group(&mut rng, tag)).collect()
        }
    }
}

fn axioms(cfg: &RunConfig, sc: Scenario, ladder: &EpsilonLadder) -> Result<Report, CliError> {
    let samples = axiom_samples(&sc, 8, 2024);
    let lattice = group_lattice(sc.tag, 8, 2025);
    let potential = sc.potential.clone();
    let out = check_axioms(
        move |e| reconstruct_bundle_form(&potential, e),
        &samples,
        &lattice,
        ladder,
    )?;
    let max_i = out.res_i.iter().fold(0.0f64, |m, &v| m.max(v));
    let max_ii = out.res_ii.iter().fold(0.0f64, |m, &v| m.max(v));
    let cert = certify_decay(&out.epsilons, &out.res_ii, 8);
    let mut rep = Report::new(cfg);
    rep.set_real_ladder(&out.epsilons, &out.res_ii);
    rep.order = cert.negligible_up_to as f64;
    rep.verdict = Some(max_i <= 1e-10 && max_ii <= 1e-10);
    rep.diagnostics.insert("max_res_i".into(), num(max_i));
    rep.diagnostics.insert("max_res_ii".into(), num(max_ii));
    rep.diagnostics.insert("samples".into(), json!(8));
    Ok(rep)
}

fn canonicalize_cmd(cfg: &RunConfig, sc: Scenario, ladder: &EpsilonLadder) -> Result<Report, CliError> {
    let samples = axiom_samples(&sc, 8, 2024);
    let lattice = group_lattice(sc.tag, 8, 2025);
    let eps = ladder.values();
    let mut canon: HashMap<u64, BundleForm> = HashMap::new();
    for &e in &eps {
        let raw = reconstruct_bundle_form(&sc.potential, e);
        canon.insert(e.to_bits(), canonicalize(&raw)?);
    }
    let mut distances = Vec::with_capacity(eps.len());
    for &e in &eps {
        let raw = reconstruct_bundle_form(&sc.potential, e);
        let can = &canon[&e.to_bits()];
        let mut worst = 0.0f64;
        for s in &samples {
            let a = raw.value(&s.x, &s.g, &s.tangent)?;
            let b = can.value(&s.x, &s.g, &s.tangent)?;
            worst = worst.max((a - b).norm());
        }
        distances.push(worst);
    }
    let lookup = canon.clone();
    let out = check_axioms(
        move |e| lookup[&e.to_bits()].clone(),
        &samples,
        &lattice,
        ladder,
    )?;
    let max_i = out.res_i.iter().fold(0.0f64, |m, &v| m.max(v));
    let max_ii = out.res_ii.iter().fold(0.0f64, |m, &v| m.max(v));
    let cert = certify_decay(&eps, &distances, 8);
    let mut rep = Report::new(cfg);
    rep.set_real_ladder(&eps, &distances);
    rep.order = cert.negligible_up_to as f64;
    rep.verdict = Some(max_i <= 1e-12 && max_ii <= 1e-12);
    rep.diagnostics.insert("max_res_i".into(), num(max_i));
    rep.diagnostics.insert("max_res_ii".into(), num(max_ii));
    rep.diagnostics.insert("distance_slope".into(), num(cert.slope));
    Ok(rep)
}
