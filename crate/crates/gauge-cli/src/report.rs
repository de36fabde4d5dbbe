//! Run reports with a stable JSON schema.
//!
//! Every command emits the same top-level keys: `command`, `scenario`,
//! `params`, `ladder`, `limit`, `order`, `err_est`, `verdict`,
//! `diagnostics`. Keys are sorted, so byte-identical inputs give
//! byte-identical output.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use gauge_core::colombeau::ladder_csv;

use crate::config::RunConfig;

/// A finite float, or null where a value has no finite representation.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Complex scalar as a `[re, im]` pair.
pub fn pair(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub struct Report {
    pub command: String,
    pub scenario: String,
    pub params: Map<String, Value>,
    pub ladder: Vec<(f64, Complex64)>,
    pub limit: Complex64,
    pub order: f64,
    pub err_est: f64,
    pub verdict: Option<bool>,
    pub diagnostics: Map<String, Value>,
}

impl Report {
    /// Seed a report with the resolved run parameters echoed back.
    pub fn new(cfg: &RunConfig) -> Report {
        let mut params = Map::new();
        params.insert("alpha".into(), num(cfg.alpha));
        params.insert("eps0".into(), num(cfg.eps0));
        params.insert("ratio".into(), num(cfg.ratio));
        params.insert("count".into(), json!(cfg.count));
        params.insert("tol".into(), num(cfg.tol));
        params.insert("smooth".into(), json!(cfg.smooth));
        if let Some(step) = cfg.step {
            params.insert("step".into(), num(step));
        }
        if let Some(p) = &cfg.patch {
            params.insert("patch".into(), json!(p));
        }
        if let Some(l) = &cfg.loop_spec {
            params.insert("loop".into(), json!(l));
        }
        if let Some(r) = &cfg.region {
            params.insert("region".into(), json!(r));
        }
        Report {
            command: cfg.command.name().into(),
            scenario: cfg.scenario.clone(),
            params,
            ladder: Vec::new(),
            limit: Complex64::new(f64::NAN, f64::NAN),
            order: f64::NAN,
            err_est: f64::NAN,
            verdict: None,
            diagnostics: Map::new(),
        }
    }

    pub fn set_ladder(&mut self, epsilons: &[f64], values: &[Complex64]) {
        self.ladder = epsilons.iter().copied().zip(values.iter().copied()).collect();
    }

    /// Real-valued ladder, stored with zero imaginary part.
    pub fn set_real_ladder(&mut self, epsilons: &[f64], values: &[f64]) {
        self.ladder = epsilons
            .iter()
            .copied()
            .zip(values.iter().map(|&v| Complex64::new(v, 0.0)))
            .collect();
    }

    pub fn to_json(&self) -> Value {
        let ladder: Vec<Value> = self
            .ladder
            .iter()
            .map(|&(e, v)| json!({"epsilon": num(e), "value": pair(v)}))
            .collect();
        json!({
            "command": self.command,
            "scenario": self.scenario,
            "params": self.params,
            "ladder": ladder,
            "limit": pair(self.limit),
            "order": num(self.order),
            "err_est": num(self.err_est),
            "verdict": self.verdict,
            "diagnostics": self.diagnostics,
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let eps: Vec<f64> = self.ladder.iter().map(|&(e, _)| e).collect();
        let vals: Vec<Complex64> = self.ladder.iter().map(|&(_, v)| v).collect();
        ladder_csv(&eps, &vals)
    }
}

/// Diagnostic report for a run that failed numerically, same schema.
pub fn failure_json(cfg: &RunConfig, err: &gauge_core::Error) -> String {
    let mut rep = Report::new(cfg);
    rep.diagnostics.insert("error".into(), json!(err.to_string()));
    rep.to_json_string()
}
