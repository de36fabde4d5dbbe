//! Run configuration: defaults, `key = value` files, and flag merging.
//!
//! Precedence is defaults, then config file, then explicit flags. A config
//! serialized with `to_lines` parses back to an equal value, so runs can be
//! replayed from their recorded configuration.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Flux,
    Holonomy,
    Classify,
    Shadow,
    Chern,
    Decompose,
    Axioms,
    Canonicalize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Flux => "flux",
            Command::Holonomy => "holonomy",
            Command::Classify => "classify",
            Command::Shadow => "shadow",
            Command::Chern => "chern",
            Command::Decompose => "decompose",
            Command::Axioms => "axioms",
            Command::Canonicalize => "canonicalize",
        }
    }

    pub fn from_name(s: &str) -> Option<Command> {
        match s {
            "flux" => Some(Command::Flux),
            "holonomy" => Some(Command::Holonomy),
            "classify" => Some(Command::Classify),
            "shadow" => Some(Command::Shadow),
            "chern" => Some(Command::Chern),
            "decompose" => Some(Command::Decompose),
            "axioms" => Some(Command::Axioms),
            "canonicalize" => Some(Command::Canonicalize),
            _ => None,
        }
    }
}

/// Everything a run needs, resolved from defaults, config file, and flags.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub scenario: String,
    pub alpha: f64,
    pub eps0: f64,
    pub ratio: f64,
    pub count: usize,
    pub tol: f64,
    pub step: Option<f64>,
    pub patch: Option<String>,
    pub loop_spec: Option<String>,
    pub region: Option<String>,
    pub smooth: String,
    pub out: Option<String>,
    pub trace: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> RunConfig {
        RunConfig {
            command,
            scenario: "flat_wire".into(),
            alpha: 1.0,
            eps0: 0.0625,
            ratio: 0.5,
            count: 14,
            tol: 1e-6,
            step: None,
            patch: None,
            loop_spec: None,
            region: None,
            smooth: "zero".into(),
            out: None,
            trace: false,
        }
    }

    /// One `key = value` line per set field, in a fixed order.
    pub fn to_lines(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("command = {}\n", self.command.name()));
        s.push_str(&format!("scenario = {}\n", self.scenario));
        s.push_str(&format!("alpha = {}\n", self.alpha));
        s.push_str(&format!("eps0 = {}\n", self.eps0));
        s.push_str(&format!("ratio = {}\n", self.ratio));
        s.push_str(&format!("count = {}\n", self.count));
        s.push_str(&format!("tol = {}\n", self.tol));
        if let Some(v) = self.step {
            s.push_str(&format!("step = {v}\n"));
        }
        if let Some(v) = &self.patch {
            s.push_str(&format!("patch = {v}\n"));
        }
        if let Some(v) = &self.loop_spec {
            s.push_str(&format!("loop = {v}\n"));
        }
        if let Some(v) = &self.region {
            s.push_str(&format!("region = {v}\n"));
        }
        s.push_str(&format!("smooth = {}\n", self.smooth));
        if let Some(v) = &self.out {
            s.push_str(&format!("out = {v}\n"));
        }
        s.push_str(&format!("trace = {}\n", self.trace));
        s
    }

    /// Apply one config line. Blank lines and `#` comments are skipped.
    pub fn apply_line(&mut self, line: &str) -> Result<(), String> {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return Ok(());
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("expected `key = value`, got `{line}`"))?;
        let (key, value) = (key.trim(), value.trim());
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad value `{v}` for `{key}`"))
        }
        match key {
            "command" => {
                self.command = Command::from_name(value)
                    .ok_or_else(|| format!("unknown command `{value}`"))?;
            }
            "scenario" => self.scenario = value.to_string(),
            "alpha" => self.alpha = num(key, value)?,
            "eps0" => self.eps0 = num(key, value)?,
            "ratio" => self.ratio = num(key, value)?,
            "count" => self.count = num(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "step" => self.step = Some(num(key, value)?),
            "patch" => self.patch = Some(value.to_string()),
            "loop" => self.loop_spec = Some(value.to_string()),
            "region" => self.region = Some(value.to_string()),
            "smooth" => self.smooth = value.to_string(),
            "out" => self.out = Some(value.to_string()),
            "trace" => self.trace = num(key, value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, text: &str) -> Result<(), String> {
        for (i, line) in text.lines().enumerate() {
            self.apply_line(line).map_err(|e| format!("config line {}: {e}", i + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.alpha.is_finite() {
            return Err("alpha must be finite".into());
        }
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return Err("eps0 must be positive and finite".into());
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err("ratio must lie in (0, 1)".into());
        }
        if self.count < 8 {
            return Err("count must be at least 8".into());
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err("tol must be positive and finite".into());
        }
        if let Some(step) = self.step {
            if !(step > 0.0 && step.is_finite()) {
                return Err("step must be positive and finite".into());
            }
        }
        Ok(())
    }
}
