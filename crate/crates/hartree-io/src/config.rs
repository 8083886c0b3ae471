//! Run configuration as flat `section.key = value` lines.
//!
//! The text is parsed as TOML (dotted keys are native there), flattened,
//! patched from `HARTREE_*` environment variables and validated. Serializing
//! writes one sorted dotted line per leaf, so parse → serialize → parse is a
//! fixed point.
//!
//! Environment names map to keys by lowercasing and turning `__` into `.`:
//! `HARTREE_GRID__N=2048` sets `grid.n`, `HARTREE_SEED=3` sets `seed`.

use hartree::{Grading, GridSpec, HartreeError, OuterBoundary, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use toml::Value;

pub const ENV_PREFIX: &str = "HARTREE_";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    pub grading: String,
    pub outer: String,
}

impl Default for GridBlock {
    fn default() -> Self {
        let g = GridSpec::default();
        Self { r_min: g.r_min, r_max: g.r_max, n: g.n, grading: g.grading.to_string(), outer: g.outer.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsBlock {
    /// Expansion order for threshold data.
    pub k: usize,
    /// Sign of the threshold data (±1).
    pub a: f64,
    /// t₀ in units of 1/e₀.
    pub t0_factor: f64,
    pub virial_radii: Vec<f64>,
    /// Initial data: "w", "wpm" or "file".
    pub initial: String,
    /// Multiplier applied to the initial data.
    pub amplitude: f64,
    /// Field file read when `initial = "file"`.
    pub input: String,
    /// Phase and scale applied to the initial data.
    pub theta: f64,
    pub mu: f64,
}

impl Default for PhysicsBlock {
    fn default() -> Self {
        Self {
            k: 3,
            a: 1.0,
            t0_factor: 2.0,
            virial_radii: vec![5.0, 10.0, 20.0],
            initial: "w".into(),
            amplitude: 1.0,
            input: String::new(),
            theta: 0.0,
            mu: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorBlock {
    pub dt: f64,
    pub t_end: f64,
    pub cadence: usize,
    pub adaptive: bool,
    /// "forward" or "backward".
    pub direction: String,
}

impl Default for IntegratorBlock {
    fn default() -> Self {
        Self { dt: 1e-4, t_end: 1.0, cadence: 100, adaptive: false, direction: "forward".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: String,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub d: usize,
    /// Seed for the trial-field generators.
    pub seed: u64,
    /// Worker threads, 0 for the rayon default.
    pub threads: usize,
    pub grid: GridBlock,
    pub physics: PhysicsBlock,
    pub integrator: IntegratorBlock,
    pub output: OutputBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 5,
            seed: 0,
            threads: 0,
            grid: GridBlock::default(),
            physics: PhysicsBlock::default(),
            integrator: IntegratorBlock::default(),
            output: OutputBlock::default(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> HartreeError {
    HartreeError::ConfigInvalid(msg.into())
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Table(t) => {
            for (k, x) in t {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn unflatten(flat: &BTreeMap<String, Value>) -> Result<Value> {
    let mut root = toml::Table::new();
    for (key, v) in flat {
        let parts: Vec<&str> = key.split('.').collect();
        let mut t = &mut root;
        for p in &parts[..parts.len() - 1] {
            t = t
                .entry(p.to_string())
                .or_insert_with(|| Value::Table(toml::Table::new()))
                .as_table_mut()
                .ok_or_else(|| invalid(format!("key '{key}' nests under a scalar")))?;
        }
        t.insert(parts[parts.len() - 1].to_string(), v.clone());
    }
    Ok(Value::Table(root))
}

/// A literal from the environment: any TOML value, else a bare string.
fn parse_literal(s: &str) -> Value {
    format!("x = {s}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("x"))
        .unwrap_or_else(|| Value::String(s.to_string()))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_env(text, std::iter::empty::<(String, String)>())
    }

    /// Parse, then apply `HARTREE_*` pairs from `env`.
    pub fn parse_with_env(text: &str, env: impl IntoIterator<Item = (String, String)>) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| invalid(e.message().to_string()))?;
        let mut flat = BTreeMap::new();
        flatten("", &Value::Table(table), &mut flat);
        for (k, v) in env {
            if let Some(rest) = k.strip_prefix(ENV_PREFIX) {
                flat.insert(rest.to_lowercase().replace("__", "."), parse_literal(&v));
            }
        }
        let cfg: RunConfig = unflatten(&flat)?.try_into().map_err(|e: toml::de::Error| invalid(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load a file (or defaults when `path` is None) with the process environment applied.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        Self::parse_with_env(&text, std::env::vars())
    }

    pub fn flat(&self) -> BTreeMap<String, Value> {
        let v = Value::try_from(self).expect("config serializes");
        let mut flat = BTreeMap::new();
        flatten("", &v, &mut flat);
        flat
    }

    /// One `key = value` line per leaf, sorted by key.
    pub fn to_text(&self) -> String {
        self.flat().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        Ok(GridSpec {
            d: self.d,
            r_min: self.grid.r_min,
            r_max: self.grid.r_max,
            n: self.grid.n,
            grading: self.grid.grading.parse::<Grading>()?,
            outer: self.grid.outer.parse::<OuterBoundary>()?,
        })
    }

    pub fn backward(&self) -> bool {
        self.integrator.direction == "backward"
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed > i64::MAX as u64 {
            return Err(invalid(format!("seed = {} does not fit a TOML integer", self.seed)));
        }
        if self.d < 5 {
            return Err(invalid(format!("d = {} (need d ≥ 5)", self.d)));
        }
        let g = &self.grid;
        if !(g.r_min > 0.0 && g.r_min < g.r_max && g.r_max.is_finite()) {
            return Err(invalid(format!("grid range [{}, {}]", g.r_min, g.r_max)));
        }
        if g.n < 16 {
            return Err(invalid(format!("grid.n = {} (need ≥ 16)", g.n)));
        }
        self.grid_spec()?;
        let p = &self.physics;
        if p.k == 0 {
            return Err(invalid("physics.k = 0"));
        }
        if p.a != 1.0 && p.a != -1.0 {
            return Err(invalid(format!("physics.a = {} (need ±1)", p.a)));
        }
        if !(p.t0_factor > 0.0) {
            return Err(invalid(format!("physics.t0_factor = {}", p.t0_factor)));
        }
        for &r in &p.virial_radii {
            if !(r > 0.0 && r <= g.r_max / 2.0) {
                return Err(invalid(format!("virial radius {r} outside (0, r_max/2]")));
            }
        }
        match p.initial.as_str() {
            "w" | "wpm" => {}
            "file" if !p.input.is_empty() => {}
            "file" => return Err(invalid("physics.initial = \"file\" needs physics.input")),
            other => return Err(invalid(format!("physics.initial = '{other}'"))),
        }
        if !(p.amplitude.is_finite() && p.theta.is_finite() && p.mu > 0.0 && p.mu.is_finite()) {
            return Err(invalid("physics.amplitude/theta/mu"));
        }
        let i = &self.integrator;
        if !(i.dt > 0.0 && i.dt.is_finite()) {
            return Err(invalid(format!("integrator.dt = {}", i.dt)));
        }
        if !(i.t_end >= i.dt) {
            return Err(invalid(format!("integrator.t_end = {} < dt", i.t_end)));
        }
        if i.cadence == 0 {
            return Err(invalid("integrator.cadence = 0"));
        }
        if i.direction != "forward" && i.direction != "backward" {
            return Err(invalid(format!("integrator.direction = '{}'", i.direction)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_and_defaults() {
        let c = RunConfig::parse("grid.n = 512\nintegrator.dt = 2e-4\n").unwrap();
        assert_eq!(c.grid.n, 512);
        assert_eq!(c.integrator.dt, 2e-4);
        assert_eq!(c.physics.k, 3);
    }

    #[test]
    fn env_override_wins() {
        let env = vec![("HARTREE_GRID__N".to_string(), "256".to_string()), ("PATH".into(), "/bin".into())];
        let c = RunConfig::parse_with_env("grid.n = 512", env).unwrap();
        assert_eq!(c.grid.n, 256);
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        assert!(RunConfig::parse("grid.m = 3").is_err());
        assert!(RunConfig::parse("integrator.dt = -1.0").is_err());
        assert!(RunConfig::parse("physics.virial_radii = [80.0]").is_err());
        let e = RunConfig::parse("d = 3").unwrap_err();
        assert_eq!(e.code(), "cli-io/config-invalid");
    }
}
