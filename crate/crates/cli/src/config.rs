//! Run configuration: a TOML tree, overridden key by key from the command line.

use std::path::Path;

use levy_drawdown::mc::McConfig;
use levy_drawdown::LevyModel;
use serde::Deserialize;
use toml::{Table, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelBlock,
    pub contract: ContractBlock,
    #[serde(default)]
    pub state: StateBlock,
    #[serde(default)]
    pub mc: McBlock,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub grid: GridBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(rename = "type")]
    pub kind: String,
    pub mu: f64,
    pub sigma: Option<f64>,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractKind {
    Drawdown,
    DrawdownCancel,
    Drawup,
    DrawupCancel,
}

impl ContractKind {
    pub fn name(self) -> &'static str {
        match self {
            ContractKind::Drawdown => "dd",
            ContractKind::DrawdownCancel => "dd-cancel",
            ContractKind::Drawup => "du",
            ContractKind::DrawupCancel => "du-cancel",
        }
    }

    pub fn is_drawup(self) -> bool {
        matches!(self, ContractKind::Drawup | ContractKind::DrawupCancel)
    }

    pub fn is_cancellable(self) -> bool {
        matches!(self, ContractKind::DrawdownCancel | ContractKind::DrawupCancel)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractBlock {
    #[serde(rename = "type")]
    pub kind: String,
    pub a: f64,
    pub b: Option<f64>,
    pub alpha: f64,
    #[serde(default)]
    pub c: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateBlock {
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub z: f64,
    #[serde(default)]
    pub p: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McBlock {
    pub paths: usize,
    pub horizon: f64,
    pub dt: f64,
    pub dt_max: f64,
    pub seed: u64,
    pub antithetic: bool,
    pub workers: usize,
}

impl Default for McBlock {
    fn default() -> Self {
        let d = McConfig::default();
        McBlock {
            paths: d.n_paths,
            horizon: d.horizon,
            dt: d.dt,
            dt_max: d.dt_max,
            seed: d.seed,
            antithetic: d.antithetic,
            workers: d.workers,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub csv: Option<String>,
    pub precision: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { csv: None, precision: 10 }
    }
}

/// Sweep grids written as `start:stop:step`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub y: Option<String>,
    pub z: Option<String>,
    pub theta: Option<String>,
}

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Config(msg.into()))
}

/// Reads a config file (or starts from an empty tree) and applies `key=value` overrides.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut tree = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            text.parse::<Table>().map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => Table::new(),
    };
    for item in overrides {
        let (key, value) =
            item.split_once('=').ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{item}`")))?;
        set_path(&mut tree, key.trim(), parse_value(value.trim()))?;
    }
    let cfg: RunConfig =
        Value::Table(tree).try_into().map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// TOML literal when it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

pub fn set_path(tree: &mut Table, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return bad(format!("malformed key `{key}`"));
    }
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut node = tree;
    for part in parents {
        let entry = node.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = match entry {
            Value::Table(t) => t,
            _ => return bad(format!("`{part}` in `{key}` is not a table")),
        };
    }
    node.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    pub fn kind(&self) -> ContractKind {
        match self.contract.kind.as_str() {
            "dd" => ContractKind::Drawdown,
            "dd-cancel" => ContractKind::DrawdownCancel,
            "du" => ContractKind::Drawup,
            _ => ContractKind::DrawupCancel,
        }
    }

    pub fn levy_model(&self) -> Result<LevyModel> {
        let m = &self.model;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| CliError::Config(format!("model.{name}: required for model.type = {}", m.kind)))
        };
        let model = match m.kind.as_str() {
            "bm" => LevyModel::brownian(m.mu, need(m.sigma, "sigma")?),
            "cl" => LevyModel::cramer_lundberg(m.mu, need(m.beta, "beta")?, need(m.rho, "rho")?),
            other => return bad(format!("model.type: expected `bm` or `cl`, got `{other}`")),
        };
        model.map_err(|e| CliError::Config(format!("model: {e}")))
    }

    /// Drawup trigger; equals `a` for drawdown contracts.
    pub fn b(&self) -> f64 {
        self.contract.b.unwrap_or(self.contract.a)
    }

    pub fn mc_config(&self) -> McConfig {
        let m = &self.mc;
        McConfig {
            n_paths: m.paths,
            horizon: m.horizon,
            dt: m.dt,
            dt_max: m.dt_max,
            seed: m.seed,
            antithetic: m.antithetic,
            workers: m.workers,
        }
    }

    fn validate(&self) -> Result<()> {
        if !["dd", "dd-cancel", "du", "du-cancel"].contains(&self.contract.kind.as_str()) {
            return bad(format!(
                "contract.type: expected one of dd, dd-cancel, du, du-cancel, got `{}`",
                self.contract.kind
            ));
        }
        self.levy_model()?;
        let c = &self.contract;
        let kind = self.kind();
        if !(c.a > 0.0 && c.a.is_finite()) {
            return bad(format!("contract.a: must be > 0, got {}", c.a));
        }
        if !(c.r > 0.0 && c.r.is_finite()) {
            return bad(format!("contract.r: must be > 0, got {}", c.r));
        }
        if !(c.alpha >= 0.0) {
            return bad(format!("contract.alpha: must be >= 0, got {}", c.alpha));
        }
        if !(c.c >= 0.0) {
            return bad(format!("contract.c: must be >= 0, got {}", c.c));
        }
        match (kind.is_drawup(), c.b) {
            (true, None) => return bad("contract.b: required for drawup contracts"),
            (false, Some(_)) => return bad("contract.b: only allowed for drawup contracts (du, du-cancel)"),
            (true, Some(b)) if !(b > 0.0 && b <= c.a) => {
                return bad(format!(
                    "contract.b: need 0 < b <= a (drawup trigger may not exceed a), got b={b}, a={}",
                    c.a
                ))
            }
            _ => {}
        }
        let s = &self.state;
        if !(s.y >= 0.0 && s.y < c.a) {
            return bad(format!("state.y: need 0 <= y < a, got y={}, a={}", s.y, c.a));
        }
        if kind.is_drawup() && !(s.z >= 0.0 && s.z < self.b()) {
            return bad(format!("state.z: need 0 <= z < b, got z={}, b={}", s.z, self.b()));
        }
        if !(s.p >= 0.0 && s.p.is_finite()) {
            return bad(format!("state.p: must be >= 0, got {}", s.p));
        }
        if !(1..=17).contains(&self.output.precision) {
            return bad(format!("output.precision: must be in 1..=17, got {}", self.output.precision));
        }
        self.mc_config().validate().map_err(|e| CliError::Config(format!("mc: {e}")))?;
        for (name, g) in [("y", &self.grid.y), ("z", &self.grid.z), ("theta", &self.grid.theta)] {
            if let Some(g) = g {
                parse_grid(g).map_err(|e| CliError::Config(format!("grid.{name}: {e}")))?;
            }
        }
        Ok(())
    }
}

/// Inclusive grid `start:stop:step`; empty when `stop < start`.
pub fn parse_grid(spec: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(format!("expected start:stop:step, got `{spec}`"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("`{s}` is not a number"));
    let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
    if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
        return Err(format!("need finite bounds and step > 0, got `{spec}`"));
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + step * i as f64).collect())
}
