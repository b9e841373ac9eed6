//! Flat `key = value` experiment configuration with per-subcommand schemas.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use sglab::{Grid, ProfileKind};

use crate::error::{CliError, Result};

/// The driver subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Identities,
    Stability,
    Nondegeneracy,
    Roundtrip,
    Evolve,
}

/// Accepted value syntax of a key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueType {
    Real,
    Count,
    Flag,
    Reals,
    Text,
    Kind,
    Kinds,
    /// A positive real or `auto`.
    Step,
}

impl ValueType {
    fn expected(&self) -> &'static str {
        match self {
            ValueType::Real => "a real number",
            ValueType::Count => "a non-negative integer",
            ValueType::Flag => "true or false",
            ValueType::Reals => "a comma-separated list of reals",
            ValueType::Text => "text",
            ValueType::Kind => "a profile kind",
            ValueType::Kinds => "a comma-separated list of profile kinds",
            ValueType::Step => "a positive real or `auto`",
        }
    }
}

/// One schema entry.
#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub name: &'static str,
    pub ty: ValueType,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, ty: ValueType, default: &'static str, help: &'static str) -> Key {
    Key { name, ty, default, help }
}

const GRID: [Key; 2] = [
    key("L", ValueType::Real, "40", "half-width of the grid [-L, L]"),
    key("N", ValueType::Count, "4096", "number of grid nodes"),
];

const IDENTITIES: &[Key] = &[
    key("betas", ValueType::Reals, "0.3,0.5,0.8", "soliton speeds to test"),
    key("x1", ValueType::Real, "0.3", "first shift"),
    key("x2", ValueType::Real, "-0.1", "second shift"),
    GRID[0],
    GRID[1],
    key("flip_half_angle", ValueType::Flag, "false", "use cos(D/2) = +tanh (negative control)"),
    key("energy_tol", ValueType::Real, "1e-8", "energy against 16 beta and 16 gamma"),
    key("form_tol", ValueType::Real, "1e-12", "agreement of the two energy densities"),
    key("bt_tol", ValueType::Real, "1e-9", "sup Backlund residual"),
    key("integral_tol", ValueType::Real, "1e-8", "selection and balance integrals"),
    key("orthogonality_tol", ValueType::Real, "1e-10", "shift-direction cross pairings"),
    key("factor_tol", ValueType::Real, "1e-8", "integrating-factor ODE residuals"),
    key("output", ValueType::Text, "-", "CSV path or - for stdout"),
];

const ROUNDTRIP: &[Key] = &[
    key("beta", ValueType::Real, "0.5", "soliton speed"),
    key("x1", ValueType::Real, "0.3", "first shift"),
    key("x2", ValueType::Real, "0.2", "second shift"),
    GRID[0],
    GRID[1],
    key("kinds", ValueType::Kinds, "breather,two-kink,kink-antikink", "2-soliton kinds"),
    key("eta", ValueType::Real, "1e-3", "H1 x L2 size of the perturbation"),
    key("seed", ValueType::Count, "1", "perturbation seed"),
    key("roundtrip_tol", ValueType::Real, "1e-7", "round-trip H1 x L2 error"),
    key("realness_tol", ValueType::Real, "1e-8", "sup |Im y0|"),
    key("delta_tol", ValueType::Real, "1e-9", "|delta~ - conj(delta)|"),
    key("permutability_tol", ValueType::Real, "1e-7", "two-path and composition discrepancies"),
    key("identity_tol", ValueType::Real, "1e-6", "energy and momentum identities"),
    key("output", ValueType::Text, "-", "CSV path or - for stdout"),
];

const STABILITY: &[Key] = &[
    key("beta", ValueType::Real, "0.5", "soliton speed"),
    key("x1", ValueType::Real, "0", "first shift"),
    key("x2", ValueType::Real, "0", "second shift"),
    GRID[0],
    GRID[1],
    key("dt", ValueType::Step, "auto", "time step (auto = h/16)"),
    key("T", ValueType::Real, "50", "final time"),
    key("kinds", ValueType::Kinds, "breather,two-kink,kink-antikink", "2-soliton kinds"),
    key("etas", ValueType::Reals, "1e-3,3e-3,1e-2", "perturbation sizes"),
    key("seed", ValueType::Count, "1", "first perturbation seed"),
    key("seeds", ValueType::Count, "5", "number of seeds per size"),
    key("sample_dt", ValueType::Real, "0.1", "spacing of modulation snapshots"),
    key("ratio_factor", ValueType::Real, "3", "allowed spread of sup-ratios across sizes"),
    key("transport", ValueType::Flag, "true", "run the Backlund transport cross-check"),
    key("transport_time", ValueType::Real, "5", "time of the transport comparison"),
    key("transport_tol", ValueType::Real, "1e-4", "H1 x L2 transport gap"),
    key("output", ValueType::Text, "-", "CSV path or - for stdout"),
];

const NONDEGENERACY: &[Key] = &[
    key("betas", ValueType::Reals, "0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9", "soliton speeds"),
    key("samples", ValueType::Count, "32", "x1 samples per period"),
    key("margin", ValueType::Real, "1e-3", "minimal distance of x1 to a singular shift"),
    GRID[0],
    GRID[1],
    key("refine", ValueType::Flag, "true", "repeat each value on the refined grid"),
    key("refine_tol", ValueType::Real, "1e-7", "refinement gap"),
    key("imag_tol", ValueType::Real, "1e-8", "max |Im I|"),
    key("period_tol", ValueType::Real, "1e-10", "gap under x1 -> x1 + period"),
    key("output", ValueType::Text, "-", "CSV path or - for stdout"),
];

const EVOLVE: &[Key] = &[
    key("kind", ValueType::Kind, "breather", "background profile"),
    key("beta", ValueType::Real, "0.5", "soliton speed"),
    key("x1", ValueType::Real, "0", "first shift"),
    key("x2", ValueType::Real, "0", "second shift"),
    GRID[0],
    GRID[1],
    key("dt", ValueType::Step, "auto", "time step (auto = h/16)"),
    key("T", ValueType::Real, "10", "final time"),
    key("eta", ValueType::Real, "0", "H1 x L2 size of the perturbation"),
    key("seed", ValueType::Count, "1", "perturbation seed"),
    key("snapshot_dt", ValueType::Real, "1", "spacing of exported snapshots"),
    key("stride", ValueType::Count, "1", "export every stride-th node"),
    key("conservation_tol", ValueType::Real, "1e-6", "relative energy and momentum drift"),
    key("track_output", ValueType::Text, "", "modulation track CSV path (empty = none)"),
    key("output", ValueType::Text, "-", "CSV path or - for stdout"),
];

impl Command {
    pub const ALL: [Command; 5] =
        [Command::Identities, Command::Stability, Command::Nondegeneracy, Command::Roundtrip, Command::Evolve];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Identities => "identities",
            Command::Stability => "stability",
            Command::Nondegeneracy => "nondegeneracy",
            Command::Roundtrip => "roundtrip",
            Command::Evolve => "evolve",
        }
    }

    pub fn schema(&self) -> &'static [Key] {
        match self {
            Command::Identities => IDENTITIES,
            Command::Stability => STABILITY,
            Command::Nondegeneracy => NONDEGENERACY,
            Command::Roundtrip => ROUNDTRIP,
            Command::Evolve => EVOLVE,
        }
    }
}

/// A parsed setting.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Count(u64),
    Flag(bool),
    Reals(Vec<f64>),
    Text(String),
    Kinds(Vec<ProfileKind>),
    Step(Option<f64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: Vec<String>| v.join(",");
        match self {
            Value::Real(x) => write!(f, "{x}"),
            Value::Count(n) => write!(f, "{n}"),
            Value::Flag(b) => write!(f, "{b}"),
            Value::Reals(v) => write!(f, "{}", join(v.iter().map(|x| x.to_string()).collect())),
            Value::Text(s) => write!(f, "{s}"),
            Value::Kinds(v) => write!(f, "{}", join(v.iter().map(|k| k.name().to_string()).collect())),
            Value::Step(None) => write!(f, "auto"),
            Value::Step(Some(x)) => write!(f, "{x}"),
        }
    }
}

/// Parses a 2-soliton or complex-kink kind name.
pub fn parse_kind(s: &str) -> Option<ProfileKind> {
    [
        ProfileKind::Breather,
        ProfileKind::TwoKink,
        ProfileKind::KinkAntikink,
        ProfileKind::ComplexKink,
        ProfileKind::ConjugateKink,
    ]
    .into_iter()
    .find(|k| k.name() == s)
}

fn parse_value(k: &Key, raw: &str) -> Result<Value> {
    let bad = || CliError::BadValue { key: k.name.to_string(), value: raw.to_string(), expected: k.ty.expected() };
    let real = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite());
    let items = |s: &str| s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::to_string).collect::<Vec<_>>();
    Ok(match k.ty {
        ValueType::Real => Value::Real(real(raw).ok_or_else(bad)?),
        ValueType::Count => Value::Count(raw.parse().map_err(|_| bad())?),
        ValueType::Flag => match raw {
            "true" => Value::Flag(true),
            "false" => Value::Flag(false),
            _ => return Err(bad()),
        },
        ValueType::Reals => {
            let v: Option<Vec<f64>> = items(raw).iter().map(|s| real(s)).collect();
            Value::Reals(v.filter(|v| !v.is_empty()).ok_or_else(bad)?)
        }
        ValueType::Text => Value::Text(raw.to_string()),
        ValueType::Kind => Value::Kinds(vec![parse_kind(raw).ok_or_else(bad)?]),
        ValueType::Kinds => {
            let v: Option<Vec<ProfileKind>> = items(raw).iter().map(|s| parse_kind(s)).collect();
            Value::Kinds(v.filter(|v| !v.is_empty()).ok_or_else(bad)?)
        }
        ValueType::Step => match raw {
            "auto" => Value::Step(None),
            s => Value::Step(Some(real(s).filter(|x| *x > 0.0).ok_or_else(bad)?)),
        },
    })
}

/// Validated settings of one subcommand, defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    command: Command,
    values: BTreeMap<&'static str, Value>,
}

impl ExperimentConfig {
    /// Defaults of `command`.
    pub fn defaults(command: Command) -> Self {
        let values = command
            .schema()
            .iter()
            .map(|k| (k.name, parse_value(k, k.default).expect("schema defaults parse")))
            .collect();
        ExperimentConfig { command, values }
    }

    /// Parses file text and then `key=value` overrides, in that order.
    pub fn parse(command: Command, text: &str, overrides: &[String]) -> Result<Self> {
        let mut cfg = ExperimentConfig::defaults(command);
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::Syntax { line: i + 1, text: line.to_string() })?;
            cfg.set(k.trim(), v.trim())?;
        }
        for o in overrides {
            let (k, v) = o.split_once('=').ok_or_else(|| CliError::BadOverride(o.clone()))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    /// Reads an optional config file and applies overrides.
    pub fn load(command: Command, path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        ExperimentConfig::parse(command, &text, overrides)
    }

    pub fn set(&mut self, name: &str, raw: &str) -> Result<()> {
        let k = self
            .command
            .schema()
            .iter()
            .find(|k| k.name == name)
            .ok_or_else(|| CliError::UnknownKey { key: name.to_string(), command: self.command.name() })?;
        self.values.insert(k.name, parse_value(k, raw)?);
        Ok(())
    }

    pub fn command(&self) -> Command {
        self.command
    }

    /// All settings in schema order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        self.command.schema().iter().map(|k| (k.name, self.values[k.name].to_string())).collect()
    }

    fn get(&self, name: &str) -> &Value {
        self.values.get(name).unwrap_or_else(|| panic!("`{name}` is not in the {} schema", self.command.name()))
    }

    pub fn real(&self, name: &str) -> f64 {
        match self.get(name) {
            Value::Real(x) => *x,
            v => panic!("`{name}` is not a real: {v:?}"),
        }
    }

    pub fn count(&self, name: &str) -> u64 {
        match self.get(name) {
            Value::Count(n) => *n,
            v => panic!("`{name}` is not a count: {v:?}"),
        }
    }

    pub fn flag(&self, name: &str) -> bool {
        match self.get(name) {
            Value::Flag(b) => *b,
            v => panic!("`{name}` is not a flag: {v:?}"),
        }
    }

    pub fn reals(&self, name: &str) -> &[f64] {
        match self.get(name) {
            Value::Reals(v) => v,
            v => panic!("`{name}` is not a list: {v:?}"),
        }
    }

    pub fn text(&self, name: &str) -> &str {
        match self.get(name) {
            Value::Text(s) => s,
            v => panic!("`{name}` is not text: {v:?}"),
        }
    }

    pub fn kinds(&self, name: &str) -> &[ProfileKind] {
        match self.get(name) {
            Value::Kinds(v) => v,
            v => panic!("`{name}` is not a kind list: {v:?}"),
        }
    }

    pub fn kind(&self, name: &str) -> ProfileKind {
        self.kinds(name)[0]
    }

    pub fn step(&self, name: &str) -> Option<f64> {
        match self.get(name) {
            Value::Step(s) => *s,
            v => panic!("`{name}` is not a step: {v:?}"),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.real("L"), self.count("N") as usize)?)
    }
}
