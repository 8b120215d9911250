//! Typed experiment parameters: one schema per subcommand, filled from a
//! key=value file and then from flags.

use std::collections::BTreeMap;
use std::path::PathBuf;

use super::table::Format;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Int,
    Real,
    Text,
    /// Comma-separated integers.
    IntList,
    Choice(&'static [&'static str]),
}

#[derive(Clone, Copy, Debug)]
pub struct Param {
    pub name: &'static str,
    pub kind: Kind,
    /// `None` makes the parameter required.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn param(name: &'static str, kind: Kind, default: Option<&'static str>, help: &'static str) -> Param {
    Param { name, kind, default, help }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
    IntList(Vec<i64>),
}

impl Value {
    fn parse(p: &Param, raw: &str) -> Result<Value> {
        let bad = |what: &str| Error::invalid(format!("--{} expects {what}, got '{raw}'", p.name));
        Ok(match p.kind {
            Kind::Int => Value::Int(raw.trim().parse().map_err(|_| bad("an integer"))?),
            Kind::Real => {
                let x: f64 = raw.trim().parse().map_err(|_| bad("a real number"))?;
                if !x.is_finite() {
                    return Err(bad("a finite real number"));
                }
                Value::Real(x)
            }
            Kind::Text => Value::Text(raw.to_string()),
            Kind::IntList => Value::IntList(
                raw.split(',')
                    .map(|t| t.trim().parse().map_err(|_| bad("comma-separated integers")))
                    .collect::<Result<_>>()?,
            ),
            Kind::Choice(options) => {
                if !options.contains(&raw) {
                    return Err(bad(&format!("one of {}", options.join(", "))));
                }
                Value::Text(raw.to_string())
            }
        })
    }

    /// Canonical text, used in the echoed preamble.
    pub fn echo(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Real(x) => format!("{x:?}"),
            Value::Text(s) => s.clone(),
            Value::IntList(v) => v.iter().map(i64::to_string).collect::<Vec<_>>().join(","),
        }
    }
}

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub params: &'static [Param],
}

const WALK: &[Param] = &[
    param("mode", Kind::Choice(&["simulate", "pmf", "halfmass"]), Some("simulate"), "what to compute"),
    param("check", Kind::Choice(&["none", "halfmass"]), Some("none"), "shorthand for --mode halfmass"),
    param("dist", Kind::Choice(&["cauchy", "power-law"]), Some("cauchy"), "step law"),
    param("n", Kind::Int, None, "number of steps"),
    param("dim", Kind::Int, Some("1"), "dimension of the power law (1 or 2)"),
    param("s", Kind::Real, Some("3"), "power-law exponent"),
    param("norm", Kind::Choice(&["max", "euclidean"]), Some("max"), "power-law norm"),
    param("step-radius", Kind::Int, Some("1000"), "power-law truncation radius"),
    param("radius", Kind::Int, Some("10000"), "convolution window radius"),
    param("span", Kind::Int, Some("20"), "pmf rows cover |x| <= span"),
    param("trials", Kind::Int, Some("1000"), "independent walks"),
];

const CONDUCTANCE: &[Param] = &[
    param("input", Kind::Text, None, "network file"),
    param("a", Kind::IntList, None, "source vertices"),
    param("b", Kind::IntList, None, "sink vertices"),
];

const FLOW: &[Param] = &[
    param("dim", Kind::Int, Some("2"), "dimension (1 or 2)"),
    param("s", Kind::Real, Some("3.5"), "decay exponent, d < s < 2d"),
    param("start", Kind::Int, Some("2"), "first stage K"),
    param("stages", Kind::Int, Some("12"), "last stage"),
];

const LOADS: &[Param] = &[
    param("k", Kind::Int, None, "level"),
    param("semantics", Kind::Choice(&["per-pair", "per-traversal"]), Some("per-pair"), "how repeated traversals count"),
    param("method", Kind::Choice(&["structured", "enumerate"]), Some("structured"), "closed form or path enumeration"),
];

const REWIRE: &[Param] = &[
    param("mode", Kind::Choice(&["compare", "tail", "weights"]), Some("compare"), "what to compute"),
    param("k-max", Kind::Int, Some("2"), "deepest level"),
    param("core", Kind::Int, Some("20"), "core radius; B is its boundary"),
    param("realizations", Kind::Int, Some("1"), "independent shift vectors (compare)"),
    param("samples", Kind::Int, Some("10000"), "shift vectors (tail)"),
    param("orientation", Kind::Choice(&["vertical", "horizontal", "rising", "falling"]), Some("vertical"), "edge orientation (tail)"),
    param("j-max", Kind::Int, Some("6"), "thresholds 3^j for j <= j-max (tail)"),
    param("radius", Kind::Int, Some("4"), "window radius (weights)"),
];

const RCM: &[Param] = &[
    param("mode", Kind::Choice(&["sample", "certificate", "delta-eff", "discretize", "walk"]), Some("certificate"), "what to compute"),
    param("kernel", Kind::Choice(&["sum", "min", "prod", "pa"]), Some("pa"), "kernel"),
    param("gamma", Kind::Real, Some("0.4"), "weight influence in [0, 1)"),
    param("beta", Kind::Real, Some("1"), "edge density"),
    param("delta", Kind::Real, Some("2.5"), "profile decay exponent"),
    param("side", Kind::Real, Some("20"), "window side L"),
    param("r-max", Kind::Real, Some("1024"), "distances 2, 4, ..., r-max"),
    param("steps", Kind::Int, Some("1000"), "walk length"),
    param("trials", Kind::Int, Some("20"), "walks"),
    param("sample-out", Kind::Text, Some(""), "also write the sample to this file"),
];

const DOMINATION: &[Param] = &[
    param("mode", Kind::Choice(&["exact", "mc"]), Some("mc"), "outcome enumeration or Monte Carlo"),
    param("networks", Kind::Int, Some("10"), "random networks"),
    param("vertices", Kind::Int, Some("8"), "vertices per network"),
    param("edges", Kind::Int, Some("10"), "edges per network"),
    param("p", Kind::Real, Some("0.5"), "two-point success probability"),
    param("trials", Kind::Int, Some("200"), "Monte Carlo samples per network"),
];

pub const COMMANDS: &[Command] = &[
    Command { name: "walk", about: "Walk simulation, exact step convolution, half-mass check", params: WALK },
    Command { name: "conductance", about: "Effective conductance of a network file", params: CONDUCTANCE },
    Command { name: "flow", about: "Staged unit flow to infinity and its energy", params: FLOW },
    Command { name: "loads", about: "Edge-load histogram of the level-k paths with its bounds", params: LOADS },
    Command { name: "rewire", about: "Rewired conductances: comparison, tail, weight field", params: REWIRE },
    Command { name: "rcm", about: "Random connection model computations", params: RCM },
    Command { name: "domination", about: "Random-conductance domination test", params: DOMINATION },
];

pub fn command(name: &str) -> Option<&'static Command> {
    COMMANDS.iter().find(|c| c.name == name)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: &'static str,
    pub params: BTreeMap<&'static str, Value>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    /// Validates every parameter: file entries first, then flags on top,
    /// then defaults. Unknown keys and missing required values are errors.
    pub fn resolve(
        cmd: &'static Command,
        file: &[(String, String)],
        flags: &[(&'static str, String)],
        seed: u64,
        output: Option<PathBuf>,
        format: Format,
        threads: Option<usize>,
    ) -> Result<Self> {
        let mut raw: BTreeMap<&'static str, String> = BTreeMap::new();
        for (key, value) in file {
            let p = cmd
                .params
                .iter()
                .find(|p| p.name == key)
                .ok_or_else(|| Error::invalid(format!("unknown key '{key}' for '{}'", cmd.name)))?;
            raw.insert(p.name, value.clone());
        }
        for (key, value) in flags {
            raw.insert(key, value.clone());
        }
        let mut params = BTreeMap::new();
        for p in cmd.params {
            let text = match (raw.get(p.name), p.default) {
                (Some(v), _) => v.as_str(),
                (None, Some(d)) => d,
                (None, None) => return Err(Error::invalid(format!("missing required --{}", p.name))),
            };
            params.insert(p.name, Value::parse(p, text)?);
        }
        Ok(ExperimentConfig { command: cmd.name, params, seed, output, format, threads })
    }

    pub fn int(&self, key: &str) -> i64 {
        match &self.params[key] {
            Value::Int(i) => *i,
            v => panic!("parameter {key} is {v:?}, not an integer"),
        }
    }

    /// A non-negative integer within `range`.
    pub fn count(&self, key: &str, range: std::ops::RangeInclusive<u64>) -> Result<u64> {
        let v = self.int(key);
        u64::try_from(v)
            .ok()
            .filter(|v| range.contains(v))
            .ok_or_else(|| Error::invalid(format!("--{key} = {v} outside {}..={}", range.start(), range.end())))
    }

    pub fn real(&self, key: &str) -> f64 {
        match &self.params[key] {
            Value::Real(x) => *x,
            v => panic!("parameter {key} is {v:?}, not a real"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match &self.params[key] {
            Value::Text(s) => s,
            v => panic!("parameter {key} is {v:?}, not text"),
        }
    }

    pub fn list(&self, key: &str) -> &[i64] {
        match &self.params[key] {
            Value::IntList(v) => v,
            v => panic!("parameter {key} is {v:?}, not a list"),
        }
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(i + 1, "expected key = value"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::parse(i + 1, "empty key"));
        }
        if out.iter().any(|(seen, _): &(String, String)| seen == k) {
            return Err(Error::parse(i + 1, format!("duplicate key '{k}'")));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}
