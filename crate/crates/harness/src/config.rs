//! Experiment files.
//!
//! A file holds one experiment (top-level keys) or several under
//! `experiment = [...]`; TOML and JSON are both accepted, chosen by
//! extension and falling back to trying each.

use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use lattice_bpb::bpb::Policy;
use lattice_bpb::{MonotoneNorm, NormFamily, NormedLattice, Rational, Scalar};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Modulus,
    BpbLinfty,
    BpbC0,
    Converse,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Modulus => "modulus",
            Command::BpbLinfty => "bpb-linfty",
            Command::BpbC0 => "bpb-c0",
            Command::Converse => "converse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    #[default]
    RandomPositiveOperator,
    ConverseInstance,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Float,
    Rational,
}

impl FromStr for Mode {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match s {
            "float" => Ok(Mode::Float),
            "rational" => Ok(Mode::Rational),
            other => bail!("unknown mode {other:?} (expected float or rational)"),
        }
    }
}

/// A number given either as a JSON/TOML number or as a string such as `"3/10"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_scalar<S: Scalar + FromStr>(&self) -> anyhow::Result<S> {
        match self {
            Number::Float(v) if v.is_finite() => Ok(S::lift(*v)),
            Number::Float(v) => bail!("non-finite number {v}"),
            Number::Text(s) => {
                let s = s.trim();
                if let Ok(v) = s.parse::<S>() {
                    return Ok(v);
                }
                let r: Rational = s
                    .parse()
                    .map_err(|_| anyhow!("cannot parse number {s:?}"))?;
                Ok(lattice_bpb::scalar::convert(&r))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    L1,
    Lp,
    WeightedL1,
    Sup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Number>>,
}

impl NormSpec {
    pub fn l1() -> Self {
        Self {
            family: Family::L1,
            p: None,
            weights: None,
        }
    }

    pub fn lp(p: f64) -> Self {
        Self {
            family: Family::Lp,
            p: Some(p),
            weights: None,
        }
    }

    pub fn lattice<S: Scalar + FromStr>(&self, dim: usize) -> anyhow::Result<NormedLattice<S>> {
        let family = match self.family {
            Family::L1 => NormFamily::L1,
            Family::Sup => NormFamily::Sup,
            Family::Lp => NormFamily::Lp(self.p.context("lp norm needs `p`")?),
            Family::WeightedL1 => {
                let w = match &self.weights {
                    Some(w) => w
                        .iter()
                        .map(Number::to_scalar)
                        .collect::<anyhow::Result<Vec<S>>>()?,
                    None => bail!("weighted_l1 norm needs `weights`"),
                };
                NormFamily::WeightedL1(w)
            }
        };
        Ok(NormedLattice::new(dim, MonotoneNorm::new(family)?)?)
    }
}

/// Matrix rows and a starting point given inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitInstance {
    pub matrix: Vec<Vec<Number>>,
    pub x0: Vec<Number>,
    #[serde(default)]
    pub active_len: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub kind: Kind,
    /// `[n, m]` for operators, `[dim_M, dim_N, m]` for converse instances,
    /// `[n]` for modulus runs.
    #[serde(default)]
    pub dims: Vec<usize>,
    pub norm: NormSpec,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub count: usize,
    #[serde(default)]
    pub mode: Mode,
    /// File stem of the reports; defaults to the experiment name or command.
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub policy: Policy,
    /// Active length for the sequence-space solver (random instances embed
    /// the `n` generated columns into `active_len + tail` columns).
    #[serde(default)]
    pub tail: usize,
    #[serde(default)]
    pub instances: Vec<ExplicitInstance>,
    /// Target `‖u‖` values for converse runs, each drawn `count` times.
    #[serde(default)]
    pub u_norms: Vec<f64>,
    /// Random alternative certificates scored per converse row.
    #[serde(default)]
    pub alternatives: usize,
    /// `ε` values for modulus estimates.
    #[serde(default)]
    pub epsilons: Vec<f64>,
    /// Samples per modulus validation.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn one() -> usize {
    1
}

fn default_samples() -> usize {
    10_000
}

impl Experiment {
    pub fn label(&self, index: usize) -> String {
        self.output
            .clone()
            .or_else(|| self.name.clone())
            .unwrap_or_else(|| format!("{}-{index}", self.command.map_or("run", Command::name)))
    }

    pub fn epsilon(&self) -> anyhow::Result<f64> {
        let e = self.epsilon.context("experiment needs `epsilon`")?;
        if !(e > 0.0 && e < 1.0) {
            bail!("epsilon must lie in (0, 1), got {e}");
        }
        Ok(e)
    }

    pub fn dim(&self, k: usize, what: &str) -> anyhow::Result<usize> {
        match self.dims.get(k) {
            Some(&d) if d >= 1 => Ok(d),
            Some(_) => bail!("dimension `{what}` must be at least 1"),
            None => bail!("`dims` is missing `{what}` (position {k})"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Wrapped {
    experiment: Vec<Experiment>,
}

/// Parses an experiment file's text. `hint` is the file extension, if any.
pub fn parse(text: &str, hint: Option<&str>) -> anyhow::Result<Vec<Experiment>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let as_toml = || -> anyhow::Result<Vec<Experiment>> {
        let doc: toml::Table = toml::from_str(text).context("invalid TOML")?;
        if doc.contains_key("experiment") {
            Ok(Wrapped::deserialize(doc)?.experiment)
        } else {
            Ok(vec![Experiment::deserialize(doc)?])
        }
    };
    let as_json = || -> anyhow::Result<Vec<Experiment>> {
        let doc: serde_json::Value = serde_json::from_str(text).context("invalid JSON")?;
        Ok(match doc {
            serde_json::Value::Array(_) => serde_json::from_value(doc)?,
            serde_json::Value::Object(ref o) if o.contains_key("experiment") => {
                serde_json::from_value::<Wrapped>(doc)?.experiment
            }
            _ => vec![serde_json::from_value(doc)?],
        })
    };
    match hint {
        Some("json") => as_json(),
        Some("toml") => as_toml(),
        _ => as_toml().or_else(|e| as_json().map_err(|_| e)),
    }
}

pub fn load(path: &Path) -> anyhow::Result<Vec<Experiment>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text, path.extension().and_then(|e| e.to_str()))
        .with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_and_many() {
        let one = parse(
            "command = \"bpb-linfty\"\ndims = [4, 3]\nepsilon = 0.5\nseed = 7\ncount = 3\nnorm = { family = \"lp\", p = 2.0 }\n",
            Some("toml"),
        )
        .unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].command, Some(Command::BpbLinfty));
        assert_eq!(one[0].norm, NormSpec::lp(2.0));

        let many = parse(
            r#"
[[experiment]]
command = "modulus"
dims = [3]
norm = { family = "l1" }

[[experiment]]
command = "bpb-c0"
kind = "explicit"
mode = "rational"
epsilon = 0.9
norm = { family = "weighted_l1", weights = ["1/2", 2] }
instances = [{ matrix = [["1/2", 0], [0, "1/4"]], x0 = [1, 1], active_len = 2 }]
"#,
            None,
        )
        .unwrap();
        assert_eq!(many.len(), 2);
        assert_eq!(many[1].kind, Kind::Explicit);
        let lat = many[1].norm.lattice::<Rational>(2).unwrap();
        assert_eq!(lat.norm().name(), "weighted_l1");
    }

    #[test]
    fn json_and_empty() {
        assert!(parse("", None).unwrap().is_empty());
        assert!(parse("experiment = []", Some("toml")).unwrap().is_empty());
        let j = parse(r#"[{"command": "converse", "dims": [1, 1, 2], "norm": {"family": "l1"}, "epsilon": 0.5}]"#, Some("json")).unwrap();
        assert_eq!(j[0].command, Some(Command::Converse));
        assert!(parse(r#"{"experiment": []}"#, Some("json"))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn bad_input_is_reported() {
        assert!(parse("dims = [3]\nnorm = { family = \"l7\" }", Some("toml")).is_err());
        assert!(parse(
            "dims = [3]\nnorm = { family = \"l1\" }\nbogus = 1",
            Some("toml")
        )
        .is_err());
        let e = parse("dims = [3]\nnorm = { family = \"lp\" }", None).unwrap();
        assert!(e[0].norm.lattice::<f64>(3).is_err());
        assert!(e[0].norm.lattice::<Rational>(3).is_err());
    }

    #[test]
    fn numbers() {
        assert_eq!(
            Number::Text("3/10".into()).to_scalar::<Rational>().unwrap(),
            lattice_bpb::scalar::ratio(3, 10)
        );
        assert_eq!(
            Number::Text("0.25".into()).to_scalar::<f64>().unwrap(),
            0.25
        );
        assert_eq!(Number::Text("1/4".into()).to_scalar::<f64>().unwrap(), 0.25);
        assert!(Number::Text("x".into()).to_scalar::<f64>().is_err());
    }
}
