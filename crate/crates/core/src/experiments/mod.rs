//! Named, configured, reproducible experiments with CSV and SVG output.

mod rng;
mod runners;
mod table;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{MlabError, Result};
use crate::poly::IntPolynomial;
use crate::symbols::ReducedRational;

pub use rng::{derive_rng, derive_seed};
pub use table::{emit_csv, emit_svg, format_number, parse_csv, to_csv, to_svg, Cell, PlotSpec, Provenance, ResultTable};

/// A parameter value: number, string or bool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Bool(bool),
    Num(f64),
    Text(String),
}

impl ParamValue {
    /// `true`/`false` become bools, anything that parses as a number a number,
    /// the rest text.
    pub fn parse(s: &str) -> Self {
        match s {
            "true" => ParamValue::Bool(true),
            "false" => ParamValue::Bool(false),
            _ => s.parse::<f64>().map(ParamValue::Num).unwrap_or_else(|_| ParamValue::Text(s.to_string())),
        }
    }

    fn render(&self) -> String {
        match self {
            ParamValue::Bool(b) => b.to_string(),
            ParamValue::Num(v) => format_number(*v),
            ParamValue::Text(s) => s.clone(),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.into(), parameters: BTreeMap::new(), seed: 0, output_dir: default_output_dir() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| MlabError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| MlabError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies a `key=value` override to the parameters.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| MlabError::Config(format!("--set expects key=value, got `{assignment}`")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(MlabError::Config("--set with an empty key".into()));
        }
        self.parameters.insert(k.to_string(), ParamValue::parse(v.trim()));
        Ok(())
    }
}

/// One accepted key of an experiment.
#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

/// Inputs passed to a runner.
pub struct Context<'a> {
    pub name: &'a str,
    pub seed: u64,
    pub params: Params,
}

type Runner = fn(&Context) -> Result<(ResultTable, PlotSpec)>;

pub struct ExperimentSpec {
    pub name: &'static str,
    pub description: &'static str,
    pub keys: &'static [KeySpec],
    run: Runner,
}

pub fn registry() -> &'static [ExperimentSpec] {
    runners::REGISTRY
}

pub fn find(name: &str) -> Result<&'static ExperimentSpec> {
    registry().iter().find(|s| s.name == name).ok_or_else(|| {
        let names: Vec<&str> = registry().iter().map(|s| s.name).collect();
        MlabError::Config(format!("unknown experiment `{name}` (known: {})", names.join(", ")))
    })
}

/// Resolved parameters, defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Params(BTreeMap<String, ParamValue>);

fn bad(key: &str, msg: impl std::fmt::Display) -> MlabError {
    MlabError::Config(format!("parameter `{key}`: {msg}"))
}

impl Params {
    fn get(&self, key: &str) -> Result<&ParamValue> {
        self.0.get(key).ok_or_else(|| bad(key, "missing"))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        match self.get(key)? {
            ParamValue::Num(v) if v.is_finite() => Ok(*v),
            other => Err(bad(key, format!("expected a finite number, got `{}`", other.render()))),
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let v = self.f64(key)?;
        if v < 0.0 || v.fract() != 0.0 || v > 9.007_199_254_740_992e15 {
            return Err(bad(key, format!("expected a nonnegative integer, got {v}")));
        }
        Ok(v as u64)
    }

    pub fn u32(&self, key: &str) -> Result<u32> {
        u32::try_from(self.u64(key)?).map_err(|_| bad(key, "too large"))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.get(key)? {
            ParamValue::Bool(b) => Ok(*b),
            other => Err(bad(key, format!("expected true or false, got `{}`", other.render()))),
        }
    }

    pub fn text(&self, key: &str) -> Result<String> {
        Ok(self.get(key)?.render())
    }

    /// Comma-separated numbers (a single number is a one-element list).
    pub fn list_f64(&self, key: &str) -> Result<Vec<f64>> {
        let s = self.text(key)?;
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad(key, format!("`{t}` is not a number"))))
            .collect::<Result<_>>()?;
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(bad(key, "expected a nonempty list of finite numbers"));
        }
        Ok(v)
    }

    pub fn list_u64(&self, key: &str) -> Result<Vec<u64>> {
        self.list_f64(key)?
            .into_iter()
            .map(|v| {
                if v < 0.0 || v.fract() != 0.0 {
                    Err(bad(key, format!("{v} is not a nonnegative integer")))
                } else {
                    Ok(v as u64)
                }
            })
            .collect()
    }

    /// Integer polynomial from comma-separated coefficients `c_0,c_1,…`.
    pub fn poly(&self, key: &str) -> Result<IntPolynomial> {
        let c: Vec<i64> = self
            .list_f64(key)?
            .into_iter()
            .map(|v| if v.fract() == 0.0 { Ok(v as i64) } else { Err(bad(key, "coefficients must be integers")) })
            .collect::<Result<_>>()?;
        IntPolynomial::new(c).map_err(|e| bad(key, e))
    }

    /// Comma-separated rationals `a/q`.
    pub fn list_rational(&self, key: &str) -> Result<Vec<ReducedRational>> {
        self.text(key)?
            .split(',')
            .map(|t| {
                let t = t.trim();
                let (a, q) = t.split_once('/').unwrap_or((t, "1"));
                let a: i64 = a.trim().parse().map_err(|_| bad(key, format!("bad numerator in `{t}`")))?;
                let q: u64 = q.trim().parse().map_err(|_| bad(key, format!("bad denominator in `{t}`")))?;
                ReducedRational::new(a, q).map_err(|e| bad(key, e))
            })
            .collect()
    }
}

fn resolve(spec: &ExperimentSpec, given: &BTreeMap<String, ParamValue>) -> Result<Params> {
    for k in given.keys() {
        if !spec.keys.iter().any(|s| s.name == k) {
            let known: Vec<&str> = spec.keys.iter().map(|s| s.name).collect();
            return Err(MlabError::Config(format!(
                "unknown parameter `{k}` for {} (accepted: {})",
                spec.name,
                known.join(", ")
            )));
        }
    }
    let mut map = BTreeMap::new();
    for s in spec.keys {
        let v = given.get(s.name).cloned().unwrap_or_else(|| ParamValue::parse(s.default));
        map.insert(s.name.to_string(), v);
    }
    Ok(Params(map))
}

/// sha256 over the canonical JSON of `(experiment, resolved parameters, seed)`.
/// The output directory is left out so relocating a run keeps its hash.
fn config_hash(name: &str, params: &Params, seed: u64) -> String {
    #[derive(Serialize)]
    struct Canonical<'a> {
        experiment: &'a str,
        parameters: &'a BTreeMap<String, ParamValue>,
        seed: u64,
    }
    let json = serde_json::to_string(&Canonical { experiment: name, parameters: &params.0, seed }).unwrap_or_default();
    Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output of one experiment run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: ResultTable,
    pub plot: PlotSpec,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    let spec = find(&config.experiment)?;
    let params = resolve(spec, &config.parameters)?;
    let hash = config_hash(spec.name, &params, config.seed);
    let ctx = Context { name: spec.name, seed: config.seed, params };
    let (mut table, plot) = (spec.run)(&ctx)?;
    table.provenance = Provenance {
        experiment: spec.name.to_string(),
        config_hash: hash,
        seed: config.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok(RunOutput { table, plot })
}

/// Writes `<name>.csv` and `<name>.svg` into `dir`, returning both paths.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| MlabError::Io(format!("{}: {e}", dir.display())))?;
    let name = &out.table.provenance.experiment;
    let csv = dir.join(format!("{name}.csv"));
    let svg = dir.join(format!("{name}.svg"));
    emit_csv(&out.table, &csv)?;
    emit_svg(&out.table, &out.plot, &svg)?;
    Ok((csv, svg))
}
