//! Experiment configuration: a TOML file with `[problem]`, `[strategy]`,
//! `[experiment]` and `[probe]` tables, overridable key by key.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::probe::ProbeConfig;
use crate::problem::{NoiseKind, ProblemSpec};
use crate::strategy::StrategyConfig;

/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "RESAMPLE_ES_OUT";

/// Sweep used when none is configured.
pub const DEFAULT_Y_SWEEP: [u32; 8] = [1, 2, 4, 8, 12, 16, 20, 24];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_p")]
    pub p: u32,
    #[serde(default = "default_z")]
    pub z: f64,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimum: Option<Vec<f64>>,
}

fn default_d() -> usize {
    15
}
fn default_p() -> u32 {
    2
}
fn default_z() -> f64 {
    2.1
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            d: default_d(),
            p: default_p(),
            z: default_z(),
            noise: NoiseKind::Gaussian,
            optimum: None,
        }
    }
}

impl ProblemSection {
    pub fn to_spec(&self) -> ProblemSpec {
        ProblemSpec {
            d: self.d,
            p: self.p,
            z: self.z,
            noise: self.noise,
            optimum: self.optimum.clone().unwrap_or_else(|| vec![0.0; self.d]),
        }
    }
}

/// A 64-bit seed that survives TOML's signed integers: written as an
/// integer when it fits, as a decimal string otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match i64::try_from(self.0) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => u64::try_from(v)
                .map(Seed)
                .map_err(|_| serde::de::Error::custom("seed must be non-negative")),
            Raw::Str(s) => s
                .trim()
                .parse::<u64>()
                .map(Seed)
                .map_err(|_| serde::de::Error::custom(format!("invalid 64-bit seed `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_seed")]
    pub seed: Seed,
    /// Resampling counts to run; empty means just `strategy.Y`.
    #[serde(rename = "Y_sweep", default, skip_serializing_if = "Vec::is_empty")]
    pub y_sweep: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Fraction of iterations dropped before rate fits.
    #[serde(default = "default_burn_in")]
    pub burn_in: f64,
}

fn default_runs() -> usize {
    50
}
fn default_seed() -> Seed {
    Seed(1)
}
fn default_burn_in() -> f64 {
    crate::analysis::DEFAULT_BURN_IN
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            runs: default_runs(),
            seed: default_seed(),
            y_sweep: Vec::new(),
            output_dir: None,
            burn_in: default_burn_in(),
        }
    }
}

/// `[probe]` table: probe parameters plus an optional trace to replay.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeSection {
    #[serde(flatten)]
    pub config: ProbeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub strategy: StrategyConfig,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSection>,
}

impl Default for ExperimentConfig {
    /// `d = 15`, `p = 2`, `z = 2.1`, `λ = 4`, `μ = 2`, `Y = 12`, budget
    /// 500000, 50 runs.
    fn default() -> Self {
        ExperimentConfig {
            problem: ProblemSection::default(),
            strategy: StrategyConfig::default(),
            experiment: ExperimentSection::default(),
            probe: None,
        }
    }
}

/// Command-line adjustments applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub y_sweep: Option<Vec<u32>>,
    /// `section.key=value` pairs; values are parsed as TOML, falling back to
    /// a plain string.
    pub set: Vec<String>,
}

fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn set_path(table: &mut Table, path: &str, value: Value) -> Result<()> {
    let keys: Vec<&str> = path.split('.').map(str::trim).collect();
    if keys.len() < 2 || keys.iter().any(|k| k.is_empty()) {
        return Err(Error::InvalidConfig(vec![format!(
            "override key `{path}` must look like section.key"
        )]));
    }
    let (last, parents) = keys.split_last().expect("at least two keys");
    let mut cur = table;
    for k in parents {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => {
                return Err(Error::InvalidConfig(vec![format!(
                    "override `{path}`: `{k}` is not a table"
                )]))
            }
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let table: Table = s
            .parse()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(vec![e.to_string()]))?;
        Self::from_table(table)
    }

    fn from_table(table: Table) -> Result<Self> {
        table
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidConfig(vec![e.message().to_string()]))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Reads `path` (or starts from the defaults), applies `overrides`, and
    /// validates.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut table = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| {
                    Error::InvalidConfig(vec![format!("cannot read {}: {e}", p.display())])
                })?
                .parse::<Table>()
                .map_err(|e| Error::InvalidConfig(vec![format!("{}: {e}", p.display())]))?,
            None => Table::new(),
        };
        for item in &overrides.set {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(vec![format!(
                    "override `{item}` must look like section.key=value"
                )])
            })?;
            set_path(&mut table, key, parse_value(value))?;
        }
        if let Some(seed) = overrides.seed {
            set_path(
                &mut table,
                "experiment.seed",
                Value::String(seed.to_string()),
            )?;
        }
        if let Some(out) = &overrides.out {
            set_path(
                &mut table,
                "experiment.output_dir",
                Value::String(out.to_string_lossy().into_owned()),
            )?;
        }
        if let Some(ys) = &overrides.y_sweep {
            set_path(
                &mut table,
                "experiment.Y_sweep",
                Value::Array(ys.iter().map(|&y| Value::Integer(i64::from(y))).collect()),
            )?;
        }
        let cfg = Self::from_table(table)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn problem_spec(&self) -> ProblemSpec {
        self.problem.to_spec()
    }

    /// The resampling counts to run, in the configured order.
    pub fn y_values(&self) -> Vec<u32> {
        if self.experiment.y_sweep.is_empty() {
            vec![self.strategy.y]
        } else {
            self.experiment.y_sweep.clone()
        }
    }

    pub fn strategy_for(&self, y: u32) -> StrategyConfig {
        StrategyConfig {
            y,
            ..self.strategy.clone()
        }
    }

    /// `--out`/`output_dir`, else `$RESAMPLE_ES_OUT`, else `resample-es-out`.
    pub fn output_dir(&self) -> PathBuf {
        self.experiment
            .output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("resample-es-out"))
    }

    pub fn violations(&self) -> Vec<String> {
        let spec = self.problem_spec();
        let mut v = spec.violations();
        for y in self.y_values() {
            for m in self.strategy_for(y).violations(self.problem.d) {
                let m = if self.experiment.y_sweep.is_empty() {
                    m
                } else {
                    format!("{m} (Y = {y})")
                };
                if !v.contains(&m) {
                    v.push(m);
                }
            }
        }
        if self.experiment.runs == 0 {
            v.push("experiment.runs must be at least 1".to_string());
        }
        if self.experiment.y_sweep.contains(&0) {
            v.push("experiment.Y_sweep entries must be at least 1".to_string());
        }
        if !(0.0..1.0).contains(&self.experiment.burn_in) {
            v.push("experiment.burn_in must be in [0, 1)".to_string());
        }
        if let Some(p) = &self.probe {
            v.extend(p.config.violations());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probe::StateSource;
    use crate::strategy::Init;

    #[test]
    fn defaults_are_the_reference_experiment() {
        let c = ExperimentConfig::load(None, &Overrides::default()).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.problem_spec(), ProblemSpec::reference_sphere());
        assert_eq!((c.strategy.mu, c.strategy.lambda, c.strategy.y), (2, 4, 12));
        assert_eq!(c.strategy.budget, 500_000);
        assert_eq!(c.experiment.runs, 50);
        assert_eq!(c.y_values(), vec![12]);
    }

    #[test]
    fn parse_full_file() {
        let src = r#"
[problem]
d = 3
p = 1
z = 0.0
noise = "uniform:0.5"
optimum = [1.0, 2.0, 3.0]

[strategy]
mu = 1
lambda = 3
Y = 2
budget = 600
sigma0 = 0.5
tau = 0.2
init = [0.0, 0.0, 0.0]

[experiment]
runs = 4
seed = 18446744073709551615
Y_sweep = [1, 3]
output_dir = "somewhere"

[probe]
trials = 1000
iterations = [1, 2]
gamma = 0.05
state_source = { kind = "synthetic", alpha = 0.1, c = 2.0, v = 0.5 }
"#;
        // TOML cannot hold u64::MAX as an integer
        assert!(ExperimentConfig::from_toml_str(src).is_err());
        let src = src.replace("18446744073709551615", "\"18446744073709551615\"");
        let c = ExperimentConfig::from_toml_str(&src).unwrap();
        assert_eq!(c.experiment.seed, Seed(u64::MAX));
        assert_eq!(c.problem.noise, NoiseKind::Uniform { half_width: 0.5 });
        assert_eq!(c.strategy.init, Init::Explicit(vec![0.0; 3]));
        assert_eq!(c.y_values(), vec![1, 3]);
        let probe = c.probe.as_ref().unwrap();
        assert_eq!(
            probe.config.state_source,
            StateSource::Synthetic {
                alpha: 0.1,
                c: 2.0,
                v: 0.5
            }
        );
        assert_eq!(probe.config.gamma, Some(0.05));
        c.validate().unwrap();
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::default();
        c.experiment.seed = Seed(u64::MAX - 3);
        c.experiment.y_sweep = DEFAULT_Y_SWEEP.to_vec();
        c.strategy.tau = Some(0.125);
        c.problem.optimum = Some(vec![0.5; 15]);
        c.probe = Some(ProbeSection {
            config: ProbeConfig::default(),
            trace: Some(PathBuf::from("t.csv")),
        });
        let text = c.to_toml_string();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn overrides_apply() {
        let o = Overrides {
            seed: Some(99),
            out: Some(PathBuf::from("/tmp/x")),
            y_sweep: Some(vec![1, 12]),
            set: vec![
                "strategy.budget=4800".into(),
                "problem.noise=zero".into(),
                "problem.z = 3".into(),
                "strategy.init=\"unit-vector\"".into(),
            ],
        };
        let c = ExperimentConfig::load(None, &o).unwrap();
        assert_eq!(c.experiment.seed, Seed(99));
        assert_eq!(c.output_dir(), PathBuf::from("/tmp/x"));
        assert_eq!(c.y_values(), vec![1, 12]);
        assert_eq!(c.strategy.budget, 4800);
        assert_eq!(c.problem.noise, NoiseKind::Zero);
        assert_eq!(c.problem.z, 3.0);
    }

    #[test]
    fn violations_are_listed() {
        let o = Overrides {
            set: vec![
                "strategy.mu=5".into(),
                "experiment.runs=0".into(),
                "problem.z=-1".into(),
            ],
            y_sweep: Some(vec![0, 4]),
            ..Overrides::default()
        };
        match ExperimentConfig::load(None, &o) {
            Err(Error::InvalidConfig(v)) => {
                let all = v.join("\n");
                assert!(all.contains("strategy.lambda"), "{all}");
                assert!(all.contains("experiment.runs"), "{all}");
                assert!(all.contains("problem.z"), "{all}");
                assert!(all.contains("Y_sweep"), "{all}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_override_syntax() {
        for bad in ["nodot=1", "strategy.mu", ".x=1"] {
            let o = Overrides {
                set: vec![bad.into()],
                ..Overrides::default()
            };
            assert!(
                matches!(
                    ExperimentConfig::load(None, &o),
                    Err(Error::InvalidConfig(_))
                ),
                "{bad}"
            );
        }
        let o = Overrides {
            set: vec!["strategy.unknown=1".into()],
            ..Overrides::default()
        };
        assert!(ExperimentConfig::load(None, &o).is_err());
    }
}
