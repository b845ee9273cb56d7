use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use geomc::sampler::Method;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "GEOMC_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    OrderStudy,
    Properties,
    JacobianCheck,
    HarmonicEsjd,
    Sample,
    Robustness,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::OrderStudy,
        Experiment::Properties,
        Experiment::JacobianCheck,
        Experiment::HarmonicEsjd,
        Experiment::Sample,
        Experiment::Robustness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::OrderStudy => "order-study",
            Experiment::Properties => "properties",
            Experiment::JacobianCheck => "jacobian-check",
            Experiment::HarmonicEsjd => "harmonic-esjd",
            Experiment::Sample => "sample",
            Experiment::Robustness => "robustness",
        }
    }

    fn default_model(self) -> ModelName {
        match self {
            Experiment::OrderStudy => ModelName::Geodesic,
            Experiment::HarmonicEsjd => ModelName::Harmonic,
            _ => ModelName::Banana,
        }
    }

    fn models(self) -> &'static [ModelName] {
        use ModelName::*;
        match self {
            Experiment::OrderStudy => &[Geodesic],
            Experiment::HarmonicEsjd => &[Harmonic],
            Experiment::Robustness => &[Banana, StudentT, Harmonic],
            _ => &[Banana, StudentT, LogisticBreast, LogisticThyroid, Logistic, Harmonic],
        }
    }

    /// Whether method names select integrators rather than chains, which
    /// also admits the deliberately wrong fixture steppers.
    fn accepts_fixtures(self) -> bool {
        matches!(self, Experiment::OrderStudy | Experiment::Properties)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            ConfigError::invalid(
                "experiment",
                format!("unknown experiment `{s}`, expected one of {}", names(Self::ALL.map(Self::name))),
            )
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Banana,
    StudentT,
    LogisticBreast,
    LogisticThyroid,
    Logistic,
    Harmonic,
    Geodesic,
}

impl ModelName {
    const ALL: [ModelName; 7] = [
        ModelName::Banana,
        ModelName::StudentT,
        ModelName::LogisticBreast,
        ModelName::LogisticThyroid,
        ModelName::Logistic,
        ModelName::Harmonic,
        ModelName::Geodesic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelName::Banana => "banana",
            ModelName::StudentT => "student-t",
            ModelName::LogisticBreast => "logistic-breast",
            ModelName::LogisticThyroid => "logistic-thyroid",
            ModelName::Logistic => "logistic",
            ModelName::Harmonic => "harmonic",
            ModelName::Geodesic => "geodesic",
        }
    }

    fn default_methods(self) -> Vec<Method> {
        match self {
            ModelName::Harmonic => vec![Method::Hmc, Method::Lmc, Method::Ilmc],
            ModelName::Banana => Method::ALL.to_vec(),
            _ => vec![Method::Rmhmc, Method::Lmc, Method::Ilmc],
        }
    }

    /// Step size and step count used in the published experiments, where
    /// there are any.
    fn default_integrator(self, method: Method) -> (f64, usize) {
        match (self, method) {
            (ModelName::Banana, Method::Hmc) => (0.1, 10),
            (ModelName::Banana, Method::Rmhmc) => (0.04, 20),
            (ModelName::Banana, _) => (0.1, 20),
            (ModelName::StudentT, Method::Hmc) => (0.1, 20),
            (ModelName::StudentT, _) => (0.7, 20),
            (ModelName::LogisticBreast | ModelName::LogisticThyroid | ModelName::Logistic, _) => (0.5, 10),
            (ModelName::Harmonic | ModelName::Geodesic, _) => (0.1, 10),
        }
    }

    fn parameters(self) -> &'static [&'static str] {
        match self {
            ModelName::StudentT => &["dim", "dof", "last_scale"],
            ModelName::LogisticBreast | ModelName::LogisticThyroid => &["data_seed", "alpha"],
            ModelName::Logistic => &["data", "alpha"],
            ModelName::Harmonic => &["dim", "omega"],
            ModelName::Banana | ModelName::Geodesic => &[],
        }
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelName {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            ConfigError::invalid(
                "model.name",
                format!("unknown model `{s}`, expected one of {}", names(Self::ALL.map(Self::name))),
            )
        })
    }
}

/// What a method entry runs: a chain method or a test-only stepper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodName {
    Chain(Method),
    BrokenLeapfrog,
    Euler,
}

impl MethodName {
    pub fn name(self) -> &'static str {
        match self {
            MethodName::Chain(m) => m.name(),
            MethodName::BrokenLeapfrog => "broken-leapfrog",
            MethodName::Euler => "euler",
        }
    }

    pub fn chain(self) -> Option<Method> {
        match self {
            MethodName::Chain(m) => Some(m),
            _ => None,
        }
    }
}

impl fmt::Display for MethodName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "broken-leapfrog" => Ok(MethodName::BrokenLeapfrog),
            "euler" => Ok(MethodName::Euler),
            _ => s.parse::<Method>().map(MethodName::Chain).map_err(|_| {
                format!(
                    "unknown method `{s}`, expected one of {}",
                    names(Method::ALL.map(Method::name))
                )
            }),
        }
    }
}

impl Serialize for MethodName {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for MethodName {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn names<const N: usize>(list: [&str; N]) -> String {
    list.iter().map(|n| format!("`{n}`")).collect::<Vec<_>>().join(", ")
}

// Raw file layout. Everything is optional; `resolve` fills in defaults.

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub trials: Option<u64>,
    pub samples: Option<usize>,
    pub delta: Option<f64>,
    #[serde(default)]
    pub model: RawModel,
    #[serde(default)]
    pub integrator: RawIntegrator,
    pub methods: Option<Vec<RawMethod>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    pub name: Option<String>,
    pub dim: Option<usize>,
    pub dof: Option<f64>,
    pub last_scale: Option<f64>,
    pub omega: Option<f64>,
    pub data: Option<PathBuf>,
    pub data_seed: Option<u64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawIntegrator {
    pub step_size: Option<f64>,
    pub num_steps: Option<usize>,
    pub fixed_point_tol: Option<f64>,
    pub fixed_point_max_iters: Option<usize>,
}

/// A method given by name alone or as a table with its own settings.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RawMethod {
    Name(String),
    Table {
        name: String,
        step_size: Option<f64>,
        num_steps: Option<usize>,
    },
}

/// Command-line values. Each one that is set beats the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub model: Option<String>,
    pub methods: Vec<String>,
    pub step_size: Option<f64>,
    pub num_steps: Option<usize>,
    pub samples: Option<usize>,
    pub trials: Option<u64>,
}

// Normalized form.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: ModelName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dof: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub fixed_point_tol: f64,
    pub fixed_point_max_iters: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub name: MethodName,
    pub step_size: f64,
    pub num_steps: usize,
}

/// Fully resolved experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub threads: usize,
    pub out: PathBuf,
    pub trials: u64,
    pub samples: usize,
    pub delta: f64,
    pub model: ModelConfig,
    pub integrator: IntegratorSettings,
    pub methods: Vec<MethodConfig>,
}

impl ExperimentConfig {
    /// Renders the normalized form as a config file that parses back to
    /// `self`.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }
}

pub fn read_file(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<RawConfig, ConfigError> {
    Ok(toml::from_str(text)?)
}

fn positive(field: &str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(ConfigError::invalid(field, format!("must be a positive number, got {value}")))
    }
}

fn nonzero<T: PartialEq + Default + fmt::Display>(field: &str, value: T) -> Result<T, ConfigError> {
    if value == T::default() {
        Err(ConfigError::invalid(field, "must be at least 1"))
    } else {
        Ok(value)
    }
}

/// Seed from the flag, then the file, then `GEOMC_SEED`, then the default.
fn resolve_seed(flag: Option<u64>, file: Option<u64>, env: Option<String>) -> Result<u64, ConfigError> {
    if let Some(seed) = flag.or(file) {
        return Ok(seed);
    }
    match env {
        Some(text) => text
            .trim()
            .parse()
            .map_err(|_| ConfigError::invalid(SEED_ENV, format!("not an unsigned integer: `{text}`"))),
        None => Ok(DEFAULT_SEED),
    }
}

pub fn resolve(raw: RawConfig, flags: Overrides, env_seed: Option<String>) -> Result<ExperimentConfig, ConfigError> {
    let experiment: Experiment = flags
        .experiment
        .or(raw.experiment)
        .ok_or_else(|| ConfigError::invalid("experiment", "missing"))?
        .parse()?;
    let seed = resolve_seed(flags.seed, raw.seed, env_seed)?;
    let threads = match flags.threads.or(raw.threads) {
        Some(n) => nonzero("threads", n)?,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let out = flags.out.or(raw.out).unwrap_or_else(|| PathBuf::from("results"));
    let trials = nonzero("trials", flags.trials.or(raw.trials).unwrap_or(match experiment {
        Experiment::Sample | Experiment::Robustness => 10,
        _ => 1,
    }))?;
    let samples = nonzero(
        "samples",
        flags.samples.or(raw.samples).unwrap_or(match experiment {
            Experiment::OrderStudy => 1,
            Experiment::Properties | Experiment::JacobianCheck => 100,
            Experiment::HarmonicEsjd => 100_000,
            Experiment::Sample => 10_000,
            Experiment::Robustness => 100_000,
        }),
    )?;
    let delta = raw.delta.unwrap_or(match experiment {
        Experiment::Robustness => 0.3,
        _ => 0.0,
    });
    if !delta.is_finite() || delta <= -1.0 {
        return Err(ConfigError::invalid("delta", "must be finite and greater than -1"));
    }
    if delta != 0.0 && !matches!(experiment, Experiment::Robustness | Experiment::JacobianCheck) {
        return Err(ConfigError::invalid("delta", format!("not used by {experiment}")));
    }

    let model = resolve_model(experiment, raw.model, flags.model)?;

    // Order studies and finite-difference Jacobians need the fixed point
    // solved close to round-off, everything else uses the sampling tolerance.
    // Some banana states never reach 1e-14 in the generalized leapfrog.
    let tight = matches!(experiment, Experiment::OrderStudy | Experiment::JacobianCheck);
    let default_tol = match experiment {
        Experiment::OrderStudy => 1e-14,
        Experiment::JacobianCheck => 1e-12,
        _ => 1e-6,
    };
    let integrator = IntegratorSettings {
        fixed_point_tol: positive(
            "integrator.fixed_point_tol",
            raw.integrator.fixed_point_tol.unwrap_or(default_tol),
        )?,
        fixed_point_max_iters: nonzero(
            "integrator.fixed_point_max_iters",
            raw.integrator
                .fixed_point_max_iters
                .unwrap_or(if tight { 1000 } else { 100 }),
        )?,
    };

    let entries: Vec<(String, Option<f64>, Option<usize>)> = if !flags.methods.is_empty() {
        flags.methods.into_iter().map(|n| (n, None, None)).collect()
    } else if let Some(list) = raw.methods {
        list.into_iter()
            .map(|m| match m {
                RawMethod::Name(n) => (n, None, None),
                RawMethod::Table {
                    name,
                    step_size,
                    num_steps,
                } => (name, step_size, num_steps),
            })
            .collect()
    } else {
        default_methods(experiment, model.name)
            .into_iter()
            .map(|m| (m.name().to_string(), None, None))
            .collect()
    };
    if entries.is_empty() {
        return Err(ConfigError::invalid("methods", "need at least one method"));
    }

    let mut methods: Vec<MethodConfig> = Vec::with_capacity(entries.len());
    for (i, (name, step_size, num_steps)) in entries.into_iter().enumerate() {
        let field = format!("methods[{i}]");
        let name: MethodName = name.parse().map_err(|reason| ConfigError::invalid(&field, reason))?;
        if name.chain().is_none() && !experiment.accepts_fixtures() {
            return Err(ConfigError::invalid(&field, format!("`{name}` is only available to order-study and properties")));
        }
        if methods.iter().any(|m| m.name == name) {
            return Err(ConfigError::invalid(&field, format!("`{name}` listed twice")));
        }
        let (default_eps, default_k) = default_integrator(experiment, model.name, name);
        let step_size = flags
            .step_size
            .or(step_size)
            .or(raw.integrator.step_size)
            .unwrap_or(default_eps);
        let num_steps = flags
            .num_steps
            .or(num_steps)
            .or(raw.integrator.num_steps)
            .unwrap_or(default_k);
        methods.push(MethodConfig {
            name,
            step_size: positive(&format!("{field}.step_size"), step_size)?,
            num_steps: nonzero(&format!("{field}.num_steps"), num_steps)?,
        });
    }

    Ok(ExperimentConfig {
        experiment,
        seed,
        threads,
        out,
        trials,
        samples,
        delta,
        model,
        integrator,
        methods,
    })
}

fn default_methods(experiment: Experiment, model: ModelName) -> Vec<MethodName> {
    match experiment {
        Experiment::OrderStudy | Experiment::JacobianCheck => {
            vec![Method::Lmc, Method::Ilmc, Method::Rmhmc].into_iter().map(MethodName::Chain).collect()
        }
        Experiment::Properties => vec![MethodName::Chain(Method::Lmc), MethodName::Chain(Method::Ilmc)],
        Experiment::HarmonicEsjd => vec![MethodName::Chain(Method::Hmc)],
        Experiment::Robustness => {
            vec![Method::Rmhmc, Method::Lmc, Method::Ilmc].into_iter().map(MethodName::Chain).collect()
        }
        Experiment::Sample => model.default_methods().into_iter().map(MethodName::Chain).collect(),
    }
}

fn default_integrator(experiment: Experiment, model: ModelName, method: MethodName) -> (f64, usize) {
    match (experiment, method) {
        // Small enough that the energy error is in its asymptotic regime.
        (Experiment::Properties, _) => (0.01, 100),
        (Experiment::JacobianCheck, MethodName::Chain(Method::Rmhmc)) => (0.04, 1),
        (Experiment::JacobianCheck, _) => (0.1, 1),
        // The step size is unused here; the step count bounds k on the grid.
        (Experiment::HarmonicEsjd, _) => (0.1, 100),
        (_, MethodName::Chain(m)) => model.default_integrator(m),
        (_, _) => (0.1, 10),
    }
}

fn resolve_model(experiment: Experiment, raw: RawModel, flag: Option<String>) -> Result<ModelConfig, ConfigError> {
    let name = match flag.or(raw.name) {
        Some(n) => n.parse()?,
        None => experiment.default_model(),
    };
    if !experiment.models().contains(&name) {
        return Err(ConfigError::invalid(
            "model.name",
            format!("{experiment} does not support model `{name}`"),
        ));
    }
    let allowed = name.parameters();
    let given: [(&str, bool); 7] = [
        ("dim", raw.dim.is_some()),
        ("dof", raw.dof.is_some()),
        ("last_scale", raw.last_scale.is_some()),
        ("omega", raw.omega.is_some()),
        ("data", raw.data.is_some()),
        ("data_seed", raw.data_seed.is_some()),
        ("alpha", raw.alpha.is_some()),
    ];
    for (param, set) in given {
        if set && !allowed.contains(&param) {
            return Err(ConfigError::invalid(
                format!("model.{param}"),
                format!("not a parameter of `{name}`"),
            ));
        }
    }
    let mut model = ModelConfig {
        name,
        dim: None,
        dof: None,
        last_scale: None,
        omega: None,
        data: None,
        data_seed: None,
        alpha: None,
    };
    match name {
        ModelName::StudentT => {
            model.dim = Some(raw.dim.unwrap_or(20));
            model.dof = Some(positive("model.dof", raw.dof.unwrap_or(5e3))?);
            model.last_scale = Some(positive("model.last_scale", raw.last_scale.unwrap_or(1e2))?);
            if model.dim == Some(0) {
                return Err(ConfigError::invalid("model.dim", "must be at least 1"));
            }
        }
        ModelName::LogisticBreast | ModelName::LogisticThyroid => {
            model.data_seed = Some(raw.data_seed.unwrap_or(0));
            model.alpha = Some(positive("model.alpha", raw.alpha.unwrap_or(geomc::models::DEFAULT_PRIOR_PRECISION))?);
        }
        ModelName::Logistic => {
            model.data = Some(
                raw.data
                    .ok_or_else(|| ConfigError::invalid("model.data", "the `logistic` model needs a CSV path"))?,
            );
            model.alpha = Some(positive("model.alpha", raw.alpha.unwrap_or(geomc::models::DEFAULT_PRIOR_PRECISION))?);
        }
        ModelName::Harmonic => {
            model.dim = Some(raw.dim.unwrap_or(1));
            model.omega = Some(positive("model.omega", raw.omega.unwrap_or(1.0))?);
            if model.dim == Some(0) {
                return Err(ConfigError::invalid("model.dim", "must be at least 1"));
            }
        }
        ModelName::Banana | ModelName::Geodesic => {}
    }
    Ok(model)
}

/// Turns a normalized config back into file form, so that it can be
/// resolved again.
#[cfg(test)]
fn to_raw(cfg: &ExperimentConfig) -> Result<RawConfig, ConfigError> {
    parse_str(&cfg.to_toml())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(experiment: &str) -> Overrides {
        Overrides {
            experiment: Some(experiment.into()),
            ..Default::default()
        }
    }

    #[test]
    fn empty_file_gets_defaults() {
        let cfg = resolve(parse_str("").unwrap(), flags("order-study"), None).unwrap();
        assert_eq!(cfg.experiment, Experiment::OrderStudy);
        assert_eq!(cfg.model.name, ModelName::Geodesic);
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.methods.len(), 3);
    }

    #[test]
    fn banana_defaults_follow_the_published_settings() {
        let cfg = resolve(parse_str("").unwrap(), flags("sample"), None).unwrap();
        let lmc = cfg.methods.iter().find(|m| m.name == MethodName::Chain(Method::Lmc)).unwrap();
        assert_eq!((lmc.step_size, lmc.num_steps), (0.1, 20));
        let hmc = cfg.methods.iter().find(|m| m.name == MethodName::Chain(Method::Hmc)).unwrap();
        assert_eq!((hmc.step_size, hmc.num_steps), (0.1, 10));
    }

    #[test]
    fn flags_beat_the_file() {
        let raw = parse_str("experiment = \"sample\"\n[integrator]\nstep_size = 0.1\n").unwrap();
        let over = Overrides {
            step_size: Some(0.04),
            ..Default::default()
        };
        let cfg = resolve(raw, over, None).unwrap();
        assert!(cfg.methods.iter().all(|m| m.step_size == 0.04));
    }

    #[test]
    fn unknown_method_names_the_field() {
        let raw = parse_str("experiment = \"sample\"\nmethods = [\"lmc\", \"nuts\"]\n").unwrap();
        match resolve(raw, Overrides::default(), None) {
            Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "methods[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some(2), Some("3".into())).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some(2), Some("3".into())).unwrap(), 2);
        assert_eq!(resolve_seed(None, None, Some("3".into())).unwrap(), 3);
        assert_eq!(resolve_seed(None, None, None).unwrap(), DEFAULT_SEED);
        assert!(resolve_seed(None, None, Some("x".into())).is_err());
    }

    #[test]
    fn normalized_form_round_trips() {
        let text = "experiment = \"robustness\"\nseed = 9\nthreads = 2\n[model]\nname = \"student-t\"\ndim = 5\n";
        let cfg = resolve(parse_str(text).unwrap(), Overrides::default(), None).unwrap();
        let again = resolve(to_raw(&cfg).unwrap(), Overrides::default(), None).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn misplaced_parameters_are_rejected() {
        let raw = parse_str("experiment = \"sample\"\n[model]\nname = \"banana\"\ndof = 3.0\n").unwrap();
        match resolve(raw, Overrides::default(), None) {
            Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "model.dof"),
            other => panic!("{other:?}"),
        }
        assert!(parse_str("bogus = 1\n").is_err());
    }

    #[test]
    fn fixtures_only_where_steppers_are_compared() {
        let over = Overrides {
            experiment: Some("sample".into()),
            methods: vec!["broken-leapfrog".into()],
            ..Default::default()
        };
        assert!(resolve(RawConfig::default(), over, None).is_err());
        let over = Overrides {
            experiment: Some("properties".into()),
            methods: vec!["broken-leapfrog".into()],
            ..Default::default()
        };
        assert!(resolve(RawConfig::default(), over, None).is_ok());
    }
}
