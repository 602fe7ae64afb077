//! Flat `key = value` configuration with `[section]` headers.
//!
//! Lines are `[section]`, `key = value`, blank, or comments starting with `#`.
//! Lists are comma separated. Every key is optional; missing keys keep the
//! library defaults. The recognised keys are listed in [`KEYS`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use cgmem::dynamics::{Generator, HistoryMode, HistoryProfileKind, RunConfig, SolverKind};
use cgmem::experiments::ExperimentOptions;
use serde::Serialize;

/// Every accepted `section.key`.
pub const KEYS: &[&str] = &[
    "grid.nx",
    "grid.ny",
    "grid.lx",
    "grid.ly",
    "kernel.bulk.weights",
    "kernel.bulk.rates",
    "kernel.boundary.weights",
    "kernel.boundary.rates",
    "physics.alpha",
    "physics.beta",
    "physics.nu",
    "physics.omega",
    "physics.r",
    "nonlinearity.f",
    "nonlinearity.g",
    "integration.dt",
    "integration.t_end",
    "integration.report_stride",
    "integration.snapshot_stride",
    "integration.history",
    "integration.s_max_tol",
    "integration.solver",
    "initial.generator",
    "initial.seed",
    "initial.amplitude",
    "initial.history",
    "initial.saturation",
    "output.dir",
    "output.formats",
    "experiment.perturbations",
    "experiment.lipschitz_horizon",
    "experiment.pairs",
    "experiment.m0_window",
    "experiment.lambdas",
    "experiment.dirac_horizon",
    "experiment.oracle_steps",
    "experiment.diagnostic_horizon",
    "experiment.tail_nodes",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json] }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CliConfig {
    pub run: RunConfig<f64>,
    pub experiment: ExperimentOptions,
    pub output: OutputConfig,
}

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "index")]
pub enum Origin {
    Line(usize),
    Override(usize),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(n) => write!(f, "override #{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigError {
    /// `section.key`, when the error concerns one.
    pub key: Option<String>,
    pub origin: Option<Origin>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.origin, &self.key) {
            (Some(o), Some(k)) => write!(f, "{o}: {k}: {}", self.message),
            (Some(o), None) => write!(f, "{o}: {}", self.message),
            (None, Some(k)) => write!(f, "{k}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

/// All problems found in one configuration.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    origin: Origin,
}

fn error(key: Option<&str>, origin: Option<Origin>, message: impl Into<String>) -> ConfigError {
    ConfigError { key: key.map(str::to_string), origin, message: message.into() }
}

fn lex(text: &str, errors: &mut Vec<ConfigError>) -> Vec<Entry> {
    let mut section: Option<String> = None;
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let origin = Some(Origin::Line(n));
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            match rest.strip_suffix(']').map(str::trim) {
                Some(name) if !name.is_empty() => section = Some(name.to_string()),
                _ => errors.push(error(None, origin, format!("malformed section header `{line}`"))),
            }
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(error(None, origin, format!("expected `key = value`, found `{line}`")));
            continue;
        };
        let Some(sec) = &section else {
            errors.push(error(Some(k.trim()), origin, "key outside of any section"));
            continue;
        };
        let key = format!("{sec}.{}", k.trim());
        if !KEYS.contains(&key.as_str()) {
            errors.push(error(Some(&key), origin, "unknown key"));
            continue;
        }
        if let Some(&first) = seen.get(&key) {
            errors.push(error(Some(&key), origin, format!("duplicate key, first set on line {first} and again on line {n}")));
            continue;
        }
        seen.insert(key.clone(), n);
        entries.push(Entry { key, value: v.trim().to_string(), origin: Origin::Line(n) });
    }
    entries
}

fn overrides(items: &[String], errors: &mut Vec<ConfigError>) -> Vec<Entry> {
    let mut out = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let origin = Origin::Override(i + 1);
        match item.split_once('=') {
            Some((k, v)) if KEYS.contains(&k.trim()) => {
                out.push(Entry { key: k.trim().to_string(), value: v.trim().to_string(), origin })
            }
            Some((k, _)) => errors.push(error(Some(k.trim()), Some(origin), "unknown key")),
            None => errors.push(error(None, Some(origin), format!("expected `key=value`, found `{item}`"))),
        }
    }
    out
}

fn number<T: std::str::FromStr>(v: &str, what: &str) -> Result<T, String> {
    v.parse::<T>().map_err(|_| format!("expected {what}, found `{v}`"))
}

fn real(v: &str) -> Result<f64, String> {
    number::<f64>(v, "a number")
}

fn list(v: &str) -> Result<Vec<f64>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|x| real(x.trim())).collect()
}

fn tag<T: Copy>(v: &str, options: &[(&str, T)]) -> Result<T, String> {
    options.iter().find(|(name, _)| *name == v).map(|&(_, t)| t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        format!("expected one of {}, found `{v}`", names.join(", "))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum HistoryTag {
    Zero,
    Linear,
    Saturating,
}

fn apply(c: &mut CliConfig, history: &mut Option<(HistoryTag, Origin)>, saturation: &mut Option<f64>, e: &Entry) -> Result<(), String> {
    let v = e.value.as_str();
    let r = &mut c.run;
    let x = &mut c.experiment;
    match e.key.as_str() {
        "grid.nx" => r.grid.nx = number(v, "an integer")?,
        "grid.ny" => r.grid.ny = number(v, "an integer")?,
        "grid.lx" => r.grid.lx = real(v)?,
        "grid.ly" => r.grid.ly = real(v)?,
        "kernel.bulk.weights" => r.kernel_bulk.weights = list(v)?,
        "kernel.bulk.rates" => r.kernel_bulk.rates = list(v)?,
        "kernel.boundary.weights" => r.kernel_boundary.weights = list(v)?,
        "kernel.boundary.rates" => r.kernel_boundary.rates = list(v)?,
        "physics.alpha" => r.physics.alpha = real(v)?,
        "physics.beta" => r.physics.beta = real(v)?,
        "physics.nu" => r.physics.nu = real(v)?,
        "physics.omega" => r.physics.omega = real(v)?,
        "physics.r" => r.physics.r = real(v)?,
        "nonlinearity.f" => r.nonlinearity.f = list(v)?,
        "nonlinearity.g" => r.nonlinearity.g = list(v)?,
        "integration.dt" => r.integration.dt = real(v)?,
        "integration.t_end" => r.integration.t_end = real(v)?,
        "integration.report_stride" => r.integration.report_stride = number(v, "an integer")?,
        "integration.snapshot_stride" => r.integration.snapshot_stride = number(v, "an integer")?,
        "integration.history" => {
            r.integration.history = tag(v, &[("modes", HistoryMode::Modes), ("direct", HistoryMode::Direct)])?
        }
        "integration.s_max_tol" => r.integration.s_max_tol = real(v)?,
        "integration.solver" => r.integration.solver = tag(v, &[("fft", SolverKind::Fft), ("cg", SolverKind::Cg)])?,
        "initial.generator" => {
            r.initial.generator = tag(
                v,
                &[("zero", Generator::Zero), ("constant", Generator::Constant), ("band-limited", Generator::BandLimited)],
            )?
        }
        "initial.seed" => r.initial.seed = number(v, "an unsigned integer")?,
        "initial.amplitude" => r.initial.amplitude = real(v)?,
        "initial.history" => {
            let t = tag(
                v,
                &[("zero", HistoryTag::Zero), ("linear", HistoryTag::Linear), ("saturating", HistoryTag::Saturating)],
            )?;
            *history = Some((t, e.origin));
        }
        "initial.saturation" => *saturation = Some(real(v)?),
        "output.dir" => {
            if v.is_empty() {
                return Err("expected a directory".into());
            }
            c.output.dir = PathBuf::from(v);
        }
        "output.formats" => {
            let mut f = v
                .split(',')
                .map(|s| tag(s.trim(), &[("csv", Format::Csv), ("json", Format::Json)]))
                .collect::<Result<Vec<_>, _>>()?;
            f.sort();
            f.dedup();
            c.output.formats = f;
        }
        "experiment.perturbations" => x.perturbations = list(v)?,
        "experiment.lipschitz_horizon" => x.lipschitz_horizon = real(v)?,
        "experiment.pairs" => x.pairs = number(v, "an integer")?,
        "experiment.m0_window" => match list(v)?.as_slice() {
            &[a, b] => x.m0_window = (a, b),
            _ => return Err("expected two numbers `a, b`".into()),
        },
        "experiment.lambdas" => x.lambdas = list(v)?,
        "experiment.dirac_horizon" => x.dirac_horizon = real(v)?,
        "experiment.oracle_steps" => x.oracle_steps = number(v, "an integer")?,
        "experiment.diagnostic_horizon" => x.diagnostic_horizon = real(v)?,
        "experiment.tail_nodes" => x.tail_nodes = number(v, "an integer")?,
        other => unreachable!("key `{other}` is listed but not handled"),
    }
    Ok(())
}

fn experiment_issues(x: &ExperimentOptions) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    if x.perturbations.is_empty() || x.perturbations.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        out.push(("experiment.perturbations", "must be a non-empty list of positive numbers".to_string()));
    }
    if !(x.lipschitz_horizon > 0.0) {
        out.push(("experiment.lipschitz_horizon", "must be positive".to_string()));
    }
    if x.pairs == 0 {
        out.push(("experiment.pairs", "must be at least 1".to_string()));
    }
    if !(x.m0_window.0 >= 0.0 && x.m0_window.1 > x.m0_window.0) {
        out.push(("experiment.m0_window", "must satisfy 0 <= a < b".to_string()));
    }
    if x.lambdas.len() < 2 || x.lambdas.iter().any(|&l| !(l > 0.0)) {
        out.push(("experiment.lambdas", "must list at least two positive rates".to_string()));
    }
    if !(x.dirac_horizon > 0.0) {
        out.push(("experiment.dirac_horizon", "must be positive".to_string()));
    }
    if x.oracle_steps == 0 {
        out.push(("experiment.oracle_steps", "must be at least 1".to_string()));
    }
    if !(x.diagnostic_horizon > 0.0) {
        out.push(("experiment.diagnostic_horizon", "must be positive".to_string()));
    }
    if x.tail_nodes == 0 {
        out.push(("experiment.tail_nodes", "must be at least 1".to_string()));
    }
    out
}

pub fn parse_config(text: &str) -> Result<CliConfig, ConfigErrors> {
    parse_config_with(text, &[])
}

/// Parses `text`, then applies `key=value` overrides, then validates. All
/// problems are reported together.
pub fn parse_config_with(text: &str, extra: &[String]) -> Result<CliConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut entries = lex(text, &mut errors);
    entries.extend(overrides(extra, &mut errors));

    let mut config = CliConfig::default();
    let mut history = None;
    let mut saturation = None;
    let mut origins: BTreeMap<String, Origin> = BTreeMap::new();
    for e in &entries {
        origins.insert(e.key.clone(), e.origin);
        if let Err(msg) = apply(&mut config, &mut history, &mut saturation, e) {
            errors.push(error(Some(&e.key), Some(e.origin), msg));
        }
    }
    match (history, saturation) {
        (Some((HistoryTag::Saturating, origin)), None) => errors.push(error(
            Some("initial.saturation"),
            Some(origin),
            "missing required key: `initial.history = saturating` needs `initial.saturation`",
        )),
        (Some((HistoryTag::Saturating, _)), Some(a)) => config.run.initial.history = HistoryProfileKind::Saturating(a),
        (Some((HistoryTag::Linear, _)), _) => config.run.initial.history = HistoryProfileKind::Linear,
        (Some((HistoryTag::Zero, _)), _) => config.run.initial.history = HistoryProfileKind::Zero,
        (None, _) => {}
    }

    if errors.is_empty() {
        for issue in config.run.issues() {
            let origin = origins.get(&issue.key).copied();
            errors.push(error(Some(&issue.key), origin, issue.message));
        }
        for (key, message) in experiment_issues(&config.experiment) {
            errors.push(error(Some(key), origins.get(key).copied(), message));
        }
        if config.output.formats.is_empty() {
            errors.push(error(Some("output.formats"), origins.get("output.formats").copied(), "must not be empty"));
        }
    }
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, CliConfig::default());
    }

    #[test]
    fn comments_and_lists() {
        let text = "# run\n[nonlinearity]\nf =\ng = 0, -1, 0, 1 # cubic\n[experiment]\nm0_window = 1, 2\n";
        let c = parse_config(text).unwrap();
        assert!(c.run.nonlinearity.f.is_empty());
        assert_eq!(c.run.nonlinearity.g, vec![0.0, -1.0, 0.0, 1.0]);
        assert_eq!(c.experiment.m0_window, (1.0, 2.0));
    }

    #[test]
    fn omega_out_of_range_names_the_key() {
        let err = parse_config("[physics]\nomega = 1.2\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        let e = &err.0[0];
        assert_eq!(e.key.as_deref(), Some("physics.omega"));
        assert_eq!(e.origin, Some(Origin::Line(2)));
        assert!(e.message.contains("(0, 1)"), "{}", e.message);
    }

    #[test]
    fn duplicate_reports_both_lines() {
        let err = parse_config("[grid]\nnx = 8\n\nnx = 9\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("line 4"), "{msg}");
    }

    #[test]
    fn every_problem_is_reported() {
        let text = "[grid]\nnx = eight\nbogus = 1\n[physics]\nnu = 0.5\nnu = 0.6\nstray line\n[integration]\nsolver = lu\n";
        let err = parse_config(text).unwrap_err();
        let keys: Vec<Option<&str>> = err.0.iter().map(|e| e.key.as_deref()).collect();
        assert_eq!(err.0.len(), 5, "{err}");
        assert!(keys.contains(&Some("grid.nx")));
        assert!(keys.contains(&Some("grid.bogus")));
        assert!(keys.contains(&Some("physics.nu")));
        assert!(keys.contains(&Some("integration.solver")));
        assert!(keys.contains(&None));
    }

    #[test]
    fn saturating_history_requires_its_cap() {
        let err = parse_config("[initial]\nhistory = saturating\n").unwrap_err();
        assert_eq!(err.0[0].key.as_deref(), Some("initial.saturation"));
        let c = parse_config("[initial]\nhistory = saturating\nsaturation = 0.5\n").unwrap();
        assert_eq!(c.run.initial.history, HistoryProfileKind::Saturating(0.5));
    }

    #[test]
    fn overrides_replace_file_values() {
        let c = parse_config_with("[grid]\nnx = 8\n", &["grid.nx=12".into(), "physics.nu = 0.25".into()]).unwrap();
        assert_eq!(c.run.grid.nx, 12);
        assert_eq!(c.run.physics.nu, 0.25);
        let err = parse_config_with("", &["grid.nz=3".into()]).unwrap_err();
        assert_eq!(err.0[0].origin, Some(Origin::Override(1)));
    }

    #[test]
    fn constraint_errors_carry_lines_when_known() {
        let err = parse_config("[integration]\ndt = -1\n[experiment]\npairs = 0\n").unwrap_err();
        let dt = err.0.iter().find(|e| e.key.as_deref() == Some("integration.dt")).unwrap();
        assert_eq!(dt.origin, Some(Origin::Line(2)));
        let pairs = err.0.iter().find(|e| e.key.as_deref() == Some("experiment.pairs")).unwrap();
        assert_eq!(pairs.origin, Some(Origin::Line(4)));
    }
}
