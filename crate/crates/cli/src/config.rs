//! Experiment config files and their merge with command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use qzo_core::harness::{ParamRange, SearchSpace, TaskConfig, TaskId, DEFAULT_TUNING_KEYS};
use qzo_core::optimizers::{Algorithm, HyperParams};
use qzo_core::rng::MasterKey;

/// Output directory used when neither the flag, the file nor `QZO_OUT`
/// names one.
pub const DEFAULT_OUT: &str = "qzo-out";
pub const OUT_ENV: &str = "QZO_OUT";
pub const DEFAULT_RUNS: usize = 100;

/// A problem with the configuration; reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Raw file layout. The task and optimizer blocks stay untyped here because
/// both also accept shorthand strings.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    task: Option<Value>,
    optimizer: Option<Value>,
    #[serde(default)]
    run: RunBlock,
    #[serde(default)]
    output: OutputBlock,
    search: Option<SearchBlock>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_key: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBlock {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    pub params: BTreeMap<String, ParamRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuning_keys: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
}

fn default_trials() -> usize {
    50
}

impl SearchBlock {
    pub fn space(&self) -> SearchSpace {
        SearchSpace {
            seed: self.seed,
            n_trials: self.n_trials,
            params: self.params.clone(),
        }
    }
}

/// Flag values; `None` defers to the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub runs: Option<usize>,
    pub steps: Option<usize>,
    pub base_key: Option<u64>,
    pub threads: Option<usize>,
    pub optimizer: Option<String>,
    pub task: Option<String>,
}

/// Fully resolved experiment, echoed as `effective_config.json`. Its JSON
/// form is itself a valid config file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Experiment {
    pub task: TaskConfig,
    pub optimizer: Vec<HyperParams>,
    pub run: ResolvedRun,
    pub output: ResolvedOutput,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchBlock>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedRun {
    pub n_runs: usize,
    pub n_steps: usize,
    pub base_key: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvedOutput {
    pub directory: PathBuf,
}

impl Experiment {
    pub fn base_key(&self) -> MasterKey {
        MasterKey(self.run.base_key)
    }

    pub fn out_dir(&self) -> &Path {
        &self.output.directory
    }

    pub fn tuning_keys(&self) -> Vec<MasterKey> {
        match self.search.as_ref().and_then(|s| s.tuning_keys.as_ref()) {
            Some(keys) => keys.iter().map(|&k| MasterKey(k)).collect(),
            None => DEFAULT_TUNING_KEYS.to_vec(),
        }
    }

    pub fn tuning_steps(&self) -> usize {
        self.search
            .as_ref()
            .and_then(|s| s.n_steps)
            .unwrap_or_else(|| self.task.id().tuning_steps())
    }
}

/// Deserializes `value`, prefixing errors with the JSON path below `at`.
fn typed<T: DeserializeOwned>(value: Value, at: &str) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (at.is_empty(), inner.as_str()) {
            (true, _) => inner,
            (false, ".") => at.to_owned(),
            (false, p) => format!("{at}.{p}"),
        };
        err(format!("{path}: {}", e.into_inner()))
    })
}

fn parse_task(value: Value) -> Result<TaskConfig> {
    match value {
        Value::String(id) => id
            .parse::<TaskId>()
            .map(TaskId::preset)
            .map_err(|e| err(format!("task: {e}"))),
        other => typed(other, "task"),
    }
}

/// Accepts an optimizer id, `"all"`, a path to a JSON optimizer block, an
/// inline block, or a list of any of these.
fn parse_optimizers(value: Value, base: &Path, at: &str) -> Result<Vec<HyperParams>> {
    match value {
        Value::Array(items) => {
            let mut out = Vec::new();
            for (i, item) in items.into_iter().enumerate() {
                out.extend(parse_optimizers(item, base, &format!("{at}[{i}]"))?);
            }
            if out.is_empty() {
                return Err(err(format!("{at}: empty optimizer list")));
            }
            Ok(out)
        }
        Value::String(s) => parse_optimizer_name(&s, base).map_err(|e| err(format!("{at}: {e}"))),
        other => {
            let hp: HyperParams = typed(other, at)?;
            hp.validate().map_err(|e| err(format!("{at}: {e}")))?;
            Ok(vec![hp])
        }
    }
}

fn parse_optimizer_name(s: &str, base: &Path) -> Result<Vec<HyperParams>> {
    if s == "all" {
        return Ok(Algorithm::ALL.into_iter().map(HyperParams::defaults).collect());
    }
    if let Ok(a) = s.parse::<Algorithm>() {
        return Ok(vec![HyperParams::defaults(a)]);
    }
    if s.ends_with(".json") {
        let path = base.join(s);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| err(format!("{}: {e}", path.display())))?;
        return parse_optimizers(value, path.parent().unwrap_or(Path::new(".")), &path.display().to_string());
    }
    Err(err(format!("unknown optimizer `{s}` (expected an id, `all` or a .json file)")))
}

/// Reads `path` (if any) and applies `flags` over it. Precedence for every
/// field: flag, then file, then (output directory only) `QZO_OUT`, then the
/// built-in default.
pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<Experiment> {
    let (file, base) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| err(format!("cannot read config {}: {e}", p.display())))?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| err(format!("{}: invalid JSON: {e}", p.display())))?;
            let file: FileConfig = typed(value, "")?;
            (file, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (FileConfig::default(), PathBuf::new()),
    };

    let task = match (&flags.task, file.task) {
        (Some(id), _) => parse_task(Value::String(id.clone()))?,
        (None, Some(v)) => parse_task(v)?,
        (None, None) => return Err(err("no task given (use --task or a `task` block)")),
    };
    let optimizer = match (&flags.optimizer, file.optimizer) {
        (Some(s), _) => parse_optimizers(Value::String(s.clone()), Path::new("."), "--optimizer")?,
        (None, Some(v)) => parse_optimizers(v, &base, "optimizer")?,
        (None, None) => parse_optimizer_name("all", &base)?,
    };

    let run = ResolvedRun {
        n_runs: flags.runs.or(file.run.n_runs).unwrap_or(DEFAULT_RUNS),
        n_steps: flags
            .steps
            .or(file.run.n_steps)
            .unwrap_or_else(|| task.id().default_steps()),
        base_key: flags.base_key.or(file.run.base_key).unwrap_or(0),
        threads: flags.threads.or(file.run.threads),
    };
    if run.n_runs == 0 {
        return Err(err("run.n_runs: must be at least 1"));
    }
    if run.n_steps == 0 {
        return Err(err("run.n_steps: must be at least 1"));
    }
    if run.threads == Some(0) {
        return Err(err("run.threads: must be at least 1"));
    }

    let directory = flags
        .out
        .clone()
        .or(file.output.directory)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    if let Some(search) = &file.search {
        search.space().validate().map_err(|e| err(format!("search: {e}")))?;
        if search.tuning_keys.as_ref().is_some_and(Vec::is_empty) {
            return Err(err("search.tuning_keys: must not be empty"));
        }
    }

    Ok(Experiment {
        task,
        optimizer,
        run,
        output: ResolvedOutput { directory },
        search: file.search,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(json: &str, flags: &Overrides) -> Result<Experiment> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, json).unwrap();
        load(Some(&path), flags)
    }

    #[test]
    fn flags_override_file() {
        let json = r#"{"task": "ising1d", "optimizer": "spsa",
                       "run": {"n_runs": 3, "n_steps": 7, "base_key": 4},
                       "output": {"directory": "from-file"}}"#;
        let e = load_str(json, &Overrides::default()).unwrap();
        assert_eq!((e.run.n_runs, e.run.n_steps, e.run.base_key), (3, 7, 4));
        assert_eq!(e.out_dir(), Path::new("from-file"));
        let flags = Overrides {
            runs: Some(9),
            base_key: Some(1),
            out: Some("flag".into()),
            optimizer: Some("all".into()),
            ..Default::default()
        };
        let e = load_str(json, &flags).unwrap();
        assert_eq!((e.run.n_runs, e.run.n_steps, e.run.base_key), (9, 7, 1));
        assert_eq!(e.out_dir(), Path::new("flag"));
        assert_eq!(e.optimizer.len(), 7);
    }

    #[test]
    fn preset_defaults() {
        let e = load(None, &Overrides { task: Some("heis2d".into()), ..Default::default() }).unwrap();
        assert_eq!(e.run.n_steps, 2000);
        assert_eq!(e.tuning_steps(), 1000);
        assert_eq!(e.run.n_runs, DEFAULT_RUNS);
        assert_eq!(e.tuning_keys(), DEFAULT_TUNING_KEYS.to_vec());
    }

    #[test]
    fn schema_errors_name_the_field() {
        let e = load_str(r#"{"task": "ising1d", "run": {"n_runs": "five"}}"#, &Overrides::default())
            .unwrap_err();
        assert!(e.0.starts_with("run.n_runs:"), "{e}");
        let e = load_str(r#"{"task": {"id": "ising1d", "qubits": 3}}"#, &Overrides::default())
            .unwrap_err();
        assert!(e.0.starts_with("task") && e.0.contains("qubits"), "{e}");
        let e = load_str(r#"{"task": "ising1d", "extra": 1}"#, &Overrides::default()).unwrap_err();
        assert!(e.0.contains("extra"), "{e}");
        let e = load_str(
            r#"{"task": "ising1d", "optimizer": [{"id": "spsa"}, {"id": "spsa", "eta0": -1}]}"#,
            &Overrides::default(),
        )
        .unwrap_err();
        assert!(e.0.starts_with("optimizer[1]"), "{e}");
    }

    #[test]
    fn optimizer_block_from_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("best.json"), r#"{"id": "adam-spsa", "eta0": 0.05}"#).unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"task": "ising1d", "optimizer": ["spsa", "best.json"]}"#).unwrap();
        let e = load(Some(&path), &Overrides::default()).unwrap();
        assert_eq!(e.optimizer[1].get("eta0"), Some(0.05));
    }

    #[test]
    fn effective_config_reloads() {
        let json = r#"{"task": {"id": "rand-dist", "n_qubits": 3}, "optimizer": "xnes",
                       "run": {"n_runs": 2, "threads": 2},
                       "search": {"params": {"eta_mu": {"uniform": {"low": 0.5, "high": 1.5}}}, "tuning_keys": [5]}}"#;
        let e = load_str(json, &Overrides::default()).unwrap();
        let echoed = serde_json::to_string(&e).unwrap();
        assert_eq!(load_str(&echoed, &Overrides::default()).unwrap(), e);
        assert_eq!(e.tuning_keys(), vec![MasterKey(5)]);
    }

    #[test]
    fn shipped_configs_load() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut n = 0;
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "json") {
                load(Some(&path), &Overrides::default())
                    .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                n += 1;
            }
        }
        assert!(n >= 7);
    }

    #[test]
    fn schema_lists_every_top_level_block() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/config.schema.json");
        let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        let mut keys: Vec<&String> = schema["properties"].as_object().unwrap().keys().collect();
        keys.sort();
        assert_eq!(keys, ["optimizer", "output", "run", "search", "task"]);
    }
}
