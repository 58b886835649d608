//! Seeded benchmark runs.
//!
//! A run is a pure function of its [`RunConfig`]. The master key feeds four
//! derived streams: `circuit` (random circuit structure), `problem` (random
//! Hamiltonian or target distribution), `init` (initial parameters) and
//! `optimizer` (perturbations). The first three do not depend on the
//! optimizer, so every optimizer sees the same problem instance and starting
//! point for a given key.

mod search;
mod task;

use std::f64::consts::PI;
use std::time::Instant;

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimizers::{FidelityOracle, HyperParams, LossOracle, Optimizer};
use crate::problems::LossFunction;
use crate::rng::{MasterKey, StreamKey, StreamLabel};

pub use search::{
    candidates, random_search, tune_task, ParamRange, SearchOutcome, SearchSpace, Trial,
    DEFAULT_TUNING_KEYS,
};
pub use task::{
    build_problem, CardinalityTask, HeisenbergTask, IsingTask, RandomDistributionTask,
    RandomHamiltonianTask, TaskConfig, TaskId,
};

pub use crate::rng::derive_stream;

/// Standard deviation of the initial parameter distribution.
pub const INIT_STD: f64 = PI;

/// `d` i.i.d. `Normal(0, π)` draws (standard deviation π).
pub fn init_params(key: StreamKey, d: usize) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::config("parameter count must be at least 1"));
    }
    let normal = Normal::new(0.0, INIT_STD).expect("finite std");
    let mut rng = key.rng();
    Ok((0..d).map(|_| normal.sample(&mut rng)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: TaskConfig,
    pub optimizer: HyperParams,
    pub master_key: MasterKey,
    pub n_steps: usize,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::config("n_steps must be at least 1"));
        }
        self.optimizer.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed(String),
}

/// Content hashes identifying the problem instance a run optimized.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprints {
    pub circuit: String,
    pub problem: String,
    pub init: String,
}

/// Outcome of one run. `trace[0]` is the loss at the initial parameters and
/// `trace[s]` the loss after step `s`. Equality ignores the wall time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub status: RunStatus,
    pub trace: Vec<f64>,
    pub final_loss: Option<f64>,
    /// Loss queries spent before the first step (blocking optimizers only).
    pub init_loss_queries: u64,
    /// Loss queries per step.
    pub loss_queries: Vec<u64>,
    /// Fidelity queries per step.
    pub fidelity_queries: Vec<u64>,
    /// Steps (1-based) whose candidate was rejected by blocking.
    pub blocked_steps: Vec<usize>,
    pub fingerprints: Fingerprints,
    /// Elapsed seconds; not persisted so record files stay reproducible.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl PartialEq for RunRecord {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config
            && self.status == other.status
            && self.trace == other.trace
            && self.final_loss == other.final_loss
            && self.init_loss_queries == other.init_loss_queries
            && self.loss_queries == other.loss_queries
            && self.fidelity_queries == other.fidelity_queries
            && self.blocked_steps == other.blocked_steps
            && self.fingerprints == other.fingerprints
    }
}

impl RunRecord {
    fn started(config: RunConfig) -> Self {
        RunRecord {
            config,
            status: RunStatus::Ok,
            trace: Vec::new(),
            final_loss: None,
            init_loss_queries: 0,
            loss_queries: Vec::new(),
            fidelity_queries: Vec::new(),
            blocked_steps: Vec::new(),
            fingerprints: Fingerprints::default(),
            wall_time_secs: 0.0,
        }
    }

    pub fn task(&self) -> TaskId {
        self.config.task.id()
    }

    pub fn algorithm(&self) -> crate::optimizers::Algorithm {
        self.config.optimizer.algorithm()
    }

    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }
}

/// Executes one run. Failures are captured in [`RunRecord::status`] with
/// whatever trace was produced before the error.
pub fn run_single(config: &RunConfig) -> RunRecord {
    let start = Instant::now();
    let mut record = RunRecord::started(config.clone());
    if let Err(e) = execute(config, &mut record) {
        record.status = RunStatus::Failed(e.to_string());
    }
    record.final_loss = record.trace.last().copied();
    record.wall_time_secs = start.elapsed().as_secs_f64();
    record
}

fn execute(config: &RunConfig, record: &mut RunRecord) -> Result<()> {
    config.validate()?;
    let key = config.master_key;
    let loss = build_problem(&config.task, key)?;
    let theta0 = init_params(key.stream(StreamLabel::Init), loss.n_params())?;
    record.fingerprints = fingerprints(&loss, &theta0);

    record.trace.reserve(config.n_steps + 1);
    record.trace.push(loss.evaluate(&theta0)?);

    let mut optimizer = Optimizer::new(
        config.optimizer.clone(),
        theta0,
        key.stream(StreamLabel::Optimizer),
    )?;
    let mut loss_oracle = LossOracle::from_loss(&loss);
    let mut fidelity_oracle = FidelityOracle::from_loss(&loss);
    optimizer.prime(&mut loss_oracle)?;
    record.init_loss_queries = loss_oracle.queries();

    for step in 1..=config.n_steps {
        let (l0, f0) = (loss_oracle.queries(), fidelity_oracle.queries());
        let fidelity = optimizer
            .algorithm()
            .needs_fidelity()
            .then_some(&mut fidelity_oracle);
        let outcome = optimizer.step(&mut loss_oracle, fidelity)?;
        record.loss_queries.push(loss_oracle.queries() - l0);
        record.fidelity_queries.push(fidelity_oracle.queries() - f0);
        if !outcome.accepted {
            record.blocked_steps.push(step);
        }
        let current = match optimizer.state().current_loss {
            Some(v) => v,
            None => loss.evaluate(optimizer.theta())?,
        };
        if !current.is_finite() {
            return Err(Error::Internal(format!("loss became {current} at step {step}")));
        }
        record.trace.push(current);
    }
    Ok(())
}

fn fingerprints(loss: &LossFunction, theta0: &[f64]) -> Fingerprints {
    Fingerprints {
        circuit: loss.template().fingerprint(),
        problem: loss.objective_fingerprint(),
        init: crate::fingerprint::of_floats(theta0),
    }
}

/// Runs master keys `base_key + 0 … base_key + n_runs − 1` in parallel on the
/// current rayon pool. Output order follows key order.
pub fn run_suite(
    task: &TaskConfig,
    optimizer: &HyperParams,
    n_steps: usize,
    n_runs: usize,
    base_key: MasterKey,
) -> Result<Vec<RunRecord>> {
    if n_runs == 0 {
        return Err(Error::config("n_runs must be at least 1"));
    }
    Ok((0..n_runs as u64)
        .into_par_iter()
        .map(|i| {
            run_single(&RunConfig {
                task: task.clone(),
                optimizer: optimizer.clone(),
                master_key: base_key.offset(i),
                n_steps,
            })
        })
        .collect())
}

/// Executes `f` on a dedicated pool of `threads` workers (`None` uses the
/// global pool).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::config("thread count must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Internal(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
