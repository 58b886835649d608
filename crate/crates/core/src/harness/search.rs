//! Random-search hyperparameter tuning on a handful of tuning keys.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_single, RunConfig, TaskConfig};
use crate::error::{Error, Result};
use crate::optimizers::HyperParams;
use crate::rng::{MasterKey, StreamRng};

/// Tuning keys used when none are given.
pub const DEFAULT_TUNING_KEYS: [MasterKey; 3] = [MasterKey(0), MasterKey(1), MasterKey(2)];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamRange {
    Uniform { low: f64, high: f64 },
    LogUniform { low: f64, high: f64 },
    /// Finite set of candidate values.
    Choice { values: Vec<f64> },
}

impl ParamRange {
    fn validate(&self, name: &str) -> Result<()> {
        match self {
            ParamRange::Uniform { low, high } | ParamRange::LogUniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(Error::config(format!(
                        "range for `{name}` needs finite bounds with low < high"
                    )));
                }
                if matches!(self, ParamRange::LogUniform { .. }) && *low <= 0.0 {
                    return Err(Error::config(format!("log range for `{name}` must be positive")));
                }
            }
            ParamRange::Choice { values } => {
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config(format!(
                        "choices for `{name}` must be finite and non-empty"
                    )));
                }
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            ParamRange::Uniform { low, high } => rng.random_range(*low..*high),
            ParamRange::LogUniform { low, high } => rng.random_range(low.ln()..high.ln()).exp(),
            ParamRange::Choice { values } => values[rng.random_range(0..values.len())],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpace {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    pub params: BTreeMap<String, ParamRange>,
}

fn default_trials() -> usize {
    50
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::config("n_trials must be at least 1"));
        }
        for (name, range) in &self.params {
            range.validate(name)?;
        }
        Ok(())
    }

    fn is_grid(&self) -> bool {
        self.params
            .values()
            .all(|r| matches!(r, ParamRange::Choice { .. }))
    }
}

/// Candidate hyperparameters for `space` applied on top of `base`.
///
/// A space made only of choices is enumerated as a full grid; otherwise
/// `n_trials` points are drawn from a generator seeded by `space.seed`.
pub fn candidates(space: &SearchSpace, base: &HyperParams) -> Result<Vec<HyperParams>> {
    space.validate()?;
    let points: Vec<Vec<(&str, f64)>> = if space.is_grid() {
        let mut grid: Vec<Vec<(&str, f64)>> = vec![Vec::new()];
        for (name, range) in &space.params {
            let ParamRange::Choice { values } = range else { unreachable!() };
            grid = grid
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut next = p.clone();
                        next.push((name.as_str(), v));
                        next
                    })
                })
                .collect();
        }
        grid
    } else {
        let mut rng = StreamRng::seed_from_u64(space.seed);
        (0..space.n_trials)
            .map(|_| {
                space
                    .params
                    .iter()
                    .map(|(name, range)| (name.as_str(), range.sample(&mut rng)))
                    .collect()
            })
            .collect()
    };
    points
        .into_iter()
        .map(|point| {
            point
                .into_iter()
                .try_fold(base.clone(), |hp, (name, value)| hp.with(name, value))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub params: HyperParams,
    /// Mean score over the tuning keys; `None` when any evaluation failed.
    pub score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: HyperParams,
    pub best_score: f64,
    pub trials: Vec<Trial>,
}

/// Squared log-distance of the searched fields from the optimizer defaults.
fn distance_to_defaults(hp: &HyperParams, names: &[&str]) -> f64 {
    let defaults = HyperParams::defaults(hp.algorithm());
    names
        .iter()
        .filter_map(|name| Some((hp.get(name)?, defaults.get(name)?)))
        .map(|(v, d)| {
            if v > 0.0 && d > 0.0 {
                (v.ln() - d.ln()).powi(2)
            } else {
                (v - d).powi(2)
            }
        })
        .sum()
}

/// Scores every candidate by its mean `evaluate` result over `tuning_keys`
/// and returns the lowest. Equal scores go to the candidate closest to the
/// optimizer defaults in log space.
pub fn random_search<F>(
    space: &SearchSpace,
    base: &HyperParams,
    tuning_keys: &[MasterKey],
    evaluate: F,
) -> Result<SearchOutcome>
where
    F: Fn(&HyperParams, MasterKey) -> Result<f64> + Sync,
{
    if tuning_keys.is_empty() {
        return Err(Error::config("at least one tuning key is required"));
    }
    let trials: Vec<Trial> = candidates(space, base)?
        .into_par_iter()
        .map(|params| {
            let scores: Result<Vec<f64>> = tuning_keys.iter().map(|&k| evaluate(&params, k)).collect();
            let score = scores
                .ok()
                .map(|s| s.iter().sum::<f64>() / s.len() as f64)
                .filter(|m| m.is_finite());
            Trial { params, score }
        })
        .collect();

    let names: Vec<&str> = space.params.keys().map(String::as_str).collect();
    let best = trials
        .iter()
        .filter_map(|t| Some((t, t.score?)))
        .min_by(|(a, sa), (b, sb)| {
            sa.total_cmp(sb).then_with(|| {
                distance_to_defaults(&a.params, &names)
                    .total_cmp(&distance_to_defaults(&b.params, &names))
            })
        })
        .map(|(t, s)| (t.params.clone(), s))
        .ok_or_else(|| Error::config("every tuning trial failed"))?;
    Ok(SearchOutcome {
        best: best.0,
        best_score: best.1,
        trials,
    })
}

/// [`random_search`] scored by the final loss of `n_steps`-step runs of
/// `task`.
pub fn tune_task(
    task: &TaskConfig,
    base: &HyperParams,
    space: &SearchSpace,
    tuning_keys: &[MasterKey],
    n_steps: usize,
) -> Result<SearchOutcome> {
    random_search(space, base, tuning_keys, |params, key| {
        let record = run_single(&RunConfig {
            task: task.clone(),
            optimizer: params.clone(),
            master_key: key,
            n_steps,
        });
        match (&record.status, record.final_loss) {
            (super::RunStatus::Ok, Some(loss)) => Ok(loss),
            (super::RunStatus::Failed(msg), _) => Err(Error::Internal(msg.clone())),
            _ => Err(Error::Internal("run produced no loss".into())),
        }
    })
}
