//! `qzo`: run, tune and report zeroth-order optimizer benchmarks.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use qzo_core::harness::{run_suite, tune_task, with_threads, RunRecord};
use qzo_core::reporting::{emit_plots, read_records_dir, summarize, write_records, write_timings};

use config::{ConfigError, Experiment, Overrides};

#[derive(Parser)]
#[command(name = "qzo", version, about = "Zeroth-order optimizer benchmarks on variational quantum tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured optimizer on the task and write records and plots.
    Run(ExperimentArgs),
    /// Random-search hyperparameters and write the best optimizer blocks.
    Tune(ExperimentArgs),
    /// Rebuild CSV and SVG summaries from the JSONL records in a directory.
    Report {
        /// Directory holding `*.jsonl` record files.
        records: PathBuf,
        /// Where to write the summaries (defaults to the records directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [env: QZO_OUT, below the config file in precedence].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of runs (master keys base-key … base-key + runs − 1).
    #[arg(long)]
    runs: Option<usize>,
    /// Optimizer steps per run.
    #[arg(long)]
    steps: Option<usize>,
    /// First master key.
    #[arg(long)]
    base_key: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
    /// Optimizer id, `all`, or a JSON optimizer-block file.
    #[arg(long)]
    optimizer: Option<String>,
    /// Task preset id.
    #[arg(long)]
    task: Option<String>,
}

impl ExperimentArgs {
    fn load(&self) -> Result<Experiment, ConfigError> {
        let flags = Overrides {
            out: self.out.clone(),
            runs: self.runs,
            steps: self.steps,
            base_key: self.base_key,
            threads: self.threads,
            optimizer: self.optimizer.clone(),
            task: self.task.clone(),
        };
        config::load(self.config.as_deref(), &flags)
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn prepare(exp: &Experiment) -> anyhow::Result<()> {
    let dir = exp.out_dir();
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write_json(&dir.join("effective_config.json"), exp)
}

fn write_summaries(records: &[RunRecord], dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let reports = summarize(records)?;
    if reports.is_empty() {
        bail!("no successful runs to summarize");
    }
    Ok(emit_plots(&reports, dir)?)
}

fn cmd_run(exp: &Experiment) -> anyhow::Result<()> {
    prepare(exp)?;
    let mut records = Vec::new();
    for hp in &exp.optimizer {
        let batch = with_threads(exp.run.threads, || {
            run_suite(&exp.task, hp, exp.run.n_steps, exp.run.n_runs, exp.base_key())
        })??;
        eprintln!("{}: {} runs of {} steps", hp.algorithm(), batch.len(), exp.run.n_steps);
        records.extend(batch);
    }
    let dir = exp.out_dir();
    let path = dir.join("records.jsonl");
    write_records(&records, &path)?;
    write_timings(&records, &dir.join("timings.csv"))?;
    let failed: Vec<&RunRecord> = records.iter().filter(|r| !r.is_ok()).collect();
    if failed.len() < records.len() {
        write_summaries(&records, dir)?;
    }
    if let Some(first) = failed.first() {
        bail!(
            "{} of {} runs failed; first ({}, key {}): {:?}",
            failed.len(),
            records.len(),
            first.algorithm(),
            first.config.master_key,
            first.status
        );
    }
    eprintln!("wrote {} records to {}", records.len(), path.display());
    Ok(())
}

fn cmd_tune(exp: &Experiment) -> anyhow::Result<()> {
    let Some(search) = &exp.search else {
        bail!(ConfigError("tune needs a `search` block in the config".into()));
    };
    prepare(exp)?;
    let keys = exp.tuning_keys();
    let space = search.space();
    for hp in &exp.optimizer {
        let outcome = with_threads(exp.run.threads, || {
            tune_task(&exp.task, hp, &space, &keys, exp.tuning_steps())
        })?
        .map_err(|e| match e {
            qzo_core::Error::Config(msg) => anyhow::Error::new(ConfigError(msg)),
            other => other.into(),
        })?;
        let name = format!("tuned_{}_{}", exp.task.id(), hp.algorithm());
        let dir = exp.out_dir();
        write_json(&dir.join(format!("{name}.json")), &outcome.best)?;
        write_json(&dir.join(format!("{name}_trials.json")), &outcome.trials)?;
        eprintln!(
            "{}: best mean final loss {} over {} trials",
            hp.algorithm(),
            outcome.best_score,
            outcome.trials.len()
        );
    }
    Ok(())
}

fn cmd_report(records_dir: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let records = read_records_dir(records_dir)?;
    if records.is_empty() {
        bail!("no records found in {}", records_dir.display());
    }
    let files = write_summaries(&records, out.unwrap_or(records_dir))?;
    eprintln!("wrote {} files from {} records", files.len(), records.len());
    Ok(())
}

fn exit_code(result: anyhow::Result<()>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("qzo: config error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("qzo: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => args.load().map_err(Into::into).and_then(|e| cmd_run(&e)),
        Command::Tune(args) => args.load().map_err(Into::into).and_then(|e| cmd_tune(&e)),
        Command::Report { records, out } => cmd_report(records, out.as_deref()),
    };
    exit_code(result)
}
