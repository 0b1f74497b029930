//! Dispatches `runs x algorithms` optimization runs on a worker pool and
//! writes every result file.
//!
//! Output layout under `output_dir`:
//! `runs/<algorithm>_run<k>.csv` and `.json` per run,
//! `summary_<algorithm>.json`, `comparison.txt` and `convergence.csv`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use trace_core::engine::{self, Algorithm, RunRecord};

use crate::config::ExperimentConfig;
use crate::output::{self, AlgorithmSummary};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub algorithm: Algorithm,
    pub run: usize,
    pub seed: u64,
    pub message: String,
    /// Evaluations completed before the abort.
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub records: BTreeMap<Algorithm, Vec<RunRecord>>,
    pub failures: Vec<RunFailure>,
    pub summaries: Vec<AlgorithmSummary>,
    pub table: String,
}

impl ExperimentReport {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_file_stem(algorithm: Algorithm, run: usize) -> String {
    format!("{}_run{run:03}", algorithm.name())
}

pub fn run_csv_path(dir: &Path, algorithm: Algorithm, run: usize) -> PathBuf {
    dir.join("runs").join(run_file_stem(algorithm, run) + ".csv")
}

fn one_run(cfg: &ExperimentConfig, algorithm: Algorithm, run: usize) -> Result<RunRecord, RunFailure> {
    let seed = cfg.seed_for(run);
    let fail = |message: String, evaluations: usize| RunFailure { algorithm, run, seed, message, evaluations };
    let spec = cfg.problem.spec().map_err(|e| fail(e.to_string(), 0))?;
    let mut eval = cfg.problem.open().map_err(|e| fail(e.to_string(), 0))?;
    let engine_cfg = cfg.engine_config(algorithm, run);
    let (record, failure) = match engine::run(&spec, &engine_cfg, eval.as_mut()) {
        Ok(r) => (r, None),
        Err(e) => {
            let n = e.partial.iterations.len();
            let msg = format!("{e}");
            (*e.partial, Some(fail(msg, n)))
        }
    };
    let dir = cfg.output_dir.join("runs");
    let stem = run_file_stem(algorithm, run);
    let written = output::save_run_csv(&record, &dir.join(format!("{stem}.csv")))
        .and_then(|_| output::save_json(&record, &dir.join(format!("{stem}.json"))));
    if let Err(e) = written {
        return Err(fail(format!("could not write results: {e}"), record.iterations.len()));
    }
    match failure {
        Some(f) => Err(f),
        None => {
            log::info!(
                "{} run {run} (seed {seed}): best {:?}, CV {:.1}%",
                algorithm,
                record.summary.best,
                record.summary.cv_percent
            );
            Ok(record)
        }
    }
}

/// Validates `cfg`, executes every run and writes all files. Individual run
/// failures are collected in the report rather than returned as errors.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let runs_dir = cfg.output_dir.join("runs");
    std::fs::create_dir_all(&runs_dir).map_err(HarnessError::io(&runs_dir))?;

    let workers = cfg
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;

    let jobs: Vec<(Algorithm, usize)> = cfg
        .algorithms
        .iter()
        .flat_map(|a| (0..cfg.runs).map(move |k| (*a, k)))
        .collect();
    let results: Vec<_> = pool.install(|| jobs.par_iter().map(|&(a, k)| one_run(cfg, a, k)).collect());

    let mut records: BTreeMap<Algorithm, Vec<RunRecord>> = BTreeMap::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(rec) => records.entry(rec.algorithm).or_default().push(rec),
            Err(f) => {
                log::error!("{} run {} failed: {}", f.algorithm, f.run, f.message);
                failures.push(f);
            }
        }
    }

    let summaries = output::summaries(&records)?;
    for s in &summaries {
        output::save_json(s, &cfg.output_dir.join(format!("summary_{}.json", s.algorithm.name())))?;
    }
    let table = output::comparison_table(&summaries);
    let table_path = cfg.output_dir.join("comparison.txt");
    std::fs::write(&table_path, &table).map_err(HarnessError::io(&table_path))?;
    let conv_path = cfg.output_dir.join("convergence.csv");
    let file = std::fs::File::create(&conv_path).map_err(HarnessError::io(&conv_path))?;
    output::write_convergence(&output::convergence(&records), std::io::BufWriter::new(file))?;
    if !failures.is_empty() {
        output::save_json(&failures, &cfg.output_dir.join("failures.json"))?;
    }

    Ok(ExperimentReport { records, failures, summaries, table })
}
