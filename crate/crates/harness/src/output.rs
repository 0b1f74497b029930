//! Result files: per-run iteration CSVs, summary JSON, the comparison table
//! and the convergence CSV.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use trace_core::engine::{summarize_runs, Algorithm, RunRecord, Summary};

use crate::HarnessError;

/// Header `iter,x_1..x_d,f,c_1..c_C,feasible,best_feasible`.
pub fn run_csv_header(dim: usize, num_constraints: usize) -> Vec<String> {
    let mut h = vec!["iter".to_string()];
    h.extend((1..=dim).map(|j| format!("x_{j}")));
    h.push("f".into());
    h.extend((1..=num_constraints).map(|i| format!("c_{i}")));
    h.push("feasible".into());
    h.push("best_feasible".into());
    h
}

pub fn write_run_csv<W: Write>(record: &RunRecord, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let dim = record.iterations.first().map_or(0, |it| it.x.len());
    let nc = record.iterations.first().map_or(0, |it| it.c.len());
    w.write_record(run_csv_header(dim, nc))?;
    for it in &record.iterations {
        let mut row = vec![it.index.to_string()];
        row.extend(it.x.iter().map(f64::to_string));
        row.push(it.f.to_string());
        row.extend(it.c.iter().map(f64::to_string));
        row.push(it.feasible.to_string());
        row.push(it.best_feasible.map(|v| v.to_string()).unwrap_or_default());
        w.write_record(&row)?;
    }
    w.flush().map_err(HarnessError::io("<csv>"))?;
    Ok(())
}

pub fn save_run_csv(record: &RunRecord, path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(HarnessError::io(path))?;
    write_run_csv(record, std::io::BufWriter::new(file))
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), HarnessError> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(HarnessError::io(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub problem: String,
    pub algorithm: Algorithm,
    #[serde(flatten)]
    pub summary: Summary,
}

/// Summaries in table row order. Algorithms without completed runs are skipped.
pub fn summaries(records: &BTreeMap<Algorithm, Vec<RunRecord>>) -> Result<Vec<AlgorithmSummary>, HarnessError> {
    records
        .iter()
        .filter(|(_, runs)| !runs.is_empty())
        .map(|(a, runs)| {
            Ok(AlgorithmSummary {
                problem: runs[0].problem.clone(),
                algorithm: *a,
                summary: summarize_runs(runs)?,
            })
        })
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

/// Plain-text table with columns `Algorithm | Best | Worst | Mean | Std | CV (%)`.
pub fn comparison_table(rows: &[AlgorithmSummary]) -> String {
    let mut rows: Vec<&AlgorithmSummary> = rows.iter().collect();
    rows.sort_by_key(|r| r.algorithm);
    let mut out = String::from("Algorithm | Best | Worst | Mean | Std | CV (%)\n");
    for r in rows {
        let s = &r.summary;
        out += &format!(
            "{} | {} | {} | {} | {} | {:.4}\n",
            r.algorithm.label(),
            cell(s.best),
            cell(s.worst),
            cell(s.mean),
            cell(s.std),
            s.cv_percent
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub algorithm: Algorithm,
    pub iter: usize,
    /// Mean incumbent over the runs that have one at `iter`.
    pub mean_best_feasible: Option<f64>,
    pub count: usize,
}

pub fn convergence(records: &BTreeMap<Algorithm, Vec<RunRecord>>) -> Vec<ConvergenceRow> {
    let mut rows = Vec::new();
    for (a, runs) in records {
        let len = runs.iter().map(|r| r.iterations.len()).max().unwrap_or(0);
        for t in 0..len {
            let vals: Vec<f64> = runs
                .iter()
                .filter_map(|r| r.iterations.get(t).and_then(|it| it.best_feasible))
                .collect();
            let mean = (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64);
            rows.push(ConvergenceRow { algorithm: *a, iter: t + 1, mean_best_feasible: mean, count: vals.len() });
        }
    }
    rows
}

pub fn write_convergence<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "iter", "mean_best_feasible", "count"])?;
    for r in rows {
        w.write_record([
            r.algorithm.name().to_string(),
            r.iter.to_string(),
            r.mean_best_feasible.map(|v| v.to_string()).unwrap_or_default(),
            r.count.to_string(),
        ])?;
    }
    w.flush().map_err(HarnessError::io("<csv>"))?;
    Ok(())
}
