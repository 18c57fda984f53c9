//! Corpus × method × budget experiments and their report.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{self, AgentConfig, AgentError, Pipeline};
use crate::cnf::CnfFormula;
use crate::env::EnvConfig;
use crate::{par, seed};

pub const CSV_HEADER: [&str; 8] =
    ["instance", "method", "budget", "unsat_min", "unsat_max", "unsat_mean", "unsat_var", "runtime_ms"];

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("experiment needs at least one {0}")]
    Empty(&'static str),
    #[error("instance '{instance}', {method}, budget {budget}: {source}")]
    Cell { instance: String, method: Pipeline, budget: usize, source: AgentError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchInstance {
    pub name: String,
    pub formula: CnfFormula,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub methods: Vec<Pipeline>,
    pub budgets: Vec<usize>,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    /// Independent runs per (instance, method, budget).
    pub repeats: usize,
    pub seed: u64,
    /// Wall-clock times are recorded only when set; otherwise reported as 0
    /// so reports stay byte-stable.
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            methods: Pipeline::ALL.to_vec(),
            budgets: vec![100, 1000],
            env: EnvConfig::default(),
            agent: AgentConfig::default(),
            repeats: 1,
            seed: 0,
            record_timing: false,
        }
    }
}

/// Unsatisfied-count statistics; variance is the population variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnsatStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub var: f64,
}

impl UnsatStats {
    pub fn of(counts: &[usize]) -> UnsatStats {
        assert!(!counts.is_empty(), "statistics of an empty sample");
        let n = counts.len() as f64;
        let mean = counts.iter().sum::<usize>() as f64 / n;
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
        UnsatStats {
            min: *counts.iter().min().unwrap(),
            max: *counts.iter().max().unwrap(),
            mean,
            var,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub instance: String,
    pub method: Pipeline,
    pub budget: usize,
    pub unsat: UnsatStats,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Pipeline,
    pub budget: usize,
    pub unsat: UnsatStats,
    /// Runs that satisfied every clause.
    pub solved: usize,
    pub runs: usize,
    pub mean_runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<CellRow>,
    pub summary: Vec<SummaryRow>,
}

struct Outcome {
    unsat: usize,
    runtime_ms: f64,
}

/// Seed of one (instance, repeat) cell. Methods and budgets share it, so
/// QA and SMQC see the same reads and every pipeline is compared on common
/// random numbers.
pub fn cell_seed(root: u64, instance: usize, repeat: usize) -> u64 {
    let inst = seed::derive_indexed(root, "instance", instance as u64);
    seed::derive_indexed(inst, "repeat", repeat as u64)
}

pub fn run_experiment(corpus: &[BenchInstance], cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    if corpus.is_empty() {
        return Err(ExperimentError::Empty("instance"));
    }
    if cfg.methods.is_empty() {
        return Err(ExperimentError::Empty("method"));
    }
    if cfg.budgets.is_empty() {
        return Err(ExperimentError::Empty("budget"));
    }
    if cfg.repeats == 0 {
        return Err(ExperimentError::Empty("repeat"));
    }

    let (nm, nb, nr) = (cfg.methods.len(), cfg.budgets.len(), cfg.repeats);
    let cells: Vec<(usize, usize, usize, usize)> = (0..corpus.len())
        .flat_map(|i| (0..nm).flat_map(move |m| (0..nb).flat_map(move |b| (0..nr).map(move |r| (i, m, b, r)))))
        .collect();

    let outcomes: Vec<Result<Outcome, ExperimentError>> = par::map_slice(&cells, |&(i, m, b, r)| {
        let (method, budget) = (cfg.methods[m], cfg.budgets[b]);
        let res = agent::run(method, &corpus[i].formula, &cfg.env, budget, &cfg.agent, cell_seed(cfg.seed, i, r))
            .map_err(|source| ExperimentError::Cell { instance: corpus[i].name.clone(), method, budget, source })?;
        Ok(Outcome {
            unsat: res.unsat_count,
            runtime_ms: if cfg.record_timing { res.runtime_ms } else { 0.0 },
        })
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;

    // cells are laid out instance-major with repeats innermost
    let mut rows = Vec::with_capacity(corpus.len() * nm * nb);
    for (k, chunk) in outcomes.chunks(nr).enumerate() {
        let (i, m, b, _) = cells[k * nr];
        let counts: Vec<usize> = chunk.iter().map(|o| o.unsat).collect();
        rows.push(CellRow {
            instance: corpus[i].name.clone(),
            method: cfg.methods[m],
            budget: cfg.budgets[b],
            unsat: UnsatStats::of(&counts),
            runtime_ms: chunk.iter().map(|o| o.runtime_ms).sum::<f64>() / nr as f64,
        });
    }

    let mut summary = Vec::with_capacity(nm * nb);
    for (m, &method) in cfg.methods.iter().enumerate() {
        for (b, &budget) in cfg.budgets.iter().enumerate() {
            let runs: Vec<&Outcome> = cells
                .iter()
                .zip(&outcomes)
                .filter(|((_, cm, cb, _), _)| *cm == m && *cb == b)
                .map(|(_, o)| o)
                .collect();
            let counts: Vec<usize> = runs.iter().map(|o| o.unsat).collect();
            summary.push(SummaryRow {
                method,
                budget,
                unsat: UnsatStats::of(&counts),
                solved: counts.iter().filter(|&&c| c == 0).count(),
                runs: runs.len(),
                mean_runtime_ms: runs.iter().map(|o| o.runtime_ms).sum::<f64>() / runs.len() as f64,
            });
        }
    }
    Ok(ExperimentReport { rows, summary })
}

impl ExperimentReport {
    pub fn summary_for(&self, method: Pipeline, budget: usize) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.method == method && s.budget == budget)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ExperimentError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.instance.clone(),
                r.method.to_string(),
                r.budget.to_string(),
                r.unsat.min.to_string(),
                r.unsat.max.to_string(),
                format!("{:.6}", r.unsat.mean),
                format!("{:.6}", r.unsat.var),
                format!("{:.3}", r.runtime_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn summary_json(&self) -> Result<String, ExperimentError> {
        Ok(serde_json::to_string_pretty(&self.summary)?)
    }

    /// Mean unsatisfied clauses, one line per method and one column per
    /// budget.
    pub fn mean_table(&self) -> String {
        let mut budgets: Vec<usize> = self.summary.iter().map(|s| s.budget).collect();
        budgets.dedup();
        budgets.sort_unstable();
        budgets.dedup();
        let mut methods: Vec<Pipeline> = self.summary.iter().map(|s| s.method).collect();
        methods.sort_unstable();
        methods.dedup();

        let mut out = format!("{:<8}", "method");
        for b in &budgets {
            out.push_str(&format!("{:>12}", b));
        }
        out.push('\n');
        for m in methods {
            out.push_str(&format!("{:<8}", m.name()));
            for &b in &budgets {
                match self.summary_for(m, b) {
                    Some(s) => out.push_str(&format!("{:>12.3}", s.unsat.mean)),
                    None => out.push_str(&format!("{:>12}", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}
