//! The three solution pipelines.
//!
//! * **QA**: encode with `ρ = 0`, sample the whole budget, keep the read with
//!   the fewest unsatisfied clauses.
//! * **SMQC**: as QA, then an MQC tournament over the batch and SQC.
//! * **RQA**: up to `T` episodes. Each episode encodes with the influence
//!   factors of the automaton's current probabilities, samples its share of
//!   the budget, post-processes, and feeds `β = 1 − |Φ|/M` back to the
//!   automaton with the satisfied clauses as the taken set. The per-episode
//!   bests form a hall-of-fame that is merged by MQC + SQC at the end.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automaton::{AutomatonError, AutomatonState, Feedback, DEFAULT_THETA1, DEFAULT_THETA2};
use crate::cnf::{Assignment, CnfError, CnfFormula};
use crate::encoder::{self, EncodeError, Encoding, PairPolicy};
use crate::env::{self, EnvConfig, EnvError};
use crate::ising::{IsingError, IsingModel, SpinVector};
use crate::postprocess::{self, PostprocessError};
use crate::seed;

pub const DEFAULT_EPISODES: usize = 10;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("read budget {budget} is smaller than the episode count {episodes}")]
    BudgetTooSmall { budget: usize, episodes: usize },
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Postprocess(#[from] PostprocessError),
    #[error(transparent)]
    Ising(#[from] IsingError),
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Qa,
    Smqc,
    Rqa,
}

impl Pipeline {
    pub const ALL: [Pipeline; 3] = [Pipeline::Qa, Pipeline::Smqc, Pipeline::Rqa];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Qa => "qa",
            Pipeline::Smqc => "smqc",
            Pipeline::Rqa => "rqa",
        }
    }
}

impl std::fmt::Display for Pipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Pipeline {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qa" => Ok(Pipeline::Qa),
            "smqc" => Ok(Pipeline::Smqc),
            "rqa" => Ok(Pipeline::Rqa),
            other => Err(format!("unknown method '{other}' (expected qa, smqc or rqa)")),
        }
    }
}

/// Which clauses count as the automaton's taken actions after an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TakenSet {
    #[default]
    Satisfied,
    Unsatisfied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub episodes: usize,
    pub theta1: f64,
    pub theta2: f64,
    #[serde(default)]
    pub taken_set: TakenSet,
    #[serde(default)]
    pub pair_policy: PairPolicy,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            episodes: DEFAULT_EPISODES,
            theta1: DEFAULT_THETA1,
            theta2: DEFAULT_THETA2,
            taken_set: TakenSet::Satisfied,
            pair_policy: PairPolicy::ClauseInternal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// 1-based episode index.
    pub t: usize,
    /// Automaton probabilities the episode was encoded from.
    pub p: Vec<f64>,
    pub rho: Vec<f64>,
    pub qmi: Encoding,
    pub reads: usize,
    /// Best post-processed sample of the episode.
    pub z: SpinVector,
    /// Energy of `z` under this episode's programmed model.
    pub energy: f64,
    /// Clauses unsatisfied by `z`.
    pub unsatisfied: Vec<usize>,
    pub beta: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub pipeline: Pipeline,
    pub assignment: Assignment,
    pub unsatisfied: Vec<usize>,
    pub unsat_count: usize,
    /// Final energy under the QMI used for the last selection step.
    pub energy: f64,
    /// QMI of QA/SMQC, or of RQA's last episode.
    pub qmi: Encoding,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub episodes: Vec<EpisodeRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hall_of_fame: Vec<SpinVector>,
    pub reads_used: usize,
    pub runtime_ms: f64,
}

impl RunResult {
    pub fn is_satisfied(&self) -> bool {
        self.unsat_count == 0
    }

    /// Zeroes every wall-clock field, for byte-stable records.
    pub fn without_timing(mut self) -> Self {
        self.runtime_ms = 0.0;
        for e in &mut self.episodes {
            e.wall_ms = 0.0;
        }
        self
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn env_for(env: &EnvConfig, seed: u64, role: &str) -> EnvConfig {
    env.with_seed(seed::derive(seed, role))
}

/// Index of the best candidate by (unsatisfied count, energy, position).
fn best_by_clauses(
    formula: &CnfFormula,
    enc: &Encoding,
    model: &IsingModel,
    candidates: &[SpinVector],
) -> Result<(usize, Vec<usize>, f64), AgentError> {
    let mut best: Option<(usize, Vec<usize>, f64)> = None;
    for (k, z) in candidates.iter().enumerate() {
        let unsat = formula.unsatisfied_clauses(&enc.decode(z)?)?;
        let e = model.energy(z)?;
        let better = match &best {
            None => true,
            Some((_, bu, be)) => unsat.len() < bu.len() || unsat.len() == bu.len() && e < *be,
        };
        if better {
            best = Some((k, unsat, e));
        }
    }
    best.ok_or(AgentError::Postprocess(PostprocessError::EmptyBatch))
}

pub fn run_qa(formula: &CnfFormula, env: &EnvConfig, budget: usize, seed: u64) -> Result<RunResult, AgentError> {
    run_qa_with(formula, env, budget, seed, PairPolicy::default())
}

fn run_qa_with(
    formula: &CnfFormula,
    env: &EnvConfig,
    budget: usize,
    seed: u64,
    policy: PairPolicy,
) -> Result<RunResult, AgentError> {
    if budget == 0 {
        return Err(AgentError::BudgetTooSmall { budget, episodes: 1 });
    }
    let start = Instant::now();
    let qmi = encoder::encode_with(formula, &vec![0.0; formula.num_clauses()], policy)?;
    let batch = env::sample(&qmi.model, budget, &env_for(env, seed, "sample"))?;
    let (k, unsatisfied, energy) = best_by_clauses(formula, &qmi, &batch.programmed, &batch.samples)?;
    let assignment = qmi.decode(&batch.samples[k])?;
    Ok(RunResult {
        pipeline: Pipeline::Qa,
        unsat_count: unsatisfied.len(),
        assignment,
        unsatisfied,
        energy,
        qmi,
        episodes: Vec::new(),
        hall_of_fame: Vec::new(),
        reads_used: batch.len(),
        runtime_ms: elapsed_ms(start),
    })
}

pub fn run_smqc(formula: &CnfFormula, env: &EnvConfig, budget: usize, seed: u64) -> Result<RunResult, AgentError> {
    run_smqc_with(formula, env, budget, seed, PairPolicy::default())
}

fn run_smqc_with(
    formula: &CnfFormula,
    env: &EnvConfig,
    budget: usize,
    seed: u64,
    policy: PairPolicy,
) -> Result<RunResult, AgentError> {
    if budget == 0 {
        return Err(AgentError::BudgetTooSmall { budget, episodes: 1 });
    }
    let start = Instant::now();
    let qmi = encoder::encode_with(formula, &vec![0.0; formula.num_clauses()], policy)?;
    let batch = env::sample(&qmi.model, budget, &env_for(env, seed, "sample"))?;
    let merged = postprocess::mqc_tournament(&batch.programmed, &batch.samples)?;
    let z = postprocess::sqc(&batch.programmed, &merged)?;
    let assignment = qmi.decode(&z)?;
    let unsatisfied = formula.unsatisfied_clauses(&assignment)?;
    Ok(RunResult {
        pipeline: Pipeline::Smqc,
        unsat_count: unsatisfied.len(),
        assignment,
        unsatisfied,
        energy: batch.programmed.energy(&z)?,
        qmi,
        episodes: Vec::new(),
        hall_of_fame: Vec::new(),
        reads_used: batch.len(),
        runtime_ms: elapsed_ms(start),
    })
}

/// Reads per episode: `floor(budget / T)`, with the remainder added to the
/// first episode.
pub fn episode_reads(budget: usize, episodes: usize, t: usize) -> usize {
    budget / episodes + if t == 1 { budget % episodes } else { 0 }
}

pub fn run_rqa(
    formula: &CnfFormula,
    env: &EnvConfig,
    budget: usize,
    cfg: &AgentConfig,
    seed: u64,
) -> Result<RunResult, AgentError> {
    if cfg.episodes == 0 {
        return Err(AgentError::InvalidConfig("episodes must be >= 1".into()));
    }
    if budget < cfg.episodes {
        return Err(AgentError::BudgetTooSmall { budget, episodes: cfg.episodes });
    }
    let start = Instant::now();
    let m = formula.num_clauses();
    let mut automaton = AutomatonState::uniform(m.max(1), cfg.theta1, cfg.theta2)?;
    let mut episodes: Vec<EpisodeRecord> = Vec::with_capacity(cfg.episodes);
    let mut hall_of_fame = Vec::with_capacity(cfg.episodes);
    let mut reads_used = 0;

    for t in 1..=cfg.episodes {
        let ep_start = Instant::now();
        let rho = if m == 0 { Vec::new() } else { automaton.influence_factors(m)? };
        let qmi = encoder::encode_with(formula, &rho, cfg.pair_policy)?;
        let reads = episode_reads(budget, cfg.episodes, t);
        let batch = env::sample(&qmi.model, reads, &env_for(env, seed, &format!("episode/{t}")))?;
        reads_used += batch.len();

        // candidates: the merged batch first, then every read descended alone
        let merged = postprocess::mqc_tournament(&batch.programmed, &batch.samples)?;
        let mut candidates = Vec::with_capacity(batch.len() + 1);
        candidates.push(postprocess::sqc(&batch.programmed, &merged)?);
        for s in &batch.samples {
            candidates.push(postprocess::sqc(&batch.programmed, s)?);
        }
        let (k, unsatisfied, energy) = best_by_clauses(formula, &qmi, &batch.programmed, &candidates)?;
        let z = candidates.swap_remove(k);
        let beta = if m == 0 { 1.0 } else { 1.0 - unsatisfied.len() as f64 / m as f64 };

        let p_used = automaton.p.clone();
        if m > 0 {
            let mut is_unsat = vec![false; m];
            for &i in &unsatisfied {
                is_unsat[i] = true;
            }
            let want_unsat = cfg.taken_set == TakenSet::Unsatisfied;
            let taken = (0..m).filter(|&i| is_unsat[i] == want_unsat).collect();
            automaton = automaton.update_multi(&Feedback { taken, beta })?;
        }
        hall_of_fame.push(z.clone());
        let solved = unsatisfied.is_empty();
        episodes.push(EpisodeRecord {
            t,
            p: p_used,
            rho,
            qmi,
            reads: batch.len(),
            z,
            energy,
            unsatisfied,
            beta,
            wall_ms: elapsed_ms(ep_start),
        });
        if solved {
            break;
        }
    }

    let last = episodes.last().expect("at least one episode ran");
    let qmi = last.qmi.clone();
    let model = qmi.model.clamp_to_hardware();
    let merged = postprocess::mqc_tournament(&model, &hall_of_fame)?;
    let z = postprocess::sqc(&model, &merged)?;
    let assignment = qmi.decode(&z)?;
    let unsatisfied = formula.unsatisfied_clauses(&assignment)?;
    Ok(RunResult {
        pipeline: Pipeline::Rqa,
        unsat_count: unsatisfied.len(),
        assignment,
        unsatisfied,
        energy: model.energy(&z)?,
        qmi,
        episodes,
        hall_of_fame,
        reads_used,
        runtime_ms: elapsed_ms(start),
    })
}

/// Dispatches to the pipeline's runner.
pub fn run(
    pipeline: Pipeline,
    formula: &CnfFormula,
    env: &EnvConfig,
    budget: usize,
    cfg: &AgentConfig,
    seed: u64,
) -> Result<RunResult, AgentError> {
    match pipeline {
        Pipeline::Qa => run_qa_with(formula, env, budget, seed, cfg.pair_policy),
        Pipeline::Smqc => run_smqc_with(formula, env, budget, seed, cfg.pair_policy),
        Pipeline::Rqa => run_rqa(formula, env, budget, cfg, seed),
    }
}
