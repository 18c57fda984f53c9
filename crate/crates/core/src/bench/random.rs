//! Uniform random 3-SAT.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng as _;
use thiserror::Error;

use crate::cnf::{self, Clause, CnfFormula, Literal};
use crate::seed;

/// Clause-to-variable ratio of the uf50-218 family.
pub const DEFAULT_RATIO: f64 = 4.36;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RandomSatError {
    #[error("random 3-SAT needs at least 3 variables, got {0}")]
    TooFewVars(usize),
    #[error("clause ratio must be positive and finite, got {0}")]
    BadRatio(f64),
    #[error("{wanted} distinct clauses requested but only {available} exist over {n} variables")]
    TooManyClauses { wanted: usize, available: u128, n: usize },
    #[error("no satisfiable instance found after {0} attempts")]
    Exhausted(usize),
}

pub fn clause_count(n_vars: usize, ratio: f64) -> usize {
    (ratio * n_vars as f64).round() as usize
}

/// `round(ratio·n)` distinct clauses, each over 3 distinct variables with
/// uniform signs.
pub fn gen_random_3sat(n_vars: usize, ratio: f64, seed: u64) -> Result<CnfFormula, RandomSatError> {
    if n_vars < 3 {
        return Err(RandomSatError::TooFewVars(n_vars));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(RandomSatError::BadRatio(ratio));
    }
    let m = clause_count(n_vars, ratio);
    let n = n_vars as u128;
    let available = n * (n - 1) * (n - 2) / 6 * 8;
    if m as u128 > available {
        return Err(RandomSatError::TooManyClauses { wanted: m, available, n: n_vars });
    }

    let mut rng = seed::rng(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let lits: Vec<Literal> = index::sample(&mut rng, n_vars, 3)
            .into_iter()
            .map(|v| Literal::new(v as u32 + 1, rng.gen()).expect("variable is nonzero"))
            .collect();
        let clause = Clause::new(lits).expect("distinct variables never form a tautology");
        if seen.insert(clause.clone()) {
            clauses.push(clause);
        }
    }
    Ok(CnfFormula::new(n_vars, clauses).expect("variables are in range"))
}

/// The first `count` satisfiable draws from the seeded stream
/// `derive_indexed(seed, "random3sat", k)`, k = 0, 1, …
pub fn gen_satisfiable_3sat(
    count: usize,
    n_vars: usize,
    ratio: f64,
    seed: u64,
) -> Result<Vec<CnfFormula>, RandomSatError> {
    let max_attempts = count.saturating_mul(1000).max(1000);
    let mut out = Vec::with_capacity(count);
    for k in 0..max_attempts {
        if out.len() == count {
            return Ok(out);
        }
        let f = gen_random_3sat(n_vars, ratio, seed::derive_indexed(seed, "random3sat", k as u64))?;
        if cnf::find_model(&f).is_some() {
            out.push(f);
        }
    }
    if out.len() == count {
        Ok(out)
    } else {
        Err(RandomSatError::Exhausted(max_attempts))
    }
}
