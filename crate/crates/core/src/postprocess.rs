//! Classical corrections applied to annealer samples.
//!
//! Multi-qubit correction (MQC) merges two samples: spins where they agree
//! are kept, and each connected component of the disagreement region (under
//! the nonzero-coupler graph) independently takes whichever parent's values
//! give the lower energy, counting couplers to the agreed region. Components
//! share no couplers, so the merged energy never exceeds either parent's.
//!
//! Single-qubit correction (SQC) is greedy single-flip descent.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::{IsingError, IsingModel, SpinVector};

/// Flips must lower the energy by more than this.
pub const FLIP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PostprocessError {
    #[error("cannot run a tournament over an empty batch")]
    EmptyBatch,
    #[error(transparent)]
    Ising(#[from] IsingError),
}

/// One connected component of the spins where two samples differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisagreementComponent {
    pub spins: Vec<usize>,
}

/// Components of `{i : a_i ≠ b_i}`, each sorted, ordered by smallest spin.
pub fn disagreement_components(
    adj: &[Vec<(usize, f64)>],
    a: &SpinVector,
    b: &SpinVector,
) -> Vec<DisagreementComponent> {
    let n = a.len();
    let differs: Vec<bool> = a.spins().iter().zip(b.spins()).map(|(x, y)| x != y).collect();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if !differs[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut spins = Vec::new();
        while let Some(i) = stack.pop() {
            spins.push(i);
            for &(k, _) in &adj[i] {
                if differs[k] && !seen[k] {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        spins.sort_unstable();
        out.push(DisagreementComponent { spins });
    }
    out
}

/// Energy terms that involve `comp` when its spins take `values`' entries,
/// with all other spins read from `rest`.
fn component_energy(
    model: &IsingModel,
    adj: &[Vec<(usize, f64)>],
    comp: &[usize],
    in_comp: &[bool],
    values: &[i8],
    rest: &[i8],
) -> f64 {
    let mut e = 0.0;
    for &i in comp {
        let zi = values[i] as f64;
        e += model.h()[i] * zi;
        for &(k, v) in &adj[i] {
            if in_comp[k] {
                // internal coupler, counted once
                if k > i {
                    e += v * zi * values[k] as f64;
                }
            } else {
                e += v * zi * rest[k] as f64;
            }
        }
    }
    e
}

pub fn mqc_combine(model: &IsingModel, a: &SpinVector, b: &SpinVector) -> Result<SpinVector, IsingError> {
    let adj = model.adjacency();
    mqc_combine_with(model, &adj, a, b)
}

fn mqc_combine_with(
    model: &IsingModel,
    adj: &[Vec<(usize, f64)>],
    a: &SpinVector,
    b: &SpinVector,
) -> Result<SpinVector, IsingError> {
    let n = model.num_spins();
    for len in [a.len(), b.len()] {
        if len != n {
            return Err(IsingError::LengthMismatch { expected: n, got: len });
        }
    }
    let mut out = a.clone();
    let mut in_comp = vec![false; n];
    for comp in disagreement_components(adj, a, b) {
        for &i in &comp.spins {
            in_comp[i] = true;
        }
        // outside the component a and b agree except on other components,
        // which share no couplers with this one
        let ea = component_energy(model, adj, &comp.spins, &in_comp, a.spins(), a.spins());
        let eb = component_energy(model, adj, &comp.spins, &in_comp, b.spins(), a.spins());
        if eb < ea {
            let dst = out.spins_mut();
            for &i in &comp.spins {
                dst[i] = b.spins()[i];
            }
        }
        for &i in &comp.spins {
            in_comp[i] = false;
        }
    }
    Ok(out)
}

/// Left fold of [`mqc_combine`] over `batch` in order.
pub fn mqc_tournament(model: &IsingModel, batch: &[SpinVector]) -> Result<SpinVector, PostprocessError> {
    let (first, rest) = batch.split_first().ok_or(PostprocessError::EmptyBatch)?;
    let adj = model.adjacency();
    let mut winner = first.clone();
    for z in rest {
        winner = mqc_combine_with(model, &adj, &winner, z)?;
    }
    Ok(winner)
}

/// Sweeps spins in index order, flipping whenever that strictly lowers the
/// energy, until a sweep makes no flip (or `10·N` sweeps have run).
pub fn sqc(model: &IsingModel, z: &SpinVector) -> Result<SpinVector, IsingError> {
    let n = model.num_spins();
    if z.len() != n {
        return Err(IsingError::LengthMismatch { expected: n, got: z.len() });
    }
    let adj = model.adjacency();
    let mut out = z.clone();
    let spins = out.spins_mut();
    let max_sweeps = (10 * n).max(1);
    for _ in 0..max_sweeps {
        let mut flipped = false;
        for i in 0..n {
            if model.flip_delta(&adj, spins, i) < -FLIP_TOLERANCE {
                spins[i] = -spins[i];
                flipped = true;
            }
        }
        if !flipped {
            break;
        }
    }
    Ok(out)
}

/// True when no single flip lowers the energy by more than [`FLIP_TOLERANCE`].
pub fn is_one_flip_minimal(model: &IsingModel, z: &SpinVector) -> bool {
    let adj = model.adjacency();
    (0..model.num_spins()).all(|i| model.flip_delta(&adj, z.spins(), i) >= -FLIP_TOLERANCE)
}
