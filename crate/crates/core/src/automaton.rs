//! S-type learning automaton with a multi-action update.
//!
//! The environment answers each episode with a continuous response
//! `β ∈ [0, 1]` (1 = best). With a single action `i`:
//!
//! ```text
//! p_j ← p_j − θ₂(1−β)p_j + θ₁β(1−p_j)              j = i
//! p_j ← p_j + θ₂(1−β)(1/(r−1) − p_i) − θ₁βp_j      j ≠ i
//! ```
//!
//! With a set of taken actions `α̂` (`r̂ = |α̂|`, `p̂ = Σ_{α̂} p`), taken
//! actions use the first row and the others use
//!
//! ```text
//! p_j ← p_j − θ₂(1−β)(1/(r−r̂) − p̂) − θ₁β(r̂ − p̂)/(r−r̂)
//! ```
//!
//! Both updates are followed by clamping to `[0, 1]` and renormalizing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Simplex tolerance asserted after every update.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_THETA1: f64 = 0.1;
pub const DEFAULT_THETA2: f64 = 0.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AutomatonError {
    #[error("feedback β = {0} is outside [0, 1]")]
    BetaOutOfRange(f64),
    #[error("learning factor {0} is outside [0, 1]")]
    ThetaOutOfRange(f64),
    #[error("action {action} out of range for {actions} actions")]
    BadAction { action: usize, actions: usize },
    #[error("expected {expected} actions, automaton has {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("an automaton needs at least one action")]
    NoActions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutomatonState {
    pub p: Vec<f64>,
    pub theta1: f64,
    pub theta2: f64,
}

/// Multi-action feedback: the taken set `α̂` and response `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    pub taken: Vec<usize>,
    pub beta: f64,
}

impl AutomatonState {
    /// Uniform probabilities over `actions` actions.
    pub fn uniform(actions: usize, theta1: f64, theta2: f64) -> Result<Self, AutomatonError> {
        if actions == 0 {
            return Err(AutomatonError::NoActions);
        }
        for t in [theta1, theta2] {
            if !(0.0..=1.0).contains(&t) {
                return Err(AutomatonError::ThetaOutOfRange(t));
            }
        }
        Ok(AutomatonState { p: vec![1.0 / actions as f64; actions], theta1, theta2 })
    }

    pub fn actions(&self) -> usize {
        self.p.len()
    }

    fn check_beta(beta: f64) -> Result<(), AutomatonError> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(AutomatonError::BetaOutOfRange(beta));
        }
        Ok(())
    }

    /// Raw single-action update, before clamping and renormalization.
    pub fn raw_update_single(&self, action: usize, beta: f64) -> Result<Vec<f64>, AutomatonError> {
        Self::check_beta(beta)?;
        let r = self.actions();
        if action >= r {
            return Err(AutomatonError::BadAction { action, actions: r });
        }
        let (t1, t2) = (self.theta1, self.theta2);
        let pi = self.p[action];
        let spread = if r > 1 { 1.0 / (r - 1) as f64 } else { 0.0 };
        Ok(self
            .p
            .iter()
            .enumerate()
            .map(|(j, &pj)| {
                if j == action {
                    pj - t2 * (1.0 - beta) * pj + t1 * beta * (1.0 - pj)
                } else {
                    pj + t2 * (1.0 - beta) * (spread - pi) - t1 * beta * pj
                }
            })
            .collect())
    }

    pub fn update_single(&self, action: usize, beta: f64) -> Result<AutomatonState, AutomatonError> {
        let raw = self.raw_update_single(action, beta)?;
        Ok(self.with_p(normalize(raw, &self.p)))
    }

    /// Raw multi-action update. `None` when the taken set is empty or covers
    /// every action; those feedbacks leave `p` unchanged.
    pub fn raw_update_multi(&self, fb: &Feedback) -> Result<Option<Vec<f64>>, AutomatonError> {
        Self::check_beta(fb.beta)?;
        let r = self.actions();
        let mut taken = vec![false; r];
        for &a in &fb.taken {
            if a >= r {
                return Err(AutomatonError::BadAction { action: a, actions: r });
            }
            taken[a] = true;
        }
        let r_hat = taken.iter().filter(|&&t| t).count();
        if r_hat == 0 || r_hat == r {
            return Ok(None);
        }
        let (t1, t2, beta) = (self.theta1, self.theta2, fb.beta);
        let p_hat: f64 = self.p.iter().zip(&taken).filter(|(_, &t)| t).map(|(p, _)| p).sum();
        let rest = (r - r_hat) as f64;
        let others = t2 * (1.0 - beta) * (1.0 / rest - p_hat) + t1 * beta * (r_hat as f64 - p_hat) / rest;
        Ok(Some(
            self.p
                .iter()
                .zip(&taken)
                .map(|(&pj, &t)| {
                    if t {
                        pj - t2 * (1.0 - beta) * pj + t1 * beta * (1.0 - pj)
                    } else {
                        pj - others
                    }
                })
                .collect(),
        ))
    }

    pub fn update_multi(&self, fb: &Feedback) -> Result<AutomatonState, AutomatonError> {
        match self.raw_update_multi(fb)? {
            None => Ok(self.clone()),
            Some(raw) => Ok(self.with_p(normalize(raw, &self.p))),
        }
    }

    /// `ρ_i = 1/M − p_i`.
    pub fn influence_factors(&self, clauses: usize) -> Result<Vec<f64>, AutomatonError> {
        if clauses != self.actions() {
            return Err(AutomatonError::SizeMismatch { expected: clauses, got: self.actions() });
        }
        let base = 1.0 / clauses as f64;
        Ok(self.p.iter().map(|p| base - p).collect())
    }

    pub fn is_on_simplex(&self) -> bool {
        let sum: f64 = self.p.iter().sum();
        (sum - 1.0).abs() <= SIMPLEX_TOLERANCE && self.p.iter().all(|p| (0.0..=1.0).contains(p))
    }

    fn with_p(&self, p: Vec<f64>) -> AutomatonState {
        AutomatonState { p, theta1: self.theta1, theta2: self.theta2 }
    }
}

/// Clamps to `[0, 1]` and rescales to sum 1. If everything clamps to zero
/// the previous vector is kept.
fn normalize(raw: Vec<f64>, previous: &[f64]) -> Vec<f64> {
    let clamped: Vec<f64> = raw.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let sum: f64 = clamped.iter().sum();
    if !(sum > 0.0) {
        return previous.to_vec();
    }
    clamped.into_iter().map(|v| v / sum).collect()
}
