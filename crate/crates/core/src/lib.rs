//! Reinforcement quantum annealing workbench.
//!
//! SAT instances are encoded into Ising models by linear programming
//! ([`encoder`]), sampled by a simulated annealer environment ([`env`]),
//! corrected classically ([`postprocess`]) and, in the reinforcement
//! pipeline, re-encoded with clause influence factors learned by a
//! multi-action learning automaton ([`automaton`], [`agent`]).

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod automaton;
pub mod bench;
pub mod cnf;
pub mod encoder;
pub mod env;
pub mod ising;
pub mod lp;
pub mod par;
pub mod postprocess;
pub mod seed;

pub use cnf::{Assignment, Clause, CnfFormula, Literal};
pub use ising::{Gauge, IsingModel, SpinVector};
