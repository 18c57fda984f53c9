//! Instance generators and the experiment harness.

pub mod experiment;
pub mod factoring;
pub mod random;

pub use experiment::{run_experiment, BenchInstance, ExperimentConfig, ExperimentError, ExperimentReport};
pub use factoring::{gen_corpus_factoring, gen_factoring, FactoringInstance};
pub use random::{gen_random_3sat, gen_satisfiable_3sat};
