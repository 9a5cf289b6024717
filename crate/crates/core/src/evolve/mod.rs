//! A small generational harness for exercising selectors end to end on
//! synthetic problems.

mod fidelity;
mod harness;
mod operators;
mod problems;

pub use fidelity::{fidelity_trace, FidelityMode, FidelityOutcome};
pub use harness::{run_evolution, run_evolution_observed, EvolutionConfig, GenerationRecord, GenerationView, RunOutcome};
pub use operators::{downsample_cases, umad_mutate};
pub use problems::{
    build_problem, Case, ContinuousVector, DiscreteVector, MultiplexerRules, Problem, ProblemConfig,
};
