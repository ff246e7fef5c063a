//! Search over rendering configurations.
//!
//! A population of [`RenderConfig`](glyphpress_core::RenderConfig)s is
//! evaluated for validation accuracy and compression, ranked under a
//! [`FitnessPolicy`], and varied by mutation, crossover and an optional LLM
//! critic. Every evaluation lands in an append-only JSONL history that also
//! serves to resume an interrupted run.

pub mod critic;
pub mod engine;
pub mod eval;
pub mod fitness;
pub mod history;
pub mod landscape;
pub mod ops;
pub mod remote;

pub use critic::{CriticClient, RemoteCritic};
pub use engine::{run_search, Candidate, Evaluation, Evaluator, SearchOutcome, SearchParams};
pub use eval::{evaluate_config, load_validation_set, Harness, ModelClient, Scorer, ValidationItem};
pub use fitness::FitnessPolicy;
pub use history::{HistoryRecord, JsonlHistory};
pub use ops::{crossover, heuristic_mutate, Field, SearchSpace};
pub use remote::Endpoint;
