//! Offline engine for skill-aware, budget-constrained model selection.
//!
//! The pipeline runs in four stages, each owned by a module:
//!
//! 1. [`records`] ingests per-instance evaluation outcomes and critic skill
//!    annotations from JSONL fixtures.
//! 2. [`profiling`] turns (task input, reference solution, model output)
//!    triples into skill profiles via a pluggable critic; a deterministic
//!    mock critic keeps the whole pipeline offline.
//! 3. [`taxonomy`] canonicalizes free-text skill phrases into a compact skill
//!    vocabulary (embedding + average-linkage clustering + majority-vote
//!    labels), and [`matrices`] aggregates profiles into the capability
//!    matrix `C`, the task requirement matrix `R`, and the cost vector `c`.
//! 4. [`predictor`] estimates model-task fit (cosine retrieval, masked NMF
//!    imputation, logistic performance prediction) and [`selector`] answers
//!    budget-constrained selection queries with skill-level rationale.
//!
//! [`harness`] evaluates the whole stack with leave-one-out cross-validation
//! against routing baselines and a budget-matched oracle.

pub mod harness;
pub mod matrices;
pub mod predictor;
pub mod profiling;
pub mod records;
pub mod selector;
pub mod taxonomy;
