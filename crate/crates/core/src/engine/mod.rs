//! The metarule-guided learner and its supporting types.
//!
//! [`solve`] proves a task's positive examples by meta-interpretation,
//! extracting a program from the metasubstitutions chosen along the way,
//! then checks the negative examples and backtracks on failure. Iterative
//! deepening over the clause count makes the returned program minimal.

mod registry;
mod search;

pub use registry::{BkRegistry, CompileError, PredId, Primitive, RegistryError, SavedProgram};
pub use search::{solve, solve_with_bounds};

/// Compiled definitions, shared with the independent interpreter.
pub(crate) mod registry_internal {
    pub(crate) use super::registry::{CompiledClause, Def};
}

use std::fmt;
use std::hash::Hash;
use std::time::Duration;

use thiserror::Error;

use crate::logic::Program;

/// A domain state threaded through proofs. `Goal` is the output
/// specification an example's second argument carries: an exact state for
/// fully ground examples, or a weaker constraint when the domain declares
/// the output slot existential.
pub trait State: Clone + Eq + Hash + fmt::Debug + Send + Sync + 'static {
    type Goal: Clone + PartialEq + fmt::Debug + Send + Sync + 'static;

    fn satisfies(&self, goal: &Self::Goal) -> bool;
}

/// One example atom `f(input, goal)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Example<S: State> {
    pub input: S,
    pub goal: S::Goal,
}

/// A named learning task: positive and negative example atoms of one
/// target predicate.
#[derive(Debug, Clone)]
pub struct Task<S: State> {
    pub name: String,
    pub positives: Vec<Example<S>>,
    pub negatives: Vec<Example<S>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaskError {
    #[error("task {0:?}: name is not a valid identifier")]
    BadName(String),
    #[error("task {0:?}: no positive examples")]
    NoPositives(String),
    #[error("task {0:?}: an example appears as both positive and negative")]
    Overlap(String),
}

impl<S: State> Task<S> {
    pub fn new(
        name: &str,
        positives: Vec<Example<S>>,
        negatives: Vec<Example<S>>,
    ) -> Result<Self, TaskError> {
        if crate::logic::PredicateSymbol::new(name, 2, crate::logic::PredicateKind::LearnedTarget)
            .is_err()
        {
            return Err(TaskError::BadName(name.to_string()));
        }
        if positives.is_empty() {
            return Err(TaskError::NoPositives(name.to_string()));
        }
        if positives.iter().any(|p| negatives.contains(p)) {
            return Err(TaskError::Overlap(name.to_string()));
        }
        Ok(Task { name: name.to_string(), positives, negatives })
    }
}

/// Search configuration for one [`solve`] call.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Metarule names, tried in this order.
    pub metarules: Vec<String>,
    /// Clause bound; iterative deepening runs 1..=max_clauses.
    pub max_clauses: usize,
    /// Wall-clock budget for the whole call.
    pub deadline: Duration,
    /// Whether fresh predicate symbols may be introduced during proofs.
    pub allow_invention: bool,
    /// Optional deterministic budget: the search aborts with `TimedOut`
    /// after this many proof steps regardless of the wall clock.
    pub step_limit: Option<u64>,
}

impl SolveConfig {
    pub fn new(metarules: &[&str], max_clauses: usize, deadline: Duration) -> Self {
        SolveConfig {
            metarules: metarules.iter().map(|s| s.to_string()).collect(),
            max_clauses,
            deadline,
            allow_invention: true,
            step_limit: None,
        }
    }
}

/// Why a [`solve`] call ended.
#[derive(Debug, Clone)]
pub enum SolveResult {
    /// A program entailing every positive and no negative example, with
    /// minimal clause count within the searched bounds.
    Solution(Program),
    /// The complete search space within the clause bound holds no solution.
    Exhausted,
    /// The deadline (or step limit) elapsed before a decision.
    TimedOut,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    /// Metasubstitutions pushed during search.
    pub clauses_tried: u64,
    /// Complete candidate programs that reached the negative-example check.
    pub candidates_checked: u64,
    /// Proof steps executed.
    pub steps: u64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub result: SolveResult,
    pub stats: SolveStats,
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&Program> {
        match &self.result {
            SolveResult::Solution(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_timeout(&self) -> bool {
        matches!(self.result, SolveResult::TimedOut)
    }

    /// Stable one-word label for records and reports.
    pub fn label(&self) -> &'static str {
        match self.result {
            SolveResult::Solution(_) => "solved",
            SolveResult::Exhausted => "exhausted",
            SolveResult::TimedOut => "timed_out",
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    UnknownMetarule(#[from] crate::logic::UnknownMetaRule),
    #[error("task name {0:?} clashes with a registered predicate")]
    NameClash(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Task(#[from] TaskError),
}
