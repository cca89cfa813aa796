//! Forward state-space planning over STRIPS problems (and any other
//! [`TransitionSystem`]) with breadth-first or backtracking depth-first search
//! under an explicit budget.

mod search;
mod strips;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use search::{search, search_accepted, Found, SearchBudget, SearchFailure, Strategy, TransitionSystem};
pub use strips::{
    ActionSchema, GroundAtom, GroundedAction, GroundedProblem, Parameter, PlanError, PlanStep, PlanningProblem,
    WorldState,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub expansions: usize,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Numbered step listing, one step per line.
    pub fn listing(&self) -> String {
        if self.steps.is_empty() {
            return "(empty plan: goal already holds)\n".to_string();
        }
        self.steps
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{}. {}\n", i + 1, s))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanSearchError {
    #[error(transparent)]
    Invalid(#[from] PlanError),
    #[error("{0}")]
    Failed(SearchFailure),
}

impl PlanSearchError {
    pub fn failure(&self) -> Option<SearchFailure> {
        match self {
            PlanSearchError::Failed(f) => Some(*f),
            PlanSearchError::Invalid(_) => None,
        }
    }
}

pub fn plan_search(
    problem: &PlanningProblem,
    budget: SearchBudget,
    strategy: Strategy,
) -> Result<Plan, PlanSearchError> {
    let grounded = GroundedProblem::new(problem)?;
    search(&grounded, budget, strategy)
        .map(|f| Plan {
            steps: f.steps,
            expansions: f.expansions,
        })
        .map_err(PlanSearchError::Failed)
}

/// Final state after applying `steps` from the initial state, if every step
/// is applicable.
pub fn execute_plan(problem: &PlanningProblem, steps: &[PlanStep]) -> Option<WorldState> {
    let mut state = problem.initial.clone();
    for step in steps {
        let action = problem.ground_step(step).ok()?;
        state = action.apply(&state).ok()?;
    }
    Some(state)
}

/// True iff the steps apply in sequence from the initial state and the final
/// state contains every goal atom.
pub fn validate_plan(problem: &PlanningProblem, steps: &[PlanStep]) -> bool {
    execute_plan(problem, steps).is_some_and(|s| s.satisfies(&problem.goal))
}
