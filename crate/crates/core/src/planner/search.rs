use std::collections::{HashSet, VecDeque};
use std::hash::Hash;

use serde::{Deserialize, Serialize};

/// A deterministic state graph that the planner can explore.
pub trait TransitionSystem {
    type State: Clone + Eq + Hash;
    type Action: Clone;

    fn initial(&self) -> Self::State;
    fn is_goal(&self, state: &Self::State) -> bool;
    /// Successors in a fixed order; BFS ties are broken by this order.
    fn successors(&self, state: &Self::State) -> Vec<(Self::Action, Self::State)>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_expansions: usize,
    pub max_plan_length: usize,
}

impl SearchBudget {
    pub fn new(max_expansions: usize, max_plan_length: usize) -> Self {
        Self {
            max_expansions,
            max_plan_length,
        }
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_expansions: 100_000,
            max_plan_length: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Breadth-first; returns a shortest plan.
    Bfs,
    /// Depth-first with backtracking on revisited states.
    Dfs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Found<A> {
    pub steps: Vec<A>,
    pub expansions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchFailure {
    /// Every reachable state was expanded without meeting the goal.
    Unsolvable { expansions: usize },
    /// The expansion or depth budget ran out first.
    BudgetExceeded { expansions: usize },
}

impl SearchFailure {
    pub fn expansions(&self) -> usize {
        match *self {
            SearchFailure::Unsolvable { expansions } | SearchFailure::BudgetExceeded { expansions } => expansions,
        }
    }
}

impl std::fmt::Display for SearchFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SearchFailure::Unsolvable { expansions } => {
                write!(f, "unsolvable: state space exhausted after {expansions} expansions")
            }
            SearchFailure::BudgetExceeded { expansions } => {
                write!(f, "budget exceeded after {expansions} expansions")
            }
        }
    }
}

struct Node<S, A> {
    state: S,
    parent: usize,
    action: Option<A>,
    depth: usize,
}

fn unwind<S, A: Clone>(nodes: &[Node<S, A>], mut idx: usize) -> Vec<A> {
    let mut steps = Vec::new();
    while let Some(a) = &nodes[idx].action {
        steps.push(a.clone());
        idx = nodes[idx].parent;
    }
    steps.reverse();
    steps
}

pub fn search<T: TransitionSystem>(
    system: &T,
    budget: SearchBudget,
    strategy: Strategy,
) -> Result<Found<T::Action>, SearchFailure> {
    match strategy {
        Strategy::Bfs => bfs(system, budget),
        Strategy::Dfs => dfs(system, budget),
    }
}

fn bfs<T: TransitionSystem>(system: &T, budget: SearchBudget) -> Result<Found<T::Action>, SearchFailure> {
    let start = system.initial();
    let mut visited = HashSet::new();
    visited.insert(start.clone());
    let mut nodes = vec![Node {
        state: start,
        parent: 0,
        action: None,
        depth: 0,
    }];
    let mut frontier = VecDeque::from([0usize]);
    let mut expansions = 0;
    let mut pruned = false;

    while let Some(idx) = frontier.pop_front() {
        if system.is_goal(&nodes[idx].state) {
            return Ok(Found {
                steps: unwind(&nodes, idx),
                expansions,
            });
        }
        if nodes[idx].depth >= budget.max_plan_length {
            pruned = true;
            continue;
        }
        if expansions >= budget.max_expansions {
            return Err(SearchFailure::BudgetExceeded { expansions });
        }
        expansions += 1;
        let depth = nodes[idx].depth + 1;
        for (action, next) in system.successors(&nodes[idx].state) {
            if visited.insert(next.clone()) {
                nodes.push(Node {
                    state: next,
                    parent: idx,
                    action: Some(action),
                    depth,
                });
                frontier.push_back(nodes.len() - 1);
            }
        }
    }
    if pruned {
        Err(SearchFailure::BudgetExceeded { expansions })
    } else {
        Err(SearchFailure::Unsolvable { expansions })
    }
}

fn dfs<T: TransitionSystem>(system: &T, budget: SearchBudget) -> Result<Found<T::Action>, SearchFailure> {
    struct Frame<S, A> {
        successors: Vec<(A, S)>,
        next: usize,
    }

    let start = system.initial();
    if system.is_goal(&start) {
        return Ok(Found {
            steps: Vec::new(),
            expansions: 0,
        });
    }
    let mut visited = HashSet::new();
    visited.insert(start.clone());
    let mut expansions = 0;
    let mut pruned = false;
    let mut path: Vec<T::Action> = Vec::new();
    let mut stack: Vec<Frame<T::State, T::Action>> = Vec::new();

    if budget.max_plan_length == 0 {
        return Err(SearchFailure::BudgetExceeded { expansions });
    }
    if budget.max_expansions == 0 {
        return Err(SearchFailure::BudgetExceeded { expansions });
    }
    expansions += 1;
    stack.push(Frame {
        successors: system.successors(&start),
        next: 0,
    });

    while let Some(frame) = stack.last_mut() {
        if frame.next >= frame.successors.len() {
            // dead end: backtrack to the previous configuration
            stack.pop();
            path.pop();
            continue;
        }
        let (action, state) = frame.successors[frame.next].clone();
        frame.next += 1;
        if !visited.insert(state.clone()) {
            continue;
        }
        path.push(action);
        if system.is_goal(&state) {
            return Ok(Found { steps: path, expansions });
        }
        if path.len() >= budget.max_plan_length {
            pruned = true;
            path.pop();
            continue;
        }
        if expansions >= budget.max_expansions {
            return Err(SearchFailure::BudgetExceeded { expansions });
        }
        expansions += 1;
        stack.push(Frame {
            successors: system.successors(&state),
            next: 0,
        });
    }
    if pruned {
        Err(SearchFailure::BudgetExceeded { expansions })
    } else {
        Err(SearchFailure::Unsolvable { expansions })
    }
}

/// Shortest plan that is accepted by `accept`, searching over action
/// sequences rather than states so that alternative routes to an already
/// visited state are still considered.
///
/// A proof of unreachability from plain BFS is returned as `Unsolvable`.
pub fn search_accepted<T, F>(
    system: &T,
    budget: SearchBudget,
    accept: F,
) -> Result<Found<T::Action>, SearchFailure>
where
    T: TransitionSystem,
    F: Fn(&[T::Action]) -> bool,
{
    let first = bfs(system, budget)?;
    if accept(&first.steps) {
        return Ok(first);
    }
    let mut expansions = first.expansions;
    let mut nodes = vec![Node {
        state: system.initial(),
        parent: 0,
        action: None,
        depth: 0,
    }];
    let mut frontier = VecDeque::from([0usize]);
    while let Some(idx) = frontier.pop_front() {
        if system.is_goal(&nodes[idx].state) {
            let steps = unwind(&nodes, idx);
            if accept(&steps) {
                return Ok(Found { steps, expansions });
            }
        }
        if nodes[idx].depth >= budget.max_plan_length {
            continue;
        }
        if expansions >= budget.max_expansions {
            break;
        }
        expansions += 1;
        let depth = nodes[idx].depth + 1;
        for (action, next) in system.successors(&nodes[idx].state) {
            nodes.push(Node {
                state: next,
                parent: idx,
                action: Some(action),
                depth,
            });
            frontier.push_back(nodes.len() - 1);
        }
    }
    Err(SearchFailure::BudgetExceeded { expansions })
}
