//! Blocks on a table. A concept is a set of goal atoms and realizing it means
//! planning from a fixed starting arrangement.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DesignDomain, OpenReason, RealizeBudget, RealizeContext, Realization};
use crate::exec::Executor;
use crate::language::{
    ActionSpec, ConceptDescription, GroundAction, LanguageError, LanguageState, MethodDescription, PropertyId,
    PropertySpec,
};
use crate::planner::{
    plan_search, search_accepted, validate_plan, ActionSchema, GroundAtom, GroundedProblem, Parameter, PlanSearchError,
    PlanStep, PlanningProblem, SearchBudget, SearchFailure, Strategy, WorldState,
};

pub const TABLE: &str = "table";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaStyle {
    /// A single `move(x, from, to)` operator.
    #[default]
    Move,
    /// A hand that picks up, puts down, stacks and unstacks.
    PickupStack,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlockworldError {
    #[error("at least two blocks are required")]
    TooFewBlocks,
    #[error("block name {0:?} is empty, repeated or reserved")]
    BadName(String),
    #[error("initial state is not physically consistent: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlockworldConfig {
    pub blocks: Vec<String>,
    pub style: SchemaStyle,
    /// Defaults to every block on the table and clear.
    pub initial: Option<WorldState>,
}

impl Default for BlockworldConfig {
    fn default() -> Self {
        Self::with_blocks(&["A", "B", "C"], SchemaStyle::Move)
    }
}

impl BlockworldConfig {
    pub fn with_blocks(blocks: &[&str], style: SchemaStyle) -> Self {
        Self {
            blocks: blocks.iter().map(|b| b.to_string()).collect(),
            style,
            initial: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Blockworld {
    config: BlockworldConfig,
    initial: WorldState,
    properties: Vec<GroundAtom>,
}

fn atom(predicate: &str, args: &[&str]) -> GroundAtom {
    GroundAtom::new(predicate, args)
}

/// Everything on the table and clear (plus an empty hand when the style has one).
pub fn canonical_state(blocks: &[String], style: SchemaStyle) -> WorldState {
    let mut atoms: BTreeSet<GroundAtom> = BTreeSet::new();
    for b in blocks {
        atoms.insert(atom("onTable", &[b]));
        atoms.insert(atom("clear", &[b]));
    }
    if style == SchemaStyle::PickupStack {
        atoms.insert(atom("handempty", &[]));
    }
    WorldState { atoms }
}

/// Checks that each block has exactly one support, there are no cycles, and
/// `clear`/hand atoms agree with the stacking.
pub fn check_consistent(blocks: &[String], style: SchemaStyle, state: &WorldState) -> Result<(), BlockworldError> {
    let bad = |m: String| Err(BlockworldError::Inconsistent(m));
    let known = |s: &String| blocks.contains(s);
    let mut below: Vec<Option<usize>> = vec![None; blocks.len()];
    let mut supports = vec![0usize; blocks.len()];
    let mut held = Vec::new();
    let idx = |s: &str| blocks.iter().position(|b| b == s);
    for a in &state.atoms {
        if !a.args.iter().all(known) {
            return bad(format!("{a} mentions an unknown block"));
        }
        match (a.predicate.as_str(), a.args.len()) {
            ("on", 2) => {
                let (x, y) = (idx(&a.args[0]).unwrap(), idx(&a.args[1]).unwrap());
                if x == y {
                    return bad(format!("{a} puts a block on itself"));
                }
                below[x] = Some(y);
                supports[x] += 1;
            }
            ("onTable", 1) => supports[idx(&a.args[0]).unwrap()] += 1,
            ("holding", 1) if style == SchemaStyle::PickupStack => {
                let x = idx(&a.args[0]).unwrap();
                held.push(x);
                supports[x] += 1;
            }
            ("clear", 1) => {}
            ("handempty", 0) if style == SchemaStyle::PickupStack => {}
            _ => return bad(format!("unexpected atom {a}")),
        }
    }
    if let Some(i) = supports.iter().position(|&n| n != 1) {
        return bad(format!("block {} has {} supports", blocks[i], supports[i]));
    }
    for start in 0..blocks.len() {
        let mut cur = start;
        for _ in 0..=blocks.len() {
            match below[cur] {
                Some(next) => cur = next,
                None => break,
            }
        }
        if below[cur].is_some() {
            return bad(format!("stack through {} is cyclic", blocks[start]));
        }
    }
    for (i, b) in blocks.iter().enumerate() {
        let covered = below.iter().filter(|&&y| y == Some(i)).count();
        if covered > 1 {
            return bad(format!("{covered} blocks sit on {b}"));
        }
        let should_be_clear = covered == 0 && !held.contains(&i);
        if state.contains(&atom("clear", &[b])) != should_be_clear {
            return bad(format!("clear({b}) disagrees with the stacking"));
        }
    }
    if style == SchemaStyle::PickupStack {
        if held.len() > 1 {
            return bad("the hand holds more than one block".into());
        }
        if state.contains(&atom("handempty", &[])) != held.is_empty() {
            return bad("handempty disagrees with the hand".into());
        }
    }
    Ok(())
}

fn schema(
    name: &str,
    parameters: Vec<Parameter>,
    pre: &[&str],
    add: &[&str],
    del: &[&str],
    distinct: &[[&str; 2]],
) -> ActionSchema {
    let atoms = |xs: &[&str]| xs.iter().map(|s| s.parse().expect("schema atom")).collect();
    ActionSchema {
        name: name.to_string(),
        parameters,
        preconditions: atoms(pre),
        add_list: atoms(add),
        delete_list: atoms(del),
        distinct: distinct.iter().map(|[a, b]| [a.to_string(), b.to_string()]).collect(),
    }
}

pub fn schemas(blocks: &[String], style: SchemaStyle) -> Vec<ActionSchema> {
    let b: Vec<&str> = blocks.iter().map(String::as_str).collect();
    let block = |n: &str| Parameter::within(n, &b);
    match style {
        SchemaStyle::Move => vec![
            schema(
                "move",
                vec![block("?x"), block("?from"), block("?to")],
                &["on(?x,?from)", "clear(?x)", "clear(?to)"],
                &["on(?x,?to)", "clear(?from)"],
                &["on(?x,?from)", "clear(?to)"],
                &[["?x", "?from"], ["?x", "?to"], ["?from", "?to"]],
            ),
            schema(
                "move",
                vec![block("?x"), block("?from"), Parameter::within("?to", &[TABLE])],
                &["on(?x,?from)", "clear(?x)"],
                &["onTable(?x)", "clear(?from)"],
                &["on(?x,?from)"],
                &[["?x", "?from"]],
            ),
            schema(
                "move",
                vec![block("?x"), Parameter::within("?from", &[TABLE]), block("?to")],
                &["onTable(?x)", "clear(?x)", "clear(?to)"],
                &["on(?x,?to)"],
                &["onTable(?x)", "clear(?to)"],
                &[["?x", "?to"]],
            ),
        ],
        SchemaStyle::PickupStack => vec![
            schema(
                "pickup",
                vec![block("?x")],
                &["onTable(?x)", "clear(?x)", "handempty"],
                &["holding(?x)"],
                &["onTable(?x)", "clear(?x)", "handempty"],
                &[],
            ),
            schema(
                "putdown",
                vec![block("?x")],
                &["holding(?x)"],
                &["onTable(?x)", "clear(?x)", "handempty"],
                &["holding(?x)"],
                &[],
            ),
            schema(
                "stack",
                vec![block("?x"), block("?y")],
                &["holding(?x)", "clear(?y)"],
                &["on(?x,?y)", "clear(?x)", "handempty"],
                &["holding(?x)", "clear(?y)"],
                &[["?x", "?y"]],
            ),
            schema(
                "unstack",
                vec![block("?x"), block("?y")],
                &["on(?x,?y)", "clear(?x)", "handempty"],
                &["holding(?x)", "clear(?y)"],
                &["on(?x,?y)", "clear(?x)", "handempty"],
                &[["?x", "?y"]],
            ),
        ],
    }
}

/// Goal atoms a concept may use: `on(x,y)` for `x != y`, then `onTable(x)`.
pub fn enumerate_goal_atoms(blocks: &[String]) -> Vec<GroundAtom> {
    let mut out = Vec::new();
    for x in blocks {
        for y in blocks {
            if x != y {
                out.push(atom("on", &[x, y]));
            }
        }
    }
    out.extend(blocks.iter().map(|x| atom("onTable", &[x])));
    out
}

/// Problem over the given blocks from `initial` to `goal`.
pub fn problem(blocks: &[String], style: SchemaStyle, initial: WorldState, goal: Vec<GroundAtom>) -> PlanningProblem {
    let mut objects = blocks.to_vec();
    if style == SchemaStyle::Move {
        objects.push(TABLE.to_string());
    }
    PlanningProblem {
        objects,
        schemas: schemas(blocks, style),
        initial,
        goal,
    }
}

impl Blockworld {
    pub fn new(config: BlockworldConfig) -> Result<Self, BlockworldError> {
        if config.blocks.len() < 2 {
            return Err(BlockworldError::TooFewBlocks);
        }
        for (i, b) in config.blocks.iter().enumerate() {
            let valid = !b.is_empty()
                && b != TABLE
                && !b.starts_with('?')
                && b.chars().all(|c| c.is_alphanumeric() || c == '_')
                && !config.blocks[..i].contains(b);
            if !valid {
                return Err(BlockworldError::BadName(b.clone()));
            }
        }
        let initial = config
            .initial
            .clone()
            .unwrap_or_else(|| canonical_state(&config.blocks, config.style));
        check_consistent(&config.blocks, config.style, &initial)?;
        let properties = enumerate_goal_atoms(&config.blocks);
        Ok(Self {
            config,
            initial,
            properties,
        })
    }

    pub fn config(&self) -> &BlockworldConfig {
        &self.config
    }

    pub fn initial_state(&self) -> &WorldState {
        &self.initial
    }

    pub fn goal_atoms(&self) -> &[GroundAtom] {
        &self.properties
    }

    /// The planning problem whose goal is exactly the concept's atoms.
    pub fn concept_to_problem(
        &self,
        concept: &ConceptDescription,
        state: &LanguageState,
    ) -> Result<PlanningProblem, LanguageError> {
        let goal = concept
            .properties()
            .iter()
            .map(|&id| {
                let p = state.property(id).ok_or(LanguageError::UnknownProperty(id))?;
                p.name.parse::<GroundAtom>().map_err(|_| LanguageError::UnknownProperty(id))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.problem_for(goal))
    }

    pub fn problem_for(&self, goal: Vec<GroundAtom>) -> PlanningProblem {
        problem(&self.config.blocks, self.config.style, self.initial.clone(), goal)
    }

    /// Language-level form of a plan step.
    pub fn to_ground_action(step: &PlanStep, state: &LanguageState) -> Option<GroundAction> {
        state
            .action_by_name(&step.action)
            .map(|a| GroundAction::new(a.id, step.args.clone()))
    }

    pub fn to_plan_step(action: &GroundAction, state: &LanguageState) -> Option<PlanStep> {
        state.action(action.action).map(|a| PlanStep {
            action: a.name.clone(),
            args: action.args.clone(),
        })
    }

    /// Realizability of every non-empty subset of the goal atoms, by plain
    /// breadth-first search. Subsets are listed in mask order.
    pub fn census(&self, budget: SearchBudget, exec: &Executor) -> Vec<CensusEntry> {
        let n = self.properties.len();
        assert!(n <= 20, "census is exhaustive and limited to 20 atoms");
        let masks: Vec<u64> = (1u64..(1u64 << n)).collect();
        exec.map(&masks, |&mask| {
            let goal: Vec<GroundAtom> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| self.properties[i].clone())
                .collect();
            let verdict = match plan_search(&self.problem_for(goal.clone()), budget, Strategy::Bfs) {
                Ok(plan) => Verdict::Realizable { plan_length: plan.len() },
                Err(PlanSearchError::Failed(SearchFailure::Unsolvable { .. })) => Verdict::Unrealizable,
                Err(_) => Verdict::Unknown,
            };
            CensusEntry {
                properties: (0..n as PropertyId).filter(|i| mask & (1 << i) != 0).collect(),
                goal: goal.iter().map(GroundAtom::to_string).collect(),
                verdict,
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Realizable { plan_length: usize },
    Unrealizable,
    /// The search budget ran out before a verdict.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusEntry {
    /// Property ids as assigned by a fresh language over this domain.
    pub properties: Vec<PropertyId>,
    pub goal: Vec<String>,
    pub verdict: Verdict,
}

impl DesignDomain for Blockworld {
    type Instance = WorldState;

    fn name(&self) -> &str {
        "blockworld"
    }

    fn descriptor_dimension(&self) -> usize {
        self.properties.len()
    }

    fn initial_properties(&self) -> Vec<PropertySpec> {
        self.properties
            .iter()
            .enumerate()
            .map(|(i, a)| PropertySpec::new(a.to_string(), i, 0.5, 1.5))
            .collect()
    }

    fn initial_actions(&self) -> Vec<ActionSpec> {
        let blocks = self.config.blocks.clone();
        let mut with_table = blocks.clone();
        with_table.push(TABLE.to_string());
        match self.config.style {
            SchemaStyle::Move => vec![ActionSpec::new("move", vec![blocks, with_table.clone(), with_table])],
            SchemaStyle::PickupStack => vec![
                ActionSpec::new("pickup", vec![blocks.clone()]),
                ActionSpec::new("putdown", vec![blocks.clone()]),
                ActionSpec::new("stack", vec![blocks.clone(), blocks.clone()]),
                ActionSpec::new("unstack", vec![blocks.clone(), blocks]),
            ],
        }
    }

    fn descriptor(&self, state: &WorldState) -> Vec<f64> {
        self.properties.iter().map(|a| state.contains(a) as u8 as f64).collect()
    }

    fn realize(&self, concept: &ConceptDescription, ctx: &RealizeContext<'_>) -> Result<Realization<WorldState>, OpenReason> {
        let RealizeBudget::Search(budget) = ctx.budget else {
            return Err(OpenReason::BudgetExhausted);
        };
        let problem = self
            .concept_to_problem(concept, ctx.state)
            .map_err(|_| OpenReason::ProvedUnrealizable)?;
        let grounded = GroundedProblem::new(&problem).map_err(|_| OpenReason::ProvedUnrealizable)?;
        let lift = |steps: &[PlanStep]| -> Option<Vec<GroundAction>> {
            steps.iter().map(|s| Self::to_ground_action(s, ctx.state)).collect()
        };
        // an empty plan is not a method, and a method already in the library
        // belongs to another concept
        let accept = |steps: &[PlanStep]| !steps.is_empty() && lift(steps).is_some_and(|m| !ctx.is_taken(&m));
        let found = search_accepted(&grounded, *budget, accept).map_err(|f| match f {
            SearchFailure::Unsolvable { .. } => OpenReason::ProvedUnrealizable,
            SearchFailure::BudgetExceeded { .. } => OpenReason::BudgetExhausted,
        })?;
        let final_state = crate::planner::execute_plan(&problem, &found.steps).expect("planner plans execute");
        Ok(Realization {
            instance: final_state,
            steps: lift(&found.steps).expect("accepted plans lift"),
            provenance: None,
        })
    }

    /// Methods always run from the domain's starting arrangement.
    fn replay(&self, _instance: &WorldState, method: &MethodDescription, state: &LanguageState) -> Option<WorldState> {
        let steps: Vec<PlanStep> = method
            .steps()
            .iter()
            .map(|a| Self::to_plan_step(a, state))
            .collect::<Option<_>>()?;
        crate::planner::execute_plan(&self.problem_for(Vec::new()), &steps)
    }

    fn check_budget(&self, budget: &RealizeBudget) -> Result<(), String> {
        match budget {
            RealizeBudget::Search(_) => Ok(()),
            RealizeBudget::Evolution(_) => Err("the blockworld domain realizes concepts by search".into()),
        }
    }
}

/// True when `method` is a valid plan for the concept's planning problem.
pub fn method_validates(
    world: &Blockworld,
    concept: &ConceptDescription,
    method: &MethodDescription,
    state: &LanguageState,
) -> bool {
    let Ok(problem) = world.concept_to_problem(concept, state) else {
        return false;
    };
    let steps: Option<Vec<PlanStep>> = method.steps().iter().map(|a| Blockworld::to_plan_step(a, state)).collect();
    steps.is_some_and(|s| validate_plan(&problem, &s))
}
