//! A row of lamp switches. Small enough that every concept can be checked by
//! hand, and optionally able to release one extra switch partway through a
//! run, which makes it the reference domain for language expansion.

use serde::{Deserialize, Serialize};

use crate::domain::{DesignDomain, Expansion, OpenReason, RealizeBudget, RealizeContext, Realization};
use crate::language::{ActionSpec, ConceptDescription, GroundAction, LanguageState, MethodDescription, PropertySpec};
use crate::planner::{search_accepted, SearchFailure, TransitionSystem};

/// A switch that becomes available once the loop reaches `at_iteration`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Release {
    pub at_iteration: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchboardConfig {
    pub switches: usize,
    /// Adds a `bright` property: at least this many lamps lit.
    #[serde(default)]
    pub bright_threshold: Option<usize>,
    #[serde(default)]
    pub release: Option<Release>,
}

#[derive(Debug, Clone)]
pub struct Switchboard {
    config: SwitchboardConfig,
}

/// Lamp states, one per switch (including a not-yet-released one).
pub type Board = Vec<bool>;

impl Switchboard {
    pub fn new(config: SwitchboardConfig) -> Result<Self, String> {
        let total = config.switches + config.release.is_some() as usize;
        if config.switches == 0 {
            return Err("a switchboard needs at least one switch".into());
        }
        if total > 32 {
            return Err("at most 32 switches are supported".into());
        }
        if config.bright_threshold.is_some_and(|t| t == 0 || t > total) {
            return Err("bright_threshold must lie in 1..=total switches".into());
        }
        Ok(Self { config })
    }

    /// Switches that exist at some point of a run.
    pub fn total_switches(&self) -> usize {
        self.config.switches + self.config.release.is_some() as usize
    }

    fn lamp_property(i: usize) -> PropertySpec {
        PropertySpec::new(format!("lit{i}"), i, 0.5, 1.5)
    }

    fn switch_action(i: usize) -> ActionSpec {
        ActionSpec::nullary(format!("set{i}"))
    }

    /// Switch indices whose action is part of the language.
    fn available(&self, state: &LanguageState) -> Vec<(usize, u32)> {
        (0..self.total_switches())
            .filter_map(|i| state.action_by_name(&format!("set{i}")).map(|a| (i, a.id)))
            .collect()
    }

    fn goal_mask(&self, concept: &ConceptDescription, state: &LanguageState) -> Option<(u32, Option<usize>)> {
        let mut mask = 0u32;
        let mut bright = None;
        for &id in concept.properties() {
            let p = state.property(id)?;
            if p.name == "bright" {
                bright = self.config.bright_threshold;
            } else {
                mask |= 1 << p.descriptor_axis;
            }
        }
        Some((mask, bright))
    }
}

struct Panel {
    actions: Vec<(usize, u32)>,
    goal: u32,
    bright: Option<usize>,
}

impl TransitionSystem for Panel {
    type State = u32;
    type Action = GroundAction;

    fn initial(&self) -> u32 {
        0
    }

    fn is_goal(&self, s: &u32) -> bool {
        s & self.goal == self.goal && self.bright.is_none_or(|t| s.count_ones() as usize >= t)
    }

    fn successors(&self, s: &u32) -> Vec<(GroundAction, u32)> {
        self.actions
            .iter()
            .filter(|(i, _)| s & (1 << i) == 0)
            .map(|&(i, id)| (GroundAction::nullary(id), s | (1 << i)))
            .collect()
    }
}

impl DesignDomain for Switchboard {
    type Instance = Board;

    fn name(&self) -> &str {
        "switchboard"
    }

    fn descriptor_dimension(&self) -> usize {
        self.total_switches() + 1
    }

    fn initial_properties(&self) -> Vec<PropertySpec> {
        let mut props: Vec<PropertySpec> = (0..self.config.switches).map(Self::lamp_property).collect();
        if let Some(t) = self.config.bright_threshold {
            props.push(PropertySpec::new("bright", self.total_switches(), t as f64 - 0.5, 1e6));
        }
        props
    }

    fn initial_actions(&self) -> Vec<ActionSpec> {
        (0..self.config.switches).map(Self::switch_action).collect()
    }

    fn descriptor(&self, board: &Board) -> Vec<f64> {
        let mut d: Vec<f64> = board.iter().map(|&b| b as u8 as f64).collect();
        d.resize(self.total_switches(), 0.0);
        d.push(board.iter().filter(|&&b| b).count() as f64);
        d
    }

    fn realize(&self, concept: &ConceptDescription, ctx: &RealizeContext<'_>) -> Result<Realization<Board>, OpenReason> {
        let RealizeBudget::Search(budget) = ctx.budget else {
            return Err(OpenReason::BudgetExhausted);
        };
        let (goal, bright) = self.goal_mask(concept, ctx.state).ok_or(OpenReason::ProvedUnrealizable)?;
        let panel = Panel {
            actions: self.available(ctx.state),
            goal,
            bright,
        };
        let found = search_accepted(&panel, *budget, |steps| !steps.is_empty() && !ctx.is_taken(steps)).map_err(
            |f| match f {
                SearchFailure::Unsolvable { .. } => OpenReason::ProvedUnrealizable,
                SearchFailure::BudgetExceeded { .. } => OpenReason::BudgetExhausted,
            },
        )?;
        let mut board = vec![false; self.total_switches()];
        for step in &found.steps {
            let (i, _) = panel.actions.iter().find(|(_, id)| *id == step.action).expect("action from panel");
            board[*i] = true;
        }
        Ok(Realization {
            instance: board,
            steps: found.steps,
            provenance: None,
        })
    }

    fn replay(&self, _instance: &Board, method: &MethodDescription, state: &LanguageState) -> Option<Board> {
        let mut board = vec![false; self.total_switches()];
        for step in method.steps() {
            let name = &state.action(step.action)?.name;
            let i: usize = name.strip_prefix("set")?.parse().ok()?;
            if *board.get(i)? {
                return None;
            }
            board[i] = true;
        }
        Some(board)
    }

    fn expansion(&self, state: &LanguageState) -> Expansion {
        match self.config.release {
            Some(r) if state.iteration() >= r.at_iteration => {
                let i = self.config.switches;
                Expansion {
                    properties: vec![Self::lamp_property(i)],
                    actions: vec![Self::switch_action(i)],
                }
            }
            _ => Expansion::default(),
        }
    }

    fn check_budget(&self, budget: &RealizeBudget) -> Result<(), String> {
        match budget {
            RealizeBudget::Search(_) => Ok(()),
            RealizeBudget::Evolution(_) => Err("the switchboard domain realizes concepts by search".into()),
        }
    }
}
