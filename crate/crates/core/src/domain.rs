//! The interface every design domain implements so the conceptive loop can
//! generate concepts over its properties and ask it to realize them.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::exec::Executor;
use crate::language::{
    ActionSpec, ConceptDescription, GroundAction, LanguageError, LanguageState, MethodDescription, PropertyId, PropertySpec,
};
use crate::novelty::EvolutionConfig;
use crate::planner::SearchBudget;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpenReason {
    BudgetExhausted,
    ProvedUnrealizable,
}

/// Resources a domain may spend realizing one concept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealizeBudget {
    Search(SearchBudget),
    Evolution(EvolutionConfig),
}

pub struct RealizeContext<'a> {
    pub state: &'a LanguageState,
    pub budget: &'a RealizeBudget,
    pub exec: &'a Executor,
    /// Seed for any stochastic search the domain runs.
    pub seed: u64,
}

impl RealizeContext<'_> {
    /// True when an identical method is already in the method library.
    pub fn is_taken(&self, steps: &[GroundAction]) -> bool {
        self.state.find_method(steps).is_some()
    }
}

/// An instance satisfying a concept, plus the method that builds or solves it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization<I> {
    pub instance: I,
    pub steps: Vec<GroundAction>,
    /// How the instance itself was produced (e.g. the genome), kept for the record.
    pub provenance: Option<serde_json::Value>,
}

/// New primitives a domain offers to the language.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub properties: Vec<PropertySpec>,
    pub actions: Vec<ActionSpec>,
}

impl Expansion {
    pub fn is_empty(&self) -> bool {
        self.properties.is_empty() && self.actions.is_empty()
    }
}

pub trait DesignDomain: Sync {
    type Instance: Clone + Serialize + DeserializeOwned + Send + Sync;

    fn name(&self) -> &str;
    fn descriptor_dimension(&self) -> usize;
    fn initial_properties(&self) -> Vec<PropertySpec>;
    fn initial_actions(&self) -> Vec<ActionSpec>;
    fn descriptor(&self, instance: &Self::Instance) -> Vec<f64>;

    /// Every property of the concept holds on the instance's descriptor.
    fn satisfies(
        &self,
        instance: &Self::Instance,
        concept: &ConceptDescription,
        state: &LanguageState,
    ) -> Result<bool, LanguageError> {
        descriptor_satisfies(&self.descriptor(instance), concept, state)
    }

    /// Search for an instance of `concept` and a method for it that is not
    /// already in the method library.
    fn realize(&self, concept: &ConceptDescription, ctx: &RealizeContext<'_>) -> Result<Realization<Self::Instance>, OpenReason>;

    /// Re-executes a stored method against its stored instance. Returns the
    /// instance the method produces, or `None` if the method does not run.
    fn replay(&self, instance: &Self::Instance, method: &MethodDescription, state: &LanguageState) -> Option<Self::Instance>;

    /// For a concept the domain has proved unrealizable, a subset that is
    /// already contradictory on its own. Every superset of it is then
    /// unrealizable too, and the loop stops proposing them.
    fn unrealizable_core(&self, _concept: &ConceptDescription, _state: &LanguageState) -> Option<Vec<PropertyId>> {
        None
    }

    /// Primitives the environment can add to the alphabets right now.
    fn expansion(&self, _state: &LanguageState) -> Expansion {
        Expansion::default()
    }

    fn check_budget(&self, _budget: &RealizeBudget) -> Result<(), String> {
        Ok(())
    }
}

pub fn descriptor_satisfies(
    descriptor: &[f64],
    concept: &ConceptDescription,
    state: &LanguageState,
) -> Result<bool, LanguageError> {
    for &id in concept.properties() {
        let p = state.property(id).ok_or(LanguageError::UnknownProperty(id))?;
        let hit = descriptor.get(p.descriptor_axis).is_some_and(|&v| p.bucket.contains(v));
        if !hit {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fraction of the concept's properties the descriptor satisfies.
pub fn descriptor_hit_fraction(descriptor: &[f64], concept: &ConceptDescription, state: &LanguageState) -> f64 {
    if concept.is_empty() {
        return 0.0;
    }
    let hits = concept
        .properties()
        .iter()
        .filter_map(|&id| state.property(id))
        .filter(|p| descriptor.get(p.descriptor_axis).is_some_and(|&v| p.bucket.contains(v)))
        .count();
    hits as f64 / concept.len() as f64
}

/// Two properties on the same axis with disjoint buckets, if the concept has any.
pub fn disjoint_pair(concept: &ConceptDescription, state: &LanguageState) -> Option<[PropertyId; 2]> {
    let props: Vec<_> = concept.properties().iter().filter_map(|&id| state.property(id)).collect();
    props.iter().enumerate().find_map(|(i, a)| {
        props[i + 1..]
            .iter()
            .find(|b| a.descriptor_axis == b.descriptor_axis && !a.bucket.intersects(&b.bucket))
            .map(|b| [a.id, b.id])
    })
}

/// Two properties on the same axis with disjoint buckets can never hold together.
pub fn has_disjoint_buckets(concept: &ConceptDescription, state: &LanguageState) -> bool {
    disjoint_pair(concept, state).is_some()
}
