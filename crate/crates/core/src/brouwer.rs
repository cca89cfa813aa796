//! The conceptive loop: imagine a concept that is not yet in the library,
//! choose one freely among the novel candidates, then search for a method
//! that builds it. Failures are kept as open concepts; when no concept can
//! be realized the domain is asked for new primitives.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{DesignDomain, OpenReason, RealizeBudget, RealizeContext, Realization};
use crate::exec::Executor;
use crate::language::{
    ActionId, ConceptDescription, ConceptId, LanguageError, LanguageState, MethodDescription, MethodId, PropertyId,
};

/// Above this alphabet size candidates are sampled instead of enumerated.
pub const ENUMERATION_LIMIT: usize = 10;
/// Largest alphabet for which exact exhaustion (`2^|P| - 1`) is checked.
pub const EXACT_EXHAUSTION_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BrouwerError {
    #[error("property alphabet is empty")]
    EmptyAlphabet,
    #[error("no candidates to choose from")]
    NoCandidates,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Language(#[from] LanguageError),
    #[error("domain returned an unsound realization for {concept}: {reason}")]
    UnsoundRealization { concept: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicyKind {
    MaxNovelty,
    EpsilonGreedy { epsilon: f64 },
    UniformRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeChoicePolicy {
    #[serde(flatten)]
    pub kind: PolicyKind,
    #[serde(default)]
    pub rng_seed: u64,
}

impl FreeChoicePolicy {
    pub fn max_novelty() -> Self {
        Self {
            kind: PolicyKind::MaxNovelty,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrouwerConfig {
    pub max_iterations: usize,
    pub realize_budget: RealizeBudget,
    pub concept_candidate_pool_size: usize,
    pub stall_window: usize,
    pub policy: FreeChoicePolicy,
    #[serde(default)]
    pub rng_seed: u64,
    /// Neighbors used for concept novelty.
    #[serde(default = "default_concept_k")]
    pub concept_k: usize,
}

fn default_concept_k() -> usize {
    5
}

impl BrouwerConfig {
    pub fn validate(&self) -> Result<(), BrouwerError> {
        let bad = |m: &str| Err(BrouwerError::InvalidConfig(m.to_string()));
        if self.max_iterations < 1 {
            return bad("max_iterations must be at least 1");
        }
        if self.concept_candidate_pool_size < 1 {
            return bad("concept_candidate_pool_size must be at least 1");
        }
        if self.stall_window < 1 {
            return bad("stall_window must be at least 1");
        }
        if self.concept_k < 1 {
            return bad("concept_k must be at least 1");
        }
        if let PolicyKind::EpsilonGreedy { epsilon } = self.policy.kind {
            if !(0.0..=1.0).contains(&epsilon) {
                return bad("epsilon must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub concept: ConceptDescription,
    pub novelty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenConcept {
    pub concept: ConceptDescription,
    pub reason: OpenReason,
    pub attempts: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    Exhausted,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::Exhausted => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AddedSymbol {
    Property { id: PropertyId, name: String },
    Action { id: ActionId, name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Realized {
        concept_id: ConceptId,
        method_id: MethodId,
        new_concept: bool,
        new_method: bool,
    },
    Open {
        reason: OpenReason,
    },
    /// No candidate concept could be generated.
    Idle,
    /// A method built for a type given from outside (no concept involved).
    Constructed { method_id: MethodId, new_method: bool },
}

impl Outcome {
    fn label(&self) -> &'static str {
        match self {
            Outcome::Realized { .. } => "realized",
            Outcome::Open {
                reason: OpenReason::BudgetExhausted,
            } => "budget_exhausted",
            Outcome::Open {
                reason: OpenReason::ProvedUnrealizable,
            } => "proved_unrealizable",
            Outcome::Idle => "idle",
            Outcome::Constructed { .. } => "constructed",
        }
    }

    fn inserted_concept(&self) -> bool {
        matches!(self, Outcome::Realized { new_concept: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u64,
    pub candidates: Vec<Candidate>,
    pub chosen: Option<Vec<PropertyId>>,
    pub chosen_novelty: Option<f64>,
    pub outcome: Outcome,
    pub expansion: Vec<AddedSymbol>,
    pub lp_size: usize,
    pub la_size: usize,
    pub open_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub concept_id: Option<ConceptId>,
    pub method_id: MethodId,
    pub instance: serde_json::Value,
    pub provenance: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConceptivenessAudit {
    pub type_creations: usize,
    pub method_creations: usize,
    pub expansions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub domain: String,
    pub status: RunStatus,
    pub state: LanguageState,
    pub open_concepts: Vec<OpenConcept>,
    /// Contradictory property sets learned during the run.
    pub refuted_cores: Vec<Vec<PropertyId>>,
    pub trace: Vec<IterationRecord>,
    pub instances: Vec<InstanceRecord>,
    pub audit: ConceptivenessAudit,
}

impl RunReport {
    pub fn trace_csv(&self) -> String {
        trace_csv(&self.trace)
    }
}

pub fn trace_csv(trace: &[IterationRecord]) -> String {
    let mut out = String::from("iteration,chosen_concept,novelty,outcome,lp_size,la_size,open_count\n");
    for r in trace {
        let chosen = r
            .chosen
            .as_ref()
            .map(|c| c.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        let novelty = r.chosen_novelty.map(|n| n.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iteration,
            chosen,
            novelty,
            r.outcome.label(),
            r.lp_size,
            r.la_size,
            r.open_count
        );
    }
    out
}

/// Mean Jaccard distance to the `k` nearest library concepts; 1.0 for an
/// empty library.
pub fn concept_novelty(candidate: &[PropertyId], library: &[ConceptDescription], k: usize) -> f64 {
    if library.is_empty() {
        return 1.0;
    }
    let mut d: Vec<f64> = library
        .iter()
        .map(|c| crate::language::jaccard_distance(candidate, c.properties()))
        .collect();
    d.sort_by(f64::total_cmp);
    let k = k.clamp(1, d.len());
    d[..k].iter().sum::<f64>() / k as f64
}

fn rank_candidates(cands: &mut [Candidate]) {
    cands.sort_by(|a, b| {
        b.novelty
            .total_cmp(&a.novelty)
            .then_with(|| a.concept.properties().cmp(b.concept.properties()))
    });
}

fn subset_from_mask(ids: &[PropertyId], mask: u64) -> Vec<PropertyId> {
    ids.iter()
        .enumerate()
        .filter(|(i, _)| mask & (1u64 << i) != 0)
        .map(|(_, &id)| id)
        .collect()
}

/// Novel concepts over the current alphabet, ranked by concept novelty
/// (descending, ties to the lexicographically least id tuple). Subsets in
/// the library or rejected by `excluded` are never proposed.
pub fn generate_concept_candidates(
    state: &LanguageState,
    pool_size: usize,
    excluded: &dyn Fn(&[PropertyId]) -> bool,
    k: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Candidate>, BrouwerError> {
    let mut ids: Vec<PropertyId> = state.properties().iter().map(|p| p.id).collect();
    if ids.is_empty() {
        return Err(BrouwerError::EmptyAlphabet);
    }
    ids.sort_unstable();
    let admissible = |subset: &Vec<PropertyId>| !excluded(subset) && !state.contains_concept(subset);
    let score = |subset: Vec<PropertyId>| -> Result<Candidate, BrouwerError> {
        let novelty = concept_novelty(&subset, state.concepts(), k);
        Ok(Candidate {
            concept: state.canonicalize_concept(subset)?,
            novelty,
        })
    };

    let mut found: BTreeSet<Vec<PropertyId>> = BTreeSet::new();
    if ids.len() <= ENUMERATION_LIMIT {
        for mask in 1u64..(1u64 << ids.len()) {
            let subset = subset_from_mask(&ids, mask);
            if admissible(&subset) {
                found.insert(subset);
            }
        }
    } else {
        let attempts = pool_size.saturating_mul(100);
        for _ in 0..attempts {
            if found.len() >= pool_size {
                break;
            }
            let subset: Vec<PropertyId> = ids.iter().copied().filter(|_| rng.random::<bool>()).collect();
            if !subset.is_empty() && admissible(&subset) {
                found.insert(subset);
            }
        }
        if found.is_empty() && ids.len() <= EXACT_EXHAUSTION_LIMIT {
            // sampling came back empty; make sure the space really is exhausted
            for mask in 1u64..(1u64 << ids.len()) {
                let subset = subset_from_mask(&ids, mask);
                if admissible(&subset) {
                    found.insert(subset);
                    if found.len() >= pool_size {
                        break;
                    }
                }
            }
        }
    }
    let mut cands = found.into_iter().map(score).collect::<Result<Vec<_>, _>>()?;
    rank_candidates(&mut cands);
    cands.truncate(pool_size);
    Ok(cands)
}

/// Both slices sorted ascending.
fn is_subset(small: &[PropertyId], big: &[PropertyId]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

fn argmax(candidates: &[Candidate]) -> usize {
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let b = &candidates[best];
        let better = c.novelty > b.novelty
            || (c.novelty == b.novelty && c.concept.properties() < b.concept.properties());
        if better {
            best = i;
        }
    }
    best
}

/// Picks the concept to pursue. Returns an index into `candidates`.
pub fn free_choice(candidates: &[Candidate], policy: PolicyKind, rng: &mut impl Rng) -> Result<usize, BrouwerError> {
    if candidates.is_empty() {
        return Err(BrouwerError::NoCandidates);
    }
    Ok(match policy {
        PolicyKind::MaxNovelty => argmax(candidates),
        PolicyKind::EpsilonGreedy { epsilon } => {
            if rng.random::<f64>() < epsilon {
                rng.random_range(0..candidates.len())
            } else {
                argmax(candidates)
            }
        }
        PolicyKind::UniformRandom => rng.random_range(0..candidates.len()),
    })
}

pub enum RealizeOutcome<I> {
    Realized(Realization<I>),
    Open(OpenConcept),
}

/// Asks the domain for an instance and method, then re-checks both: the
/// instance must satisfy the concept, and replaying the method must give
/// back an instance that satisfies it too.
pub fn realize<D: DesignDomain>(
    domain: &D,
    concept: &ConceptDescription,
    ctx: &RealizeContext<'_>,
) -> Result<RealizeOutcome<D::Instance>, BrouwerError> {
    match domain.realize(concept, ctx) {
        Err(reason) => Ok(RealizeOutcome::Open(OpenConcept {
            concept: concept.clone(),
            reason,
            attempts: 1,
        })),
        Ok(r) => {
            let unsound = |reason: &str| BrouwerError::UnsoundRealization {
                concept: concept.to_string(),
                reason: reason.to_string(),
            };
            if !domain.satisfies(&r.instance, concept, ctx.state)? {
                return Err(unsound("instance does not satisfy the concept"));
            }
            let method = ctx.state.validate_method(r.steps.clone())?;
            let replayed = domain
                .replay(&r.instance, &method, ctx.state)
                .ok_or_else(|| unsound("method does not replay"))?;
            if !domain.satisfies(&replayed, concept, ctx.state)? {
                return Err(unsound("replayed instance does not satisfy the concept"));
            }
            Ok(RealizeOutcome::Realized(r))
        }
    }
}

/// Adds whatever primitives the domain offers, with fresh ids.
pub fn expand_language<D: DesignDomain>(state: &mut LanguageState, domain: &D) -> Result<Vec<AddedSymbol>, BrouwerError> {
    let offer = domain.expansion(state);
    let mut added = Vec::new();
    for p in offer.properties {
        if state.property_by_name(&p.name).is_some() {
            continue;
        }
        let name = p.name.clone();
        let id = state.add_property(p)?;
        added.push(AddedSymbol::Property { id, name });
    }
    for a in offer.actions {
        if state.action_by_name(&a.name).is_some() {
            continue;
        }
        let name = a.name.clone();
        let id = state.add_action(a)?;
        added.push(AddedSymbol::Action { id, name });
    }
    Ok(added)
}

/// True when no further imagination is possible:
/// every non-empty subset of the alphabet is in the library (checked for
/// alphabets up to [`EXACT_EXHAUSTION_LIMIT`]), the last `stall_window`
/// iterations neither inserted a concept nor expanded the language, or the
/// last iteration could not generate any candidate and nothing was added.
pub fn detect_exhaustion(state: &LanguageState, trace: &[IterationRecord], stall_window: usize) -> bool {
    let n = state.properties().len();
    if n > 0 && n <= EXACT_EXHAUSTION_LIMIT && state.concepts().len() == (1usize << n) - 1 {
        return true;
    }
    if stall_window > 0
        && trace.len() >= stall_window
        && trace[trace.len() - stall_window..]
            .iter()
            .all(|r| !r.outcome.inserted_concept() && r.expansion.is_empty())
    {
        return true;
    }
    matches!(trace.last(), Some(r) if r.outcome == Outcome::Idle && r.expansion.is_empty())
}

pub fn audit(report: &RunReport) -> ConceptivenessAudit {
    audit_trace(&report.trace)
}

fn audit_trace(trace: &[IterationRecord]) -> ConceptivenessAudit {
    let mut a = ConceptivenessAudit::default();
    for r in trace {
        match r.outcome {
            Outcome::Realized {
                new_concept, new_method, ..
            } => {
                a.type_creations += new_concept as usize;
                a.method_creations += new_method as usize;
            }
            Outcome::Constructed { new_method, .. } => a.method_creations += new_method as usize,
            Outcome::Open { .. } | Outcome::Idle => {}
        }
        a.expansions += r.expansion.len();
    }
    a
}

/// Per-iteration seed for the domain's inner search.
fn iteration_seed(seed: u64, iteration: u64) -> u64 {
    let mut z = seed ^ iteration.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run<D: DesignDomain>(domain: &D, config: &BrouwerConfig, exec: &Executor) -> Result<RunReport, BrouwerError> {
    config.validate()?;
    domain.check_budget(&config.realize_budget).map_err(BrouwerError::InvalidConfig)?;
    let mut state = LanguageState::new(domain.initial_properties(), domain.initial_actions())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut policy_rng = ChaCha8Rng::seed_from_u64(config.policy.rng_seed);
    let mut open: Vec<OpenConcept> = Vec::new();
    // open concepts that may not be retried until the language grows
    let mut blocked: BTreeSet<Vec<PropertyId>> = BTreeSet::new();
    // contradictory cores reported by the domain; supersets are never proposed
    let mut refuted: Vec<Vec<PropertyId>> = Vec::new();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut instances = Vec::new();
    let mut status = RunStatus::Completed;

    for _ in 0..config.max_iterations {
        let iteration = state.iteration();
        let excluded = |s: &[PropertyId]| blocked.contains(s) || refuted.iter().any(|core| is_subset(core, s));
        let candidates =
            generate_concept_candidates(&state, config.concept_candidate_pool_size, &excluded, config.concept_k, &mut rng)?;

        let (chosen, chosen_novelty, outcome, expansion) = if candidates.is_empty() {
            let added = expand_language(&mut state, domain)?;
            if !added.is_empty() {
                blocked.clear();
            }
            (None, None, Outcome::Idle, added)
        } else {
            let pick = free_choice(&candidates, config.policy.kind, &mut policy_rng)?;
            let concept = candidates[pick].concept.clone();
            let ctx = RealizeContext {
                state: &state,
                budget: &config.realize_budget,
                exec,
                seed: iteration_seed(config.rng_seed, iteration),
            };
            match realize(domain, &concept, &ctx)? {
                RealizeOutcome::Realized(r) => {
                    let method = state.validate_method(r.steps)?;
                    let new_method = state.find_method(method.steps()).is_none();
                    let new_concept = state.insert_concept(concept.clone());
                    let concept_id = state.find_concept(&concept).expect("just inserted");
                    let method_id = state.register_realization(concept_id, method)?;
                    open.retain(|o| o.concept != concept);
                    instances.push(InstanceRecord {
                        concept_id: Some(concept_id),
                        method_id,
                        instance: serde_json::to_value(&r.instance).expect("instances serialize"),
                        provenance: r.provenance,
                    });
                    let outcome = Outcome::Realized {
                        concept_id,
                        method_id,
                        new_concept,
                        new_method,
                    };
                    (Some(concept.properties().to_vec()), Some(candidates[pick].novelty), outcome, Vec::new())
                }
                RealizeOutcome::Open(o) => {
                    let reason = o.reason;
                    match open.iter_mut().find(|x| x.concept == concept) {
                        Some(existing) => existing.attempts += 1,
                        None => open.push(o),
                    }
                    blocked.insert(concept.properties().to_vec());
                    if reason == OpenReason::ProvedUnrealizable {
                        if let Some(core) = domain.unrealizable_core(&concept, &state) {
                            if !refuted.contains(&core) {
                                refuted.push(core);
                            }
                        }
                    }
                    let added = expand_language(&mut state, domain)?;
                    if !added.is_empty() {
                        blocked.clear();
                    }
                    (
                        Some(concept.properties().to_vec()),
                        Some(candidates[pick].novelty),
                        Outcome::Open { reason },
                        added,
                    )
                }
            }
        };

        trace.push(IterationRecord {
            iteration,
            candidates,
            chosen,
            chosen_novelty,
            outcome,
            expansion,
            lp_size: state.concepts().len(),
            la_size: state.methods().len(),
            open_count: open.len(),
        });
        state.advance();
        if detect_exhaustion(&state, &trace, config.stall_window) {
            status = RunStatus::Exhausted;
            break;
        }
    }

    let audit = audit_trace(&trace);
    Ok(RunReport {
        domain: domain.name().to_string(),
        status,
        state,
        open_concepts: open,
        refuted_cores: refuted,
        trace,
        instances,
        audit,
    })
}

/// Report for a construction-only process (a type fixed from outside, only
/// methods produced). Each method becomes one trace iteration.
pub fn construction_report(
    domain: &str,
    mut state: LanguageState,
    products: Vec<(MethodDescription, serde_json::Value)>,
) -> RunReport {
    let mut trace = Vec::new();
    let mut instances = Vec::new();
    for (method, instance) in products {
        let iteration = state.iteration();
        let (method_id, new_method) = state.add_method(method);
        if new_method {
            instances.push(InstanceRecord {
                concept_id: None,
                method_id,
                instance,
                provenance: None,
            });
        }
        trace.push(IterationRecord {
            iteration,
            candidates: Vec::new(),
            chosen: None,
            chosen_novelty: None,
            outcome: Outcome::Constructed { method_id, new_method },
            expansion: Vec::new(),
            lp_size: state.concepts().len(),
            la_size: state.methods().len(),
            open_count: 0,
        });
        state.advance();
    }
    let audit = audit_trace(&trace);
    RunReport {
        domain: domain.to_string(),
        status: RunStatus::Completed,
        state,
        open_concepts: Vec::new(),
        refuted_cores: Vec::new(),
        trace,
        instances,
        audit,
    }
}

/// Replays every stored method against its stored instance and checks that
/// the bound concept still holds. Also checks the dual-ledger invariant.
pub fn check_soundness<D: DesignDomain>(domain: &D, report: &RunReport) -> Result<(), String> {
    let state = &report.state;
    state.check_invariants()?;
    for rec in &report.instances {
        let Some(concept_id) = rec.concept_id else { continue };
        let concept = state.concept(concept_id).ok_or("instance references missing concept")?;
        let method = state.method(rec.method_id).ok_or("instance references missing method")?;
        let instance: D::Instance =
            serde_json::from_value(rec.instance.clone()).map_err(|e| format!("instance does not decode: {e}"))?;
        let replayed = domain
            .replay(&instance, method, state)
            .ok_or_else(|| format!("method {} does not replay", rec.method_id))?;
        if !domain.satisfies(&replayed, concept, state).map_err(|e| e.to_string())? {
            return Err(format!("method {} no longer builds concept {concept_id}", rec.method_id));
        }
        if state.bound_concept(rec.method_id) != Some(concept_id) {
            return Err(format!("method {} is not bound to concept {concept_id}", rec.method_id));
        }
    }
    for (i, _) in state.concepts().iter().enumerate() {
        if !state.realizations().contains_key(&i) {
            return Err(format!("concept {i} has no method"));
        }
    }
    let realized: BTreeSet<&[PropertyId]> = state.concepts().iter().map(|c| c.properties()).collect();
    if report.open_concepts.iter().any(|o| realized.contains(o.concept.properties())) {
        return Err("a concept is both realized and open".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::{ActionSpec, PropertySpec};

    fn state(n: usize) -> LanguageState {
        let props = (0..n).map(|i| PropertySpec::new(format!("p{i}"), i, 0.5, 1.5)).collect();
        LanguageState::new(props, vec![ActionSpec::nullary("a")]).unwrap()
    }

    fn cand(s: &LanguageState, ids: &[PropertyId], novelty: f64) -> Candidate {
        Candidate {
            concept: s.canonicalize_concept(ids.iter().copied()).unwrap(),
            novelty,
        }
    }

    #[test]
    fn empty_library_gives_full_novelty() {
        let s = state(4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = generate_concept_candidates(&s, 100, &|_| false, 5, &mut rng).unwrap();
        assert_eq!(c.len(), 15);
        assert!(c.iter().all(|c| c.novelty == 1.0));
        assert_eq!(c[0].concept.properties(), &[0]);
    }

    #[test]
    fn full_library_gives_no_candidates() {
        let mut s = state(4);
        for mask in 1u64..16 {
            let c = s.canonicalize_concept(subset_from_mask(&[0, 1, 2, 3], mask)).unwrap();
            s.insert_concept(c);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(generate_concept_candidates(&s, 10, &|_| false, 5, &mut rng).unwrap().is_empty());
        assert!(detect_exhaustion(&s, &[], 5));
    }

    #[test]
    fn jaccard_concept_novelty() {
        let mut s = state(3);
        for ids in [[0], [1]] {
            let c = s.canonicalize_concept(ids).unwrap();
            s.insert_concept(c);
        }
        assert_eq!(concept_novelty(&[0, 1], s.concepts(), 5), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = generate_concept_candidates(&s, 100, &|_| false, 5, &mut rng).unwrap();
        let pair = c.iter().find(|c| c.concept.properties() == [0, 1]).unwrap();
        assert_eq!(pair.novelty, 0.5);
        assert!(c.iter().all(|c| !s.contains_concept(c.concept.properties())));
    }

    #[test]
    fn empty_alphabet_is_an_error() {
        let s = LanguageState::new(vec![], vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            generate_concept_candidates(&s, 5, &|_| false, 5, &mut rng),
            Err(BrouwerError::EmptyAlphabet)
        );
    }

    #[test]
    fn sampled_candidates_for_large_alphabets() {
        let s = state(13);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = generate_concept_candidates(&s, 20, &|_| false, 5, &mut rng).unwrap();
        assert_eq!(c.len(), 20);
        let distinct: BTreeSet<_> = c.iter().map(|c| c.concept.properties().to_vec()).collect();
        assert_eq!(distinct.len(), 20);
    }

    #[test]
    fn choice_policies() {
        let s = state(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let one = vec![cand(&s, &[1], 0.3)];
        for p in [
            PolicyKind::MaxNovelty,
            PolicyKind::EpsilonGreedy { epsilon: 0.5 },
            PolicyKind::UniformRandom,
        ] {
            assert_eq!(free_choice(&one, p, &mut rng).unwrap(), 0);
        }
        let tied = vec![cand(&s, &[1, 2], 0.7), cand(&s, &[0, 2], 0.7), cand(&s, &[0], 0.2)];
        assert_eq!(free_choice(&tied, PolicyKind::MaxNovelty, &mut rng).unwrap(), 1);
        for _ in 0..20 {
            assert_eq!(free_choice(&tied, PolicyKind::EpsilonGreedy { epsilon: 0.0 }, &mut rng).unwrap(), 1);
        }
        assert_eq!(free_choice(&[], PolicyKind::MaxNovelty, &mut rng), Err(BrouwerError::NoCandidates));
    }

    #[test]
    fn stall_mode() {
        let s = state(3);
        let rec = |outcome: Outcome| IterationRecord {
            iteration: 0,
            candidates: vec![],
            chosen: Some(vec![0]),
            chosen_novelty: Some(1.0),
            outcome,
            expansion: vec![],
            lp_size: 0,
            la_size: 0,
            open_count: 1,
        };
        assert!(!detect_exhaustion(&s, &[], 5));
        let failed = vec![rec(Outcome::Open { reason: OpenReason::BudgetExhausted }); 5];
        assert!(detect_exhaustion(&s, &failed, 5));
        assert!(!detect_exhaustion(&s, &failed[..4], 5));
        let mut with_expansion = failed.clone();
        with_expansion[2].expansion.push(AddedSymbol::Property { id: 9, name: "x".into() });
        assert!(!detect_exhaustion(&s, &with_expansion, 5));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn max_novelty_is_scale_invariant(
                novelties in proptest::collection::vec(0.0f64..1.0, 1..7),
                scale in 0.001f64..1000.0,
            ) {
                let s = state(3);
                let cands: Vec<Candidate> = novelties
                    .iter()
                    .enumerate()
                    .map(|(i, &n)| cand(&s, &subset_from_mask(&[0, 1, 2], (i + 1) as u64), n))
                    .collect();
                let scaled: Vec<Candidate> = cands
                    .iter()
                    .map(|c| Candidate { concept: c.concept.clone(), novelty: c.novelty * scale })
                    .collect();
                let mut rng = ChaCha8Rng::seed_from_u64(0);
                prop_assert_eq!(
                    free_choice(&cands, PolicyKind::MaxNovelty, &mut rng).unwrap(),
                    free_choice(&scaled, PolicyKind::MaxNovelty, &mut rng).unwrap()
                );
            }
        }
    }
}
