use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::search::TransitionSystem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("cannot parse atom {0:?}")]
    ParseAtom(String),
    #[error("unknown schema {0:?}")]
    UnknownSchema(String),
    #[error("no schema {name:?} accepts arguments {args:?}")]
    NoMatchingSchema { name: String, args: Vec<String> },
    #[error("ground action {name}({}) matches more than one schema", args.join(","))]
    AmbiguousAction { name: String, args: Vec<String> },
    #[error("variable {var} in schema {schema} is not a parameter")]
    UnboundVariable { schema: String, var: String },
    #[error("unknown object {0:?}")]
    UnknownObject(String),
    #[error("unknown predicate {0:?}")]
    UnknownPredicate(String),
    #[error("predicate {0:?} used with inconsistent arities")]
    InconsistentArity(String),
    #[error("action {0} is not applicable")]
    NotApplicable(String),
}

/// A predicate applied to object names, e.g. `on(A,B)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: &str, args: &[&str]) -> Self {
        Self {
            predicate: predicate.to_string(),
            args: args.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args.is_empty() {
            return f.write_str(&self.predicate);
        }
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

impl FromStr for GroundAtom {
    type Err = PlanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PlanError::ParseAtom(s.to_string());
        let s = s.trim();
        let name_ok = |p: &str| !p.is_empty() && p.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-');
        let Some(open) = s.find('(') else {
            // a bare name is a nullary atom
            return if name_ok(s) { Ok(Self { predicate: s.to_string(), args: Vec::new() }) } else { Err(bad()) };
        };
        if !s.ends_with(')') {
            return Err(bad());
        }
        let predicate = s[..open].trim();
        if !name_ok(predicate) {
            return Err(bad());
        }
        let inner = s[open + 1..s.len() - 1].trim();
        let args = if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').map(|a| a.trim().to_string()).collect::<Vec<_>>()
        };
        if args.iter().any(|a| a.is_empty()) {
            return Err(bad());
        }
        Ok(Self {
            predicate: predicate.to_string(),
            args,
        })
    }
}

impl Serialize for GroundAtom {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroundAtom {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A set of ground atoms. Ordered, so hashing and printing are canonical.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorldState {
    pub atoms: BTreeSet<GroundAtom>,
}

impl WorldState {
    pub fn contains(&self, atom: &GroundAtom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn satisfies(&self, goal: &[GroundAtom]) -> bool {
        goal.iter().all(|a| self.atoms.contains(a))
    }
}

impl FromIterator<GroundAtom> for WorldState {
    fn from_iter<I: IntoIterator<Item = GroundAtom>>(iter: I) -> Self {
        Self {
            atoms: iter.into_iter().collect(),
        }
    }
}

/// Schema parameter; `domain: None` ranges over every problem object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "ParameterRepr")]
pub struct Parameter {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ParameterRepr {
    Name(String),
    Full {
        name: String,
        #[serde(default)]
        domain: Option<Vec<String>>,
    },
}

impl From<ParameterRepr> for Parameter {
    fn from(r: ParameterRepr) -> Self {
        match r {
            ParameterRepr::Name(name) => Parameter { name, domain: None },
            ParameterRepr::Full { name, domain } => Parameter { name, domain },
        }
    }
}

impl Parameter {
    pub fn any(name: &str) -> Self {
        Self {
            name: name.to_string(),
            domain: None,
        }
    }

    pub fn within(name: &str, domain: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            domain: Some(domain.iter().map(|s| s.to_string()).collect()),
        }
    }
}

/// STRIPS operator. Arguments of templates starting with `?` are variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<Parameter>,
    #[serde(default)]
    pub preconditions: Vec<GroundAtom>,
    #[serde(default)]
    pub add_list: Vec<GroundAtom>,
    #[serde(default)]
    pub delete_list: Vec<GroundAtom>,
    /// Pairs of parameters that must be bound to different objects.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distinct: Vec<[String; 2]>,
}

fn is_var(arg: &str) -> bool {
    arg.starts_with('?')
}

impl ActionSchema {
    fn templates(&self) -> impl Iterator<Item = &GroundAtom> {
        self.preconditions.iter().chain(&self.add_list).chain(&self.delete_list)
    }

    fn param_index(&self, var: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p.name == var)
    }

    fn accepts(&self, objects: &[String], args: &[String]) -> bool {
        if args.len() != self.parameters.len() {
            return false;
        }
        let typed = self.parameters.iter().zip(args).all(|(p, a)| match &p.domain {
            Some(d) => d.contains(a),
            None => objects.contains(a),
        });
        typed
            && self.distinct.iter().all(|[a, b]| {
                match (self.param_index(a), self.param_index(b)) {
                    (Some(i), Some(j)) => args[i] != args[j],
                    _ => true,
                }
            })
    }

    fn instantiate(&self, atoms: &[GroundAtom], args: &[String]) -> Vec<GroundAtom> {
        atoms
            .iter()
            .map(|t| GroundAtom {
                predicate: t.predicate.clone(),
                args: t
                    .args
                    .iter()
                    .map(|a| match self.param_index(a) {
                        Some(i) if is_var(a) => args[i].clone(),
                        _ => a.clone(),
                    })
                    .collect(),
            })
            .collect()
    }
}

/// A fully instantiated action with its precondition/add/delete atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedAction {
    pub name: String,
    pub args: Vec<String>,
    pub preconditions: Vec<GroundAtom>,
    pub add_list: Vec<GroundAtom>,
    pub delete_list: Vec<GroundAtom>,
}

impl GroundedAction {
    pub fn step(&self) -> PlanStep {
        PlanStep {
            action: self.name.clone(),
            args: self.args.clone(),
        }
    }

    pub fn applicable(&self, state: &WorldState) -> bool {
        self.preconditions.iter().all(|a| state.contains(a))
    }

    /// `(state \ delete) ∪ add`.
    pub fn apply(&self, state: &WorldState) -> Result<WorldState, PlanError> {
        if !self.applicable(state) {
            return Err(PlanError::NotApplicable(self.step().to_string()));
        }
        let mut next = state.clone();
        for a in &self.delete_list {
            next.atoms.remove(a);
        }
        for a in &self.add_list {
            next.atoms.insert(a.clone());
        }
        Ok(next)
    }
}

/// One step of a plan as emitted in JSON: `{"action": "move", "args": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlanStep {
    pub action: String,
    pub args: Vec<String>,
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.action, self.args.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanningProblem {
    pub objects: Vec<String>,
    pub schemas: Vec<ActionSchema>,
    pub initial: WorldState,
    pub goal: Vec<GroundAtom>,
}

impl PlanningProblem {
    /// Checks template variables, object names and predicate arities.
    pub fn validate(&self) -> Result<(), PlanError> {
        fn note<'p>(arity: &mut BTreeMap<&'p str, usize>, atom: &'p GroundAtom) -> Result<(), PlanError> {
            let n = *arity.entry(atom.predicate.as_str()).or_insert(atom.args.len());
            if n != atom.args.len() {
                return Err(PlanError::InconsistentArity(atom.predicate.clone()));
            }
            Ok(())
        }
        let mut arity: BTreeMap<&str, usize> = BTreeMap::new();
        for schema in &self.schemas {
            for t in schema.templates() {
                note(&mut arity, t)?;
                for a in &t.args {
                    if is_var(a) {
                        if schema.param_index(a).is_none() {
                            return Err(PlanError::UnboundVariable {
                                schema: schema.name.clone(),
                                var: a.clone(),
                            });
                        }
                    } else if !self.objects.contains(a) {
                        return Err(PlanError::UnknownObject(a.clone()));
                    }
                }
            }
            for [a, b] in &schema.distinct {
                for v in [a, b] {
                    if schema.param_index(v).is_none() {
                        return Err(PlanError::UnboundVariable {
                            schema: schema.name.clone(),
                            var: v.clone(),
                        });
                    }
                }
            }
        }
        for atom in &self.initial.atoms {
            note(&mut arity, atom)?;
        }
        for atom in &self.goal {
            if !arity.contains_key(atom.predicate.as_str()) {
                return Err(PlanError::UnknownPredicate(atom.predicate.clone()));
            }
            note(&mut arity, atom)?;
        }
        for atom in self.initial.atoms.iter().chain(&self.goal) {
            for a in &atom.args {
                if !self.objects.contains(a) {
                    return Err(PlanError::UnknownObject(a.clone()));
                }
            }
        }
        Ok(())
    }

    /// Grounds `name(args)` against the schema that accepts those arguments.
    pub fn ground(&self, name: &str, args: &[String]) -> Result<GroundedAction, PlanError> {
        let candidates: Vec<&ActionSchema> = self.schemas.iter().filter(|s| s.name == name).collect();
        if candidates.is_empty() {
            return Err(PlanError::UnknownSchema(name.to_string()));
        }
        let mut matching = candidates.into_iter().filter(|s| s.accepts(&self.objects, args));
        let schema = matching.next().ok_or_else(|| PlanError::NoMatchingSchema {
            name: name.to_string(),
            args: args.to_vec(),
        })?;
        if matching.next().is_some() {
            return Err(PlanError::AmbiguousAction {
                name: name.to_string(),
                args: args.to_vec(),
            });
        }
        Ok(GroundedAction {
            name: name.to_string(),
            args: args.to_vec(),
            preconditions: schema.instantiate(&schema.preconditions, args),
            add_list: schema.instantiate(&schema.add_list, args),
            delete_list: schema.instantiate(&schema.delete_list, args),
        })
    }

    pub fn ground_step(&self, step: &PlanStep) -> Result<GroundedAction, PlanError> {
        self.ground(&step.action, &step.args)
    }

    /// Every ground action, ordered lexicographically by (schema name, args).
    pub fn ground_all(&self) -> Result<Vec<GroundedAction>, PlanError> {
        let mut keys: BTreeSet<(String, Vec<String>)> = BTreeSet::new();
        let mut objects = self.objects.clone();
        objects.sort();
        for schema in &self.schemas {
            let domains: Vec<Vec<String>> = schema
                .parameters
                .iter()
                .map(|p| p.domain.clone().unwrap_or_else(|| objects.clone()))
                .collect();
            for args in cartesian(&domains) {
                if schema.accepts(&self.objects, &args) {
                    keys.insert((schema.name.clone(), args));
                }
            }
        }
        keys.into_iter().map(|(name, args)| self.ground(&name, &args)).collect()
    }
}

fn cartesian(domains: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = vec![Vec::new()];
    for d in domains {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// A problem with its ground actions precomputed, ready for search.
pub struct GroundedProblem<'a> {
    pub problem: &'a PlanningProblem,
    pub actions: Vec<GroundedAction>,
}

impl<'a> GroundedProblem<'a> {
    pub fn new(problem: &'a PlanningProblem) -> Result<Self, PlanError> {
        problem.validate()?;
        Ok(Self {
            problem,
            actions: problem.ground_all()?,
        })
    }
}

impl TransitionSystem for GroundedProblem<'_> {
    type State = WorldState;
    type Action = PlanStep;

    fn initial(&self) -> WorldState {
        self.problem.initial.clone()
    }

    fn is_goal(&self, state: &WorldState) -> bool {
        state.satisfies(&self.problem.goal)
    }

    fn successors(&self, state: &WorldState) -> Vec<(PlanStep, WorldState)> {
        self.actions
            .iter()
            .filter(|a| a.applicable(state))
            .map(|a| (a.step(), a.apply(state).expect("applicability checked")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str) -> GroundAtom {
        s.parse().unwrap()
    }

    #[test]
    fn atom_parse_and_print() {
        let a = atom("on(A, B)");
        assert_eq!(a, GroundAtom::new("on", &["A", "B"]));
        assert_eq!(a.to_string(), "on(A,B)");
        assert_eq!(atom("handempty()").args.len(), 0);
        assert!("on(A,".parse::<GroundAtom>().is_err());
        assert!("(A)".parse::<GroundAtom>().is_err());
    }

    #[test]
    fn empty_preconditions_always_applicable() {
        let noop = GroundedAction {
            name: "noop".into(),
            args: vec![],
            preconditions: vec![],
            add_list: vec![],
            delete_list: vec![],
        };
        let state: WorldState = [atom("p(a)")].into_iter().collect();
        assert!(noop.applicable(&WorldState::default()));
        assert_eq!(noop.apply(&state).unwrap(), state);
    }

    #[test]
    fn unbound_template_variable_rejected() {
        let p = PlanningProblem {
            objects: vec!["a".into()],
            schemas: vec![ActionSchema {
                name: "bad".into(),
                parameters: vec![Parameter::any("?x")],
                preconditions: vec![atom("p(?y)")],
                add_list: vec![],
                delete_list: vec![],
                distinct: vec![],
            }],
            initial: WorldState::default(),
            goal: vec![],
        };
        assert!(matches!(p.validate(), Err(PlanError::UnboundVariable { .. })));
    }

    #[test]
    fn goal_must_use_declared_vocabulary() {
        let p = PlanningProblem {
            objects: vec!["a".into()],
            schemas: vec![],
            initial: [atom("p(a)")].into_iter().collect(),
            goal: vec![atom("q(a)")],
        };
        assert_eq!(p.validate(), Err(PlanError::UnknownPredicate("q".into())));
        let p = PlanningProblem {
            goal: vec![atom("p(b)")],
            ..p
        };
        assert_eq!(p.validate(), Err(PlanError::UnknownObject("b".into())));
    }

    #[test]
    fn parameter_shorthand_deserializes() {
        let s: ActionSchema = serde_json::from_str(
            r#"{"name":"m","parameters":["?x",{"name":"?y","domain":["t"]}],"preconditions":["p(?x)"]}"#,
        )
        .unwrap();
        assert_eq!(s.parameters[0], Parameter::any("?x"));
        assert_eq!(s.parameters[1], Parameter::within("?y", &["t"]));
    }
}
