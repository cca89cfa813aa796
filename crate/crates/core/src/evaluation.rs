//! Baselines that only work on objects that already exist: multi-criteria
//! evaluation of given alternatives, affine predictor fitting, and
//! propositional forward chaining.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("incomplete model: missing {}", missing.join(", "))]
    IncompleteModel { missing: Vec<&'static str> },
    #[error("malformed parameter {parameter}: {reason}")]
    MalformedParameter { parameter: &'static str, reason: String },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("need at least {needed} observations, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("observation matrix rows have inconsistent lengths or Y has wrong length")]
    ShapeMismatch,
    #[error("degenerate design: columns {} are collinear with earlier columns", format_columns(.collinear))]
    DegenerateDesign { collinear: Vec<usize> },
}

fn format_columns(cols: &[usize]) -> String {
    cols.iter()
        .map(|c| if *c == 0 { "intercept".to_string() } else { format!("x{}", c - 1) })
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("atom {0:?} used but not declared")]
    UndeclaredAtom(String),
}

/// Linear normalization of one dimension onto `[0, 1]`, clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
}

impl Scale {
    pub fn apply(&self, raw: f64) -> f64 {
        ((raw - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Max,
    Min,
}

/// A criterion scores the mean scaled value of its dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub dimensions: Vec<usize>,
    pub direction: Direction,
}

/// Raw parameters as supplied; every field must be present for a model to exist.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvaluationInputs {
    #[serde(default)]
    pub alternatives: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub dimensions: Option<Vec<String>>,
    #[serde(default)]
    pub scales: Option<Vec<Scale>>,
    #[serde(default)]
    pub criteria: Option<Vec<Criterion>>,
    #[serde(default)]
    pub uncertainty: Option<Vec<f64>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationModel {
    alternatives: Vec<Vec<f64>>,
    dimensions: Vec<String>,
    scales: Vec<Scale>,
    criteria: Vec<Criterion>,
    uncertainty: Vec<f64>,
    weights: Vec<f64>,
}

fn malformed(parameter: &'static str, reason: impl Into<String>) -> EvaluationError {
    EvaluationError::MalformedParameter {
        parameter,
        reason: reason.into(),
    }
}

/// Validates the six evaluation parameters (A, D, E, H, U, R) into a model.
pub fn build_evaluation_model(inputs: EvaluationInputs) -> Result<EvaluationModel, EvaluationError> {
    fn take<T>(v: Option<Vec<T>>, label: &'static str, missing: &mut Vec<&'static str>) -> Vec<T> {
        match v {
            Some(v) if !v.is_empty() => v,
            _ => {
                missing.push(label);
                Vec::new()
            }
        }
    }
    let mut missing = Vec::new();
    let alternatives = take(inputs.alternatives, "A", &mut missing);
    let dimensions = take(inputs.dimensions, "D", &mut missing);
    let scales = take(inputs.scales, "E", &mut missing);
    let criteria = take(inputs.criteria, "H", &mut missing);
    let uncertainty = take(inputs.uncertainty, "U", &mut missing);
    let weights = take(inputs.weights, "R", &mut missing);
    if !missing.is_empty() {
        return Err(EvaluationError::IncompleteModel { missing });
    }

    let d = dimensions.len();
    if let Some(i) = alternatives.iter().position(|a| a.len() != d) {
        return Err(malformed("A", format!("alternative {i} has {} values, expected {d}", alternatives[i].len())));
    }
    if alternatives.iter().flatten().any(|v| !v.is_finite()) {
        return Err(malformed("A", "non-finite attribute value"));
    }
    if scales.len() != d {
        return Err(malformed("E", format!("{} scales for {d} dimensions", scales.len())));
    }
    if let Some(i) = scales.iter().position(|s| !(s.min.is_finite() && s.max.is_finite() && s.min < s.max)) {
        return Err(malformed("E", format!("scale {i} must have min < max")));
    }
    for (i, c) in criteria.iter().enumerate() {
        if c.dimensions.is_empty() || c.dimensions.iter().any(|&k| k >= d) {
            return Err(malformed("H", format!("criterion {i} references missing dimensions")));
        }
    }
    if uncertainty.len() != d {
        return Err(malformed("U", format!("{} uncertainty entries for {d} dimensions", uncertainty.len())));
    }
    if uncertainty.iter().any(|u| !u.is_finite() || *u < 0.0) {
        return Err(malformed("U", "standard deviations must be finite and non-negative"));
    }
    if weights.len() != criteria.len() {
        return Err(malformed("R", format!("{} weights for {} criteria", weights.len(), criteria.len())));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(malformed("R", "weights must be non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(malformed("R", format!("weights sum to {total}, expected 1")));
    }
    Ok(EvaluationModel {
        alternatives,
        dimensions,
        scales,
        criteria,
        uncertainty,
        weights,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedAlternative {
    pub alternative_id: usize,
    pub score: f64,
    pub rank: usize,
}

impl EvaluationModel {
    pub fn alternatives(&self) -> &[Vec<f64>] {
        &self.alternatives
    }

    pub fn dimensions(&self) -> &[String] {
        &self.dimensions
    }

    /// Carried alongside the scores; does not alter them.
    pub fn uncertainty(&self) -> &[f64] {
        &self.uncertainty
    }

    fn criterion_score(&self, alt: &[f64], c: &Criterion) -> f64 {
        let mean = c.dimensions.iter().map(|&k| self.scales[k].apply(alt[k])).sum::<f64>() / c.dimensions.len() as f64;
        match c.direction {
            Direction::Max => mean,
            Direction::Min => 1.0 - mean,
        }
    }

    /// Weighted-sum score per alternative, in input order.
    pub fn scores(&self) -> Vec<f64> {
        self.alternatives
            .iter()
            .map(|alt| {
                self.criteria
                    .iter()
                    .zip(&self.weights)
                    .map(|(c, w)| w * self.criterion_score(alt, c))
                    .sum()
            })
            .collect()
    }
}

/// Ranks the given alternatives by descending score; ties keep input order.
pub fn evaluate(model: &EvaluationModel) -> Vec<RankedAlternative> {
    let scores = model.scores();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .enumerate()
        .map(|(rank, id)| RankedAlternative {
            alternative_id: id,
            score: scores[id],
            rank: rank + 1,
        })
        .collect()
}

pub fn ranking_csv(ranking: &[RankedAlternative]) -> String {
    let mut out = String::from("alternative_id,score,rank\n");
    for r in ranking {
        let _ = writeln!(out, "{},{},{}", r.alternative_id, r.score, r.rank);
    }
    out
}

/// Affine predictor `f(x) = w0 + w1 x1 + ... + wp xp`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    pub weights: Vec<f64>,
    /// Mean squared training error.
    pub loss: f64,
}

impl Predictor {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.weights[0] + self.weights[1..].iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

pub fn squared_loss(weights: &[f64], x: &[Vec<f64>], y: &[f64]) -> f64 {
    let p = Predictor {
        weights: weights.to_vec(),
        loss: 0.0,
    };
    x.iter().zip(y).map(|(row, t)| (p.predict(row) - t).powi(2)).sum::<f64>() / y.len() as f64
}

/// Least-squares affine fit via Householder QR of the design matrix `[1 | X]`.
pub fn fit_predictor(x: &[Vec<f64>], y: &[f64]) -> Result<Predictor, FitError> {
    let n = y.len();
    if x.len() != n {
        return Err(FitError::ShapeMismatch);
    }
    let p = x.first().map_or(0, |r| r.len());
    if x.iter().any(|r| r.len() != p) {
        return Err(FitError::ShapeMismatch);
    }
    let cols = p + 1;
    if n < cols {
        return Err(FitError::InsufficientSamples { needed: cols, got: n });
    }

    // column-major copy of the design matrix
    let mut a: Vec<Vec<f64>> = (0..cols)
        .map(|j| x.iter().map(|row| if j == 0 { 1.0 } else { row[j - 1] }).collect())
        .collect();
    let mut b = y.to_vec();
    let col_norms: Vec<f64> = a.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();

    let mut collinear = Vec::new();
    for k in 0..cols {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-10 * col_norms[k].max(1.0) {
            collinear.push(k);
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(k) {
            let dot: f64 = v.iter().zip(&col[k..]).map(|(vi, ci)| vi * ci).sum();
            let f = 2.0 * dot / vnorm2;
            for (ci, vi) in col[k..].iter_mut().zip(&v) {
                *ci -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&b[k..]).map(|(vi, bi)| vi * bi).sum();
        let f = 2.0 * dot / vnorm2;
        for (bi, vi) in b[k..].iter_mut().zip(&v) {
            *bi -= f * vi;
        }
    }
    if !collinear.is_empty() {
        return Err(FitError::DegenerateDesign { collinear });
    }

    let mut w = vec![0.0; cols];
    for k in (0..cols).rev() {
        let s: f64 = (k + 1..cols).map(|j| a[j][k] * w[j]).sum();
        w[k] = (b[k] - s) / a[k][k];
    }
    let loss = squared_loss(&w, x, y);
    Ok(Predictor { weights: w, loss })
}

/// Atoms, facts and single-antecedent implications.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropositionalTheory {
    pub atoms: BTreeSet<String>,
    pub facts: BTreeSet<String>,
    /// `(antecedent, consequent)` pairs.
    pub rules: BTreeSet<(String, String)>,
}

impl PropositionalTheory {
    pub fn validate(&self) -> Result<(), TheoryError> {
        for a in self.facts.iter().chain(self.rules.iter().flat_map(|(p, q)| [p, q])) {
            if !self.atoms.contains(a) {
                return Err(TheoryError::UndeclaredAtom(a.clone()));
            }
        }
        Ok(())
    }
}

/// Least fixpoint of modus ponens over the theory's facts and rules.
pub fn deductive_closure(theory: &PropositionalTheory) -> BTreeSet<String> {
    let mut known = theory.facts.clone();
    loop {
        let derived: Vec<&String> = theory
            .rules
            .iter()
            .filter(|(p, q)| known.contains(p) && !known.contains(q))
            .map(|(_, q)| q)
            .collect();
        if derived.is_empty() {
            return known;
        }
        known.extend(derived.into_iter().cloned());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs_two_by_one() -> EvaluationInputs {
        EvaluationInputs {
            alternatives: Some(vec![vec![3.0], vec![5.0]]),
            dimensions: Some(vec!["quality".into()]),
            scales: Some(vec![Scale { min: 0.0, max: 10.0 }]),
            criteria: Some(vec![Criterion {
                dimensions: vec![0],
                direction: Direction::Max,
            }]),
            uncertainty: Some(vec![0.0]),
            weights: Some(vec![1.0]),
        }
    }

    #[test]
    fn complete_model_ranks_single_criterion() {
        let model = build_evaluation_model(inputs_two_by_one()).unwrap();
        let r = evaluate(&model);
        assert_eq!(r[0].alternative_id, 1);
        assert!((r[0].score - 0.5).abs() < 1e-12);
        assert!((r[1].score - 0.3).abs() < 1e-12);
        assert_eq!(evaluate(&model), r);
    }

    #[test]
    fn missing_parameters_are_named() {
        let mut i = inputs_two_by_one();
        i.criteria = None;
        assert_eq!(
            build_evaluation_model(i.clone()),
            Err(EvaluationError::IncompleteModel { missing: vec!["H"] })
        );
        i.uncertainty = Some(vec![]);
        i.alternatives = None;
        assert_eq!(
            build_evaluation_model(i),
            Err(EvaluationError::IncompleteModel {
                missing: vec!["A", "H", "U"]
            })
        );
    }

    #[test]
    fn weights_must_sum_to_one() {
        let mut i = inputs_two_by_one();
        i.weights = Some(vec![0.8]);
        assert!(matches!(
            build_evaluation_model(i),
            Err(EvaluationError::MalformedParameter { parameter: "R", .. })
        ));
    }

    #[test]
    fn equal_weight_two_criteria() {
        let model = build_evaluation_model(EvaluationInputs {
            alternatives: Some(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]),
            dimensions: Some(vec!["a".into(), "b".into()]),
            scales: Some(vec![Scale { min: 0.0, max: 1.0 }; 2]),
            criteria: Some(vec![
                Criterion { dimensions: vec![0], direction: Direction::Max },
                Criterion { dimensions: vec![1], direction: Direction::Max },
            ]),
            uncertainty: Some(vec![0.0, 0.0]),
            weights: Some(vec![0.5, 0.5]),
        })
        .unwrap();
        assert_eq!(model.scores(), vec![0.5, 0.5, 1.0]);
        let r = evaluate(&model);
        assert_eq!(r.iter().map(|a| a.alternative_id).collect::<Vec<_>>(), vec![2, 0, 1]);
        assert_eq!(
            ranking_csv(&r),
            "alternative_id,score,rank\n2,1,1\n0,0.5,2\n1,0.5,3\n"
        );
    }

    #[test]
    fn exact_linear_fit() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let p = fit_predictor(&x, &[0.0, 2.0, 4.0]).unwrap();
        assert!((p.weights[0]).abs() < 1e-12 && (p.weights[1] - 2.0).abs() < 1e-12);
        assert!(p.loss < 1e-20);
        let p = fit_predictor(&x, &[7.0, 7.0, 7.0]).unwrap();
        assert!((p.weights[0] - 7.0).abs() < 1e-12 && p.weights[1].abs() < 1e-12);
    }

    #[test]
    fn collinear_columns_reported() {
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        assert_eq!(
            fit_predictor(&x, &[1.0, 2.0, 3.0, 4.0, 5.0]),
            Err(FitError::DegenerateDesign { collinear: vec![2] })
        );
        let x: Vec<Vec<f64>> = (0..5).map(|_| vec![3.0]).collect();
        assert_eq!(
            fit_predictor(&x, &[1.0, 2.0, 3.0, 4.0, 5.0]),
            Err(FitError::DegenerateDesign { collinear: vec![1] })
        );
        assert!(matches!(
            fit_predictor(&[vec![1.0]], &[1.0]),
            Err(FitError::InsufficientSamples { .. })
        ));
    }

    fn theory(facts: &[&str], rules: &[(&str, &str)], extra: &[&str]) -> PropositionalTheory {
        let mut t = PropositionalTheory::default();
        for f in facts {
            t.facts.insert(f.to_string());
        }
        for (p, q) in rules {
            t.rules.insert((p.to_string(), q.to_string()));
            t.atoms.insert(p.to_string());
            t.atoms.insert(q.to_string());
        }
        t.atoms.extend(facts.iter().chain(extra).map(|s| s.to_string()));
        t
    }

    #[test]
    fn modus_ponens() {
        let t = theory(&["P"], &[("P", "Q")], &[]);
        assert_eq!(deductive_closure(&t), BTreeSet::from(["P".to_string(), "Q".to_string()]));
        let t = theory(&[], &[("P", "Q")], &[]);
        assert!(deductive_closure(&t).is_empty());
        let t = theory(&["A"], &[("A", "B"), ("B", "C"), ("D", "E")], &[]);
        assert_eq!(
            deductive_closure(&t),
            ["A", "B", "C"].iter().map(|s| s.to_string()).collect()
        );
    }

    #[test]
    fn undeclared_atoms_rejected() {
        let mut t = theory(&["P"], &[], &[]);
        t.facts.insert("Z".into());
        assert_eq!(t.validate(), Err(TheoryError::UndeclaredAtom("Z".into())));
    }
}
