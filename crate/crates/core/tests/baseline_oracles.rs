use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use brouwer_core::evaluation::{deductive_closure, fit_predictor, squared_loss, PropositionalTheory};

/// Solves `(AᵀA) w = Aᵀy` for the design `[1 | X]`.
fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let p = x[0].len() + 1;
    let a = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { x[i][j - 1] });
    let b = DVector::from_column_slice(y);
    let ata = a.transpose() * &a;
    let atb = a.transpose() * b;
    ata.cholesky().expect("full-rank fixture").solve(&atb).iter().copied().collect()
}

#[test]
fn fit_loss_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..50 {
        let n = rng.random_range(8..60);
        let p = rng.random_range(1..5);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let truth: Vec<f64> = (0..=p).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| truth[0] + r.iter().zip(&truth[1..]).map(|(a, b)| a * b).sum::<f64>() + rng.random_range(-0.5..0.5))
            .collect();
        let fit = fit_predictor(&x, &y).unwrap();
        let oracle = normal_equations(&x, &y);
        let oracle_loss = squared_loss(&oracle, &x, &y);
        assert!((fit.loss - oracle_loss).abs() <= 1e-9, "case {case}: {} vs {oracle_loss}", fit.loss);
        for (a, b) in fit.weights.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-7 * (1.0 + b.abs()), "case {case}");
        }
    }
}

fn random_theory(seed: u64) -> PropositionalTheory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=20);
    let atoms: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let pick = |rng: &mut ChaCha8Rng| atoms[rng.random_range(0..n)].clone();
    let facts = (0..rng.random_range(0..=4)).map(|_| pick(&mut rng)).collect();
    let rules = (0..rng.random_range(0..=30)).map(|_| (pick(&mut rng), pick(&mut rng))).collect();
    PropositionalTheory {
        atoms: atoms.iter().cloned().collect(),
        facts,
        rules,
    }
}

/// Atoms reachable from the facts along rule edges.
fn reachable(theory: &PropositionalTheory) -> BTreeSet<String> {
    let mut seen: BTreeSet<String> = theory.facts.clone();
    let mut queue: VecDeque<String> = seen.iter().cloned().collect();
    while let Some(a) = queue.pop_front() {
        for (p, q) in &theory.rules {
            if *p == a && seen.insert(q.clone()) {
                queue.push_back(q.clone());
            }
        }
    }
    seen
}

#[test]
fn closure_stays_in_vocabulary_on_hundred_theories() {
    for seed in 0..100 {
        let t = random_theory(seed);
        t.validate().unwrap();
        let closure = deductive_closure(&t);
        assert!(closure.is_subset(&t.atoms), "seed {seed} invented an atom");
        assert_eq!(closure, reachable(&t), "seed {seed}");
    }
}

#[test]
fn modus_ponens() {
    let t = PropositionalTheory {
        atoms: ["P", "Q"].map(String::from).into(),
        facts: ["P".to_string()].into(),
        rules: [("P".to_string(), "Q".to_string())].into(),
    };
    assert_eq!(deductive_closure(&t), ["P", "Q"].map(String::from).into());
}

proptest! {
    #[test]
    fn closure_is_idempotent(seed in any::<u64>()) {
        let t = random_theory(seed);
        let once = deductive_closure(&t);
        let again = deductive_closure(&PropositionalTheory { facts: once.clone(), ..t.clone() });
        prop_assert_eq!(once, again);
    }
}
