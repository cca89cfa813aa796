use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use brouwer_core::domains::regression::{
    distill, distill_report, eval_expr, generate_dataset, partial, reference_table, ExprError, ExprProgram, Op,
    ProgramSpace, RegressionConfig, System,
};
use brouwer_core::exec::Executor;
use brouwer_core::novelty::{sample_genome, EvolutionConfig, GenomeSpace};

use Op::*;

fn prog(ops: Vec<Op>) -> ExprProgram {
    ExprProgram::new(ops).unwrap()
}

type Gradient = fn(f64, f64) -> [f64; 2];

fn fixtures() -> Vec<(&'static str, ExprProgram, Gradient)> {
    vec![
        ("x^2+y^2", prog(vec![PushVar(0), PushVar(0), Mul, PushVar(1), PushVar(1), Mul, Add]), |x, y| [2.0 * x, 2.0 * y]),
        ("sin(x)*y", prog(vec![PushVar(0), Sin, PushVar(1), Mul]), |x, y| [x.cos() * y, x.sin()]),
        ("x/y", prog(vec![PushVar(0), PushVar(1), Div]), |x, y| [1.0 / y, -x / (y * y)]),
        ("cos(x*y)", prog(vec![PushVar(0), PushVar(1), Mul, Cos]), |x, y| {
            let s = (x * y).sin();
            [-y * s, -x * s]
        }),
        ("x^3-2y", prog(vec![PushVar(0), PushVar(0), Mul, PushVar(0), Mul, PushConst(2.0), PushVar(1), Mul, Sub]), |x, _| {
            [3.0 * x * x, -2.0]
        }),
    ]
}

#[test]
fn finite_differences_match_analytic_gradients() {
    let points = [(0.7, 1.3), (-1.1, 0.4), (2.5, -0.8), (0.3, 2.2), (-1.7, -1.9)];
    let mut checked = 0;
    for (name, program, grad) in fixtures() {
        for &(x, y) in &points {
            let analytic = grad(x, y);
            for (var, exact) in analytic.into_iter().enumerate() {
                if exact.abs() < 1e-3 {
                    continue;
                }
                let fd = partial(&program, &[x, y], var).unwrap();
                let rel = (fd - exact).abs() / exact.abs();
                assert!(rel <= 1e-4, "{name} d/dx{var} at ({x},{y}): {fd} vs {exact}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 40);
}

#[test]
fn random_programs_are_stack_safe_for_ten_thousand_seeds() {
    let space = ProgramSpace::new(RegressionConfig::default(), 2);
    for seed in 0..10_000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = space.random_program(&mut rng);
        assert!(!p.is_empty() && p.len() <= 32, "seed {seed}");
        ExprProgram::new(p.ops().to_vec()).unwrap();
        match eval_expr(&p, &[0.3, -0.4]) {
            Ok(_) | Err(ExprError::DivByNearZero) | Err(ExprError::NonFinite) => {}
            Err(e) => panic!("seed {seed}: {e}"),
        }
        let g = sample_genome(space.loci(), &mut rng);
        ExprProgram::new(space.decode(&g).ops().to_vec()).unwrap();
    }
}

#[test]
fn reference_table_ranks_the_invariant_first() {
    let data = generate_dataset(System::Circle { r: 1.0 }, 200, 0.0, 0).unwrap();
    let table = reference_table(&data).unwrap();
    let names: Vec<&str> = table.iter().map(|r| r.infix.as_str()).collect();
    assert_eq!(names, ["((x * x) + (y * y))", "(x + y)", "(x * y)", "x"]);
    assert!(table[0].fitness >= 0.99);
    for other in &table[1..] {
        assert!(table[0].fitness > other.fitness, "{} scored {}", other.infix, other.fitness);
    }
    assert!(table[1].fitness < 0.9);
}

#[test]
fn oscillator_invariant_is_conserved() {
    let data = generate_dataset(System::HarmonicOscillator { omega: 2.0 }, 100, 0.0, 5).unwrap();
    let energy: Vec<f64> = data.samples.iter().map(|r| 4.0 * r[0] * r[0] + r[1] * r[1]).collect();
    assert!(energy.iter().all(|e| (e - energy[0]).abs() < 1e-9));
    let table = reference_table(&data).unwrap();
    assert!(table[0].fitness > 0.9, "x^2+v^2 preserves the level-set shape: {}", table[0].fitness);
}

#[test]
fn distill_is_deterministic_and_never_creates_types() {
    let data = generate_dataset(System::Circle { r: 1.0 }, 200, 0.0, 0).unwrap();
    let cfg = EvolutionConfig {
        population_size: 200,
        generations: 300,
        rng_seed: 0,
        ..EvolutionConfig::default()
    };
    let a = distill(&data, &RegressionConfig::default(), &cfg, &Executor::sequential()).unwrap();
    let b = distill(&data, &RegressionConfig::default(), &cfg, &Executor::with_threads(4).unwrap()).unwrap();
    assert_eq!(a, b);
    assert!(a.best.fitness >= 0.99);
    let report = distill_report(&data, &RegressionConfig::default(), &a);
    assert_eq!(report.audit.type_creations, 0);
    assert_eq!(report.audit.expansions, 0);
    assert!(report.audit.method_creations >= 1);
    assert!(report.state.concepts().is_empty());
}
