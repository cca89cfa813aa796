use brouwer_core::brouwer::{run, BrouwerConfig, FreeChoicePolicy, PolicyKind, RunStatus};
use brouwer_core::domain::RealizeBudget;
use brouwer_core::domains::maze::{MazeConfig, MazeDomain, MazeSpace};
use brouwer_core::domains::switchboard::{Release, Switchboard, SwitchboardConfig};
use brouwer_core::exec::Executor;
use brouwer_core::novelty::{evolve, EvolutionConfig, Mode};
use brouwer_core::planner::SearchBudget;

fn executors() -> [Executor; 3] {
    [Executor::sequential(), Executor::with_threads(2).unwrap(), Executor::with_threads(4).unwrap()]
}

#[test]
fn novelty_evolution_ignores_thread_count() {
    let space = MazeSpace::new(MazeConfig::default()).unwrap();
    let cfg = EvolutionConfig {
        generations: 30,
        rng_seed: 9,
        ..EvolutionConfig::default()
    };
    let outcomes: Vec<String> = executors()
        .iter()
        .map(|e| serde_json::to_string(&evolve(&space, &cfg, Mode::Novelty, e).unwrap()).unwrap())
        .collect();
    assert!(outcomes.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn maze_run_ignores_thread_count() {
    let domain = MazeDomain::new(MazeConfig::default()).unwrap();
    let cfg = BrouwerConfig {
        max_iterations: 10,
        realize_budget: RealizeBudget::Evolution(EvolutionConfig {
            population_size: 30,
            generations: 40,
            ..EvolutionConfig::default()
        }),
        concept_candidate_pool_size: 20,
        stall_window: 30,
        policy: FreeChoicePolicy {
            kind: PolicyKind::EpsilonGreedy { epsilon: 0.3 },
            rng_seed: 4,
        },
        rng_seed: 3,
        concept_k: 5,
    };
    let reports: Vec<String> = executors()
        .iter()
        .map(|e| serde_json::to_string(&run(&domain, &cfg, e).unwrap()).unwrap())
        .collect();
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn switchboard_expansion_is_reproducible() {
    let board = Switchboard::new(SwitchboardConfig {
        switches: 2,
        bright_threshold: Some(3),
        release: Some(Release { at_iteration: 3 }),
    })
    .unwrap();
    let cfg = BrouwerConfig {
        max_iterations: 100,
        realize_budget: RealizeBudget::Search(SearchBudget::default()),
        concept_candidate_pool_size: 50,
        stall_window: 10,
        policy: FreeChoicePolicy {
            kind: PolicyKind::UniformRandom,
            rng_seed: 8,
        },
        rng_seed: 1,
        concept_k: 5,
    };
    let a = run(&board, &cfg, &Executor::sequential()).unwrap();
    let b = run(&board, &cfg, &Executor::with_threads(3).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.status, RunStatus::Exhausted);
    assert_eq!(a.audit.expansions, 2);
    assert_eq!(a.state.actions().len(), 3);
}
