//! One function per subcommand, plus the reusable pieces they are built from.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use brouwer_core::brouwer::{check_soundness, run, BrouwerConfig, RunReport};
use brouwer_core::domain::{descriptor_hit_fraction, DesignDomain};
use brouwer_core::domains::blockworld::{Blockworld, Verdict};
use brouwer_core::domains::maze::{render_svg, solve_maze, MazeConfig, MazeDomain, MazeGrid, MazeInstance, MazeSpace};
use brouwer_core::domains::regression::{
    distill, distill_report, generate_dataset, reference_table, Dataset, DistillOutcome, RegressionConfig,
    ScoredProgram, TARGET_FITNESS,
};
use brouwer_core::domains::switchboard::Switchboard;
use brouwer_core::evaluation::{
    build_evaluation_model, deductive_closure, evaluate, fit_predictor, ranking_csv, EvaluationInputs,
    PropositionalTheory,
};
use brouwer_core::exec::Executor;
use brouwer_core::language::{LanguageState, PropertyId};
use brouwer_core::metrics::{median, outcome_coverage};
use brouwer_core::novelty::{evolve, history_csv, EvolutionConfig, EvolutionOutcome, Genome, Mode};
use brouwer_core::planner::{plan_search, PlanningProblem, SearchBudget, Strategy};
use brouwer_core::render::line_chart_svg;

use crate::scenario::{
    load, CensusConfig, ContrastConfig, DataSource, DomainSpec, EvolveConfig, EvolveMode, RegressConfig,
    ScenarioConfig,
};
use crate::{Format, Settings};

const DEFAULT_OUT: &str = "out";

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    std::fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs serialize");
    s.push('\n');
    s
}

fn out_dir(ctx: &Settings, from_config: Option<&PathBuf>) -> PathBuf {
    ctx.out
        .clone()
        .or_else(|| from_config.cloned())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Prints a flat summary as a JSON object or a two-line CSV.
fn print_summary(format: Format, fields: &[(&str, Value)]) -> Result<()> {
    match format {
        Format::Json => {
            let map: serde_json::Map<String, Value> = fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            print!("{}", to_json(&map));
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(fields.iter().map(|(k, _)| *k))?;
            w.write_record(fields.iter().map(|(_, v)| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            }))?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Header and rows of a CSV document with a header row.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

fn chart(csv_text: &str) -> Result<String> {
    let (header, rows) = read_csv(csv_text)?;
    line_chart_svg(&header, &rows).map_err(|e| anyhow!(e))
}

// ---- run ----

/// The loop configuration a scenario actually runs with: the scenario seed
/// drives the loop, and the policy gets a seed derived from it.
pub fn effective_config(scenario: &ScenarioConfig) -> BrouwerConfig {
    let mut cfg = scenario.brouwer.clone();
    cfg.rng_seed = scenario.seed;
    cfg.policy.rng_seed = scenario.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ 0xD1B5_4A32_D192_ED03;
    cfg
}

/// Runs a scenario and checks the report's methods against the domain.
pub fn run_scenario(scenario: &ScenarioConfig, exec: &Executor) -> Result<RunReport> {
    fn go<D: DesignDomain>(d: &D, cfg: &BrouwerConfig, exec: &Executor) -> Result<RunReport> {
        let report = run(d, cfg, exec)?;
        check_soundness(d, &report).map_err(|e| anyhow!("unsound report: {e}"))?;
        Ok(report)
    }
    let cfg = effective_config(scenario);
    match &scenario.domain {
        DomainSpec::Maze(c) => go(&MazeDomain::new(c.clone()).map_err(|e| anyhow!(e))?, &cfg, exec),
        DomainSpec::Blockworld(c) => go(&Blockworld::new(c.clone())?, &cfg, exec),
        DomainSpec::Switchboard(c) => go(&Switchboard::new(c.clone()).map_err(|e| anyhow!(e))?, &cfg, exec),
    }
}

/// One SVG per stored maze with its escape plan drawn in.
fn maze_renders(report: &RunReport) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for rec in &report.instances {
        let grid: MazeGrid = serde_json::from_value(rec.instance.clone())?;
        let method = report.state.method(rec.method_id).context("instance without method")?;
        let moves = MazeDomain::actions_to_moves(method.steps(), &report.state);
        let name = match rec.concept_id {
            Some(c) => format!("renders/concept_{c}_method_{}.svg", rec.method_id),
            None => format!("renders/method_{}.svg", rec.method_id),
        };
        out.push((name, render_svg(&grid, moves.as_deref())));
    }
    Ok(out)
}

/// Writes report.json, trace.csv, audit.json and renders into `dir`.
pub fn write_run(dir: &Path, report: &RunReport) -> Result<()> {
    write(dir, "report.json", to_json(report))?;
    let trace = report.trace_csv();
    write(dir, "trace.csv", &trace)?;
    write(dir, "audit.json", to_json(&report.audit))?;
    write(dir, "renders/trace.svg", chart(&trace)?)?;
    if report.domain == "maze" {
        for (name, svg) in maze_renders(report)? {
            write(dir, &name, svg)?;
        }
    }
    Ok(())
}

pub fn cmd_run(ctx: &Settings) -> Result<i32> {
    let mut scenario: ScenarioConfig = load(ctx.config_path()?)?;
    if let Some(seed) = ctx.seed {
        scenario.seed = seed;
    }
    let report = run_scenario(&scenario, &ctx.exec)?;
    let dir = out_dir(ctx, scenario.output_dir.as_ref());
    write_run(&dir, &report)?;
    print_summary(
        ctx.format,
        &[
            ("domain", json!(report.domain)),
            ("status", json!(report.status)),
            ("iterations", json!(report.trace.len())),
            ("concepts", json!(report.state.concepts().len())),
            ("methods", json!(report.state.methods().len())),
            ("open", json!(report.open_concepts.len())),
            ("type_creations", json!(report.audit.type_creations)),
            ("method_creations", json!(report.audit.method_creations)),
            ("expansions", json!(report.audit.expansions)),
        ],
    )?;
    Ok(report.status.exit_code())
}

// ---- plan ----

#[derive(Debug, Deserialize)]
struct PlanFile {
    #[allow(dead_code)]
    schema_version: u32,
    #[serde(flatten)]
    problem: PlanningProblem,
    #[serde(default)]
    budget: SearchBudget,
    #[serde(default = "bfs")]
    strategy: Strategy,
}

fn bfs() -> Strategy {
    Strategy::Bfs
}

pub fn cmd_plan(ctx: &Settings) -> Result<i32> {
    let file: PlanFile = load(ctx.config_path()?)?;
    let plan = plan_search(&file.problem, file.budget, file.strategy)?;
    if let Some(dir) = &ctx.out {
        write(dir, "plan.json", to_json(&plan))?;
    }
    match ctx.format {
        Format::Json => print!("{}", to_json(&plan)),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["step", "action", "args"])?;
            for (i, s) in plan.steps.iter().enumerate() {
                w.write_record([(i + 1).to_string(), s.action.clone(), s.args.join(" ")])?;
            }
            w.flush()?;
        }
    }
    Ok(0)
}

// ---- maze evolution ----

/// Language over the maze properties, used to score target concepts.
pub fn maze_language(config: &MazeConfig) -> Result<LanguageState> {
    let d = MazeDomain::new(config.clone()).map_err(|e| anyhow!(e))?;
    Ok(LanguageState::new(d.initial_properties(), d.initial_actions())?)
}

/// Evolves mazes and measures bucket coverage of archive plus population.
/// With a target, selection maximizes the fraction of its buckets hit;
/// without one, it is novelty search.
pub fn maze_evolution(
    config: &MazeConfig,
    evolution: &EvolutionConfig,
    target: Option<&[PropertyId]>,
    exec: &Executor,
) -> Result<(EvolutionOutcome, usize)> {
    let space = MazeSpace::new(config.clone()).map_err(|e| anyhow!(e))?;
    let state = maze_language(config)?;
    let outcome = match target {
        None => evolve(&space, evolution, Mode::Novelty, exec)?,
        Some(ids) => {
            let concept = state.canonicalize_concept(ids.iter().copied())?;
            let fitness = |_: &Genome, d: &[f64]| descriptor_hit_fraction(d, &concept, &state);
            evolve(&space, evolution, Mode::Objective(&fitness), exec)?
        }
    };
    let coverage = outcome_coverage(&outcome, &config.properties());
    Ok((outcome, coverage))
}

pub fn cmd_evolve(ctx: &Settings) -> Result<i32> {
    let mut cfg: EvolveConfig = load(ctx.config_path()?)?;
    if let Some(seed) = ctx.seed {
        cfg.evolution.rng_seed = seed;
    }
    let target = match cfg.mode {
        EvolveMode::Novelty => None,
        EvolveMode::Objective if cfg.target_concept.is_empty() => bail!("objective mode needs a target_concept"),
        EvolveMode::Objective => Some(cfg.target_concept.as_slice()),
    };
    let (outcome, coverage) = maze_evolution(&cfg.maze, &cfg.evolution, target, &ctx.exec)?;
    let dir = out_dir(ctx, None);
    let history = history_csv(&outcome.history);
    write(&dir, "history.csv", &history)?;
    write(&dir, "history.svg", chart(&history)?)?;
    let space = MazeSpace::new(cfg.maze.clone()).map_err(|e| anyhow!(e))?;
    let best = outcome
        .population
        .iter()
        .max_by(|a, b| {
            let key = |i: &brouwer_core::novelty::Individual| i.fitness.or(i.novelty).unwrap_or(f64::NEG_INFINITY);
            key(a).total_cmp(&key(b))
        })
        .map(|ind| space.decode(&ind.genome));
    if let Some(grid) = &best {
        let path = solve_maze(grid);
        write(&dir, "best_maze.json", to_json(&MazeInstance { grid: grid.clone() }))?;
        write(&dir, "best_maze.svg", render_svg(grid, path.as_deref()))?;
    }
    let fields = [
        ("mode", json!(cfg.mode)),
        ("generations", json!(outcome.history.len())),
        ("coverage", json!(coverage)),
        ("archive_size", json!(outcome.archive.len())),
        ("best_fitness", json!(outcome.history.last().and_then(|r| r.best_fitness))),
    ];
    let summary: serde_json::Map<String, Value> = fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    write(&dir, "summary.json", to_json(&summary))?;
    print_summary(ctx.format, &fields)?;
    Ok(0)
}

// ---- contrast ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub seeds: Vec<u64>,
    pub target_concept: Vec<PropertyId>,
    pub novelty_coverage: Vec<usize>,
    pub objective_coverage: Vec<usize>,
    pub novelty_median: f64,
    pub objective_median: f64,
    /// Novelty median over objective median.
    pub ratio: f64,
}

pub fn selection_contrast(cfg: &ContrastConfig, exec: &Executor) -> Result<ContrastReport> {
    if cfg.seeds.is_empty() {
        bail!("contrast needs at least one seed");
    }
    let mut novelty = Vec::new();
    let mut objective = Vec::new();
    for &seed in &cfg.seeds {
        let evo = EvolutionConfig {
            rng_seed: seed,
            ..cfg.evolution.clone()
        };
        novelty.push(maze_evolution(&cfg.maze, &evo, None, exec)?.1);
        objective.push(maze_evolution(&cfg.maze, &evo, Some(&cfg.target_concept), exec)?.1);
    }
    let as_f64 = |v: &[usize]| v.iter().map(|&c| c as f64).collect::<Vec<_>>();
    let novelty_median = median(&as_f64(&novelty)).expect("non-empty");
    let objective_median = median(&as_f64(&objective)).expect("non-empty");
    Ok(ContrastReport {
        seeds: cfg.seeds.clone(),
        target_concept: cfg.target_concept.clone(),
        novelty_coverage: novelty,
        objective_coverage: objective,
        novelty_median,
        objective_median,
        ratio: novelty_median / objective_median,
    })
}

pub fn cmd_contrast(ctx: &Settings) -> Result<i32> {
    let mut cfg: ContrastConfig = load(ctx.config_path()?)?;
    if let Some(seed) = ctx.seed {
        let n = cfg.seeds.len() as u64;
        cfg.seeds = (seed..seed + n).collect();
    }
    let report = selection_contrast(&cfg, &ctx.exec)?;
    let dir = out_dir(ctx, None);
    write(&dir, "contrast.json", to_json(&report))?;
    let mut table = String::from("seed,novelty_coverage,objective_coverage\n");
    for ((s, n), o) in report.seeds.iter().zip(&report.novelty_coverage).zip(&report.objective_coverage) {
        table.push_str(&format!("{s},{n},{o}\n"));
    }
    write(&dir, "contrast.csv", table)?;
    print_summary(
        ctx.format,
        &[
            ("novelty_median", json!(report.novelty_median)),
            ("objective_median", json!(report.objective_median)),
            ("ratio", json!(report.ratio)),
        ],
    )?;
    Ok(0)
}

// ---- regression ----

/// Reads a dataset CSV: a header of variable names, then numeric rows.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let (header, rows) = read_csv(&text)?;
    let samples = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .map(|c| c.trim().parse::<f64>().with_context(|| format!("row {}: {c:?} is not a number", i + 1)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(header, samples, format!("read from {}", path.display()))?)
}

pub fn load_data(source: &DataSource, base: &Path) -> Result<Dataset> {
    match source {
        DataSource::Generated {
            system,
            samples,
            noise_sd,
            data_seed,
        } => Ok(generate_dataset(*system, *samples, *noise_sd, *data_seed)?),
        DataSource::File { dataset } => read_dataset(&base.join(dataset)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSummary {
    pub seed: u64,
    pub generations: usize,
    pub best: ScoredProgram,
}

/// Distills once per seed. Returns each seed's outcome and run report.
pub fn regress_seeds(
    data: &Dataset,
    regression: &RegressionConfig,
    evolution: &EvolutionConfig,
    seeds: &[u64],
    exec: &Executor,
) -> Result<Vec<(u64, DistillOutcome, RunReport)>> {
    seeds
        .iter()
        .map(|&seed| {
            let evo = EvolutionConfig {
                rng_seed: seed,
                ..evolution.clone()
            };
            let outcome = distill(data, regression, &evo, exec)?;
            let report = distill_report(data, regression, &outcome);
            Ok((seed, outcome, report))
        })
        .collect()
}

pub fn cmd_regress(ctx: &Settings) -> Result<i32> {
    let path = ctx.config_path()?;
    let cfg: RegressConfig = load(path)?;
    let data = load_data(&cfg.data, path.parent().unwrap_or(Path::new(".")))?;
    let seeds = match (ctx.seed, cfg.seeds.is_empty()) {
        (Some(s), _) => vec![s],
        (None, true) => vec![cfg.evolution.rng_seed],
        (None, false) => cfg.seeds.clone(),
    };
    let dir = out_dir(ctx, None);
    write(&dir, "dataset.csv", data.to_csv())?;
    let reference = reference_table(&data)?;
    let mut table = String::from("program,fitness\n");
    for r in &reference {
        table.push_str(&format!("\"{}\",{}\n", r.infix, r.fitness));
    }
    write(&dir, "reference.csv", table)?;

    let runs = regress_seeds(&data, &cfg.regression, &cfg.evolution, &seeds, &ctx.exec)?;
    let mut summary = String::from("seed,best_fitness,generations,length,program\n");
    let mut records = Vec::new();
    for (seed, outcome, report) in &runs {
        let sub = dir.join(format!("seed_{seed}"));
        write_run_files(&sub, report)?;
        write(&sub, "history.csv", history_csv(&outcome.history))?;
        write(&sub, "programs.json", to_json(&outcome.top))?;
        summary.push_str(&format!(
            "{seed},{},{},{},\"{}\"\n",
            outcome.best.fitness,
            outcome.history.len(),
            outcome.best.program.len(),
            outcome.best.infix
        ));
        records.push(RegressionSummary {
            seed: *seed,
            generations: outcome.history.len(),
            best: outcome.best.clone(),
        });
    }
    write(&dir, "summary.csv", summary)?;
    write(&dir, "summary.json", to_json(&records))?;
    let hits = records.iter().filter(|r| r.best.fitness >= TARGET_FITNESS).count();
    print_summary(
        ctx.format,
        &[
            ("seeds", json!(records.len())),
            ("reached_target", json!(hits)),
            ("target", json!(TARGET_FITNESS)),
            ("best_program", json!(records.first().map(|r| r.best.infix.clone()))),
        ],
    )?;
    Ok(0)
}

/// report.json, trace.csv and audit.json without renders.
fn write_run_files(dir: &Path, report: &RunReport) -> Result<()> {
    write(dir, "report.json", to_json(report))?;
    write(dir, "trace.csv", report.trace_csv())?;
    write(dir, "audit.json", to_json(&report.audit))
}

// ---- census ----

pub fn cmd_census(ctx: &Settings) -> Result<i32> {
    let cfg: CensusConfig = load(ctx.config_path()?)?;
    let world = Blockworld::new(cfg.blockworld)?;
    let entries = world.census(cfg.budget, &ctx.exec);
    let mut table = String::from("properties,goal,verdict,plan_length\n");
    for e in &entries {
        let ids = e.properties.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ");
        let (verdict, len) = match e.verdict {
            Verdict::Realizable { plan_length } => ("realizable", plan_length.to_string()),
            Verdict::Unrealizable => ("unrealizable", String::new()),
            Verdict::Unknown => ("unknown", String::new()),
        };
        table.push_str(&format!("{ids},\"{}\",{verdict},{len}\n", e.goal.join(" & ")));
    }
    if let Some(dir) = &ctx.out {
        write(dir, "census.json", to_json(&entries))?;
        write(dir, "census.csv", &table)?;
    }
    match ctx.format {
        Format::Csv => print!("{table}"),
        Format::Json => {
            let pick = |want: fn(&Verdict) -> bool| -> Vec<Value> {
                entries
                    .iter()
                    .filter(|e| want(&e.verdict))
                    .map(|e| json!({"properties": e.properties, "goal": e.goal, "verdict": e.verdict}))
                    .collect()
            };
            let partition = json!({
                "realizable": pick(|v| matches!(v, Verdict::Realizable { .. })),
                "unrealizable": pick(|v| matches!(v, Verdict::Unrealizable)),
                "unknown": pick(|v| matches!(v, Verdict::Unknown)),
            });
            print!("{}", to_json(&partition));
        }
    }
    Ok(0)
}

// ---- render ----

#[derive(Deserialize)]
#[serde(untagged)]
enum MazeFile {
    Instance(MazeInstance),
    Grid(MazeGrid),
}

/// SVG for a maze JSON file or a CSV table.
pub fn render_file(file: &Path) -> Result<String> {
    let text = std::fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    match file.extension().and_then(|e| e.to_str()) {
        Some("csv") => chart(&text),
        Some("json") => {
            let grid = match serde_json::from_str::<MazeFile>(&text)
                .with_context(|| format!("{} is not a maze", file.display()))?
            {
                MazeFile::Instance(i) => i.grid,
                MazeFile::Grid(g) => g,
            };
            Ok(render_svg(&grid, solve_maze(&grid).as_deref()))
        }
        _ => bail!("cannot render {}: expected a .json maze or a .csv table", file.display()),
    }
}

pub fn cmd_render(ctx: &Settings, file: &Path) -> Result<i32> {
    let svg = render_file(file)?;
    match &ctx.out {
        Some(dir) => {
            let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("render");
            write(dir, &format!("{stem}.svg"), svg)?;
        }
        None => print!("{svg}"),
    }
    Ok(0)
}

// ---- baselines ----

#[derive(Deserialize)]
struct EvaluateFile {
    #[allow(dead_code)]
    schema_version: u32,
    #[serde(flatten)]
    inputs: EvaluationInputs,
}

pub fn cmd_evaluate(ctx: &Settings) -> Result<i32> {
    let file: EvaluateFile = load(ctx.config_path()?)?;
    let model = build_evaluation_model(file.inputs)?;
    let ranking = evaluate(&model);
    let text = match ctx.format {
        Format::Json => to_json(&ranking),
        Format::Csv => ranking_csv(&ranking),
    };
    if let Some(dir) = &ctx.out {
        write(dir, "ranking.csv", ranking_csv(&ranking))?;
    }
    print!("{text}");
    Ok(0)
}

#[derive(Deserialize)]
struct FitFile {
    #[allow(dead_code)]
    schema_version: u32,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

pub fn cmd_fit(ctx: &Settings) -> Result<i32> {
    let file: FitFile = load(ctx.config_path()?)?;
    let predictor = fit_predictor(&file.x, &file.y)?;
    match ctx.format {
        Format::Json => print!("{}", to_json(&predictor)),
        Format::Csv => {
            let header: Vec<String> = (0..predictor.weights.len()).map(|i| format!("w{i}")).chain(["loss".into()]).collect();
            let row: Vec<String> = predictor.weights.iter().chain([&predictor.loss]).map(|v| v.to_string()).collect();
            println!("{}\n{}", header.join(","), row.join(","));
        }
    }
    Ok(0)
}

#[derive(Deserialize)]
struct TheoryFile {
    #[allow(dead_code)]
    schema_version: u32,
    #[serde(flatten)]
    theory: PropositionalTheory,
}

pub fn cmd_closure(ctx: &Settings) -> Result<i32> {
    let file: TheoryFile = load(ctx.config_path()?)?;
    file.theory.validate()?;
    let closure = deductive_closure(&file.theory);
    match ctx.format {
        Format::Json => print!("{}", to_json(&closure)),
        Format::Csv => {
            println!("atom");
            for a in &closure {
                println!("{a}");
            }
        }
    }
    Ok(0)
}
