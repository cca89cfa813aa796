//! Seeded genetic search over fixed-length integer genomes with two
//! selection regimes: fitness toward a supplied objective, or novelty
//! relative to an archive of previously seen behaviors.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Executor;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvolutionError {
    #[error("invalid evolution config: {0}")]
    InvalidConfig(String),
    #[error("genome lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

/// Inclusive integer range a locus may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocusRange {
    pub lo: i32,
    pub hi: i32,
}

impl LocusRange {
    pub fn new(lo: i32, hi: i32) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: i32) -> bool {
        (self.lo..=self.hi).contains(&v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome {
    pub genes: Vec<i32>,
}

impl Genome {
    pub fn new(genes: Vec<i32>) -> Self {
        Self { genes }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn is_valid(&self, loci: &[LocusRange]) -> bool {
        self.genes.len() == loci.len() && self.genes.iter().zip(loci).all(|(g, r)| r.contains(*g))
    }
}

pub fn sample_genome(loci: &[LocusRange], rng: &mut impl Rng) -> Genome {
    Genome::new(loci.iter().map(|r| rng.random_range(r.lo..=r.hi)).collect())
}

/// Resamples each locus independently with probability `rate`.
pub fn mutate(genome: &Genome, loci: &[LocusRange], rate: f64, rng: &mut impl Rng) -> Result<Genome, EvolutionError> {
    if genome.len() != loci.len() {
        return Err(EvolutionError::LengthMismatch(genome.len(), loci.len()));
    }
    let genes = genome
        .genes
        .iter()
        .zip(loci)
        .map(|(&g, r)| {
            if rng.random::<f64>() < rate {
                rng.random_range(r.lo..=r.hi)
            } else {
                g
            }
        })
        .collect();
    Ok(Genome::new(genes))
}

/// Single-point crossover: genes `[0, point)` from `a`, the rest from `b`.
pub fn crossover_at(a: &Genome, b: &Genome, point: usize) -> Result<Genome, EvolutionError> {
    if a.len() != b.len() {
        return Err(EvolutionError::LengthMismatch(a.len(), b.len()));
    }
    let point = point.min(a.len());
    let mut genes = a.genes[..point].to_vec();
    genes.extend_from_slice(&b.genes[point..]);
    Ok(Genome::new(genes))
}

pub fn crossover(a: &Genome, b: &Genome, rng: &mut impl Rng) -> Result<Genome, EvolutionError> {
    if a.len() != b.len() {
        return Err(EvolutionError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Ok(a.clone());
    }
    let point = rng.random_range(1..a.len());
    crossover_at(a, b, point)
}

/// Genotype space plus behavior characterization.
pub trait GenomeSpace: Sync {
    fn loci(&self) -> &[LocusRange];
    fn descriptor_dimension(&self) -> usize;
    fn descriptor(&self, genome: &Genome) -> Vec<f64>;
}

/// Scoring function toward a pre-given target type.
pub trait Objective: Sync {
    fn fitness(&self, genome: &Genome, descriptor: &[f64]) -> f64;

    /// Size measure used to break near-ties in tournaments.
    fn complexity(&self, _genome: &Genome) -> usize {
        0
    }
}

impl<F> Objective for F
where
    F: Fn(&Genome, &[f64]) -> f64 + Sync,
{
    fn fitness(&self, genome: &Genome, descriptor: &[f64]) -> f64 {
        self(genome, descriptor)
    }
}

#[derive(Clone, Copy)]
pub enum Mode<'a> {
    Objective(&'a dyn Objective),
    Novelty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    #[serde(default = "default_tournament")]
    pub tournament_size: usize,
    #[serde(default = "default_k")]
    pub k_nearest: usize,
    #[serde(default)]
    pub archive_add_threshold: f64,
    pub rng_seed: u64,
    /// Objective mode stops early once the best fitness reaches this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_at_fitness: Option<f64>,
}

fn default_tournament() -> usize {
    3
}

fn default_k() -> usize {
    5
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 100,
            mutation_rate: 0.05,
            crossover_rate: 0.7,
            tournament_size: 3,
            k_nearest: 5,
            archive_add_threshold: 0.0,
            rng_seed: 0,
            stop_at_fitness: None,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: &str| Err(EvolutionError::InvalidConfig(m.to_string()));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation_rate must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossover_rate must lie in [0, 1]");
        }
        if self.tournament_size < 2 {
            return bad("tournament_size must be at least 2");
        }
        if self.k_nearest < 1 {
            return bad("k_nearest must be at least 1");
        }
        if self.archive_add_threshold.is_nan() || self.archive_add_threshold < 0.0 {
            return bad("archive_add_threshold must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Genome,
    pub descriptor: Vec<f64>,
    pub fitness: Option<f64>,
    pub novelty: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub descriptor: Vec<f64>,
    pub genome: Genome,
}

/// Append-only memory of behaviors that were novel when seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
    pub add_threshold: f64,
}

impl Archive {
    pub fn new(add_threshold: f64) -> Self {
        Self {
            entries: Vec::new(),
            add_threshold,
        }
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.iter().map(|e| e.descriptor.as_slice())
    }

    pub fn push(&mut self, entry: ArchiveEntry) {
        self.entries.push(entry);
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Mean distance from `candidate` to its `k` nearest neighbors among the
/// archive and the population. `self_index` names the candidate's own slot
/// in `population`, which is skipped regardless of its value.
pub fn novelty_score(
    candidate: &[f64],
    archive: &Archive,
    population: &[Vec<f64>],
    self_index: Option<usize>,
    k: usize,
) -> f64 {
    let mut distances: Vec<f64> = archive
        .descriptors()
        .map(|d| euclidean(candidate, d))
        .chain(
            population
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != self_index)
                .map(|(_, d)| euclidean(candidate, d)),
        )
        .collect();
    if distances.is_empty() || k == 0 {
        return 0.0;
    }
    let k = k.min(distances.len());
    if k < distances.len() {
        distances.select_nth_unstable_by(k - 1, f64::total_cmp);
    }
    let mut nearest = distances[..k].to_vec();
    nearest.sort_by(f64::total_cmp);
    nearest.iter().sum::<f64>() / k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: Option<f64>,
    pub mean_novelty: Option<f64>,
    pub max_novelty: Option<f64>,
    pub archive_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionOutcome {
    pub population: Vec<Individual>,
    pub archive: Archive,
    pub history: Vec<GenerationRecord>,
}

impl EvolutionOutcome {
    /// Highest-fitness individual; exact ties go to the lower complexity,
    /// then to the lower index.
    pub fn best<'a>(&'a self, objective: &dyn Objective) -> Option<&'a Individual> {
        best_index(&self.population, objective).map(|i| &self.population[i])
    }
}

pub fn history_csv(history: &[GenerationRecord]) -> String {
    fn cell(v: Option<f64>) -> String {
        v.map(|x| x.to_string()).unwrap_or_default()
    }
    let mut out = String::from("generation,best_fitness,mean_novelty,max_novelty,archive_size\n");
    for r in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.generation,
            cell(r.best_fitness),
            cell(r.mean_novelty),
            cell(r.max_novelty),
            r.archive_size
        );
    }
    out
}

fn best_index(population: &[Individual], objective: &dyn Objective) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, ind) in population.iter().enumerate() {
        let f = ind.fitness.unwrap_or(f64::NEG_INFINITY);
        best = match best {
            None => Some(i),
            Some(b) => {
                let bf = population[b].fitness.unwrap_or(f64::NEG_INFINITY);
                let better = f > bf
                    || (f == bf && objective.complexity(&ind.genome) < objective.complexity(&population[b].genome));
                if better {
                    Some(i)
                } else {
                    Some(b)
                }
            }
        };
    }
    best
}

const PARSIMONY_EPS: f64 = 1e-6;

/// Tournament ordering: `Less` means `a` wins.
fn compare_fitness(objective: &dyn Objective, a: &Individual, b: &Individual) -> Ordering {
    let fa = a.fitness.unwrap_or(f64::NEG_INFINITY);
    let fb = b.fitness.unwrap_or(f64::NEG_INFINITY);
    if (fa - fb).abs() <= PARSIMONY_EPS || fa == fb {
        objective.complexity(&a.genome).cmp(&objective.complexity(&b.genome))
    } else if fa > fb {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

fn tournament(population: &[Individual], size: usize, mode: Mode<'_>, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.random_range(0..population.len());
    for _ in 1..size {
        let challenger = rng.random_range(0..population.len());
        let (lo, hi) = if challenger < winner {
            (challenger, winner)
        } else {
            (winner, challenger)
        };
        let order = match mode {
            Mode::Objective(obj) => compare_fitness(obj, &population[lo], &population[hi]),
            Mode::Novelty => {
                let nl = population[lo].novelty.unwrap_or(0.0);
                let nh = population[hi].novelty.unwrap_or(0.0);
                nh.total_cmp(&nl)
            }
        };
        // equal candidates go to the lower index
        winner = if order == Ordering::Greater { hi } else { lo };
    }
    winner
}

fn evaluate_genomes(space: &dyn GenomeSpace, genomes: Vec<Genome>, mode: Mode<'_>, exec: &Executor) -> Vec<Individual> {
    exec.map(&genomes, |g| {
        let descriptor = space.descriptor(g);
        let fitness = match mode {
            Mode::Objective(obj) => Some(obj.fitness(g, &descriptor)),
            Mode::Novelty => None,
        };
        Individual {
            genome: g.clone(),
            descriptor,
            fitness,
            novelty: None,
        }
    })
}

/// Scores novelty against a snapshot of the archive and population, then
/// appends qualifying individuals to the archive in index order.
fn score_novelty(population: &mut [Individual], archive: &mut Archive, k: usize, exec: &Executor) {
    let descriptors: Vec<Vec<f64>> = population.iter().map(|i| i.descriptor.clone()).collect();
    let indices: Vec<usize> = (0..population.len()).collect();
    let snapshot: &Archive = archive;
    let scores = exec.map(&indices, |&i| novelty_score(&descriptors[i], snapshot, &descriptors, Some(i), k));
    for (ind, s) in population.iter_mut().zip(scores) {
        ind.novelty = Some(s);
    }
    for ind in population.iter() {
        if ind.novelty.unwrap_or(0.0) > archive.add_threshold {
            archive.push(ArchiveEntry {
                descriptor: ind.descriptor.clone(),
                genome: ind.genome.clone(),
            });
        }
    }
}

fn record(generation: usize, population: &[Individual], archive: &Archive, mode: Mode<'_>) -> GenerationRecord {
    match mode {
        Mode::Objective(_) => GenerationRecord {
            generation,
            best_fitness: population.iter().filter_map(|i| i.fitness).reduce(f64::max),
            mean_novelty: None,
            max_novelty: None,
            archive_size: archive.len(),
        },
        Mode::Novelty => {
            let nov: Vec<f64> = population.iter().filter_map(|i| i.novelty).collect();
            GenerationRecord {
                generation,
                best_fitness: None,
                mean_novelty: Some(nov.iter().sum::<f64>() / nov.len().max(1) as f64),
                max_novelty: nov.iter().copied().reduce(f64::max),
                archive_size: archive.len(),
            }
        }
    }
}

/// Runs the generational loop. Equal inputs give bit-identical outcomes,
/// independent of the executor's thread count.
pub fn evolve(
    space: &dyn GenomeSpace,
    config: &EvolutionConfig,
    mode: Mode<'_>,
    exec: &Executor,
) -> Result<EvolutionOutcome, EvolutionError> {
    config.validate()?;
    let loci = space.loci();
    if let Some(i) = loci.iter().position(|r| r.lo > r.hi) {
        return Err(EvolutionError::InvalidConfig(format!("locus {i} has an empty range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let genomes: Vec<Genome> = (0..config.population_size).map(|_| sample_genome(loci, &mut rng)).collect();
    let mut population = evaluate_genomes(space, genomes, mode, exec);
    let mut archive = Archive::new(config.archive_add_threshold);
    if matches!(mode, Mode::Novelty) {
        score_novelty(&mut population, &mut archive, config.k_nearest, exec);
    }
    let mut history = Vec::with_capacity(config.generations);

    for generation in 0..config.generations {
        if let (Mode::Objective(_), Some(stop)) = (mode, config.stop_at_fitness) {
            let best = population.iter().filter_map(|i| i.fitness).reduce(f64::max);
            if best.is_some_and(|b| b >= stop) {
                break;
            }
        }
        let mut offspring = Vec::with_capacity(config.population_size);
        if let Mode::Objective(obj) = mode {
            let elite = best_index(&population, obj).expect("population is non-empty");
            offspring.push(population[elite].genome.clone());
        }
        while offspring.len() < config.population_size {
            let a = tournament(&population, config.tournament_size, mode, &mut rng);
            let child = if rng.random::<f64>() < config.crossover_rate {
                let b = tournament(&population, config.tournament_size, mode, &mut rng);
                crossover(&population[a].genome, &population[b].genome, &mut rng)?
            } else {
                population[a].genome.clone()
            };
            offspring.push(mutate(&child, loci, config.mutation_rate, &mut rng)?);
        }
        population = evaluate_genomes(space, offspring, mode, exec);
        if matches!(mode, Mode::Novelty) {
            score_novelty(&mut population, &mut archive, config.k_nearest, exec);
        }
        history.push(record(generation, &population, &archive, mode));
    }

    Ok(EvolutionOutcome {
        population,
        archive,
        history,
    })
}
