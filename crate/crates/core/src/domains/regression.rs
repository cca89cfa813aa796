//! Symbolic regression on trajectory data. Programs are stack-machine op
//! lists; fitness rewards programs whose implied pairwise partial-derivative
//! ratios track the ratios seen in the data, which is how conserved
//! quantities (rather than trivial identities) are found.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brouwer::{construction_report, RunReport};
use crate::exec::Executor;
use crate::language::{ActionSpec, GroundAction, LanguageState};
use crate::novelty::{
    evolve, sample_genome, EvolutionConfig, EvolutionError, GenerationRecord, Genome, GenomeSpace, LocusRange, Mode,
    Objective,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "arg", rename_all = "snake_case")]
pub enum Op {
    PushVar(usize),
    PushConst(f64),
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
}

impl Op {
    fn arity(self) -> usize {
        match self {
            Op::PushVar(_) | Op::PushConst(_) => 0,
            Op::Sin | Op::Cos => 1,
            Op::Add | Op::Sub | Op::Mul | Op::Div => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ExprError {
    #[error("division by a value within 1e-12 of zero")]
    DivByNearZero,
    #[error("evaluation produced a non-finite value")]
    NonFinite,
    #[error("program is not stack safe")]
    StackUnsafe,
    #[error("program reads variable {0} but the assignment has fewer values")]
    MissingVariable(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitnessError {
    #[error("data do not vary enough to form derivative ratios: {0}")]
    InsufficientVariation(String),
    #[error("variable index out of range")]
    BadPair,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegressionError {
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("invalid dataset: {0}")]
    Dataset(String),
}

/// A stack-safe program: never pops an empty stack and leaves exactly one value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Op>", into = "Vec<Op>")]
pub struct ExprProgram {
    ops: Vec<Op>,
}

impl TryFrom<Vec<Op>> for ExprProgram {
    type Error = ExprError;
    fn try_from(ops: Vec<Op>) -> Result<Self, ExprError> {
        ExprProgram::new(ops)
    }
}

impl From<ExprProgram> for Vec<Op> {
    fn from(p: ExprProgram) -> Self {
        p.ops
    }
}

impl ExprProgram {
    pub fn new(ops: Vec<Op>) -> Result<Self, ExprError> {
        let mut depth = 0usize;
        for op in &ops {
            depth = depth.checked_sub(op.arity()).ok_or(ExprError::StackUnsafe)? + 1;
        }
        if depth != 1 {
            return Err(ExprError::StackUnsafe);
        }
        Ok(Self { ops })
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn uses_variable(&self, i: usize) -> bool {
        self.ops.contains(&Op::PushVar(i))
    }

    pub fn eval(&self, assignment: &[f64]) -> Result<f64, ExprError> {
        eval_expr(self, assignment)
    }

    /// Infix form with variables named by `names` (falls back to `x{i}`).
    pub fn infix(&self, names: &[String]) -> String {
        let mut stack: Vec<String> = Vec::new();
        for &op in &self.ops {
            let s = match op {
                Op::PushVar(i) => names.get(i).cloned().unwrap_or_else(|| format!("x{i}")),
                Op::PushConst(c) => format!("{c}"),
                Op::Sin | Op::Cos => {
                    let a = stack.pop().expect("stack safe");
                    format!("{}({a})", if op == Op::Sin { "sin" } else { "cos" })
                }
                _ => {
                    let b = stack.pop().expect("stack safe");
                    let a = stack.pop().expect("stack safe");
                    let sym = match op {
                        Op::Add => "+",
                        Op::Sub => "-",
                        Op::Mul => "*",
                        _ => "/",
                    };
                    format!("({a} {sym} {b})")
                }
            };
            stack.push(s);
        }
        stack.pop().expect("stack safe")
    }
}

impl fmt::Display for ExprProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .ops
            .iter()
            .map(|op| match op {
                Op::PushVar(i) => format!("push_var({i})"),
                Op::PushConst(c) => format!("push_const({c})"),
                other => format!("{other:?}").to_lowercase(),
            })
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

pub fn eval_expr(program: &ExprProgram, assignment: &[f64]) -> Result<f64, ExprError> {
    let mut stack: Vec<f64> = Vec::with_capacity(program.ops.len());
    for &op in &program.ops {
        let v = match op {
            Op::PushVar(i) => *assignment.get(i).ok_or(ExprError::MissingVariable(i))?,
            Op::PushConst(c) => c,
            Op::Sin | Op::Cos => {
                let a = stack.pop().ok_or(ExprError::StackUnsafe)?;
                if op == Op::Sin {
                    a.sin()
                } else {
                    a.cos()
                }
            }
            _ => {
                let b = stack.pop().ok_or(ExprError::StackUnsafe)?;
                let a = stack.pop().ok_or(ExprError::StackUnsafe)?;
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    _ => {
                        if b.abs() < 1e-12 {
                            return Err(ExprError::DivByNearZero);
                        }
                        a / b
                    }
                }
            }
        };
        if !v.is_finite() {
            return Err(ExprError::NonFinite);
        }
        stack.push(v);
    }
    stack.pop().ok_or(ExprError::StackUnsafe)
}

/// Central finite-difference partial derivative, step scaled to the point.
pub fn partial(program: &ExprProgram, point: &[f64], var: usize) -> Result<f64, ExprError> {
    let x = *point.get(var).ok_or(ExprError::MissingVariable(var))?;
    let h = 1e-5 * (x.abs() + 1.0);
    let mut p = point.to_vec();
    p[var] = x + h;
    let up = eval_expr(program, &p)?;
    p[var] = x - h;
    let down = eval_expr(program, &p)?;
    Ok((up - down) / (2.0 * h))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionConfig {
    #[serde(default = "default_max_length")]
    pub max_length: usize,
    #[serde(default = "default_constants")]
    pub constants: Vec<f64>,
}

fn default_max_length() -> usize {
    32
}

fn default_constants() -> Vec<f64> {
    vec![1.0, 2.0, 0.5, 3.0]
}

impl Default for RegressionConfig {
    fn default() -> Self {
        Self {
            max_length: default_max_length(),
            constants: default_constants(),
        }
    }
}

/// Gene alphabet: `0` is a no-op, then one code per variable, one per pool
/// constant, then the six operators.
#[derive(Debug, Clone)]
pub struct ProgramSpace {
    config: RegressionConfig,
    variables: usize,
    loci: Vec<LocusRange>,
}

const OPERATORS: [Op; 6] = [Op::Add, Op::Sub, Op::Mul, Op::Div, Op::Sin, Op::Cos];

impl ProgramSpace {
    pub fn new(config: RegressionConfig, variables: usize) -> Self {
        let codes = 1 + variables + config.constants.len() + OPERATORS.len();
        let loci = vec![LocusRange::new(0, codes as i32 - 1); config.max_length];
        Self {
            config,
            variables,
            loci,
        }
    }

    fn op_for(&self, code: i32) -> Option<Op> {
        let code = code as usize;
        let (v, c) = (self.variables, self.config.constants.len());
        match code {
            0 => None,
            i if i <= v => Some(Op::PushVar(i - 1)),
            i if i <= v + c => Some(Op::PushConst(self.config.constants[i - v - 1])),
            i => OPERATORS.get(i - v - c - 1).copied(),
        }
    }

    /// Skips no-ops and operators that would underflow, then keeps the
    /// shortest suffix that computes the final top of stack.
    pub fn decode(&self, genome: &Genome) -> ExprProgram {
        let mut ops = Vec::new();
        let mut depth = 0usize;
        for &g in &genome.genes {
            if let Some(op) = self.op_for(g) {
                if depth >= op.arity() {
                    depth = depth - op.arity() + 1;
                    ops.push(op);
                }
            }
        }
        let mut need = 1usize;
        let mut start = ops.len();
        while need > 0 && start > 0 {
            start -= 1;
            need = need - 1 + ops[start].arity();
        }
        if need > 0 {
            return ExprProgram::new(vec![Op::PushConst(0.0)]).expect("a constant is stack safe");
        }
        ExprProgram::new(ops[start..].to_vec()).expect("decoded suffix is stack safe")
    }

    pub fn random_program(&self, rng: &mut impl rand::Rng) -> ExprProgram {
        self.decode(&sample_genome(&self.loci, rng))
    }

    pub fn action_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (0..self.variables).map(|i| format!("push_var({i})")).collect();
        names.extend(self.config.constants.iter().map(|c| format!("push_const({c})")));
        names.extend(["add", "sub", "mul", "div", "sin", "cos"].map(String::from));
        names
    }

    fn action_name(op: Op) -> String {
        match op {
            Op::PushVar(i) => format!("push_var({i})"),
            Op::PushConst(c) => format!("push_const({c})"),
            other => format!("{other:?}").to_lowercase(),
        }
    }
}

impl GenomeSpace for ProgramSpace {
    fn loci(&self) -> &[LocusRange] {
        &self.loci
    }

    fn descriptor_dimension(&self) -> usize {
        1
    }

    fn descriptor(&self, genome: &Genome) -> Vec<f64> {
        vec![self.decode(genome).len() as f64]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub variables: Vec<String>,
    pub samples: Vec<Vec<f64>>,
    #[serde(default)]
    pub note: String,
}

pub const MIN_SAMPLES: usize = 10;

impl Dataset {
    pub fn new(variables: Vec<String>, samples: Vec<Vec<f64>>, note: impl Into<String>) -> Result<Self, RegressionError> {
        let bad = |m: String| Err(RegressionError::Dataset(m));
        if samples.len() < MIN_SAMPLES {
            return bad(format!("need at least {MIN_SAMPLES} samples, got {}", samples.len()));
        }
        if let Some(r) = samples.iter().position(|r| r.len() != variables.len()) {
            return bad(format!("row {r} does not have {} values", variables.len()));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return bad("dataset contains non-finite values".into());
        }
        Ok(Self {
            variables,
            samples,
            note: note.into(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.variables.join(",");
        out.push('\n');
        for row in &self.samples {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum System {
    Circle { r: f64 },
    Ellipse { a: f64, b: f64 },
    HarmonicOscillator { omega: f64 },
}

/// One period of the system sampled evenly from a seeded starting phase.
pub fn generate_dataset(system: System, n: usize, noise_sd: f64, seed: u64) -> Result<Dataset, RegressionError> {
    if n < MIN_SAMPLES {
        return Err(RegressionError::Dataset(format!("need at least {MIN_SAMPLES} samples")));
    }
    let noise = Normal::new(0.0, noise_sd.max(0.0)).map_err(|e| RegressionError::Dataset(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU);
    let mut jitter = |v: f64| if noise_sd > 0.0 { v + noise.sample(&mut rng) } else { v };
    let (names, note): (Vec<&str>, String) = match system {
        System::Circle { r } => (vec!["x", "y"], format!("circle r={r}")),
        System::Ellipse { a, b } => (vec!["x", "y"], format!("ellipse a={a} b={b}")),
        System::HarmonicOscillator { omega } => (vec!["x", "v"], format!("harmonic oscillator omega={omega}")),
    };
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = phase + std::f64::consts::TAU * k as f64 / n as f64;
        let row = match system {
            System::Circle { r } => vec![r * t.cos(), r * t.sin()],
            System::Ellipse { a, b } => vec![a * t.cos(), b * t.sin()],
            // t here is the oscillator phase omega*time
            System::HarmonicOscillator { omega } => vec![t.cos(), -omega * t.sin()],
        };
        samples.push(row.into_iter().map(&mut jitter).collect());
    }
    Dataset::new(names.into_iter().map(String::from).collect(), samples, format!("{note}, noise_sd={noise_sd}, seed={seed}"))
}

fn signed_log(r: f64) -> f64 {
    r.signum() * r.abs().ln_1p()
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    // relative tolerance: ratios that differ only by rounding count as constant
    let tiny = |s: f64, m: f64| s <= 1e-20 * n * (1.0 + m * m);
    if tiny(saa, ma) || tiny(sbb, mb) {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Data-implied `Δx_i/Δx_j` between consecutive samples, with the midpoint
/// where the model is evaluated. Pairs with `Δx_j == 0` are skipped.
fn data_ratios(data: &Dataset, i: usize, j: usize) -> Vec<(f64, Vec<f64>)> {
    data.samples
        .windows(2)
        .filter_map(|w| {
            let dj = w[1][j] - w[0][j];
            (dj != 0.0).then(|| {
                let mid: Vec<f64> = w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect();
                ((w[1][i] - w[0][i]) / dj, mid)
            })
        })
        .collect()
}

/// Agreement in [-1, 1] between the program's implied `∂x_i/∂x_j` and the
/// data's. Degenerate programs score -1.
pub fn derivative_fitness(program: &ExprProgram, data: &Dataset, (i, j): (usize, usize)) -> Result<f64, FitnessError> {
    let v = data.variables.len();
    if v < 2 {
        return Err(FitnessError::InsufficientVariation("at least two variables are needed".into()));
    }
    if i >= v || j >= v || i == j {
        return Err(FitnessError::BadPair);
    }
    let ratios = data_ratios(data, i, j);
    let d: Vec<f64> = ratios.iter().map(|(r, _)| signed_log(*r)).collect();
    let (lo, hi) = d.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    if d.len() < 3 || hi - lo <= 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
        return Err(FitnessError::InsufficientVariation(format!(
            "ratios of {} to {} are constant",
            data.variables[i], data.variables[j]
        )));
    }
    let mut model = Vec::with_capacity(ratios.len());
    let mut observed = Vec::with_capacity(ratios.len());
    let mut any_slope = false;
    for ((_, mid), &dv) in ratios.iter().zip(&d) {
        let (Ok(fi), Ok(fj)) = (partial(program, mid, i), partial(program, mid, j)) else {
            continue;
        };
        if fi.abs() < 1e-9 {
            continue;
        }
        any_slope = true;
        let r = -fj / fi;
        if r.is_finite() {
            model.push(signed_log(r));
            observed.push(dv);
        }
    }
    if !any_slope || model.len() < 3 {
        return Ok(-1.0);
    }
    Ok(pearson(&model, &observed).unwrap_or(-1.0))
}

/// Mean derivative fitness over every unordered variable pair.
pub fn program_fitness(program: &ExprProgram, data: &Dataset) -> Result<f64, FitnessError> {
    let v = data.variables.len();
    if v < 2 {
        return Err(FitnessError::InsufficientVariation("at least two variables are needed".into()));
    }
    let mut total = 0.0;
    let mut pairs = 0;
    for i in 0..v {
        for j in i + 1..v {
            total += derivative_fitness(program, data, (i, j))?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// Fixed comparison programs over the first two variables, scored before any
/// search: the circle invariant `x0²+x1²` and three non-invariants.
pub fn reference_table(data: &Dataset) -> Result<Vec<ScoredProgram>, FitnessError> {
    use Op::*;
    let programs = [
        vec![PushVar(0), PushVar(0), Mul, PushVar(1), PushVar(1), Mul, Add],
        vec![PushVar(0), PushVar(1), Add],
        vec![PushVar(0), PushVar(1), Mul],
        vec![PushVar(0)],
    ];
    programs
        .into_iter()
        .map(|ops| {
            let program = ExprProgram::new(ops).expect("reference programs are stack-safe");
            Ok(ScoredProgram {
                infix: program.infix(&data.variables),
                fitness: program_fitness(&program, data)?,
                program,
            })
        })
        .collect()
}

struct DerivativeObjective<'a> {
    space: &'a ProgramSpace,
    data: &'a Dataset,
}

impl Objective for DerivativeObjective<'_> {
    fn fitness(&self, genome: &Genome, _descriptor: &[f64]) -> f64 {
        program_fitness(&self.space.decode(genome), self.data).unwrap_or(-1.0)
    }

    fn complexity(&self, genome: &Genome) -> usize {
        self.space.decode(genome).len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredProgram {
    pub program: ExprProgram,
    pub infix: String,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillOutcome {
    pub best: ScoredProgram,
    /// Distinct programs of the final population, best first.
    pub top: Vec<ScoredProgram>,
    pub history: Vec<GenerationRecord>,
}

/// Default early stop for [`distill`].
pub const TARGET_FITNESS: f64 = 0.99;

/// Evolves programs toward high derivative fitness. Stops early once the
/// best program reaches `config.stop_at_fitness` (0.99 when unset).
pub fn distill(
    data: &Dataset,
    regression: &RegressionConfig,
    config: &EvolutionConfig,
    exec: &Executor,
) -> Result<DistillOutcome, RegressionError> {
    // fail fast on data the fitness cannot use
    let probe = ExprProgram::new(vec![Op::PushConst(0.0)]).expect("constant");
    program_fitness(&probe, data)?;
    let space = ProgramSpace::new(regression.clone(), data.variables.len());
    let objective = DerivativeObjective { space: &space, data };
    let config = EvolutionConfig {
        stop_at_fitness: Some(config.stop_at_fitness.unwrap_or(TARGET_FITNESS)),
        ..config.clone()
    };
    let outcome = evolve(&space, &config, Mode::Objective(&objective), exec)?;
    let mut ranked: Vec<(f64, usize, ExprProgram)> = outcome
        .population
        .iter()
        .enumerate()
        .map(|(i, ind)| (ind.fitness.unwrap_or(-1.0), i, space.decode(&ind.genome)))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.len().cmp(&b.2.len())).then(a.1.cmp(&b.1)));
    let mut top: Vec<ScoredProgram> = Vec::new();
    for (fitness, _, program) in ranked {
        if top.iter().all(|t| t.program != program) {
            top.push(ScoredProgram {
                infix: program.infix(&data.variables),
                program,
                fitness,
            });
        }
        if top.len() == 10 {
            break;
        }
    }
    Ok(DistillOutcome {
        best: top[0].clone(),
        top,
        history: outcome.history,
    })
}

/// The language of a regression run: no properties (the target type is
/// fixed by the fitness), one action per instruction.
pub fn regression_language(space_vars: usize, config: &RegressionConfig) -> LanguageState {
    let space = ProgramSpace::new(config.clone(), space_vars);
    let actions = space.action_names().into_iter().map(ActionSpec::nullary).collect();
    LanguageState::new(Vec::new(), actions).expect("instruction names are distinct")
}

/// Wraps a distillation in the run-report format: each distinct top program
/// becomes a method; no concept is ever created.
pub fn distill_report(data: &Dataset, regression: &RegressionConfig, outcome: &DistillOutcome) -> RunReport {
    let state = regression_language(data.variables.len(), regression);
    let products = outcome
        .top
        .iter()
        .map(|p| {
            let steps: Vec<GroundAction> = p
                .program
                .ops()
                .iter()
                .map(|&op| {
                    let id = state.action_by_name(&ProgramSpace::action_name(op)).expect("instruction in alphabet").id;
                    GroundAction::nullary(id)
                })
                .collect();
            let method = state.validate_method(steps).expect("programs are non-empty");
            (method, serde_json::to_value(p).expect("programs serialize"))
        })
        .collect();
    construction_report("regression", state, products)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Op::*;

    fn prog(ops: Vec<Op>) -> ExprProgram {
        ExprProgram::new(ops).unwrap()
    }

    fn circle_invariant() -> ExprProgram {
        prog(vec![PushVar(0), PushVar(0), Mul, PushVar(1), PushVar(1), Mul, Add])
    }

    #[test]
    fn worked_example_expressions() {
        let trig = prog(vec![PushVar(0), Sin, PushVar(0), Sin, Mul, PushVar(0), Cos, PushVar(0), Cos, Mul, Add]);
        assert!((trig.eval(&[0.7]).unwrap() - 1.0).abs() < 1e-12);
        let e = prog(vec![PushVar(0), PushConst(4.56), Add, PushVar(1), PushVar(0), Mul, PushVar(1), Div, Sub]);
        assert!((e.eval(&[2.0, 3.0]).unwrap() - 4.56).abs() < 1e-12);
        assert_eq!(prog(vec![PushConst(5.0)]).eval(&[1.0, 9.0]).unwrap(), 5.0);
        assert_eq!(e.infix(&["x".into(), "y".into()]), "((x + 4.56) - ((y * x) / y))");
    }

    #[test]
    fn stack_safety_checked_at_construction() {
        assert_eq!(ExprProgram::new(vec![Add]), Err(ExprError::StackUnsafe));
        assert_eq!(ExprProgram::new(vec![PushVar(0), PushVar(1)]), Err(ExprError::StackUnsafe));
        assert_eq!(ExprProgram::new(vec![]), Err(ExprError::StackUnsafe));
        let d = prog(vec![PushVar(0), PushConst(0.0), Div]);
        assert_eq!(d.eval(&[1.0]), Err(ExprError::DivByNearZero));
    }

    #[test]
    fn decoding_keeps_a_safe_suffix() {
        let space = ProgramSpace::new(RegressionConfig::default(), 2);
        // codes: 1,2 vars; 3..=6 constants; 7 add 8 sub 9 mul 10 div 11 sin 12 cos
        let g = Genome::new(vec![7, 1, 0, 2, 1, 9, 11]);
        assert_eq!(space.decode(&g).ops(), &[PushVar(1), PushVar(0), Mul, Sin]);
        assert_eq!(space.decode(&Genome::new(vec![0, 7, 8])).ops(), &[PushConst(0.0)]);
    }

    #[test]
    fn circle_fitness_separates_invariant() {
        let data = generate_dataset(System::Circle { r: 1.0 }, 200, 0.0, 3).unwrap();
        let good = derivative_fitness(&circle_invariant(), &data, (0, 1)).unwrap();
        assert!(good >= 0.99, "{good}");
        let sum = derivative_fitness(&prog(vec![PushVar(0), PushVar(1), Add]), &data, (0, 1)).unwrap();
        assert!(sum < 0.9);
        assert_eq!(derivative_fitness(&prog(vec![PushConst(2.0)]), &data, (0, 1)).unwrap(), -1.0);
    }

    #[test]
    fn datasets() {
        let c = generate_dataset(System::Circle { r: 1.0 }, 200, 0.0, 1).unwrap();
        assert!(c.samples.iter().all(|r| (r[0] * r[0] + r[1] * r[1] - 1.0).abs() < 1e-12));
        let h = generate_dataset(System::HarmonicOscillator { omega: 2.0 }, 100, 0.0, 1).unwrap();
        let e0 = 4.0 * h.samples[0][0].powi(2) + h.samples[0][1].powi(2);
        assert!(h.samples.iter().all(|r| (4.0 * r[0] * r[0] + r[1] * r[1] - e0).abs() < 1e-9));
        assert_eq!(generate_dataset(System::Circle { r: 1.0 }, 50, 0.1, 7), generate_dataset(System::Circle { r: 1.0 }, 50, 0.1, 7));
        assert!(generate_dataset(System::Circle { r: 1.0 }, 5, 0.0, 1).is_err());
    }

    #[test]
    fn one_variable_is_insufficient() {
        let data = Dataset::new(vec!["x".into()], (0..20).map(|i| vec![i as f64]).collect(), "").unwrap();
        let p = prog(vec![PushVar(0)]);
        assert!(matches!(program_fitness(&p, &data), Err(FitnessError::InsufficientVariation(_))));
        let r = distill(&data, &RegressionConfig::default(), &EvolutionConfig::default(), &Executor::sequential());
        assert!(matches!(r, Err(RegressionError::Fitness(FitnessError::InsufficientVariation(_)))));
    }

    #[test]
    fn constant_data_ratio_is_insufficient() {
        let line: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let data = Dataset::new(vec!["x".into(), "y".into()], line, "").unwrap();
        assert!(matches!(
            derivative_fitness(&circle_invariant(), &data, (0, 1)),
            Err(FitnessError::InsufficientVariation(_))
        ));
    }

    proptest::proptest! {
        #[test]
        fn eval_is_pure(seed in 0u64..500, x in -3.0f64..3.0, y in -3.0f64..3.0) {
            let space = ProgramSpace::new(RegressionConfig::default(), 2);
            let p = space.random_program(&mut ChaCha8Rng::seed_from_u64(seed));
            let a = p.eval(&[x, y]);
            let b = p.eval(&[x, y]);
            proptest::prop_assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
        }
    }
}
