//! Grid mazes decoded from genomes. Concepts are maze types (bucketed maze
//! statistics) and the method for a maze is its escape plan.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domain::{
    descriptor_hit_fraction, descriptor_satisfies, disjoint_pair, has_disjoint_buckets, DesignDomain, OpenReason, RealizeBudget,
    RealizeContext, Realization,
};
use crate::language::{
    ActionSpec, ConceptDescription, GroundAction, LanguageState, MethodDescription, PropertyId, PropertySpec,
};
use crate::novelty::{evolve, EvolutionConfig, Genome, GenomeSpace, LocusRange, Mode};
use crate::planner::{search, SearchBudget, Strategy, TransitionSystem};

pub const AXIS_SOLVABLE: usize = 0;
pub const AXIS_SOLUTION_LENGTH: usize = 1;
pub const AXIS_DEAD_ENDS: usize = 2;
pub const AXIS_WALL_DENSITY: usize = 3;
pub const AXIS_BRANCHING: usize = 4;
pub const DESCRIPTOR_DIM: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Move {
    N,
    S,
    E,
    W,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::N, Move::S, Move::E, Move::W];

    pub fn name(self) -> &'static str {
        match self {
            Move::N => "N",
            Move::S => "S",
            Move::E => "E",
            Move::W => "W",
        }
    }

    pub fn from_name(name: &str) -> Option<Move> {
        Move::ALL.into_iter().find(|m| m.name() == name)
    }
}

/// A `width × height` grid. The border is always walled except for the
/// entrance at the top-left cell and the exit at the bottom-right cell.
/// `east[y][x]` walls off `(x,y)` from `(x+1,y)`; `south[y][x]` walls off
/// `(x,y)` from `(x,y+1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct MazeGrid {
    width: usize,
    height: usize,
    east: Vec<bool>,
    south: Vec<bool>,
}

/// Serialized form: wall rows as strings of `0`/`1`.
#[derive(Serialize, Deserialize)]
struct GridRepr {
    width: usize,
    height: usize,
    east: Vec<String>,
    south: Vec<String>,
}

fn bits_to_rows(bits: &[bool], row_len: usize, rows: usize) -> Vec<String> {
    (0..rows)
        .map(|r| bits[r * row_len..(r + 1) * row_len].iter().map(|&b| if b { '1' } else { '0' }).collect())
        .collect()
}

fn rows_to_bits(rows: &[String], row_len: usize, expected_rows: usize) -> Result<Vec<bool>, String> {
    if rows.len() != expected_rows {
        return Err(format!("expected {expected_rows} wall rows, got {}", rows.len()));
    }
    let mut out = Vec::with_capacity(row_len * expected_rows);
    for r in rows {
        if r.len() != row_len {
            return Err(format!("wall row {r:?} should have {row_len} entries"));
        }
        for c in r.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return Err(format!("wall row {r:?} may only contain 0 and 1")),
            }
        }
    }
    Ok(out)
}

impl TryFrom<GridRepr> for MazeGrid {
    type Error = String;
    fn try_from(r: GridRepr) -> Result<Self, String> {
        MazeGrid::check_size(r.width, r.height)?;
        let east = rows_to_bits(&r.east, r.width - 1, r.height)?;
        let south = rows_to_bits(&r.south, r.width, r.height - 1)?;
        Ok(MazeGrid {
            width: r.width,
            height: r.height,
            east,
            south,
        })
    }
}

impl From<MazeGrid> for GridRepr {
    fn from(g: MazeGrid) -> Self {
        GridRepr {
            width: g.width,
            height: g.height,
            east: bits_to_rows(&g.east, g.width - 1, g.height),
            south: bits_to_rows(&g.south, g.width, g.height - 1),
        }
    }
}

impl MazeGrid {
    fn check_size(width: usize, height: usize) -> Result<(), String> {
        if width == 0 || height == 0 || width * height < 2 {
            return Err(format!("a {width}x{height} maze has no room for both entrance and exit"));
        }
        Ok(())
    }

    /// A grid with no interior walls.
    pub fn open(width: usize, height: usize) -> Result<Self, String> {
        Self::check_size(width, height)?;
        Ok(Self {
            width,
            height,
            east: vec![false; (width - 1) * height],
            south: vec![false; width * (height - 1)],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> usize {
        self.width * self.height
    }

    pub fn entrance(&self) -> (usize, usize) {
        (0, 0)
    }

    pub fn exit(&self) -> (usize, usize) {
        (self.width - 1, self.height - 1)
    }

    pub fn interior_edges(&self) -> usize {
        self.east.len() + self.south.len()
    }

    pub fn wall_count(&self) -> usize {
        self.east.iter().chain(&self.south).filter(|&&w| w).count()
    }

    pub fn east_wall(&self, x: usize, y: usize) -> bool {
        x + 1 >= self.width || self.east[y * (self.width - 1) + x]
    }

    pub fn south_wall(&self, x: usize, y: usize) -> bool {
        y + 1 >= self.height || self.south[y * self.width + x]
    }

    pub fn set_east_wall(&mut self, x: usize, y: usize, wall: bool) {
        assert!(x + 1 < self.width && y < self.height, "not an interior edge");
        self.east[y * (self.width - 1) + x] = wall;
    }

    pub fn set_south_wall(&mut self, x: usize, y: usize, wall: bool) {
        assert!(x < self.width && y + 1 < self.height, "not an interior edge");
        self.south[y * self.width + x] = wall;
    }

    /// The cell reached by `m` from `(x, y)`, if no wall is in the way.
    pub fn step(&self, (x, y): (usize, usize), m: Move) -> Option<(usize, usize)> {
        match m {
            Move::N if y > 0 && !self.south_wall(x, y - 1) => Some((x, y - 1)),
            Move::S if !self.south_wall(x, y) => Some((x, y + 1)),
            Move::E if !self.east_wall(x, y) => Some((x + 1, y)),
            Move::W if x > 0 && !self.east_wall(x - 1, y) => Some((x - 1, y)),
            _ => None,
        }
    }

    pub fn open_sides(&self, cell: (usize, usize)) -> usize {
        Move::ALL.iter().filter(|&&m| self.step(cell, m).is_some()).count()
    }

    /// Walks `moves` from the entrance; `None` if any move hits a wall.
    pub fn walk(&self, moves: &[Move]) -> Option<(usize, usize)> {
        moves.iter().try_fold(self.entrance(), |cell, &m| self.step(cell, m))
    }

    /// Cells reachable from the entrance.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.cells()];
        let mut stack = vec![self.entrance()];
        seen[0] = true;
        while let Some(c) = stack.pop() {
            for m in Move::ALL {
                if let Some(n) = self.step(c, m) {
                    let i = n.1 * self.width + n.0;
                    if !seen[i] {
                        seen[i] = true;
                        stack.push(n);
                    }
                }
            }
        }
        seen
    }
}

impl TransitionSystem for MazeGrid {
    type State = (usize, usize);
    type Action = Move;

    fn initial(&self) -> (usize, usize) {
        self.entrance()
    }

    fn is_goal(&self, cell: &(usize, usize)) -> bool {
        *cell == self.exit()
    }

    fn successors(&self, cell: &(usize, usize)) -> Vec<(Move, (usize, usize))> {
        Move::ALL.iter().filter_map(|&m| self.step(*cell, m).map(|n| (m, n))).collect()
    }
}

/// Shortest escape route by breadth-first search, or `None` if the exit is
/// walled off.
pub fn solve_maze(grid: &MazeGrid) -> Option<Vec<Move>> {
    let budget = SearchBudget::new(grid.cells() + 1, grid.cells());
    search(grid, budget, Strategy::Bfs).ok().map(|f| f.steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MazeDescriptor {
    pub solvable: f64,
    pub solution_length: f64,
    pub dead_ends: f64,
    pub wall_density: f64,
    pub branching: f64,
}

impl MazeDescriptor {
    pub fn to_vec(self) -> Vec<f64> {
        vec![self.solvable, self.solution_length, self.dead_ends, self.wall_density, self.branching]
    }
}

pub fn describe(grid: &MazeGrid) -> MazeDescriptor {
    let solution = solve_maze(grid);
    let cells = grid.cells() as f64;
    let mut dead_ends = 0usize;
    let reachable = grid.reachable();
    let mut open_sum = 0usize;
    for y in 0..grid.height {
        for x in 0..grid.width {
            let sides = grid.open_sides((x, y));
            let endpoint = (x, y) == grid.entrance() || (x, y) == grid.exit();
            if sides == 1 && !endpoint {
                dead_ends += 1;
            }
            if reachable[y * grid.width + x] {
                open_sum += sides;
            }
        }
    }
    let reached = reachable.iter().filter(|&&r| r).count();
    MazeDescriptor {
        solvable: solution.is_some() as u8 as f64,
        solution_length: solution.map_or(0.0, |s| s.len() as f64 / cells),
        dead_ends: dead_ends as f64 / cells,
        wall_density: grid.wall_count() as f64 / grid.interior_edges().max(1) as f64,
        branching: open_sum as f64 / reached as f64,
    }
}

/// Bucket edges `[c1, c2]` splitting an axis into low/mid/high.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cuts {
    pub low: f64,
    pub high: f64,
    /// Upper end of the high bucket (exclusive).
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MazeConfig {
    /// Side lengths the two size genes choose from.
    pub sizes: Vec<usize>,
    pub solution_length: Cuts,
    pub dead_ends: Cuts,
    pub wall_density: Cuts,
    pub branching: Cuts,
}

impl Default for MazeConfig {
    /// Cuts split each axis's range observed under novelty search into thirds.
    fn default() -> Self {
        let cuts = |low, high, max| Cuts { low, high, max };
        Self {
            sizes: vec![5, 7, 9, 11],
            solution_length: cuts(0.25, 0.35, 1.01),
            dead_ends: cuts(0.1, 0.2, 1.01),
            wall_density: cuts(0.35, 0.6, 1.01),
            branching: cuts(2.1, 2.4, 4.01),
        }
    }
}

impl MazeConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.sizes.is_empty() || self.sizes.iter().any(|&s| s < 2) {
            return Err("maze sizes must be non-empty and at least 2".into());
        }
        for (name, c) in [
            ("solution_length", self.solution_length),
            ("dead_ends", self.dead_ends),
            ("wall_density", self.wall_density),
            ("branching", self.branching),
        ] {
            if !(0.0 < c.low && c.low < c.high && c.high < c.max && c.max.is_finite()) {
                return Err(format!("{name} cuts must satisfy 0 < low < high < max"));
            }
        }
        Ok(())
    }

    pub fn max_side(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(2)
    }

    pub fn properties(&self) -> Vec<PropertySpec> {
        let mut out = vec![PropertySpec::new("solvable", AXIS_SOLVABLE, 1.0, 2.0)];
        for (axis, name, c) in [
            (AXIS_SOLUTION_LENGTH, "solution_length", self.solution_length),
            (AXIS_DEAD_ENDS, "dead_ends", self.dead_ends),
            (AXIS_WALL_DENSITY, "wall_density", self.wall_density),
            (AXIS_BRANCHING, "branching", self.branching),
        ] {
            out.push(PropertySpec::new(format!("{name}_low"), axis, 0.0, c.low));
            out.push(PropertySpec::new(format!("{name}_mid"), axis, c.low, c.high));
            out.push(PropertySpec::new(format!("{name}_high"), axis, c.high, c.max));
        }
        out
    }
}

/// Genome layout: width gene, height gene, then one gene per interior edge
/// of the largest grid (east walls row by row, then south walls).
#[derive(Debug, Clone)]
pub struct MazeSpace {
    config: MazeConfig,
    loci: Vec<LocusRange>,
}

impl MazeSpace {
    pub fn new(config: MazeConfig) -> Result<Self, String> {
        config.validate()?;
        let m = config.max_side();
        let size = LocusRange::new(0, config.sizes.len() as i32 - 1);
        let mut loci = vec![size, size];
        loci.extend(std::iter::repeat_n(LocusRange::new(0, 1), 2 * m * (m - 1)));
        Ok(Self { config, loci })
    }

    pub fn config(&self) -> &MazeConfig {
        &self.config
    }

    pub fn decode(&self, genome: &Genome) -> MazeGrid {
        let g = &genome.genes;
        let m = self.config.max_side();
        let pick = |v: i32| self.config.sizes[(v.max(0) as usize).min(self.config.sizes.len() - 1)];
        let (w, h) = (pick(g[0]), pick(g[1]));
        let mut grid = MazeGrid::open(w, h).expect("configured sizes are at least 2");
        let edges = &g[2..];
        let south_base = (m - 1) * m;
        for y in 0..h {
            for x in 0..w {
                if x + 1 < w {
                    grid.set_east_wall(x, y, edges[y * (m - 1) + x] != 0);
                }
                if y + 1 < h {
                    grid.set_south_wall(x, y, edges[south_base + y * m + x] != 0);
                }
            }
        }
        grid
    }
}

impl GenomeSpace for MazeSpace {
    fn loci(&self) -> &[LocusRange] {
        &self.loci
    }

    fn descriptor_dimension(&self) -> usize {
        DESCRIPTOR_DIM
    }

    fn descriptor(&self, genome: &Genome) -> Vec<f64> {
        describe(&self.decode(genome)).to_vec()
    }
}

/// A maze with its escape plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MazeInstance {
    pub grid: MazeGrid,
}

pub struct MazeDomain {
    space: MazeSpace,
}

impl MazeDomain {
    pub fn new(config: MazeConfig) -> Result<Self, String> {
        Ok(Self {
            space: MazeSpace::new(config)?,
        })
    }

    pub fn space(&self) -> &MazeSpace {
        &self.space
    }

    pub fn moves_to_actions(moves: &[Move], state: &LanguageState) -> Option<Vec<GroundAction>> {
        moves
            .iter()
            .map(|m| state.action_by_name(m.name()).map(|a| GroundAction::nullary(a.id)))
            .collect()
    }

    pub fn actions_to_moves(steps: &[GroundAction], state: &LanguageState) -> Option<Vec<Move>> {
        steps.iter().map(|s| Move::from_name(&state.action(s.action)?.name)).collect()
    }
}

impl DesignDomain for MazeDomain {
    type Instance = MazeGrid;

    fn name(&self) -> &str {
        "maze"
    }

    fn descriptor_dimension(&self) -> usize {
        DESCRIPTOR_DIM
    }

    fn initial_properties(&self) -> Vec<PropertySpec> {
        self.space.config.properties()
    }

    fn initial_actions(&self) -> Vec<ActionSpec> {
        Move::ALL.iter().map(|m| ActionSpec::nullary(m.name())).collect()
    }

    fn descriptor(&self, grid: &MazeGrid) -> Vec<f64> {
        describe(grid).to_vec()
    }

    fn realize(&self, concept: &ConceptDescription, ctx: &RealizeContext<'_>) -> Result<Realization<MazeGrid>, OpenReason> {
        if has_disjoint_buckets(concept, ctx.state) {
            return Err(OpenReason::ProvedUnrealizable);
        }
        let RealizeBudget::Evolution(budget) = ctx.budget else {
            return Err(OpenReason::BudgetExhausted);
        };
        let state = ctx.state;
        // Fraction of buckets hit; a full hit only counts once the maze is
        // solvable and its escape plan is not already some other concept's.
        let fitness = |genome: &Genome, descriptor: &[f64]| -> f64 {
            let hit = descriptor_hit_fraction(descriptor, concept, state);
            if hit < 1.0 {
                return hit;
            }
            let usable = solve_maze(&self.space.decode(genome))
                .and_then(|plan| Self::moves_to_actions(&plan, state))
                .is_some_and(|steps| !steps.is_empty() && !ctx.is_taken(&steps));
            if usable {
                1.0
            } else {
                1.0 - 0.5 / concept.len() as f64
            }
        };
        let config = EvolutionConfig {
            rng_seed: ctx.seed,
            stop_at_fitness: Some(1.0),
            ..budget.clone()
        };
        let outcome = evolve(&self.space, &config, Mode::Objective(&fitness), ctx.exec).map_err(|_| OpenReason::BudgetExhausted)?;
        let best = outcome
            .population
            .iter()
            .find(|i| i.fitness == Some(1.0))
            .ok_or(OpenReason::BudgetExhausted)?;
        let grid = self.space.decode(&best.genome);
        let plan = solve_maze(&grid).expect("full score implies solvable");
        debug_assert!(descriptor_satisfies(&best.descriptor, concept, state).unwrap_or(false));
        Ok(Realization {
            steps: Self::moves_to_actions(&plan, state).expect("move actions exist"),
            instance: grid,
            provenance: Some(serde_json::to_value(&best.genome).expect("genomes serialize")),
        })
    }

    fn unrealizable_core(&self, concept: &ConceptDescription, state: &LanguageState) -> Option<Vec<PropertyId>> {
        disjoint_pair(concept, state).map(Vec::from)
    }

    /// Walks the plan from the entrance; succeeds only if it ends at the exit.
    fn replay(&self, grid: &MazeGrid, method: &MethodDescription, state: &LanguageState) -> Option<MazeGrid> {
        let moves = Self::actions_to_moves(method.steps(), state)?;
        (grid.walk(&moves)? == grid.exit()).then(|| grid.clone())
    }

    fn check_budget(&self, budget: &RealizeBudget) -> Result<(), String> {
        match budget {
            RealizeBudget::Evolution(c) => c.validate().map_err(|e| e.to_string()),
            RealizeBudget::Search(_) => Err("the maze domain realizes concepts by evolution".into()),
        }
    }
}

/// Text drawing: `+`, `-` and `|` for walls, `.` for cells on `path`.
pub fn render_ascii(grid: &MazeGrid, path: Option<&[Move]>) -> String {
    let mut on_path = vec![false; grid.cells()];
    if let Some(p) = path {
        let mut c = grid.entrance();
        on_path[0] = true;
        for &m in p {
            match grid.step(c, m) {
                Some(n) => c = n,
                None => break,
            }
            on_path[c.1 * grid.width + c.0] = true;
        }
    }
    let mut out = String::new();
    out.push_str("+  ");
    for _ in 1..grid.width {
        out.push_str("+--");
    }
    out.push_str("+\n");
    for y in 0..grid.height {
        out.push('|');
        for x in 0..grid.width {
            out.push_str(if on_path[y * grid.width + x] { " ." } else { "  " });
            out.push(if grid.east_wall(x, y) { '|' } else { ' ' });
        }
        out.push('\n');
        for x in 0..grid.width {
            out.push('+');
            let exit_gap = y + 1 == grid.height && x + 1 == grid.width;
            out.push_str(if grid.south_wall(x, y) && !exit_gap { "--" } else { "  " });
        }
        out.push_str("+\n");
    }
    out
}

/// SVG drawing with walls as lines and an optional solution polyline.
pub fn render_svg(grid: &MazeGrid, path: Option<&[Move]>) -> String {
    const CELL: usize = 20;
    const PAD: usize = 10;
    let (w, h) = (grid.width * CELL + 2 * PAD, grid.height * CELL + 2 * PAD);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="2" stroke-linecap="square">"#);
    let line = |s: &mut String, x1: usize, y1: usize, x2: usize, y2: usize| {
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            PAD + x1 * CELL,
            PAD + y1 * CELL,
            PAD + x2 * CELL,
            PAD + y2 * CELL
        );
    };
    // top border, leaving the entrance open
    line(&mut s, 1, 0, grid.width, 0);
    line(&mut s, 0, 0, 0, grid.height);
    for y in 0..grid.height {
        for x in 0..grid.width {
            let exit = (x, y) == grid.exit();
            if grid.east_wall(x, y) {
                line(&mut s, x + 1, y, x + 1, y + 1);
            }
            if grid.south_wall(x, y) && !exit {
                line(&mut s, x, y + 1, x + 1, y + 1);
            }
        }
    }
    s.push_str("</g>\n");
    if let Some(p) = path {
        let centre = |c: (usize, usize)| (PAD + c.0 * CELL + CELL / 2, PAD + c.1 * CELL + CELL / 2);
        let mut c = grid.entrance();
        let mut points = vec![centre(c)];
        for &m in p {
            match grid.step(c, m) {
                Some(n) => c = n,
                None => break,
            }
            points.push(centre(c));
        }
        let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x},{y}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="red" stroke-width="3"/>"#,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
