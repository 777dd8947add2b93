//! Branch-and-Prune.
//!
//! Depth-first search over levels `K+1 … n`. At level `v` the candidate
//! positions are the (at most two) intersection points of the spheres centred
//! at `x_{v-K}, …, x_{v-1}`; each candidate is kept only if it matches every
//! pruning edge `{u, v}` within `prune_abs + prune_rel·d_uv`. The positive
//! side of the predecessor hyperplane is explored first, so solutions come
//! out sorted by chirality.

use std::io::{self, Write};
use std::ops::ControlFlow;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::embedding::{Chirality, Embedding, Solution};
use crate::geometry::{GeometryError, HullFrame, Intersection, Point};
use crate::instance::DgpInstance;
use crate::tolerance::ToleranceConfig;

/// Refuse to materialize more solutions than this in [`SearchMode::All`].
pub const MAX_STORED_SOLUTIONS: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("vertex {v}: {source}")]
    Geometry { v: usize, source: GeometryError },
    #[error("missing discretization edge {{{u},{v}}}")]
    MissingDiscretizationEdge { u: usize, v: usize },
    #[error("discretization edge {{{u},{v}}} has zero length")]
    ZeroDiscretizationEdge { u: usize, v: usize },
    #[error("more than {limit} solutions; use count mode")]
    TooManySolutions { limit: u64 },
    #[error("embedding has {found} points of dimension {found_dim}, expected {expected} of dimension {expected_dim}")]
    DimensionMismatch {
        expected: usize,
        expected_dim: usize,
        found: usize,
        found_dim: usize,
    },
    #[error("invalid tolerance field {0}")]
    InvalidTolerance(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Stop at the first leaf.
    First,
    /// Enumerate and store every embedding.
    #[default]
    All,
    /// Count leaves without storing coordinates.
    Count,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub mode: SearchMode,
    pub tol: ToleranceConfig,
    /// Worker threads; 1 runs the reference single-threaded search.
    pub threads: usize,
    pub max_solutions: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            mode: SearchMode::All,
            tol: ToleranceConfig::default(),
            threads: 1,
            max_solutions: MAX_STORED_SOLUTIONS,
        }
    }
}

impl SolverOptions {
    pub fn with_mode(mode: SearchMode) -> Self {
        SolverOptions {
            mode,
            ..Default::default()
        }
    }
}

/// Per-level node counts. Index 0 is level `K` (the root, always 1 node);
/// index `v - K` is level `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchStats {
    pub k: usize,
    pub nodes_per_level: Vec<u64>,
    pub pruned_per_level: Vec<u64>,
    pub solutions_found: u64,
    pub wall_time: Duration,
}

impl SearchStats {
    fn new(n: usize, k: usize) -> Self {
        let mut nodes = vec![0; n - k + 1];
        nodes[0] = 1;
        SearchStats {
            k,
            nodes_per_level: nodes,
            pruned_per_level: vec![0; n - k + 1],
            solutions_found: 0,
            wall_time: Duration::ZERO,
        }
    }

    /// Valid (unpruned) nodes at `level`, for `K <= level <= n`.
    pub fn nodes_at(&self, level: usize) -> u64 {
        self.nodes_per_level[level - self.k]
    }

    pub fn pruned_at(&self, level: usize) -> u64 {
        self.pruned_per_level[level - self.k]
    }

    /// Levels `K+1 …` paired with their node counts.
    pub fn levels(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.nodes_per_level.iter().enumerate().skip(1).map(|(i, &c)| (i + self.k, c))
    }

    pub fn max_width(&self) -> u64 {
        self.nodes_per_level.iter().copied().max().unwrap_or(0)
    }

    fn merge(&mut self, other: &SearchStats) {
        // the root is counted once, by whoever owns the merged stats
        for (a, b) in self.nodes_per_level.iter_mut().zip(&other.nodes_per_level).skip(1) {
            *a += b;
        }
        for (a, b) in self.pruned_per_level.iter_mut().zip(&other.pruned_per_level) {
            *a += b;
        }
        self.solutions_found += other.solutions_found;
    }

    /// CSV `level,nodes,pruned` for levels `K+1 … n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "level,nodes,pruned")?;
        for (i, (nodes, pruned)) in self.nodes_per_level.iter().zip(&self.pruned_per_level).enumerate().skip(1) {
            writeln!(w, "{},{nodes},{pruned}", i + self.k)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    /// Stored solutions (empty in count mode), in chirality order.
    pub solutions: Vec<Solution>,
    /// Number of leaves reached.
    pub count: u64,
    pub stats: SearchStats,
}

/// Distances needed to place one vertex.
#[derive(Clone, Debug)]
struct Level {
    radii: Vec<f64>,
    /// `(u, d_uv)` for pruning edges whose larger endpoint is this level.
    pruning: Vec<(usize, f64)>,
}

fn prepare_levels(inst: &DgpInstance) -> Result<Vec<Level>, SolveError> {
    let k = inst.dim();
    let mut levels: Vec<Level> = (k + 1..=inst.n())
        .map(|v| {
            (v - k..v)
                .map(|u| match inst.distance(u, v) {
                    None => Err(SolveError::MissingDiscretizationEdge { u, v }),
                    Some(d) if d <= 0.0 => Err(SolveError::ZeroDiscretizationEdge { u, v }),
                    Some(d) => Ok(d),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(|radii| Level {
                    radii,
                    pruning: Vec::new(),
                })
        })
        .collect::<Result<_, _>>()?;
    for (u, v, d) in inst.pruning_edges() {
        levels[v - k - 1].pruning.push((u, d));
    }
    Ok(levels)
}

/// Up to two surviving candidates at one level, with their branch signs.
#[derive(Debug, Default)]
struct Candidates {
    items: [Option<(Point, i8)>; 2],
    next: usize,
}

impl Candidates {
    fn take_next(&mut self) -> Option<(Point, i8)> {
        while self.next < 2 {
            let slot = self.items[self.next].take();
            self.next += 1;
            if slot.is_some() {
                return slot;
            }
        }
        None
    }
}

struct Search<'a> {
    n: usize,
    k: usize,
    levels: &'a [Level],
    tol: ToleranceConfig,
    frame: HullFrame,
    positions: Vec<Point>,
    signs: Vec<i8>,
    stats: SearchStats,
}

impl<'a> Search<'a> {
    fn new(inst: &DgpInstance, levels: &'a [Level], tol: ToleranceConfig) -> Self {
        let (n, k) = (inst.n(), inst.dim());
        Search {
            n,
            k,
            levels,
            tol,
            frame: HullFrame::new(k),
            positions: inst.initial().to_vec(),
            signs: vec![1; k],
            stats: SearchStats::new(n, k),
        }
    }

    /// Candidates for vertex `level`, given positions of `1..level`.
    fn expand(&mut self, level: usize) -> Result<Candidates, SolveError> {
        let k = self.k;
        let data = &self.levels[level - k - 1];
        self.frame
            .fit(&self.positions[level - 1 - k..level - 1], &self.tol)
            .map_err(|source| SolveError::Geometry { v: level, source })?;
        let raw: [Option<(Point, i8)>; 2] = match self.frame.intersect(&data.radii, &self.tol) {
            Intersection::Empty => [None, None],
            Intersection::Tangent(p) => [Some((p, 1)), None],
            Intersection::Pair { positive, negative } => [Some((positive, 1)), Some((negative, -1))],
        };
        let mut out = Candidates::default();
        let mut slot = 0;
        for (p, sign) in raw.into_iter().flatten() {
            let feasible = data.pruning.iter().all(|&(u, d)| {
                (p.distance(&self.positions[u - 1]) - d).abs() <= self.tol.prune_threshold(d)
            });
            let idx = level - k;
            if feasible {
                self.stats.nodes_per_level[idx] += 1;
                out.items[slot] = Some((p, sign));
                slot += 1;
            } else {
                self.stats.pruned_per_level[idx] += 1;
            }
        }
        Ok(out)
    }

    /// Depth-first search of the subtree below the current partial
    /// embedding, whose last placed vertex is `start - 1`. `on_leaf` sees
    /// every full embedding and its branch signs.
    fn run<F>(&mut self, start: usize, on_leaf: &mut F) -> Result<(), SolveError>
    where
        F: FnMut(&[Point], &[i8]) -> Result<ControlFlow<()>, SolveError>,
    {
        if start > self.n {
            self.stats.solutions_found += 1;
            let _ = on_leaf(&self.positions, &self.signs)?;
            return Ok(());
        }
        let mut stack = vec![self.expand(start)?];
        while let Some(depth) = stack.len().checked_sub(1) {
            let level = start + depth;
            match stack[depth].take_next() {
                Some((p, sign)) => {
                    self.positions.truncate(level - 1);
                    self.signs.truncate(level - 1);
                    self.positions.push(p);
                    self.signs.push(sign);
                    if level == self.n {
                        self.stats.solutions_found += 1;
                        if on_leaf(&self.positions, &self.signs)?.is_break() {
                            return Ok(());
                        }
                    } else {
                        let next = self.expand(level + 1)?;
                        stack.push(next);
                    }
                }
                None => {
                    stack.pop();
                }
            }
        }
        Ok(())
    }
}

fn check_tolerances(tol: &ToleranceConfig) -> Result<(), SolveError> {
    match tol.invalid_field() {
        Some(f) => Err(SolveError::InvalidTolerance(f)),
        None => Ok(()),
    }
}

/// Visits every leaf of the BP tree in depth-first order. Returns the
/// search statistics; the callback may stop the search early.
pub fn for_each_leaf<F>(inst: &DgpInstance, tol: &ToleranceConfig, mut on_leaf: F) -> Result<SearchStats, SolveError>
where
    F: FnMut(&[Point], &[i8]) -> ControlFlow<()>,
{
    check_tolerances(tol)?;
    let started = Instant::now();
    let levels = prepare_levels(inst)?;
    let mut search = Search::new(inst, &levels, *tol);
    search.run(inst.dim() + 1, &mut |pos, signs| Ok(on_leaf(pos, signs)))?;
    let mut stats = search.stats;
    stats.wall_time = started.elapsed();
    Ok(stats)
}

/// Runs Branch-and-Prune on `inst` from level `K+1` with the fixed initial
/// embedding.
pub fn solve(inst: &DgpInstance, options: &SolverOptions) -> Result<SolveOutcome, SolveError> {
    check_tolerances(&options.tol)?;
    let started = Instant::now();
    let levels = prepare_levels(inst)?;
    let mut outcome = if options.threads > 1 && options.mode != SearchMode::First {
        solve_parallel(inst, &levels, options)?
    } else {
        let mut search = Search::new(inst, &levels, options.tol);
        let (solutions, count) = run_collecting(&mut search, inst.dim() + 1, options)?;
        SolveOutcome {
            solutions,
            count,
            stats: search.stats,
        }
    };
    outcome.stats.wall_time = started.elapsed();
    Ok(outcome)
}

fn run_collecting(search: &mut Search<'_>, start: usize, options: &SolverOptions) -> Result<(Vec<Solution>, u64), SolveError> {
    let mut solutions = Vec::new();
    let mut count = 0u64;
    let mode = options.mode;
    let limit = options.max_solutions;
    search.run(start, &mut |pos, signs| {
        count += 1;
        match mode {
            SearchMode::Count => Ok(ControlFlow::Continue(())),
            SearchMode::All | SearchMode::First => {
                if count > limit {
                    return Err(SolveError::TooManySolutions { limit });
                }
                solutions.push(Solution {
                    chirality: Chirality::new(signs.to_vec()),
                    embedding: Embedding::new(pos.to_vec()),
                });
                Ok(if mode == SearchMode::First {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                })
            }
        }
    })?;
    Ok((solutions, count))
}

/// A node of the breadth-first frontier handed to worker threads.
struct FrontierNode {
    positions: Vec<Point>,
    signs: Vec<i8>,
}

fn solve_parallel(inst: &DgpInstance, levels: &[Level], options: &SolverOptions) -> Result<SolveOutcome, SolveError> {
    let (n, k) = (inst.n(), inst.dim());
    let target = 8 * options.threads;

    // Expand breadth-first (children in branch order) until the frontier is
    // wide enough; the coordinator's stats cover these levels.
    let mut coordinator = Search::new(inst, levels, options.tol);
    let mut frontier = vec![FrontierNode {
        positions: inst.initial().to_vec(),
        signs: vec![1; k],
    }];
    let mut level = k + 1;
    while level <= n && !frontier.is_empty() && frontier.len() < target {
        let mut next = Vec::with_capacity(2 * frontier.len());
        for node in frontier {
            coordinator.positions = node.positions;
            coordinator.signs = node.signs;
            let mut cands = coordinator.expand(level)?;
            while let Some((p, sign)) = cands.take_next() {
                let mut positions = coordinator.positions.clone();
                let mut signs = coordinator.signs.clone();
                positions.push(p);
                signs.push(sign);
                next.push(FrontierNode { positions, signs });
            }
        }
        frontier = next;
        level += 1;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.threads)
        .build()
        .expect("failed to build thread pool");
    type Subtree = (Vec<Solution>, u64, SearchStats);
    let results: Vec<Result<Subtree, SolveError>> = pool.install(|| {
        frontier
            .into_par_iter()
            .map(|node| {
                let mut search = Search::new(inst, levels, options.tol);
                search.positions = node.positions;
                search.signs = node.signs;
                let (solutions, count) = run_collecting(&mut search, level, options)?;
                Ok((solutions, count, search.stats))
            })
            .collect()
    });

    let mut stats = coordinator.stats;
    let mut solutions = Vec::new();
    let mut count = 0;
    for r in results {
        let (sols, c, s) = r?;
        stats.merge(&s);
        count += c;
        if options.mode == SearchMode::All && count > options.max_solutions {
            return Err(SolveError::TooManySolutions {
                limit: options.max_solutions,
            });
        }
        solutions.extend(sols);
    }
    Ok(SolveOutcome { solutions, count, stats })
}

/// An edge whose realized length is off by more than the pruning threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeResidual {
    pub u: usize,
    pub v: usize,
    pub expected: f64,
    pub actual: f64,
}

impl EdgeResidual {
    pub fn residual(&self) -> f64 {
        (self.actual - self.expected).abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub violations: Vec<EdgeResidual>,
    pub max_residual: f64,
    pub edges_checked: usize,
}

impl VerificationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `‖x_u − x_v‖ = d_uv` on every edge.
pub fn verify_embedding(inst: &DgpInstance, x: &Embedding, tol: &ToleranceConfig) -> Result<VerificationReport, SolveError> {
    let bad_dim = x.points().iter().find(|p| p.dim() != inst.dim()).map(Point::dim);
    if x.n() != inst.n() || bad_dim.is_some() {
        return Err(SolveError::DimensionMismatch {
            expected: inst.n(),
            expected_dim: inst.dim(),
            found: x.n(),
            found_dim: bad_dim.unwrap_or(inst.dim()),
        });
    }
    let mut violations = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (u, v, d) in inst.edges() {
        let actual = x.point(u).distance(x.point(v));
        let r = (actual - d).abs();
        max_residual = max_residual.max(r);
        if r > tol.prune_threshold(d) {
            violations.push(EdgeResidual {
                u,
                v,
                expected: d,
                actual,
            });
        }
    }
    Ok(VerificationReport {
        violations,
        max_residual,
        edges_checked: inst.edge_count(),
    })
}
