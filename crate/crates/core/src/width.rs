//! Search-tree width from the pruning edges alone.
//!
//! The number of valid BP nodes at level `v` is `2^{|T_v|}`, where `T_v` is
//! the set of reflections `g_w` (`K < w <= v`) not cancelled by a pruning
//! edge `{u, v'}` with `v' <= v` and `u+K+1 <= w <= v'`. With no pruning
//! edges this is the full binary tree, `2^{v-K}` nodes at level `v`.

use std::fmt;
use std::io::{self, Write};

use crate::instance::DgpInstance;
use crate::solver::{solve, SearchMode, SolveError, SolverOptions};
use crate::symmetry::GeneratorWindow;
use crate::tolerance::ToleranceConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelWidth {
    pub level: usize,
    /// log2 of the predicted node count.
    pub predicted_log2: u32,
    pub measured: Option<u64>,
}

impl LevelWidth {
    /// Predicted node count, `None` if it does not fit in a `u64`.
    pub fn predicted(&self) -> Option<u64> {
        1u64.checked_shl(self.predicted_log2)
    }
}

/// Predicted (and optionally measured) node counts for levels `K+1 … n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidthProfile {
    pub k: usize,
    pub levels: Vec<LevelWidth>,
}

impl WidthProfile {
    pub fn at(&self, level: usize) -> &LevelWidth {
        &self.levels[level - self.k - 1]
    }

    pub fn max_predicted_log2(&self) -> u32 {
        self.levels.iter().map(|l| l.predicted_log2).max().unwrap_or(0)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "level,predicted,measured")?;
        for l in &self.levels {
            let predicted = l.predicted().map_or_else(|| format!("2^{}", l.predicted_log2), |c| c.to_string());
            let measured = l.measured.map_or(String::new(), |m| m.to_string());
            writeln!(w, "{},{predicted},{measured}", l.level)?;
        }
        Ok(())
    }
}

pub fn predict_profile(inst: &DgpInstance, window: GeneratorWindow) -> WidthProfile {
    let (n, k) = (inst.n(), inst.dim());
    let mut ending_at: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (u, v, _) in inst.pruning_edges() {
        ending_at[v].push(u);
    }
    let mut removed = vec![false; n + 1];
    let mut active: u32 = 0;
    let mut levels = Vec::with_capacity(n - k);
    for v in k + 1..=n {
        active += 1;
        for &u in &ending_at[v] {
            for w in window.start(u, k).max(k + 1)..=v {
                if !removed[w] {
                    removed[w] = true;
                    active -= 1;
                }
            }
        }
        levels.push(LevelWidth {
            level: v,
            predicted_log2: active,
            measured: None,
        });
    }
    WidthProfile { k, levels }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolynomialCase {
    /// Exactly one long pruning edge ending at each `v > v0`.
    Prop1,
    /// Each pruning-free run after `v0` is paid for by the edge before it.
    Prop2,
    /// Every `v > v0` except powers of two carries a long pruning edge.
    Prop3,
    General,
}

impl fmt::Display for PolynomialCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolynomialCase::Prop1 => "Prop1",
            PolynomialCase::Prop2 => "Prop2",
            PolynomialCase::Prop3 => "Prop3",
            PolynomialCase::General => "General",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuntimeClass {
    Linear,
    Quadratic,
    ExponentialWorstCase,
}

impl fmt::Display for RuntimeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuntimeClass::Linear => "O(n)",
            RuntimeClass::Quadratic => "O(n^2)",
            RuntimeClass::ExponentialWorstCase => "exponential-worst-case",
        })
    }
}

/// A width bound `2^exponent`, times `n` when `times_n` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WidthBound {
    pub exponent: u32,
    pub times_n: Option<usize>,
}

impl WidthBound {
    /// log2 of the bound, for comparing bounds of different shapes.
    pub fn log2(&self) -> f64 {
        self.exponent as f64 + self.times_n.map_or(0.0, |n| (n as f64).log2())
    }
}

impl fmt::Display for WidthBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.times_n {
            None => write!(f, "2^{}", self.exponent),
            Some(n) => write!(f, "2^{}*{n}", self.exponent),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CaseClassification {
    pub case: PolynomialCase,
    pub v0: Option<usize>,
    pub bound: Option<WidthBound>,
    pub runtime: RuntimeClass,
}

impl fmt::Display for CaseClassification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.case)?;
        if let Some(v0) = self.v0 {
            write!(f, " v0={v0}")?;
        }
        if let Some(b) = self.bound {
            write!(f, " bound={b}")?;
        }
        write!(f, " runtime={}", self.runtime)
    }
}

/// For each vertex, the smallest `u` of a pruning edge `{u, v}` with
/// `u < v - K`, and how many such edges end at `v`.
fn long_edges(inst: &DgpInstance) -> (Vec<Option<usize>>, Vec<usize>) {
    let n = inst.n();
    let mut min_u = vec![None; n + 1];
    let mut count = vec![0usize; n + 1];
    for (u, v, _) in inst.pruning_edges() {
        count[v] += 1;
        min_u[v] = Some(min_u[v].map_or(u, |m: usize| m.min(u)));
    }
    (min_u, count)
}

fn prop1_holds(count: &[usize], v0: usize) -> bool {
    count[v0 + 1..].iter().all(|&c| c == 1)
}

fn prop3_holds(count: &[usize], v0: usize) -> bool {
    count
        .iter()
        .enumerate()
        .skip(v0 + 1)
        .all(|(v, &c)| c >= 1 || v.is_power_of_two())
}

/// Every maximal run `s` of vertices `> v0` without a long pruning edge must
/// be preceded by a vertex `v_s` (the last edge-bearing vertex before it)
/// whose longest edge `{u_s, v_s}` cancels at least `|s|` reflections besides
/// `g_{v_s}`: `v_s - u_s - K - 1 >= |s|`.
fn prop2_holds(k: usize, min_u: &[Option<usize>], count: &[usize], v0: usize) -> bool {
    let n = count.len() - 1;
    let mut v = v0 + 1;
    while v <= n {
        if count[v] > 0 {
            v += 1;
            continue;
        }
        let start = v;
        while v <= n && count[v] == 0 {
            v += 1;
        }
        let run = v - start;
        let paid = (1..start)
            .rev()
            .find(|&w| count[w] > 0)
            .and_then(|w| min_u[w].map(|u| w - u - k - 1))
            .is_some_and(|credit| credit >= run);
        if !paid {
            return false;
        }
    }
    true
}

/// Tests the three polynomial-width conditions, each with its smallest
/// `v0` in `K+1 … n-1`, and reports the one with the tightest bound (ties
/// go to Prop1, then Prop2, then Prop3). Bounds not below the full-tree
/// width `2^{n-K}` are discarded.
pub fn classify(inst: &DgpInstance) -> CaseClassification {
    let (n, k) = (inst.n(), inst.dim());
    let (min_u, count) = long_edges(inst);
    let smallest = |test: &dyn Fn(usize) -> bool| (k + 1..n).find(|&v0| test(v0));

    let mut candidates: Vec<CaseClassification> = Vec::new();
    if let Some(v0) = smallest(&|v0| prop1_holds(&count, v0)) {
        candidates.push(CaseClassification {
            case: PolynomialCase::Prop1,
            v0: Some(v0),
            bound: Some(WidthBound {
                exponent: (v0 - k) as u32,
                times_n: None,
            }),
            runtime: RuntimeClass::Linear,
        });
    }
    if let Some(v0) = smallest(&|v0| prop2_holds(k, &min_u, &count, v0)) {
        candidates.push(CaseClassification {
            case: PolynomialCase::Prop2,
            v0: Some(v0),
            bound: Some(WidthBound {
                exponent: (v0 - k) as u32,
                times_n: None,
            }),
            runtime: RuntimeClass::Linear,
        });
    }
    if let Some(v0) = smallest(&|v0| prop3_holds(&count, v0)) {
        candidates.push(CaseClassification {
            case: PolynomialCase::Prop3,
            v0: Some(v0),
            bound: Some(WidthBound {
                exponent: v0 as u32,
                times_n: Some(n),
            }),
            runtime: RuntimeClass::Quadratic,
        });
    }
    // a bound no tighter than the full tree says nothing about this instance
    let full_tree = (n - k) as f64;
    candidates.retain(|c| c.bound.is_some_and(|b| b.log2() < full_tree));
    // stable sort keeps the Prop1 > Prop2 > Prop3 priority among equal bounds
    candidates.sort_by(|a, b| {
        let la = a.bound.map_or(f64::INFINITY, |b| b.log2());
        let lb = b.bound.map_or(f64::INFINITY, |b| b.log2());
        la.total_cmp(&lb)
    });
    candidates.into_iter().next().unwrap_or(CaseClassification {
        case: PolynomialCase::General,
        v0: None,
        bound: None,
        runtime: RuntimeClass::ExponentialWorstCase,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrosscheckReport {
    pub profile: WidthProfile,
    /// Levels where predicted and measured counts differ.
    pub mismatches: Vec<usize>,
    /// First level where the tree died out while the prediction stayed positive.
    pub collapsed_at: Option<usize>,
}

impl CrosscheckReport {
    pub fn matches(&self) -> bool {
        self.mismatches.is_empty()
    }

    /// The measured tree died out: the instance is a NO instance (the
    /// prediction assumes YES).
    pub fn no_instance_divergence(&self) -> bool {
        self.collapsed_at.is_some()
    }
}

/// Runs a full count and compares measured per-level nodes to the prediction.
pub fn crosscheck(inst: &DgpInstance, window: GeneratorWindow, tol: &ToleranceConfig) -> Result<CrosscheckReport, SolveError> {
    let mut profile = predict_profile(inst, window);
    let opts = SolverOptions {
        mode: SearchMode::Count,
        tol: *tol,
        ..Default::default()
    };
    let stats = solve(inst, &opts)?.stats;
    let mut mismatches = Vec::new();
    let mut collapsed_at = None;
    for (slot, (level, measured)) in profile.levels.iter_mut().zip(stats.levels()) {
        slot.measured = Some(measured);
        if slot.predicted() != Some(measured) {
            mismatches.push(level);
        }
        if measured == 0 && collapsed_at.is_none() {
            collapsed_at = Some(level);
        }
    }
    Ok(CrosscheckReport {
        profile,
        mismatches,
        collapsed_at,
    })
}
