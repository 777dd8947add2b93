//! The ᴷDMDGP instance model: an ordered weighted graph on vertices `1..=n`
//! with dimension `K` and a fixed embedding of the first `K` vertices.

mod format;
mod generate;
mod reduction;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::geometry::{check_dimension, simplex_volume_from_distances, GeometryError, Point};
use crate::tolerance::ToleranceConfig;

pub use format::{parse_instance, read_instance, to_instance_string, write_instance, write_instance_file, ParseError};
pub use generate::{generate_random_yes, GeneratedInstance, PruningSpec};
pub use reduction::{reduce_subset_sum, SubsetSumInstance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("need n >= K+1 (n = {n}, K = {k})")]
    TooFewVertices { n: usize, k: usize },
    #[error("initial embedding must have {expected} points of dimension {expected}")]
    BadInitial { expected: usize },
    #[error("edge {{{u},{v}}} is out of range for n = {n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0},{1}}}")]
    DuplicateEdge(usize, usize),
    #[error("invalid distance {d} on edge {{{u},{v}}}")]
    InvalidDistance { u: usize, v: usize, d: f64 },
    #[error("invalid subset-sum instance: {0}")]
    InvalidSubsetSum(String),
    #[error("pruning spec {spec} is infeasible: {reason}")]
    InfeasibleSpec { spec: String, reason: String },
}

/// An ordered weighted graph together with the fixed embedding `x′` of
/// vertices `1..=K`. Edges are stored as `(u, v)` with `u < v`.
#[derive(Clone, Debug, PartialEq)]
pub struct DgpInstance {
    n: usize,
    k: usize,
    edges: BTreeMap<(usize, usize), f64>,
    initial: Vec<Point>,
}

impl DgpInstance {
    pub fn new(n: usize, k: usize, initial: Vec<Point>) -> Result<Self, InstanceError> {
        check_dimension(k)?;
        if n < k + 1 {
            return Err(InstanceError::TooFewVertices { n, k });
        }
        if initial.len() != k || initial.iter().any(|p| p.dim() != k || !p.is_finite()) {
            return Err(InstanceError::BadInitial { expected: k });
        }
        Ok(DgpInstance {
            n,
            k,
            edges: BTreeMap::new(),
            initial,
        })
    }

    /// Adds `{u, v}` with distance `d`; the pair is normalized to `u < v`.
    pub fn add_edge(&mut self, u: usize, v: usize, d: f64) -> Result<(), InstanceError> {
        let (a, b) = (u.min(v), u.max(v));
        if a == b {
            return Err(InstanceError::SelfLoop(a));
        }
        if a < 1 || b > self.n {
            return Err(InstanceError::VertexOutOfRange { u: a, v: b, n: self.n });
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(InstanceError::InvalidDistance { u: a, v: b, d });
        }
        if self.edges.insert((a, b), d).is_some() {
            return Err(InstanceError::DuplicateEdge(a, b));
        }
        Ok(())
    }

    /// Builder-style [`add_edge`](Self::add_edge).
    pub fn with_edge(mut self, u: usize, v: usize, d: f64) -> Result<Self, InstanceError> {
        self.add_edge(u, v, d)?;
        Ok(self)
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> Option<f64> {
        self.edges.remove(&(u.min(v), u.max(v)))
    }

    /// Overwrites the distance of an existing edge.
    pub fn set_distance(&mut self, u: usize, v: usize, d: f64) -> Result<(), InstanceError> {
        let key = (u.min(v), u.max(v));
        if !(d.is_finite() && d >= 0.0) {
            return Err(InstanceError::InvalidDistance { u: key.0, v: key.1, d });
        }
        match self.edges.get_mut(&key) {
            Some(slot) => {
                *slot = d;
                Ok(())
            }
            None => Err(InstanceError::VertexOutOfRange { u: key.0, v: key.1, n: self.n }),
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// The embedding dimension `K`.
    #[inline]
    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn initial(&self) -> &[Point] {
        &self.initial
    }

    pub fn distance(&self, u: usize, v: usize) -> Option<f64> {
        self.edges.get(&(u.min(v), u.max(v))).copied()
    }

    /// Edges in `(u, v)` order with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(u, v), &d)| (u, v, d))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn is_discretization_pair(&self, u: usize, v: usize) -> bool {
        u.abs_diff(v) <= self.k
    }

    pub fn partition(&self) -> EdgePartition {
        let mut discretization = BTreeSet::new();
        let mut pruning = BTreeSet::new();
        for &(u, v) in self.edges.keys() {
            if self.is_discretization_pair(u, v) {
                discretization.insert((u, v));
            } else {
                pruning.insert((u, v));
            }
        }
        EdgePartition {
            discretization,
            pruning,
        }
    }

    /// Pruning edges `(u, v, d)` sorted by `(u, v)`.
    pub fn pruning_edges(&self) -> Vec<(usize, usize, f64)> {
        self.edges().filter(|&(u, v, _)| v - u > self.k).collect()
    }

    /// The subinstance `G_D` keeping only discretization edges.
    pub fn discretization_subinstance(&self) -> DgpInstance {
        DgpInstance {
            n: self.n,
            k: self.k,
            edges: self
                .edges
                .iter()
                .filter(|(&(u, v), _)| v - u <= self.k)
                .map(|(&e, &d)| (e, d))
                .collect(),
            initial: self.initial.clone(),
        }
    }

    /// The subinstance induced by vertices `1..=last`.
    pub fn truncated(&self, last: usize) -> Result<DgpInstance, InstanceError> {
        if last < self.k + 1 || last > self.n {
            return Err(InstanceError::TooFewVertices { n: last, k: self.k });
        }
        Ok(DgpInstance {
            n: last,
            k: self.k,
            edges: self
                .edges
                .iter()
                .filter(|(&(_, v), _)| v <= last)
                .map(|(&e, &d)| (e, d))
                .collect(),
            initial: self.initial.clone(),
        })
    }

    /// Checks the discretization and strict simplex axioms and the
    /// consistency of the initial embedding.
    pub fn validate(&self, tol: &ToleranceConfig) -> ValidationReport {
        let k = self.k;
        let mut report = ValidationReport::default();

        for v in 2..=self.n {
            for u in v.saturating_sub(k).max(1)..v {
                match self.distance(u, v) {
                    None => report.missing_edges.push((u, v)),
                    Some(d) if d <= 0.0 => report.zero_discretization.push((u, v)),
                    Some(_) => {}
                }
            }
        }

        // Strict simplex inequalities on U_v = {v-K, …, v-1}.
        if k >= 2 {
            let mut min_volume = f64::INFINITY;
            for v in k + 1..=self.n {
                let members: Vec<usize> = (v - k..v).collect();
                let mut dist = vec![vec![0.0; k]; k];
                let mut complete = true;
                for (i, &a) in members.iter().enumerate() {
                    for (j, &b) in members.iter().enumerate().skip(i + 1) {
                        match self.distance(a, b) {
                            Some(d) => {
                                dist[i][j] = d;
                                dist[j][i] = d;
                            }
                            None => complete = false,
                        }
                    }
                }
                if !complete {
                    report.degenerate_vertices.push(v);
                    continue;
                }
                match simplex_volume_from_distances(&dist) {
                    Ok(vol) => {
                        min_volume = min_volume.min(vol);
                        if vol <= tol.degeneracy {
                            report.degenerate_vertices.push(v);
                        }
                    }
                    Err(_) => report.degenerate_vertices.push(v),
                }
            }
            if min_volume.is_finite() {
                report.min_simplex_volume = Some(min_volume);
            }
        }

        for u in 1..=k {
            for v in u + 1..=k {
                if let Some(d) = self.distance(u, v) {
                    let actual = self.initial[u - 1].distance(&self.initial[v - 1]);
                    if (actual - d).abs() > tol.geometry {
                        report.initial_violations.push((u, v, actual - d));
                    }
                }
            }
        }
        report
    }
}

/// `E = E_D ⊔ E_P`: edges spanning at most `K` positions versus the rest.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgePartition {
    pub discretization: BTreeSet<(usize, usize)>,
    pub pruning: BTreeSet<(usize, usize)>,
}

/// Outcome of [`DgpInstance::validate`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    /// Pairs `{u, v}` with `1 <= v - u <= K` absent from the edge set.
    pub missing_edges: Vec<(usize, usize)>,
    /// Discretization edges carrying distance 0.
    pub zero_discretization: Vec<(usize, usize)>,
    /// Vertices `v` whose predecessor simplex `U_v` is degenerate.
    pub degenerate_vertices: Vec<usize>,
    /// Smallest Cayley-Menger volume seen over all `U_v`.
    pub min_simplex_volume: Option<f64>,
    /// Initial-embedding edges `(u, v, actual - expected)` off by more than the geometry tolerance.
    pub initial_violations: Vec<(usize, usize, f64)>,
}

impl ValidationReport {
    pub fn discretization_ok(&self) -> bool {
        self.missing_edges.is_empty() && self.zero_discretization.is_empty()
    }

    pub fn simplex_ok(&self) -> bool {
        self.degenerate_vertices.is_empty()
    }

    pub fn initial_ok(&self) -> bool {
        self.initial_violations.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.discretization_ok() && self.simplex_ok() && self.initial_ok()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = |ok: bool| if ok { "ok" } else { "FAIL" };
        writeln!(f, "discretization: {}", verdict(self.discretization_ok()))?;
        for (u, v) in &self.missing_edges {
            writeln!(f, "  missing edge {{{u},{v}}}")?;
        }
        for (u, v) in &self.zero_discretization {
            writeln!(f, "  zero distance on discretization edge {{{u},{v}}}")?;
        }
        write!(f, "strict simplex: {}", verdict(self.simplex_ok()))?;
        if let Some(vol) = self.min_simplex_volume {
            write!(f, " (min volume {vol:e})")?;
        }
        writeln!(f)?;
        for v in &self.degenerate_vertices {
            writeln!(f, "  degenerate predecessor simplex at vertex {v}")?;
        }
        writeln!(f, "initial embedding: {}", verdict(self.initial_ok()))?;
        for (u, v, r) in &self.initial_violations {
            writeln!(f, "  edge {{{u},{v}}} off by {r:e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[f64]) -> Point {
        Point::new(c.to_vec())
    }

    /// K=3 chain on a generic helix-like walk.
    fn chain_k3(n: usize) -> DgpInstance {
        let pts: Vec<Point> = (0..n)
            .map(|i| {
                let t = i as f64;
                p(&[t.cos() * 1.3 + 0.1 * t, t.sin() * 1.1, 0.7 * t + 0.05 * t * t])
            })
            .collect();
        let mut inst = DgpInstance::new(n, 3, pts[..3].to_vec()).unwrap();
        for v in 2..=n {
            for u in v.saturating_sub(3).max(1)..v {
                inst.add_edge(u, v, pts[u - 1].distance(&pts[v - 1])).unwrap();
            }
        }
        inst
    }

    #[test]
    fn generic_chain_validates() {
        let report = chain_k3(8).validate(&ToleranceConfig::default());
        assert!(report.passed(), "{report}");
        assert!(report.min_simplex_volume.unwrap() > 0.0);
    }

    #[test]
    fn flat_triangle_fails_simplex_axiom() {
        let mut inst = chain_k3(8);
        // make d_{3,5} = d_{3,4} + d_{4,5}, so U_6 = {3,4,5} is collinear
        let d = inst.distance(3, 4).unwrap() + inst.distance(4, 5).unwrap();
        inst.set_distance(3, 5, d).unwrap();
        let report = inst.validate(&ToleranceConfig::default());
        assert!(!report.simplex_ok());
        assert!(report.degenerate_vertices.contains(&6));
        assert!(report.discretization_ok());
    }

    #[test]
    fn missing_edge_fails_discretization() {
        let mut inst = chain_k3(8);
        inst.remove_edge(4, 7);
        let report = inst.validate(&ToleranceConfig::default());
        assert!(!report.discretization_ok());
        assert_eq!(report.missing_edges, vec![(4, 7)]);
    }

    #[test]
    fn zero_discretization_distance_rejected() {
        let mut inst = chain_k3(6);
        inst.set_distance(5, 6, 0.0).unwrap();
        assert_eq!(inst.validate(&ToleranceConfig::default()).zero_discretization, vec![(5, 6)]);
    }

    #[test]
    fn inconsistent_initial_embedding() {
        let mut inst = chain_k3(6);
        inst.set_distance(1, 2, inst.distance(1, 2).unwrap() + 0.5).unwrap();
        assert!(!inst.validate(&ToleranceConfig::default()).initial_ok());
    }

    #[test]
    fn partition_four_vertex() {
        let init = vec![p(&[0.0, 0.0]), p(&[1.0, 0.0])];
        let inst = DgpInstance::new(4, 2, init)
            .and_then(|i| i.with_edge(1, 2, 1.0))
            .and_then(|i| i.with_edge(2, 3, 1.0))
            .and_then(|i| i.with_edge(1, 3, 1.5))
            .and_then(|i| i.with_edge(3, 4, 1.0))
            .and_then(|i| i.with_edge(2, 4, 1.5))
            .and_then(|i| i.with_edge(1, 4, 1.2))
            .unwrap();
        let part = inst.partition();
        assert_eq!(part.pruning.into_iter().collect::<Vec<_>>(), vec![(1, 4)]);
        assert_eq!(part.discretization.len(), 5);
    }

    #[test]
    fn no_long_edges_means_no_pruning() {
        assert!(chain_k3(9).partition().pruning.is_empty());
    }

    #[test]
    fn edge_errors() {
        let mut inst = DgpInstance::new(4, 2, vec![p(&[0.0, 0.0]), p(&[1.0, 0.0])]).unwrap();
        assert_eq!(inst.add_edge(2, 2, 1.0), Err(InstanceError::SelfLoop(2)));
        assert!(matches!(inst.add_edge(1, 5, 1.0), Err(InstanceError::VertexOutOfRange { .. })));
        assert!(matches!(inst.add_edge(1, 2, -1.0), Err(InstanceError::InvalidDistance { .. })));
        inst.add_edge(3, 1, 1.0).unwrap();
        assert_eq!(inst.add_edge(1, 3, 1.0), Err(InstanceError::DuplicateEdge(1, 3)));
        assert_eq!(inst.distance(3, 1), Some(1.0));
    }

    #[test]
    fn constructor_guards() {
        assert!(matches!(
            DgpInstance::new(2, 2, vec![p(&[0.0, 0.0]), p(&[1.0, 0.0])]),
            Err(InstanceError::TooFewVertices { .. })
        ));
        assert!(matches!(
            DgpInstance::new(20, 17, vec![]),
            Err(InstanceError::Geometry(GeometryError::UnsupportedDimension(17)))
        ));
        assert!(matches!(
            DgpInstance::new(4, 2, vec![p(&[0.0, 0.0])]),
            Err(InstanceError::BadInitial { .. })
        ));
    }
}
