//! Chirality, partial reflections and the groups they generate.
//!
//! The partial reflection `g_v` reflects the tail `x_v … x_n` of an
//! embedding through the hyperplane of `x_{v-K}, …, x_{v-1}`. The `g_v`
//! commute, are self-inverse, and generate the discretization group
//! `G_D ≅ C₂^{n-K}`. `g_w` preserves the length of a pruning edge `{u, v}`
//! unless `u+K+1 <= w <= v`: for `w <= u+K` either both endpoints move
//! together or `x_u` lies on the mirror. The pruning group `G_P` is
//! generated by the `g_w` outside every such window, and its order is the
//! number of embeddings.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::embedding::{Chirality, Embedding, Solution};
use crate::geometry::{signed_simplex_orientation, GeometryError, HullFrame, Orientation};
use crate::instance::DgpInstance;
use crate::solver::{for_each_leaf, SolveError, MAX_STORED_SOLUTIONS};
use crate::tolerance::ToleranceConfig;

/// Largest `v - K` for which [`prefix_distance_set`] enumerates level `v`.
pub const MAX_PREFIX_SPAN: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error("vertex {0} lies on its predecessor hyperplane")]
    DegenerateChirality(usize),
    #[error("vertex {v}: {source}")]
    Geometry { v: usize, source: GeometryError },
    #[error("generator g_{v} is out of range {lo}..={hi}")]
    InvalidGenerator { v: usize, lo: usize, hi: usize },
    #[error("embedding has {found} vertices, instance has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("{0} elements exceed the enumeration limit")]
    TooLarge(String),
    #[error("invalid vertex pair ({u}, {v}): need u < v - K")]
    InvalidPair { u: usize, v: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn check_size(inst: &DgpInstance, x: &Embedding) -> Result<(), SymmetryError> {
    if x.n() != inst.n() {
        return Err(SymmetryError::SizeMismatch {
            expected: inst.n(),
            found: x.n(),
        });
    }
    Ok(())
}

/// Chirality of `x`: `+1` for the first `K` vertices, then the orientation of
/// each vertex relative to the hyperplane of its `K` predecessors.
pub fn chirality(inst: &DgpInstance, x: &Embedding, tol: &ToleranceConfig) -> Result<Chirality, SymmetryError> {
    check_size(inst, x)?;
    let k = inst.dim();
    let mut signs = vec![1i8; x.n()];
    for i in k + 1..=x.n() {
        let simplex = &x.points()[i - 1 - k..i];
        match signed_simplex_orientation(simplex, tol).map_err(|source| SymmetryError::Geometry { v: i, source })? {
            Orientation::Positive => {}
            Orientation::Negative => signs[i - 1] = -1,
            Orientation::Degenerate => return Err(SymmetryError::DegenerateChirality(i)),
        }
    }
    Ok(Chirality::new(signs))
}

/// `γ_v = (+1, …, +1, −1_v, …, −1)` of length `n`.
pub fn gamma(n: usize, v: usize) -> Chirality {
    Chirality::new((1..=n).map(|i| if i < v { 1 } else { -1 }).collect())
}

/// An element of the discretization group: the set of generators `g_v`
/// (`K < v <= n`) it is the product of. Composition is symmetric difference.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    k: usize,
    n: usize,
    words: Vec<u64>,
}

impl GroupElement {
    pub fn identity(n: usize, k: usize) -> Self {
        GroupElement {
            k,
            n,
            words: vec![0; (n - k).div_ceil(64)],
        }
    }

    pub fn from_generators(n: usize, k: usize, gens: impl IntoIterator<Item = usize>) -> Result<Self, SymmetryError> {
        let mut g = Self::identity(n, k);
        for v in gens {
            g.toggle(v)?;
        }
        Ok(g)
    }

    fn toggle(&mut self, v: usize) -> Result<(), SymmetryError> {
        if v <= self.k || v > self.n {
            return Err(SymmetryError::InvalidGenerator {
                v,
                lo: self.k + 1,
                hi: self.n,
            });
        }
        let bit = v - self.k - 1;
        self.words[bit / 64] ^= 1 << (bit % 64);
        Ok(())
    }

    pub fn contains(&self, v: usize) -> bool {
        if v <= self.k || v > self.n {
            return false;
        }
        let bit = v - self.k - 1;
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    /// Generators in increasing order.
    pub fn generators(&self) -> impl Iterator<Item = usize> + '_ {
        (self.k + 1..=self.n).filter(|&v| self.contains(v))
    }

    pub fn is_identity(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        debug_assert_eq!((self.n, self.k), (other.n, other.k));
        GroupElement {
            k: self.k,
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        }
    }

    /// Sign pattern this element imposes on chiralities: `Π γ_v`.
    pub fn sign_pattern(&self) -> Chirality {
        let mut sign = 1i8;
        let signs = (1..=self.n)
            .map(|i| {
                if self.contains(i) {
                    sign = -sign;
                }
                sign
            })
            .collect();
        Chirality::new(signs)
    }

    /// The unique element whose sign pattern carries `from` to `to`.
    pub fn between(from: &Chirality, to: &Chirality, k: usize) -> GroupElement {
        let n = from.len();
        let ratio = from.hadamard(to);
        let mut g = GroupElement::identity(n, k);
        let mut prev = 1;
        for v in k + 1..=n {
            let r = ratio.at(v);
            if r != prev {
                g.toggle(v).expect("v in range");
            }
            prev = r;
        }
        g
    }
}

/// Applies `g_v` to `x`.
pub fn apply_partial_reflection(inst: &DgpInstance, x: &Embedding, v: usize, tol: &ToleranceConfig) -> Result<Embedding, SymmetryError> {
    check_size(inst, x)?;
    let mut out = x.clone();
    let mut frame = HullFrame::new(inst.dim());
    reflect_tail(&mut frame, &mut out, inst.dim(), v, tol)?;
    Ok(out)
}

fn reflect_tail(frame: &mut HullFrame, x: &mut Embedding, k: usize, v: usize, tol: &ToleranceConfig) -> Result<(), SymmetryError> {
    let n = x.n();
    if v <= k || v > n {
        return Err(SymmetryError::InvalidGenerator { v, lo: k + 1, hi: n });
    }
    frame
        .fit(&x.points()[v - 1 - k..v - 1], tol)
        .map_err(|source| SymmetryError::Geometry { v, source })?;
    for w in v..=n {
        frame.reflect_in_place(x.point_mut(w).coords_mut());
    }
    Ok(())
}

/// Applies the generators of `g` in increasing order.
pub fn apply_group_element(inst: &DgpInstance, x: &Embedding, g: &GroupElement, tol: &ToleranceConfig) -> Result<Embedding, SymmetryError> {
    check_size(inst, x)?;
    let mut out = x.clone();
    let mut frame = HullFrame::new(inst.dim());
    for v in g.generators() {
        reflect_tail(&mut frame, &mut out, inst.dim(), v, tol)?;
    }
    Ok(out)
}

/// Which vertices a pruning edge `{u, v}` excludes from the pruning group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GeneratorWindow {
    /// `u+K+1 <= w <= v`: exactly the reflections that change `‖x_u − x_v‖`.
    #[default]
    Corrected,
    /// `u+K <= w <= v`, which also excludes `g_{u+K}` although its mirror
    /// passes through `x_u`.
    Literal,
}

impl GeneratorWindow {
    /// First excluded generator for a pruning edge starting at `u`.
    #[inline]
    pub fn start(self, u: usize, k: usize) -> usize {
        match self {
            GeneratorWindow::Corrected => u + k + 1,
            GeneratorWindow::Literal => u + k,
        }
    }
}

/// Generators `w ∈ (K, n]` of the pruning group.
pub fn pruning_group_generators(inst: &DgpInstance, window: GeneratorWindow) -> Vec<usize> {
    let (n, k) = (inst.n(), inst.dim());
    let mut excluded = vec![false; n + 1];
    for (u, v, _) in inst.pruning_edges() {
        excluded[window.start(u, k)..=v].fill(true);
    }
    (k + 1..=n).filter(|&w| !excluded[w]).collect()
}

/// `ℓ` such that the predicted number of embeddings is `2^ℓ`. Meaningful on
/// YES instances with generic distances only.
pub fn predicted_solution_count(inst: &DgpInstance, window: GeneratorWindow) -> u32 {
    pruning_group_generators(inst, window).len() as u32
}

/// All images of `x` under the group generated by `gens`, sorted by
/// chirality. The chirality attached to each image is `χ(x) ⊙ Π γ_v`.
pub fn orbit(inst: &DgpInstance, x: &Embedding, gens: &[usize], tol: &ToleranceConfig) -> Result<Vec<Solution>, SymmetryError> {
    check_size(inst, x)?;
    if gens.len() as u64 >= 64 || 1u64 << gens.len() > MAX_STORED_SOLUTIONS {
        return Err(SymmetryError::TooLarge(format!("2^{}", gens.len())));
    }
    let base = chirality(inst, x, tol)?;
    let mut sorted = gens.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut frame = HullFrame::new(inst.dim());
    let mut images = vec![Solution {
        chirality: base,
        embedding: x.clone(),
    }];
    // each generator doubles the set; g_v applied to any image is one reflection
    for &v in &sorted {
        let flip = gamma(inst.n(), v);
        let mut reflected = Vec::with_capacity(images.len());
        for img in &images {
            let mut e = img.embedding.clone();
            reflect_tail(&mut frame, &mut e, inst.dim(), v, tol)?;
            reflected.push(Solution {
                chirality: img.chirality.hadamard(&flip),
                embedding: e,
            });
        }
        images.extend(reflected);
    }
    images.sort_by(|a, b| a.chirality.cmp(&b.chirality));
    Ok(images)
}

/// True if every vertex of `a` is within `rel_tol · scale` of `b`, where
/// `scale` is the larger diameter (at least 1).
pub fn embeddings_match(a: &Embedding, b: &Embedding, rel_tol: f64) -> bool {
    let scale = a.diameter().max(b.diameter()).max(1.0);
    a.max_deviation(b) <= rel_tol * scale
}

/// The distinct values of `‖x_v − x_u‖` over all level-`v` nodes of the
/// discretization-only tree, with how many nodes realize each.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixDistanceSet {
    pub u: usize,
    pub v: usize,
    /// `(distance, multiplicity)` sorted by distance.
    pub values: Vec<(f64, u64)>,
}

impl PrefixDistanceSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.values.iter().map(|(_, m)| m).sum()
    }
}

/// Enumerates the `2^{v-K}` level-`v` nodes of `G_D` and clusters the
/// distances `‖x_v − x_u‖` at `cluster_rel` times the diameter of the first
/// leaf.
pub fn prefix_distance_set(inst: &DgpInstance, u: usize, v: usize, cluster_rel: f64, tol: &ToleranceConfig) -> Result<PrefixDistanceSet, SymmetryError> {
    let k = inst.dim();
    if u < 1 || v > inst.n() || v <= k || u + k >= v {
        return Err(SymmetryError::InvalidPair { u, v });
    }
    if v - k > MAX_PREFIX_SPAN {
        return Err(SymmetryError::TooLarge(format!("2^{}", v - k)));
    }
    let sub = inst
        .discretization_subinstance()
        .truncated(v)
        .map_err(|_| SymmetryError::InvalidPair { u, v })?;
    let mut dists = Vec::with_capacity(1 << (v - k));
    let mut scale: Option<f64> = None;
    for_each_leaf(&sub, tol, |pos, _| {
        if scale.is_none() {
            scale = Some(Embedding::new(pos.to_vec()).diameter().max(1.0));
        }
        dists.push(pos[v - 1].distance(&pos[u - 1]));
        std::ops::ControlFlow::Continue(())
    })?;
    let eps = cluster_rel * scale.unwrap_or(1.0);
    dists.sort_by(f64::total_cmp);
    let mut values: Vec<(f64, u64)> = Vec::new();
    for d in dists {
        match values.last_mut() {
            // single-linkage against the cluster's first value
            Some((rep, m)) if d - *rep <= eps => *m += 1,
            _ => values.push((d, 1)),
        }
    }
    Ok(PrefixDistanceSet { u, v, values })
}

/// Groups solutions by chirality for set comparisons.
pub fn index_by_chirality(solutions: &[Solution]) -> BTreeMap<Chirality, &Embedding> {
    solutions.iter().map(|s| (s.chirality.clone(), &s.embedding)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::instance::{generate_random_yes, PruningSpec};
    use crate::solver::{solve, verify_embedding, SearchMode, SolverOptions};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn four_vertex() -> DgpInstance {
        let pts: Vec<Point> = [[0.0, 0.0], [1.0, 0.0], [1.6, 0.9], [1.1, 1.9]]
            .iter()
            .map(|c| Point::new(c.to_vec()))
            .collect();
        let mut inst = DgpInstance::new(4, 2, pts[..2].to_vec()).unwrap();
        for (u, v) in [(1, 2), (2, 3), (1, 3), (3, 4), (2, 4), (1, 4)] {
            inst.add_edge(u, v, pts[u - 1].distance(&pts[v - 1])).unwrap();
        }
        inst
    }

    #[test]
    fn chirality_k2_by_hand() {
        let inst = DgpInstance::new(3, 2, vec![Point::new(vec![0.0, 0.0]), Point::new(vec![1.0, 0.0])]).unwrap();
        let up = Embedding::new(vec![Point::new(vec![0.0, 0.0]), Point::new(vec![1.0, 0.0]), Point::new(vec![1.0, 1.0])]);
        let down = Embedding::new(vec![Point::new(vec![0.0, 0.0]), Point::new(vec![1.0, 0.0]), Point::new(vec![1.0, -1.0])]);
        assert_eq!(chirality(&inst, &up, &tol()).unwrap().signs(), &[1, 1, 1]);
        assert_eq!(chirality(&inst, &down, &tol()).unwrap().signs(), &[1, 1, -1]);
        let flat = Embedding::new(vec![Point::new(vec![0.0, 0.0]), Point::new(vec![1.0, 0.0]), Point::new(vec![2.0, 0.0])]);
        assert_eq!(chirality(&inst, &flat, &tol()), Err(SymmetryError::DegenerateChirality(3)));
    }

    #[test]
    fn first_branch_solution_is_all_positive() {
        let g = generate_random_yes(10, 3, &PruningSpec::None, 3).unwrap();
        let out = solve(&g.instance, &SolverOptions::with_mode(SearchMode::First)).unwrap();
        let chi = chirality(&g.instance, &out.solutions[0].embedding, &tol()).unwrap();
        assert_eq!(chi, Chirality::all_positive(10));
    }

    #[test]
    fn solver_chirality_matches_geometry() {
        let g = generate_random_yes(12, 2, &PruningSpec::Density(0.1), 9).unwrap();
        for s in solve(&g.instance, &SolverOptions::default()).unwrap().solutions {
            assert_eq!(chirality(&g.instance, &s.embedding, &tol()).unwrap(), s.chirality);
        }
    }

    #[test]
    fn partial_reflection_flips_tail_signs() {
        let g = generate_random_yes(9, 3, &PruningSpec::None, 21).unwrap();
        let chi = chirality(&g.instance, &g.ground_truth, &tol()).unwrap();
        for v in 4..=9 {
            let y = apply_partial_reflection(&g.instance, &g.ground_truth, v, &tol()).unwrap();
            assert_eq!(chirality(&g.instance, &y, &tol()).unwrap(), chi.hadamard(&gamma(9, v)));
            for w in 1..v {
                assert_eq!(y.point(w), g.ground_truth.point(w));
            }
            assert!(verify_embedding(&g.instance, &y, &tol()).unwrap().is_feasible());
            let back = apply_partial_reflection(&g.instance, &y, v, &tol()).unwrap();
            assert!(back.max_deviation(&g.ground_truth) < 1e-10);
        }
    }

    #[test]
    fn generators_commute() {
        let g = generate_random_yes(11, 2, &PruningSpec::None, 5).unwrap();
        let x = &g.ground_truth;
        for (u, v) in [(3, 4), (3, 11), (5, 6), (4, 9), (7, 8)] {
            let uv = apply_partial_reflection(&g.instance, &apply_partial_reflection(&g.instance, x, v, &tol()).unwrap(), u, &tol()).unwrap();
            let vu = apply_partial_reflection(&g.instance, &apply_partial_reflection(&g.instance, x, u, &tol()).unwrap(), v, &tol()).unwrap();
            assert!(uv.max_deviation(&vu) < 1e-9, "({u},{v})");
            let el = GroupElement::from_generators(11, 2, [v, u]).unwrap();
            assert!(apply_group_element(&g.instance, x, &el, &tol()).unwrap().max_deviation(&uv) < 1e-9);
        }
    }

    #[test]
    fn group_element_algebra() {
        let id = GroupElement::identity(10, 3);
        assert!(id.is_identity());
        let a = GroupElement::from_generators(10, 3, [4, 7]).unwrap();
        let b = GroupElement::from_generators(10, 3, [7, 9]).unwrap();
        assert_eq!(a.compose(&b).generators().collect::<Vec<_>>(), vec![4, 9]);
        assert!(a.compose(&a).is_identity());
        assert_eq!(a.compose(&id), a);
        assert!(GroupElement::from_generators(10, 3, [3]).is_err());
        let chi: Chirality = "+++-+--+-+".parse().unwrap();
        let moved = chi.hadamard(&a.sign_pattern());
        assert_eq!(GroupElement::between(&chi, &moved, 3), a);
    }

    #[test]
    fn identity_and_single_generator() {
        let g = generate_random_yes(8, 2, &PruningSpec::None, 1).unwrap();
        let id = GroupElement::identity(8, 2);
        assert_eq!(apply_group_element(&g.instance, &g.ground_truth, &id, &tol()).unwrap(), g.ground_truth);
        let one = GroupElement::from_generators(8, 2, [5]).unwrap();
        assert_eq!(
            apply_group_element(&g.instance, &g.ground_truth, &one, &tol()).unwrap(),
            apply_partial_reflection(&g.instance, &g.ground_truth, 5, &tol()).unwrap()
        );
    }

    #[test]
    fn pruning_generators_four_vertex() {
        let inst = four_vertex();
        assert_eq!(pruning_group_generators(&inst, GeneratorWindow::Corrected), vec![3]);
        assert_eq!(predicted_solution_count(&inst, GeneratorWindow::Corrected), 1);
        assert!(pruning_group_generators(&inst, GeneratorWindow::Literal).is_empty());
    }

    #[test]
    fn no_pruning_keeps_all_generators() {
        let g = generate_random_yes(9, 3, &PruningSpec::None, 1).unwrap();
        assert_eq!(pruning_group_generators(&g.instance, GeneratorWindow::Corrected), (4..=9).collect::<Vec<_>>());
    }

    #[test]
    fn orbit_of_full_group_is_all_solutions() {
        let g = generate_random_yes(8, 2, &PruningSpec::None, 12).unwrap();
        let gens: Vec<usize> = (3..=8).collect();
        let orb = orbit(&g.instance, &g.ground_truth, &gens, &tol()).unwrap();
        let sols = solve(&g.instance, &SolverOptions::default()).unwrap().solutions;
        assert_eq!(orb.len(), 64);
        for (a, b) in orb.iter().zip(&sols) {
            assert_eq!(a.chirality, b.chirality);
            assert!(embeddings_match(&a.embedding, &b.embedding, 1e-6));
        }
        assert_eq!(orbit(&g.instance, &g.ground_truth, &[], &tol()).unwrap().len(), 1);
    }

    #[test]
    fn prefix_distances_four_vertex_geometry() {
        let set = prefix_distance_set(&four_vertex(), 1, 4, 1e-9, &tol()).unwrap();
        assert_eq!(set.len(), 2);
        assert!(set.values.iter().all(|&(_, m)| m == 2));
    }

    #[test]
    fn prefix_distances_k3() {
        let g = generate_random_yes(10, 3, &PruningSpec::None, 77).unwrap();
        let set = prefix_distance_set(&g.instance, 2, 8, 1e-9, &tol()).unwrap();
        assert_eq!(set.len(), 8);
        assert!(set.values.iter().all(|&(_, m)| m == 4));
        let smallest = prefix_distance_set(&g.instance, 1, 5, 1e-9, &tol()).unwrap();
        assert_eq!(smallest.len(), 2);
        assert!(prefix_distance_set(&g.instance, 3, 6, 1e-9, &tol()).is_err());
    }
}
