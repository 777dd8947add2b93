//! Slow reference answers used to check the solver.
//!
//! Everything here is exhaustive and guarded by a size limit.

use thiserror::Error;

use crate::embedding::{Chirality, Embedding, Solution};
use crate::geometry::{HullFrame, Intersection, Point};
use crate::instance::DgpInstance;
use crate::solver::{verify_embedding, SolveError};
use crate::tolerance::ToleranceConfig;

pub const MAX_SUBSET_SUM_LEN: usize = 24;
pub const MAX_BRUTE_FORCE_DEPTH: usize = 20;
pub const MAX_REDUCTION_LEN: usize = 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{what} = {size} exceeds the exhaustive limit {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Signs `s_i ∈ {+1, -1}`, one per subset-sum value.
pub type SignVector = Vec<i8>;

fn check_size(what: &'static str, size: usize, limit: usize) -> Result<(), OracleError> {
    if size > limit {
        Err(OracleError::TooLarge { what, size, limit })
    } else {
        Ok(())
    }
}

fn signs_from_mask(mask: u64, len: usize) -> SignVector {
    (0..len).map(|i| if mask >> i & 1 == 0 { 1 } else { -1 }).collect()
}

/// All sign vectors with `Σ s_i a_i = 0`, in lexicographic order with `+`
/// before `-`. With `fix_first` only those with `s_1 = +1` are returned.
pub fn subset_sum_solutions(a: &[u64], fix_first: bool) -> Result<Vec<SignVector>, OracleError> {
    check_size("N", a.len(), MAX_SUBSET_SUM_LEN)?;
    let mut out = Vec::new();
    for mask in 0..1u64 << a.len() {
        let signs = signs_from_mask(mask, a.len());
        if fix_first && signs.first() == Some(&-1) {
            continue;
        }
        let sum: i128 = a.iter().zip(&signs).map(|(&x, &s)| s as i128 * x as i128).sum();
        if sum == 0 {
            out.push(signs);
        }
    }
    out.sort_by(|x, y| Chirality::new(x.clone()).cmp(&Chirality::new(y.clone())));
    Ok(out)
}

/// Number of solutions of the reduced instance for `a` in dimension `k`.
///
/// Each of the `K` coordinate axes carries its own signed copy of `a`. The
/// fixed initial points pin the first sign on axes `1 … K-1`; the first sign
/// on the last axis is a free branch. With `m` zero-sum vectors having
/// `s_1 = +1`, the count is `m^{K-1} · 2m`.
pub fn reduction_count_oracle(a: &[u64], k: usize) -> Result<u64, OracleError> {
    check_size("N", a.len(), MAX_REDUCTION_LEN)?;
    let m = subset_sum_solutions(a, true)?.len() as u64;
    Ok(2 * m.pow(k as u32))
}

/// Enumerates every sign vector of length `n - K`, builds the embedding it
/// selects level by level, and keeps those satisfying all edges. Tangent
/// levels only admit the `+1` branch. Results are sorted by chirality.
pub fn brute_force_embeddings(inst: &DgpInstance, tol: &ToleranceConfig, limit: usize) -> Result<Vec<Solution>, OracleError> {
    let (n, k) = (inst.n(), inst.dim());
    let depth = n - k;
    check_size("n - K", depth, limit.min(MAX_BRUTE_FORCE_DEPTH))?;
    let radii: Vec<Vec<f64>> = (k + 1..=n)
        .map(|v| {
            (v - k..v)
                .map(|u| inst.distance(u, v).ok_or(SolveError::MissingDiscretizationEdge { u, v }))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let mut frame = HullFrame::new(k);
    let mut found = Vec::new();
    'masks: for mask in 0..1u64 << depth {
        let mut signs = vec![1i8; k];
        signs.extend(signs_from_mask(mask, depth));
        let mut pts: Vec<Point> = inst.initial().to_vec();
        for v in k + 1..=n {
            if frame.fit(&pts[v - 1 - k..v - 1], tol).is_err() {
                continue 'masks;
            }
            let p = match (frame.intersect(&radii[v - k - 1], tol), signs[v - 1]) {
                (Intersection::Pair { positive, .. }, 1) => positive,
                (Intersection::Pair { negative, .. }, _) => negative,
                (Intersection::Tangent(p), 1) => p,
                _ => continue 'masks,
            };
            pts.push(p);
        }
        let x = Embedding::new(pts);
        if verify_embedding(inst, &x, tol)?.is_feasible() {
            found.push(Solution {
                chirality: Chirality::new(signs),
                embedding: x,
            });
        }
    }
    found.sort_by(|a, b| a.chirality.cmp(&b.chirality));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_random_yes, reduce_subset_sum, PruningSpec};
    use crate::solver::{solve, SearchMode, SolverOptions};

    fn signs(s: &str) -> SignVector {
        s.chars().map(|c| if c == '+' { 1 } else { -1 }).collect()
    }

    #[test]
    fn subset_sum_examples() {
        assert_eq!(subset_sum_solutions(&[1, 1], false).unwrap(), vec![signs("+-"), signs("-+")]);
        assert_eq!(subset_sum_solutions(&[1, 1], true).unwrap(), vec![signs("+-")]);
        assert!(subset_sum_solutions(&[1, 2], false).unwrap().is_empty());
        assert_eq!(subset_sum_solutions(&[3, 1, 2], false).unwrap(), vec![signs("+--"), signs("-++")]);
    }

    #[test]
    fn subset_sum_guard() {
        assert!(matches!(subset_sum_solutions(&[1; 25], false), Err(OracleError::TooLarge { .. })));
    }

    #[test]
    fn reduction_counts() {
        assert_eq!(reduction_count_oracle(&[1, 1], 2).unwrap(), 2);
        assert_eq!(reduction_count_oracle(&[1, 2], 3).unwrap(), 0);
        assert_eq!(reduction_count_oracle(&[1, 1, 2], 2).unwrap(), 2);
        // m = 3 for (1,1,1,1): +--+ , +-+-, ++--
        assert_eq!(reduction_count_oracle(&[1, 1, 1, 1], 2).unwrap(), 18);
    }

    #[test]
    fn reduction_oracle_matches_solver() {
        for a in [vec![1, 1], vec![1, 2], vec![2, 1, 1], vec![1, 1, 1, 1], vec![3, 1, 2]] {
            for k in 2..=3 {
                let inst = reduce_subset_sum(&crate::SubsetSumInstance::new(a.clone()).unwrap(), k).unwrap();
                let count = solve(&inst, &SolverOptions::with_mode(SearchMode::Count)).unwrap().count;
                assert_eq!(count, reduction_count_oracle(&a, k).unwrap(), "a={a:?} K={k}");
            }
        }
    }

    #[test]
    fn brute_force_matches_solver() {
        let tol = ToleranceConfig::default();
        for seed in 0..6 {
            let g = generate_random_yes(9, 2 + (seed as usize) % 2, &PruningSpec::Density(0.2), seed).unwrap();
            let brute = brute_force_embeddings(&g.instance, &tol, 20).unwrap();
            let bp = solve(&g.instance, &SolverOptions::default()).unwrap().solutions;
            assert_eq!(brute.len(), bp.len());
            for (a, b) in brute.iter().zip(&bp) {
                assert_eq!(a.chirality, b.chirality);
                assert!(a.embedding.max_deviation(&b.embedding) < 1e-9);
            }
        }
    }

    #[test]
    fn brute_force_guard() {
        let g = generate_random_yes(30, 2, &PruningSpec::None, 0).unwrap();
        assert!(brute_force_embeddings(&g.instance, &ToleranceConfig::default(), 20).is_err());
    }
}
