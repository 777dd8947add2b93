//! Random YES instances built from a generic walk in ℝᴷ.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DgpInstance, InstanceError};
use crate::embedding::Embedding;
use crate::geometry::{check_dimension, distance_to_affine_hull, Point};

/// Minimum height of each new vertex above the hull of its predecessors,
/// as a fraction of the step length.
const MIN_RELATIVE_HEIGHT: f64 = 0.25;
const MAX_PROP2_RUN: usize = 3;

/// Which pruning edges to add on top of the discretization edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PruningSpec {
    None,
    /// Each pair with span > K independently with probability `p`.
    Density(f64),
    /// Exactly one edge `{v-K-1, v}` for every `v > v0`.
    Prop1 { v0: usize },
    /// Cut vertices with long edges, each followed by a pruning-free run the
    /// cut pays for in advance; width stays at `2^{v0-K}`.
    Prop2 { v0: usize },
    /// One edge `{v-K-1, v}` for every `v > v0` that is not a power of two.
    Prop3 { v0: usize },
}

impl fmt::Display for PruningSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PruningSpec::None => write!(f, "none"),
            PruningSpec::Density(p) => write!(f, "density:{p}"),
            PruningSpec::Prop1 { v0 } => write!(f, "prop1:{v0}"),
            PruningSpec::Prop2 { v0 } => write!(f, "prop2:{v0}"),
            PruningSpec::Prop3 { v0 } => write!(f, "prop3:{v0}"),
        }
    }
}

impl FromStr for PruningSpec {
    type Err = String;

    /// `none`, `density:<p>`, `prop1:<v0>`, `prop2:<v0>` or `prop3:<v0>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let v0 = || -> Result<usize, String> {
            arg.ok_or_else(|| format!("{kind} needs a vertex, e.g. {kind}:4"))?
                .parse()
                .map_err(|_| format!("bad v0 in {s:?}"))
        };
        match kind {
            "none" if arg.is_none() => Ok(PruningSpec::None),
            "density" => {
                let p: f64 = arg
                    .ok_or("density needs a probability, e.g. density:0.1")?
                    .parse()
                    .map_err(|_| format!("bad probability in {s:?}"))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(format!("probability {p} outside [0, 1]"));
                }
                Ok(PruningSpec::Density(p))
            }
            "prop1" => Ok(PruningSpec::Prop1 { v0: v0()? }),
            "prop2" => Ok(PruningSpec::Prop2 { v0: v0()? }),
            "prop3" => Ok(PruningSpec::Prop3 { v0: v0()? }),
            _ => Err(format!("unknown pruning spec {s:?}")),
        }
    }
}

/// A generated instance and the walk it was derived from.
#[derive(Clone, Debug)]
pub struct GeneratedInstance {
    pub instance: DgpInstance,
    pub ground_truth: Embedding,
}

fn random_walk(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut pts = vec![Point::origin(k)];
    while pts.len() < n {
        let prev = &pts[pts.len() - 1];
        let window = &pts[pts.len().saturating_sub(k)..];
        let next = loop {
            let step: f64 = rng.random_range(1.0..=2.0);
            let mut dir: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len < 1e-9 {
                continue;
            }
            dir.iter_mut().for_each(|x| *x /= len);
            let cand = prev.offset(&dir, step);
            if distance_to_affine_hull(window, &cand) >= MIN_RELATIVE_HEIGHT * step {
                break cand;
            }
        };
        pts.push(next);
    }
    pts
}

fn pruning_pairs(n: usize, k: usize, spec: &PruningSpec, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>, InstanceError> {
    let infeasible = |reason: String| InstanceError::InfeasibleSpec {
        spec: spec.to_string(),
        reason,
    };
    let check_v0 = |v0: usize| {
        if v0 <= k {
            Err(infeasible(format!("v0 = {v0} must exceed K = {k}")))
        } else if v0 >= n {
            Err(infeasible(format!("v0 = {v0} must be below n = {n}")))
        } else {
            Ok(())
        }
    };
    let mut pairs = Vec::new();
    match *spec {
        PruningSpec::None => {}
        PruningSpec::Density(p) => {
            for v in k + 2..=n {
                for u in 1..v - k {
                    if rng.random_bool(p) {
                        pairs.push((u, v));
                    }
                }
            }
        }
        PruningSpec::Prop1 { v0 } => {
            check_v0(v0)?;
            pairs.extend((v0 + 1..=n).map(|v| (v - k - 1, v)));
        }
        PruningSpec::Prop3 { v0 } => {
            check_v0(v0)?;
            pairs.extend((v0 + 1..=n).filter(|v| !v.is_power_of_two()).map(|v| (v - k - 1, v)));
        }
        PruningSpec::Prop2 { v0 } => {
            check_v0(v0)?;
            // reflection generators g_w still acting at the current level
            let mut present: BTreeSet<usize> = (k + 1..=v0).collect();
            let mut v = v0 + 1;
            while v <= n {
                // g_w can only be cancelled by an edge {w-K-1, v}
                let removable: Vec<usize> = present.iter().rev().copied().filter(|&w| w >= k + 2).collect();
                let max_run = removable.len().min(n - v).min(MAX_PROP2_RUN);
                let run = if max_run == 0 { 0 } else { rng.random_range(1..=max_run) };
                let first = if run == 0 { v } else { removable[run - 1] };
                let u = first - k - 1;
                pairs.push((u, v));
                present.retain(|&w| w < first);
                present.extend(v + 1..=v + run);
                v += run + 1;
            }
        }
    }
    Ok(pairs)
}

/// Builds a YES instance on a random generic walk. Deterministic in `seed`.
pub fn generate_random_yes(n: usize, k: usize, spec: &PruningSpec, seed: u64) -> Result<GeneratedInstance, InstanceError> {
    check_dimension(k)?;
    if n < k + 1 {
        return Err(InstanceError::TooFewVertices { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = random_walk(n, k, &mut rng);
    let mut inst = DgpInstance::new(n, k, pts[..k].to_vec())?;
    for v in 2..=n {
        for u in v.saturating_sub(k).max(1)..v {
            inst.add_edge(u, v, pts[u - 1].distance(&pts[v - 1]))?;
        }
    }
    for (u, v) in pruning_pairs(n, k, spec, &mut rng)? {
        inst.add_edge(u, v, pts[u - 1].distance(&pts[v - 1]))?;
    }
    Ok(GeneratedInstance {
        instance: inst,
        ground_truth: Embedding::new(pts),
    })
}
