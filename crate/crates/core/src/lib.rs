//! Branch-and-Prune enumeration and symmetry analysis for the discretizable
//! molecular distance geometry problem in dimension `K` (ᴷDMDGP).
//!
//! Vertices are numbered `1..=n`. Every vertex past the `K`-th has edges to
//! its `K` immediate predecessors, so it can sit in at most two places: the
//! intersection of `K` spheres. [`solver`] walks that binary tree,
//! [`symmetry`] explains its shape through partial reflections, and
//! [`width`] predicts the number of nodes per level from the long-range
//! ("pruning") edges alone.

pub mod cli;
pub mod embedding;
pub mod geometry;
pub mod instance;
mod linalg;
pub mod oracle;
pub mod solver;
pub mod symmetry;
pub mod tolerance;
pub mod width;

pub use embedding::{Chirality, Embedding, Solution};
pub use geometry::Point;
pub use instance::{DgpInstance, PruningSpec, SubsetSumInstance};
pub use solver::{solve, SearchMode, SolverOptions};
pub use tolerance::ToleranceConfig;
