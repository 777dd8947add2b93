//! Embeddings, chirality vectors and the solution file format.
//!
//! Solution files hold one block per embedding:
//!
//! ```text
//! SOL <index> <chirality as a +/- string>
//! X <v> <c1> … <cK>      (n lines, v = 1…n)
//! ```

use std::cmp::Ordering;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::Point;

/// Positions of vertices `1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding {
    points: Vec<Point>,
}

impl Embedding {
    pub fn new(points: Vec<Point>) -> Self {
        Embedding { points }
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Position of vertex `v` (1-based).
    #[inline]
    pub fn point(&self, v: usize) -> &Point {
        &self.points[v - 1]
    }

    pub fn point_mut(&mut self, v: usize) -> &mut Point {
        &mut self.points[v - 1]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    /// Largest per-vertex Euclidean deviation from `other`.
    pub fn max_deviation(&self, other: &Embedding) -> f64 {
        if self.n() != other.n() {
            return f64::INFINITY;
        }
        self.points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }

    /// Largest pairwise distance between vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                d = d.max(a.distance(b));
            }
        }
        d
    }
}

/// Chirality sequence in {−1, +1}ⁿ.
///
/// Ordered lexicographically with `+1` before `−1`, which is the order in
/// which the solver explores branches.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chirality(Vec<i8>);

impl Chirality {
    pub fn new(signs: Vec<i8>) -> Self {
        debug_assert!(signs.iter().all(|s| *s == 1 || *s == -1));
        Chirality(signs)
    }

    pub fn all_positive(n: usize) -> Self {
        Chirality(vec![1; n])
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sign of vertex `v` (1-based).
    pub fn at(&self, v: usize) -> i8 {
        self.0[v - 1]
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &Chirality) -> Chirality {
        Chirality(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }
}

impl Ord for Chirality {
    fn cmp(&self, other: &Self) -> Ordering {
        // +1 sorts first, so compare negated signs
        self.0
            .iter()
            .map(|s| -s)
            .cmp(other.0.iter().map(|s| -s))
    }
}

impl PartialOrd for Chirality {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Chirality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(if *s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for Chirality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(format!("invalid chirality character {other:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Chirality)
    }
}

/// An embedding tagged with its chirality.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub chirality: Chirality,
    pub embedding: Embedding,
}

#[derive(Debug, Error)]
pub enum SolutionFormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub(crate) fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_solutions<W: Write>(mut w: W, solutions: &[Solution]) -> io::Result<()> {
    for (index, sol) in solutions.iter().enumerate() {
        writeln!(w, "SOL {index} {}", sol.chirality)?;
        for (i, p) in sol.embedding.points().iter().enumerate() {
            write!(w, "X {}", i + 1)?;
            for c in p.coords() {
                write!(w, " {}", fmt_real(*c))?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn solutions_to_string(solutions: &[Solution]) -> String {
    let mut buf = Vec::new();
    write_solutions(&mut buf, solutions).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("solution output is ASCII")
}

/// Parses the `SOL`/`X` block format. `#` starts a comment.
pub fn parse_solutions(text: &str) -> Result<Vec<Solution>, SolutionFormatError> {
    let mut out: Vec<Solution> = Vec::new();
    let mut current: Option<(Chirality, Vec<Point>)> = None;
    let malformed = |line: usize, message: String| SolutionFormatError::Malformed { line, message };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("SOL") => {
                if let Some((chirality, points)) = current.take() {
                    out.push(Solution {
                        chirality,
                        embedding: Embedding::new(points),
                    });
                }
                let _index = tok.next().ok_or_else(|| malformed(lineno, "missing index".into()))?;
                let chirality = tok
                    .next()
                    .ok_or_else(|| malformed(lineno, "missing chirality".into()))?
                    .parse::<Chirality>()
                    .map_err(|e| malformed(lineno, e))?;
                current = Some((chirality, Vec::new()));
            }
            Some("X") => {
                let (_, points) = current
                    .as_mut()
                    .ok_or_else(|| malformed(lineno, "X line before SOL".into()))?;
                let v: usize = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| malformed(lineno, "bad vertex index".into()))?;
                if v != points.len() + 1 {
                    return Err(malformed(lineno, format!("expected vertex {}, got {v}", points.len() + 1)));
                }
                let coords = tok
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| malformed(lineno, e.to_string()))?;
                points.push(Point::new(coords));
            }
            Some(other) => return Err(malformed(lineno, format!("unknown record {other:?}"))),
            None => unreachable!(),
        }
    }
    if let Some((chirality, points)) = current {
        out.push(Solution {
            chirality,
            embedding: Embedding::new(points),
        });
    }
    Ok(out)
}
