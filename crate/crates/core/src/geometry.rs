//! Dimension-generic Euclidean kernel.
//!
//! Everything here works in ℝᴷ for `1 <= K <= MAX_DIM`. The central object is
//! the affine hull of `K` points, which in ℝᴷ is a hyperplane: sphere
//! intersection, reflections and chirality are all expressed relative to it.
//!
//! Orientation convention: for hull points `c_0, …, c_{K-1}` the unit normal
//! `n` is chosen so that `det[c_1 - c_0; …; c_{K-1} - c_0; n] > 0`. A point
//! `p` is on the positive side iff `det[c_1 - c_0; …; c_{K-1} - c_0; p - c_0]`
//! is positive, which is exactly [`signed_simplex_orientation`] of
//! `(c_0, …, c_{K-1}, p)`.

use std::fmt;
use std::ops::Index;

use thiserror::Error;

use crate::linalg::{determinant, dot, factorial, norm};
use crate::tolerance::ToleranceConfig;

/// Largest supported embedding dimension.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("centers are affinely dependent (simplex volume {volume:e})")]
    DegenerateCenters { volume: f64 },
    #[error("Cayley-Menger determinant is negative ({value:e}); distances are not realizable")]
    NegativeCayleyMenger { value: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {0} is not supported (1..={MAX_DIM})")]
    UnsupportedDimension(usize),
    #[error("invalid radius {0}")]
    InvalidRadius(f64),
    #[error("invalid distance matrix: {0}")]
    InvalidDistanceMatrix(String),
    #[error("expected {expected} points, got {found}")]
    WrongPointCount { expected: String, found: usize },
}

pub fn check_dimension(k: usize) -> Result<(), GeometryError> {
    if k == 0 || k > MAX_DIM {
        Err(GeometryError::UnsupportedDimension(k))
    } else {
        Ok(())
    }
}

/// A position in ℝᴷ.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// `self + scale * direction`.
    pub fn offset(&self, direction: &[f64], scale: f64) -> Point {
        Point(
            self.0
                .iter()
                .zip(direction)
                .map(|(a, d)| a + scale * d)
                .collect(),
        )
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Orthonormal frame of the hyperplane through `K` points in ℝᴷ.
///
/// Rows `0..K-1` of `basis` span the hull directions (Gram-Schmidt of
/// `c_i - c_0`), row `K-1` is the oriented unit normal. `lower` holds the
/// Gram-Schmidt coefficients, so `c_i - c_0 = Σ_j lower[i-1][j] basis[j]`.
#[derive(Clone, Debug)]
pub(crate) struct HullFrame {
    dim: usize,
    base: Vec<f64>,
    basis: Vec<f64>,
    lower: Vec<f64>,
    volume: f64,
    scratch: Vec<f64>,
}

impl HullFrame {
    pub(crate) fn new(dim: usize) -> Self {
        HullFrame {
            dim,
            base: vec![0.0; dim],
            basis: vec![0.0; dim * dim],
            lower: vec![0.0; dim * dim],
            volume: 0.0,
            scratch: vec![0.0; dim * dim],
        }
    }

    pub(crate) fn normal(&self) -> &[f64] {
        let k = self.dim;
        &self.basis[(k - 1) * k..k * k]
    }

    pub(crate) fn base(&self) -> &[f64] {
        &self.base
    }

    /// Fits the frame to `points`; fails when their (K-1)-volume is at or
    /// below `tol.degeneracy`.
    pub(crate) fn fit(&mut self, points: &[Point], tol: &ToleranceConfig) -> Result<(), GeometryError> {
        let k = self.dim;
        if points.len() != k {
            return Err(GeometryError::WrongPointCount {
                expected: k.to_string(),
                found: points.len(),
            });
        }
        for p in points {
            if p.dim() != k {
                return Err(GeometryError::DimensionMismatch {
                    expected: k,
                    found: p.dim(),
                });
            }
        }
        self.base.copy_from_slice(points[0].coords());
        let mut volume = 1.0;
        for i in 1..k {
            let row = i - 1;
            for j in 0..k {
                self.basis[row * k + j] = points[i][j] - self.base[j];
            }
            for j in 0..k {
                self.lower[row * k + j] = 0.0;
            }
            // two passes of modified Gram-Schmidt
            for _ in 0..2 {
                for q in 0..row {
                    let (prev, cur) = self.basis.split_at_mut(row * k);
                    let qrow = &prev[q * k..(q + 1) * k];
                    let v = &mut cur[..k];
                    let c = dot(qrow, v);
                    self.lower[row * k + q] += c;
                    for (vj, qj) in v.iter_mut().zip(qrow) {
                        *vj -= c * qj;
                    }
                }
            }
            let v = &mut self.basis[row * k..(row + 1) * k];
            let len = norm(v);
            self.lower[row * k + row] = len;
            volume *= len;
            if len == 0.0 {
                self.volume = 0.0;
                return Err(GeometryError::DegenerateCenters { volume: 0.0 });
            }
            v.iter_mut().for_each(|c| *c /= len);
        }
        volume /= factorial(k - 1);
        self.volume = volume;
        if !(volume > tol.degeneracy) {
            return Err(GeometryError::DegenerateCenters { volume });
        }

        // Normal: complete the basis with the coordinate axis least covered
        // by the hull directions.
        let last = k - 1;
        let mut best_axis = 0;
        let mut best_residual = f64::NEG_INFINITY;
        for axis in 0..k {
            let covered: f64 = (0..last).map(|q| self.basis[q * k + axis].powi(2)).sum();
            let residual = 1.0 - covered;
            if residual > best_residual {
                best_residual = residual;
                best_axis = axis;
            }
        }
        for j in 0..k {
            self.basis[last * k + j] = if j == best_axis { 1.0 } else { 0.0 };
        }
        for _ in 0..2 {
            for q in 0..last {
                let (prev, cur) = self.basis.split_at_mut(last * k);
                let qrow = &prev[q * k..(q + 1) * k];
                let v = &mut cur[..k];
                let c = dot(qrow, v);
                for (vj, qj) in v.iter_mut().zip(qrow) {
                    *vj -= c * qj;
                }
            }
        }
        let n = &mut self.basis[last * k..k * k];
        let len = norm(n);
        n.iter_mut().for_each(|c| *c /= len);

        self.scratch.copy_from_slice(&self.basis);
        if determinant(&mut self.scratch, k) < 0.0 {
            self.basis[last * k..k * k].iter_mut().for_each(|c| *c = -*c);
        }
        Ok(())
    }

    /// Intersects the spheres centred at the fitted points with `radii`.
    pub(crate) fn intersect(&self, radii: &[f64], tol: &ToleranceConfig) -> Intersection {
        let k = self.dim;
        let r0sq = radii[0] * radii[0];
        // alpha: coordinates of the foot point in the hull basis
        let mut alpha = [0.0f64; MAX_DIM];
        let mut hull_sq = 0.0;
        for i in 1..k {
            let row = i - 1;
            let lrow = &self.lower[row * k..row * k + i];
            let dsq: f64 = lrow.iter().map(|c| c * c).sum();
            let rhs = 0.5 * (r0sq - radii[i] * radii[i] + dsq);
            let mut acc = rhs;
            for j in 0..row {
                acc -= lrow[j] * alpha[j];
            }
            let a = acc / lrow[row];
            alpha[row] = a;
            hull_sq += a * a;
        }
        let disc = r0sq - hull_sq;
        let mut foot = self.base.clone();
        for (q, a) in alpha.iter().enumerate().take(k - 1) {
            let qrow = &self.basis[q * k..(q + 1) * k];
            for (f, b) in foot.iter_mut().zip(qrow) {
                *f += a * b;
            }
        }
        if disc > tol.disc {
            let h = disc.sqrt();
            let n = self.normal();
            let foot = Point(foot);
            Intersection::Pair {
                positive: foot.offset(n, h),
                negative: foot.offset(n, -h),
            }
        } else if disc >= -tol.disc {
            Intersection::Tangent(Point(foot))
        } else {
            Intersection::Empty
        }
    }

    /// Signed distance of `p` from the fitted hyperplane.
    #[inline]
    pub(crate) fn signed_distance(&self, p: &[f64]) -> f64 {
        self.normal()
            .iter()
            .zip(p.iter().zip(&self.base))
            .map(|(n, (x, b))| n * (x - b))
            .sum()
    }

    pub(crate) fn reflect_in_place(&self, p: &mut [f64]) {
        let s = 2.0 * self.signed_distance(p);
        for (x, n) in p.iter_mut().zip(self.normal()) {
            *x -= s * n;
        }
    }
}

/// Hyperplane `normal · x = offset` through `K` affinely independent points.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineHull {
    pub base: Point,
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl AffineHull {
    pub fn through(points: &[Point], tol: &ToleranceConfig) -> Result<Self, GeometryError> {
        let k = points.first().map(Point::dim).unwrap_or(0);
        check_dimension(k)?;
        let mut frame = HullFrame::new(k);
        frame.fit(points, tol)?;
        let normal = frame.normal().to_vec();
        let offset = dot(&normal, frame.base());
        Ok(AffineHull {
            base: points[0].clone(),
            normal,
            offset,
        })
    }

    /// `normal · p - offset`; positive on the positive side.
    pub fn signed_distance(&self, p: &Point) -> f64 {
        dot(&self.normal, p.coords()) - self.offset
    }

    pub fn reflect(&self, p: &Point) -> Point {
        p.offset(&self.normal, -2.0 * self.signed_distance(p))
    }
}

/// `K` spheres in ℝᴷ.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereSystem {
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
}

impl SphereSystem {
    pub fn new(centers: Vec<Point>, radii: Vec<f64>) -> Result<Self, GeometryError> {
        let k = centers.len();
        check_dimension(k)?;
        if radii.len() != k {
            return Err(GeometryError::WrongPointCount {
                expected: format!("{k} radii"),
                found: radii.len(),
            });
        }
        if let Some(&r) = radii.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(GeometryError::InvalidRadius(r));
        }
        Ok(SphereSystem { centers, radii })
    }

    pub fn dim(&self) -> usize {
        self.centers.len()
    }
}

/// Result of intersecting `K` spheres in ℝᴷ.
#[derive(Clone, Debug, PartialEq)]
pub enum Intersection {
    Empty,
    /// Discriminant within the tangency band.
    Tangent(Point),
    /// Two mirror-image points; `positive` lies on the positive side of the
    /// centers' hyperplane.
    Pair { positive: Point, negative: Point },
}

impl Intersection {
    pub fn len(&self) -> usize {
        match self {
            Intersection::Empty => 0,
            Intersection::Tangent(_) => 1,
            Intersection::Pair { .. } => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Intersection::Empty)
    }

    /// Points in branching order, positive side first.
    pub fn points(&self) -> Vec<&Point> {
        match self {
            Intersection::Empty => vec![],
            Intersection::Tangent(p) => vec![p],
            Intersection::Pair { positive, negative } => vec![positive, negative],
        }
    }
}

/// Intersection of the `K` spheres of `sys`.
pub fn intersect_k_spheres(sys: &SphereSystem, tol: &ToleranceConfig) -> Result<Intersection, GeometryError> {
    intersect_spheres(&sys.centers, &sys.radii, tol)
}

/// Slice-based variant of [`intersect_k_spheres`].
pub fn intersect_spheres(centers: &[Point], radii: &[f64], tol: &ToleranceConfig) -> Result<Intersection, GeometryError> {
    let k = centers.len();
    check_dimension(k)?;
    let mut frame = HullFrame::new(k);
    frame.fit(centers, tol)?;
    Ok(frame.intersect(radii, tol))
}

/// Mirror image of `target` through the hyperplane spanned by `points`.
pub fn reflect_through_hull(points: &[Point], target: &Point, tol: &ToleranceConfig) -> Result<Point, GeometryError> {
    let hull = AffineHull::through(points, tol)?;
    if target.dim() != hull.normal.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: hull.normal.len(),
            found: target.dim(),
        });
    }
    Ok(hull.reflect(target))
}

/// (m-1)-dimensional volume of the simplex spanned by `points`.
pub fn simplex_volume(points: &[Point]) -> Result<f64, GeometryError> {
    let m = points.len();
    let dim = points.first().map(Point::dim).unwrap_or(0);
    if m < 2 || m - 1 > dim {
        return Err(GeometryError::WrongPointCount {
            expected: format!("2..={}", dim + 1),
            found: m,
        });
    }
    if let Some(p) = points.iter().find(|p| p.dim() != dim) {
        return Err(GeometryError::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m - 1);
    let mut volume = 1.0;
    for p in &points[1..] {
        let mut v: Vec<f64> = p.coords().iter().zip(points[0].coords()).map(|(a, b)| a - b).collect();
        for _ in 0..2 {
            for q in &rows {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let len = norm(&v);
        volume *= len;
        if len == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|x| *x /= len);
        rows.push(v);
    }
    Ok(volume / factorial(m - 1))
}

/// (m-1)-dimensional simplex volume from an m×m distance matrix, via the
/// Cayley-Menger determinant.
pub fn simplex_volume_from_distances(dist: &[Vec<f64>]) -> Result<f64, GeometryError> {
    let m = dist.len();
    if m < 2 {
        return Err(GeometryError::WrongPointCount {
            expected: ">= 2".into(),
            found: m,
        });
    }
    let mut max_sq: f64 = 0.0;
    for (i, row) in dist.iter().enumerate() {
        if row.len() != m {
            return Err(GeometryError::InvalidDistanceMatrix(format!("row {i} has length {}", row.len())));
        }
        if row[i] != 0.0 {
            return Err(GeometryError::InvalidDistanceMatrix(format!("nonzero diagonal at {i}")));
        }
        for (j, &d) in row.iter().enumerate() {
            if !(d.is_finite() && d >= 0.0) || d != dist[j][i] {
                return Err(GeometryError::InvalidDistanceMatrix(format!("bad entry ({i},{j})")));
            }
            max_sq = max_sq.max(d * d);
        }
    }
    let size = m + 1;
    let mut cm = vec![0.0; size * size];
    for i in 1..size {
        cm[i] = 1.0;
        cm[i * size] = 1.0;
        for j in 1..size {
            let d = dist[i - 1][j - 1];
            cm[i * size + j] = d * d;
        }
    }
    let det = determinant(&mut cm, size);
    let d = m - 1;
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let vsq = sign * det / (2f64.powi(d as i32) * factorial(d).powi(2));
    let scale = max_sq.powi(d as i32);
    if vsq < -1e-9 * scale.max(f64::MIN_POSITIVE) {
        return Err(GeometryError::NegativeCayleyMenger { value: vsq });
    }
    Ok(vsq.max(0.0).sqrt())
}

/// Orientation of a K-simplex in ℝᴷ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Negative,
    Degenerate,
    Positive,
}

impl Orientation {
    pub fn sign(self) -> i8 {
        match self {
            Orientation::Negative => -1,
            Orientation::Degenerate => 0,
            Orientation::Positive => 1,
        }
    }
}

/// Sign of `det[p_1 - p_0; …; p_K - p_0]` for `K+1` points in ℝᴷ.
pub fn signed_simplex_orientation(points: &[Point], tol: &ToleranceConfig) -> Result<Orientation, GeometryError> {
    let k = points.len().saturating_sub(1);
    check_dimension(k)?;
    let mut m = vec![0.0; k * k];
    for (i, p) in points[1..].iter().enumerate() {
        if p.dim() != k || points[0].dim() != k {
            return Err(GeometryError::DimensionMismatch {
                expected: k,
                found: p.dim().min(points[0].dim()),
            });
        }
        for j in 0..k {
            m[i * k + j] = p[j] - points[0][j];
        }
    }
    let det = determinant(&mut m, k);
    Ok(if det.abs() <= tol.degeneracy {
        Orientation::Degenerate
    } else if det > 0.0 {
        Orientation::Positive
    } else {
        Orientation::Negative
    })
}

/// Euclidean distance from `p` to the affine hull of `points` (any number of
/// points; dependent directions are skipped).
pub fn distance_to_affine_hull(points: &[Point], p: &Point) -> f64 {
    let Some(base) = points.first() else {
        return f64::INFINITY;
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for q in &points[1..] {
        let mut v: Vec<f64> = q.coords().iter().zip(base.coords()).map(|(a, b)| a - b).collect();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let len = norm(&v);
        if len > 1e-12 {
            v.iter_mut().for_each(|x| *x /= len);
            basis.push(v);
        }
    }
    let mut r: Vec<f64> = p.coords().iter().zip(base.coords()).map(|(a, b)| a - b).collect();
    for _ in 0..2 {
        for b in &basis {
            let c = dot(b, &r);
            r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    norm(&r)
}
