//! Numerical tolerances shared by the geometric kernel and the solver.

/// Tolerances used throughout the crate.
///
/// All arithmetic is done in `f64`; these thresholds decide when a quantity
/// that would be exactly zero (or exactly equal) over the reals is treated as
/// such.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceConfig {
    /// Allowed residual when re-substituting computed points into sphere equations.
    pub geometry: f64,
    /// Simplex volumes and orientation determinants at or below this are degenerate.
    pub degeneracy: f64,
    /// Discriminant band classified as a single tangent point.
    pub disc: f64,
    /// Absolute part of the pruning threshold.
    pub prune_abs: f64,
    /// Relative part of the pruning threshold, scaled by the target distance.
    pub prune_rel: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            geometry: 1e-8,
            degeneracy: 1e-10,
            disc: 1e-10,
            prune_abs: 1e-6,
            prune_rel: 1e-6,
        }
    }
}

impl ToleranceConfig {
    /// Largest accepted `| ||p - x_u|| - d_uv |` for a distance `d_uv`.
    #[inline]
    pub fn prune_threshold(&self, distance: f64) -> f64 {
        self.prune_abs + self.prune_rel * distance
    }

    /// Returns the name of the first negative or non-finite field, if any.
    pub fn invalid_field(&self) -> Option<&'static str> {
        let fields = [
            ("geometry", self.geometry),
            ("degeneracy", self.degeneracy),
            ("disc", self.disc),
            ("prune_abs", self.prune_abs),
            ("prune_rel", self.prune_rel),
        ];
        fields
            .iter()
            .find(|(_, value)| !(value.is_finite() && *value >= 0.0))
            .map(|(name, _)| *name)
    }
}
