use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every decider.
///
/// The underlying theorems are exact; each of these marks a place where a
/// floating-point comparison stands in for an exact one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute singular-value cut for rank and invertibility tests.
    /// `None` uses `max(rows, cols)·ε·σ_max` per matrix.
    pub rank_tol: Option<f64>,
    /// Chordal distance under which eigenvalues count as the same point.
    pub cluster_tol: f64,
    /// Band on `|λμ − 1|` (or `|λ·conj μ − 1|`) for reciprocal pairs.
    pub pair_tol: f64,
    /// Multiplier on `n·ε·scale` when deciding which determinant
    /// coefficients vanish.
    pub coeff_tol_factor: f64,
    /// `λ` is an eigenvalue of a possibly singular pencil when
    /// `σ_r(P(λ))`, `r` the normal rank, is at most this fraction of
    /// `‖M‖ + |λ|·‖N‖`.
    pub drop_tol: f64,
}

pub const DEFAULT_CLUSTER_TOL: f64 = 1e-6;
pub const DEFAULT_PAIR_TOL: f64 = 1e-8;
pub const DEFAULT_COEFF_TOL_FACTOR: f64 = 32.0;
pub const DEFAULT_DROP_TOL: f64 = 1e-8;

/// A test whose measured value sits within this factor of its threshold is
/// reported as borderline.
pub const BORDERLINE_FACTOR: f64 = 10.0;

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: None,
            cluster_tol: DEFAULT_CLUSTER_TOL,
            pair_tol: DEFAULT_PAIR_TOL,
            coeff_tol_factor: DEFAULT_COEFF_TOL_FACTOR,
            drop_tol: DEFAULT_DROP_TOL,
        }
    }
}

impl Tolerances {
    pub fn with_rank_tol(mut self, tol: Option<f64>) -> Self {
        self.rank_tol = tol;
        self
    }

    pub fn with_cluster_tol(mut self, tol: f64) -> Self {
        self.cluster_tol = tol;
        self
    }
}

/// True when `value` lies within [`BORDERLINE_FACTOR`] of `threshold` on
/// either side.
pub fn is_borderline(value: f64, threshold: f64) -> bool {
    value.is_finite()
        && value >= threshold / BORDERLINE_FACTOR
        && value <= threshold * BORDERLINE_FACTOR
}
