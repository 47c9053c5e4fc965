//! Numeric tolerances shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and limits. One record is threaded through constructors so a
/// run can be reproduced from its policy alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericPolicy {
    /// Max entry-wise deviation from Hermiticity accepted for states and tests.
    pub hermitian_tol: f64,
    /// Eigenvalues down to `-psd_tol` are accepted as zero.
    pub psd_tol: f64,
    /// Accepted |trace - 1| for density matrices.
    pub trace_tol: f64,
    /// Eigenvalues at or below this are outside the support.
    pub support_threshold: f64,
    /// Hermiticity tolerance for raw eigendecomposition input.
    pub eig_hermitian_tol: f64,
    /// Fractional powers reject eigenvalues below `-negative_eig_limit`.
    pub negative_eig_limit: f64,
    /// `Tr((I - pi_sigma) rho)` above this means `supp(rho)` is not inside `supp(sigma)`.
    pub support_violation_tol: f64,
    /// Cap on the dimension produced by tensor powers.
    pub dim_cap: usize,
    /// Uniform grid size for sup/inf over alpha in [0, 1].
    pub grid_points: usize,
    /// Golden-section refinement stops at this bracket width.
    pub golden_tol: f64,
    /// Smallest alpha used when evaluating the Hoeffding bound.
    pub hoeffding_alpha_floor: f64,
    /// Boundary tracing stops refining a segment below this Lagrangian gap.
    pub boundary_gap_tol: f64,
    /// Boundary tracing stops refining a segment below this slope gap.
    pub boundary_slope_gap: f64,
    /// Hard cap on traced boundary vertices.
    pub boundary_max_vertices: usize,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            hermitian_tol: 1e-10,
            psd_tol: 1e-10,
            trace_tol: 1e-10,
            support_threshold: 1e-12,
            eig_hermitian_tol: 1e-8,
            negative_eig_limit: 1e-8,
            support_violation_tol: 1e-10,
            dim_cap: 4096,
            grid_points: 1025,
            golden_tol: 1e-10,
            hoeffding_alpha_floor: 1e-6,
            boundary_gap_tol: 1e-12,
            boundary_slope_gap: 1e-10,
            boundary_max_vertices: 10_000,
        }
    }
}

impl NumericPolicy {
    /// Applies `PREFIX_FIELD_NAME=value` overrides (field names upper-cased),
    /// e.g. `SDIV_GRID_POINTS=2049`. Unrelated keys are ignored.
    pub fn with_overrides<I, K, V>(mut self, prefix: &str, vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (key, value) in vars {
            let Some(field) = key.as_ref().strip_prefix(prefix) else {
                continue;
            };
            let value = value.as_ref().trim();
            let float = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .ok_or_else(|| Error::Parse(format!("{}{field}={value}", prefix)))
            };
            let count = || {
                value
                    .parse::<usize>()
                    .ok()
                    .filter(|v| *v > 0)
                    .ok_or_else(|| Error::Parse(format!("{}{field}={value}", prefix)))
            };
            match field {
                "HERMITIAN_TOL" => self.hermitian_tol = float()?,
                "PSD_TOL" => self.psd_tol = float()?,
                "TRACE_TOL" => self.trace_tol = float()?,
                "SUPPORT_THRESHOLD" => self.support_threshold = float()?,
                "EIG_HERMITIAN_TOL" => self.eig_hermitian_tol = float()?,
                "NEGATIVE_EIG_LIMIT" => self.negative_eig_limit = float()?,
                "SUPPORT_VIOLATION_TOL" => self.support_violation_tol = float()?,
                "DIM_CAP" => self.dim_cap = count()?,
                "GRID_POINTS" => self.grid_points = count()?.max(3),
                "GOLDEN_TOL" => self.golden_tol = float()?,
                "HOEFFDING_ALPHA_FLOOR" => self.hoeffding_alpha_floor = float()?,
                "BOUNDARY_GAP_TOL" => self.boundary_gap_tol = float()?,
                "BOUNDARY_SLOPE_GAP" => self.boundary_slope_gap = float()?,
                "BOUNDARY_MAX_VERTICES" => self.boundary_max_vertices = count()?.max(2),
                _ => return Err(Error::Parse(format!("unknown policy override {prefix}{field}"))),
            }
        }
        Ok(self)
    }
}
