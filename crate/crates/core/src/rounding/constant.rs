use std::sync::OnceLock;

use serde::Serialize;

use super::RoundingError;

/// Lower end of the search interval for `c`.
pub const C_LOWER: f64 = 0.027;
/// `c` is the largest feasible value strictly below this bound.
pub const C_UPPER: f64 = 0.03;

/// The rounding constant `c` together with the derived quantities the
/// algorithm reads on every arrival.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantC {
    pub c: f64,
    pub half_plus_c: f64,
    pub half_minus_c: f64,
    /// Fractional degree at or below which an arriving vertex takes the
    /// single-pick branch: `(1/2 - c) / (1/2 + c)`.
    pub low_degree_threshold: f64,
}

impl ConstantC {
    pub fn from_c(c: f64) -> Self {
        let half_plus_c = 0.5 + c;
        let half_minus_c = 0.5 - c;
        Self {
            c,
            half_plus_c,
            half_minus_c,
            low_degree_threshold: half_minus_c / half_plus_c,
        }
    }

    /// The constant solved to full double precision, computed once.
    pub fn standard() -> ConstantC {
        static CELL: OnceLock<ConstantC> = OnceLock::new();
        *CELL.get_or_init(|| solve_c(1e-15).expect("feasibility at c = 0.027 is a fixed fact"))
    }

    /// Competitive ratio of the matching-driven coloring, `1 / (1/2 + c)`.
    pub fn alpha(&self) -> f64 {
        1.0 / self.half_plus_c
    }
}

/// Left side of the defining inequality
/// `(1/2 - c)(1 - 4c)(1/2 - c - 6c/(1/2 - c)) - 2c >= 0`.
pub fn defining_residual(c: f64) -> f64 {
    let h = 0.5 - c;
    h * (1.0 - 4.0 * c) * (h - 6.0 * c / h) - 2.0 * c
}

/// `min{1/2 - c, 1 - 4c, 1 - 6c/(1/2 - c)^2}`, which must be non-negative.
pub fn side_condition(c: f64) -> f64 {
    let h = 0.5 - c;
    h.min(1.0 - 4.0 * c).min(1.0 - 6.0 * c / (h * h))
}

/// Largest `c` in `[0.027, 0.03)` with a non-negative defining residual,
/// located by bisection to within `tolerance`.
pub fn solve_c(tolerance: f64) -> Result<ConstantC, RoundingError> {
    if !(tolerance > 0.0) {
        return Err(RoundingError::BadTolerance(tolerance));
    }
    let at_lower = defining_residual(C_LOWER);
    if at_lower < 0.0 {
        return Err(RoundingError::ConstantInfeasible { residual: at_lower });
    }
    let (mut lo, mut hi) = (C_LOWER, C_UPPER);
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if defining_residual(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let side = side_condition(lo);
    if side < 0.0 {
        return Err(RoundingError::SideConditionViolated {
            c: lo,
            margin: side,
        });
    }
    Ok(ConstantC::from_c(lo))
}
