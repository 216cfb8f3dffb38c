//! Independent numerical checks of the closed forms.
//!
//! Everything here is built on [`quadrature`] and never on the recurrence in
//! [`crate::special_functions`]: sine-power integrals come from adaptive
//! Simpson, the reduced cost is minimized by brute force in [`grid`], and
//! the cap structure itself is probed in the plane by [`polygon`].

pub mod grid;
pub mod polygon;
pub mod quadrature;

use rand::Rng;
use serde::Serialize;

use crate::classifier::classify;
use crate::error::Result;
use crate::geometry::ProblemParams;

pub use grid::{grid_minimize, locate_transition, reference_gamma_star, GridMinimum, ReducedFunctional};
pub use polygon::{fit_circle, polygon_flow_2d, FlowConfig, FlowResult, PolygonFrame, PolygonState};
pub use quadrature::{
    adaptive_simpson, generatrix_area, reference_sine_integral, reference_unit_ball_volume, slab_volume,
};

/// Relative cost tolerance of [`compare`].
pub const TOL_ORACLE: f64 = 1e-5;
pub const COMPARE_COARSE: usize = 256;
pub const COMPARE_REFINE: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    pub params: ProblemParams,
    pub analytic_cost: f64,
    pub brute_cost: f64,
    /// `max(|α̂ − α|, |β̂ − β|)`.
    pub arg_gap: f64,
    /// `|analytic − brute| / analytic`.
    pub cost_gap: f64,
    pub passed: bool,
}

/// Classifies `p` and checks the result against [`grid_minimize`].
pub fn compare(p: &ProblemParams) -> Result<OracleReport> {
    let analytic = classify(p)?;
    let brute = grid_minimize(p, COMPARE_COARSE, COMPARE_REFINE)?;
    let analytic_cost = analytic.cost.total;
    let arg_gap = (brute.alpha - analytic.minimizer.alpha)
        .abs()
        .max((brute.beta - analytic.minimizer.beta).abs());
    let cost_gap = (analytic_cost - brute.cost).abs() / analytic_cost;
    let passed = cost_gap <= TOL_ORACLE && brute.cost >= analytic_cost * (1.0 - TOL_ORACLE);
    Ok(OracleReport { params: *p, analytic_cost, brute_cost: brute.cost, arg_gap, cost_gap, passed })
}

/// Dimensions sampled by [`draw_params`].
pub const DRAW_DIMS: [u32; 4] = [2, 3, 4, 7];

/// A random instance: `N` from [`DRAW_DIMS`], densities and volumes
/// log-uniform on `[0.1, 10]`, `γ` uniform on `[0, 1.5·min ρ]`.
pub fn draw_params<R: Rng>(rng: &mut R) -> ProblemParams {
    let dim = DRAW_DIMS[rng.gen_range(0..DRAW_DIMS.len())];
    let mut log_uniform = || 10f64.powf(rng.gen_range(-1.0..=1.0));
    let (rho_minus, rho_plus, v_minus, v_plus) = (log_uniform(), log_uniform(), log_uniform(), log_uniform());
    let gamma = rng.gen_range(0.0..=1.5) * rho_minus.min(rho_plus);
    ProblemParams { dim, rho_minus, rho_plus, v_minus, v_plus, gamma }
}
