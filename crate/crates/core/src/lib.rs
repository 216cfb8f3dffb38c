//! Minimizers of the two-phase weighted isoperimetric problem.
//!
//! Given densities `ρ±` on the half-spaces `x₁ ≶ 0`, weighted volumes `V±`
//! and an interface cost `γ ≥ 0` on the hyperplane `Σ = {x₁ = 0}`, the
//! crate computes the minimizer of
//!
//! ```text
//! ρ−·P(Ω, ℝᴺ₋) + ρ+·P(Ω, ℝᴺ₊) + γ·𝓗ᴺ⁻¹(∂Ω ∩ Σ)   subject to ρ±|Ω±| = V±
//! ```
//!
//! classifies it (type I: traces on `Σ` coincide; type II: an annular
//! interface remains) and cross-checks the closed forms against independent
//! numerics in [`oracle`].

pub mod classifier;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod oracle;
pub mod solver;
pub mod special_functions;

pub use classifier::{classify, ClassificationRecord, ClassificationResult, Regime};
pub use error::{Error, Result};
pub use geometry::{
    cap_perimeter, cap_volume, cross_section, df_dalpha, interface_area, radius_from_volume, reduced_cost,
    total_cost, Candidate, CandidateKind, CostBreakdown, CrossSection, ProblemParams, SignBranch,
};
pub use solver::{candidate_type_i, candidate_type_ii, gamma_star, l_value, ThresholdResult};
pub use special_functions::{cap_integrals, sine_power_integral, unit_ball_volume, Side};
