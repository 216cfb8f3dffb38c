//! Global minimizer selection.
//!
//! In the orientation `V−/ρ− ≥ V+/ρ+` the minimizer is `Ω_γ` (type II) for
//! `γ < γ*` and `Ω*` (type I) for `γ ≥ γ*`; the two coincide at `γ = γ*`.
//! The reversed orientation is handled by reflecting through `Σ`, solving,
//! and reflecting the minimizer back, so it comes out satisfying the `−γ`
//! transmission law. Minimizers are unique up to translations along `Σ`;
//! the reported representative has both ball centres on the `x₁` axis.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{total_cost, Candidate, CostBreakdown, ProblemParams};
use crate::solver::{candidate_type_ii, gamma_star, type_i_from_threshold, ThresholdResult};

/// Relative width of the band around `γ*` reported as [`Regime::AtThreshold`].
pub const AT_THRESHOLD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    BelowThreshold,
    AtThreshold,
    AboveThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassificationResult {
    pub params: ProblemParams,
    /// Threshold in the caller's orientation (negative when `V−/ρ− < V+/ρ+`).
    pub threshold: ThresholdResult,
    pub minimizer: Candidate,
    pub cost: CostBreakdown,
    pub regime: Regime,
    pub orientation_swapped: bool,
}

impl ClassificationResult {
    /// `|γ*|`, the interface cost at which the minimizer changes type.
    pub fn transition_gamma(&self) -> f64 {
        if self.orientation_swapped {
            -self.threshold.gamma_star
        } else {
            self.threshold.gamma_star
        }
    }

    pub fn to_record(&self) -> ClassificationRecord {
        ClassificationRecord {
            params: self.params,
            gamma_star: self.threshold.gamma_star,
            regime: self.regime,
            alpha: self.minimizer.alpha,
            beta: self.minimizer.beta,
            r_minus: self.minimizer.r_minus,
            r_plus: self.minimizer.r_plus,
            cost: self.cost,
            orientation_swapped: self.orientation_swapped,
        }
    }
}

/// Flat serialized form of a [`ClassificationResult`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRecord {
    pub params: ProblemParams,
    pub gamma_star: f64,
    pub regime: Regime,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "R_minus")]
    pub r_minus: f64,
    #[serde(rename = "R_plus")]
    pub r_plus: f64,
    pub cost: CostBreakdown,
    pub orientation_swapped: bool,
}

pub fn classify(p: &ProblemParams) -> Result<ClassificationResult> {
    p.validate()?;
    let swapped = !p.is_canonical();
    let canon = if swapped { p.mirrored() } else { *p };

    let t = gamma_star(&canon)?;
    let g_star = t.gamma_star;
    let gamma = canon.gamma;
    let regime = if (gamma - g_star).abs() <= AT_THRESHOLD_TOL * g_star.max(1.0) {
        Regime::AtThreshold
    } else if gamma < g_star {
        Regime::BelowThreshold
    } else {
        Regime::AboveThreshold
    };

    // γ < γ* < min ρ keeps Ω_γ constructible in the type II regime; Ω_{−γ}
    // never wins in this orientation.
    let canon_min = match regime {
        Regime::BelowThreshold => candidate_type_ii(gamma, &canon)?,
        Regime::AtThreshold | Regime::AboveThreshold => type_i_from_threshold(&t, &canon)?,
    };

    let (minimizer, threshold) = if swapped {
        (canon_min.mirrored(), gamma_star(p)?)
    } else {
        (canon_min, t)
    };
    let cost = total_cost(&minimizer, p)?;
    Ok(ClassificationResult { params: *p, threshold, minimizer, cost, regime, orientation_swapped: swapped })
}
