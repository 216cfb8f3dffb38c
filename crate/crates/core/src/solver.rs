//! The three closed-form candidates and the threshold `γ*`.
//!
//! For `|g| < min(ρ−, ρ+)` the stationarity conditions decouple:
//! `α = arccos(g/ρ−)`, `β = arccos(g/ρ+)`, and the radii follow from the
//! volumes. The type I candidate is the member of this family whose traces
//! coincide; it is located by bisection on the strictly decreasing
//! trace-mismatch function `L(g) = (R−s−)ᴺ − (R+s+)ᴺ`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{radius_from_volume, Candidate, CandidateKind, ProblemParams};
use crate::special_functions::{cap_integrals, Side};

/// `sinᴺα / I−(α)`, strictly increasing on `(0, π)`.
pub fn l1(alpha: f64, dim: u32) -> Result<f64> {
    let ints = cap_integrals(alpha, dim, Side::Left)?;
    Ok(alpha.sin().powi(dim as i32) / ints.i)
}

/// `sinᴺβ / I+(β)`, strictly decreasing on `(0, π)`.
pub fn l2(beta: f64, dim: u32) -> Result<f64> {
    let ints = cap_integrals(beta, dim, Side::Right)?;
    Ok(beta.sin().powi(dim as i32) / ints.i)
}

fn check_gamma_domain(g: f64, p: &ProblemParams) -> Result<()> {
    let m = p.min_density();
    if !(g.abs() < m) {
        return domain(format!("|gamma| = {} must be below min(rho_minus, rho_plus) = {m}", g.abs()));
    }
    Ok(())
}

/// `L(g) = V−/(ωρ−)·L₁(α(g)) − V+/(ωρ+)·L₂(β(g))`.
pub fn l_value(g: f64, p: &ProblemParams) -> Result<f64> {
    p.validate()?;
    check_gamma_domain(g, p)?;
    let omega = p.omega()?;
    let alpha = (g / p.rho_minus).acos();
    let beta = (g / p.rho_plus).acos();
    Ok(p.v_minus / (omega * p.rho_minus) * l1(alpha, p.dim)? - p.v_plus / (omega * p.rho_plus) * l2(beta, p.dim)?)
}

/// The root of `L` and the type I incidence angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub gamma_star: f64,
    pub alpha_star: f64,
    pub beta_star: f64,
    pub iterations: u32,
    pub residual: f64,
}

const ENDPOINT_MARGIN: f64 = 1e-12;
const BRACKET_WIDTH: f64 = 1e-13;
const MAX_BISECTIONS: u32 = 400;

/// Locates `γ*` with `L(γ*) = 0`.
///
/// The search runs in the orientation `V−/ρ− ≥ V+/ρ+`, where `γ* ≥ 0`, and
/// reflects the answer otherwise, so `γ*(mirror p) = −γ*(p)` holds exactly.
pub fn gamma_star(p: &ProblemParams) -> Result<ThresholdResult> {
    p.validate()?;
    let (g, iterations) = if p.is_canonical() {
        bisect_threshold(p)?
    } else {
        let (g, it) = bisect_threshold(&p.mirrored())?;
        (-g, it)
    };
    Ok(ThresholdResult {
        gamma_star: g,
        alpha_star: (g / p.rho_minus).acos(),
        beta_star: (g / p.rho_plus).acos(),
        iterations,
        residual: l_value(g, p)?.abs(),
    })
}

fn bisect_threshold(p: &ProblemParams) -> Result<(f64, u32)> {
    let m = p.min_density();
    let edge = m * (1.0 - ENDPOINT_MARGIN);
    let l = |g: f64| l_value(g, p);

    // L is +∞-like at −m and negative or −∞ at +m. Start in the middle and
    // move each end geometrically toward its limit until the sign appears.
    let mut lo = -0.5 * m;
    let mut f_lo = l(lo)?;
    while f_lo <= 0.0 {
        if lo <= -edge {
            return Err(Error::RootNotBracketed { lo, hi: 0.5 * m });
        }
        lo = (-m + 0.5 * (lo + m)).max(-edge);
        f_lo = l(lo)?;
    }
    let mut hi = 0.5 * m;
    let mut f_hi = l(hi)?;
    while f_hi >= 0.0 {
        if hi >= edge {
            return Err(Error::RootNotBracketed { lo, hi });
        }
        hi = (m - 0.5 * (m - hi)).min(edge);
        f_hi = l(hi)?;
    }

    let mut iterations = 0;
    while hi - lo > BRACKET_WIDTH * m && iterations < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = l(mid)?;
        iterations += 1;
        if f_mid == 0.0 {
            return Ok((mid, iterations));
        }
        if f_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), iterations))
}

/// `Ω_g`: the decoupled candidate with `ρ− cos α = g = ρ+ cos β`.
///
/// Pass `+γ` for `Ω_γ` and `−γ` for `Ω_{−γ}`. The tag is re-set to type I
/// when the traces happen to coincide.
pub fn candidate_type_ii(signed_gamma: f64, p: &ProblemParams) -> Result<Candidate> {
    p.validate()?;
    check_gamma_domain(signed_gamma, p)?;
    let alpha = (signed_gamma / p.rho_minus).acos();
    let beta = (signed_gamma / p.rho_plus).acos();
    let kind = if signed_gamma >= 0.0 {
        CandidateKind::TypeIIPlus
    } else {
        CandidateKind::TypeIIMinus
    };
    from_angles(alpha, beta, kind, p)
}

fn from_angles(alpha: f64, beta: f64, kind: CandidateKind, p: &ProblemParams) -> Result<Candidate> {
    let r_minus = radius_from_volume(alpha, Side::Left, p)?;
    let r_plus = radius_from_volume(beta, Side::Right, p)?;
    Candidate::new(alpha, beta, r_minus, r_plus, kind)
}

/// `Ω*`, the unique type I candidate.
pub fn candidate_type_i(p: &ProblemParams) -> Result<Candidate> {
    let t = gamma_star(p)?;
    type_i_from_threshold(&t, p)
}

pub(crate) fn type_i_from_threshold(t: &ThresholdResult, p: &ProblemParams) -> Result<Candidate> {
    from_angles(t.alpha_star, t.beta_star, CandidateKind::TypeI, p)
}
