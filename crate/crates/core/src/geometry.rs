//! Two spherical caps glued along the hyperplane `Σ = {x₁ = 0}`.
//!
//! A configuration is described by the incidence angles `α` (left cap) and
//! `β` (right cap) and the two radii. The left cap is the part of the ball of
//! radius `R−` centred at `(−R−·cos α, 0, …)` lying in `x₁ < 0`; the right
//! cap is the part of the ball of radius `R+` centred at `(−R+·cos β, 0, …)`
//! lying in `x₁ > 0`. These centre positions are inferred from the Cavalieri
//! parametrisation of the cap measures (the slice at height `x = R cos θ`
//! reaches `Σ` at `θ = α` or `θ = β`); they are checked against slab
//! quadrature in the tests rather than taken from a stated formula.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special_functions::{cap_integrals, unit_ball_volume, Side};

/// Relative tolerance for deciding that the two traces on `Σ` coincide.
pub const TOL_GEOM_REL: f64 = 1e-9;

/// One instance of the constrained problem.
///
/// Volumes are *weighted* volumes: the constraint is `ρ±·|Ω±| = V±`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    #[serde(rename = "N")]
    pub dim: u32,
    pub rho_minus: f64,
    pub rho_plus: f64,
    #[serde(rename = "V_minus")]
    pub v_minus: f64,
    #[serde(rename = "V_plus")]
    pub v_plus: f64,
    pub gamma: f64,
}

impl ProblemParams {
    pub fn new(dim: u32, rho_minus: f64, rho_plus: f64, v_minus: f64, v_plus: f64, gamma: f64) -> Result<Self> {
        let p = ProblemParams { dim, rho_minus, rho_plus, v_minus, v_plus, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return domain(format!("dimension N = {} must be at least 2", self.dim));
        }
        for (name, v) in [
            ("rho_minus", self.rho_minus),
            ("rho_plus", self.rho_plus),
            ("V_minus", self.v_minus),
            ("V_plus", self.v_plus),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} = {v} must be positive and finite"));
            }
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return domain(format!("gamma = {} must be nonnegative and finite", self.gamma));
        }
        Ok(())
    }

    /// `ω`, the volume of the unit ball of `ℝᴺ⁻¹`.
    pub fn omega(&self) -> Result<f64> {
        unit_ball_volume(self.dim - 1)
    }

    pub fn min_density(&self) -> f64 {
        self.rho_minus.min(self.rho_plus)
    }

    pub fn density(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.rho_minus,
            Side::Right => self.rho_plus,
        }
    }

    pub fn volume(&self, side: Side) -> f64 {
        match side {
            Side::Left => self.v_minus,
            Side::Right => self.v_plus,
        }
    }

    /// Lebesgue volume `V±/ρ±` of one side.
    pub fn lebesgue_volume(&self, side: Side) -> f64 {
        self.volume(side) / self.density(side)
    }

    /// `true` when `V−/ρ− ≥ V+/ρ+`, the orientation in which the threshold is
    /// nonnegative.
    pub fn is_canonical(&self) -> bool {
        self.lebesgue_volume(Side::Left) >= self.lebesgue_volume(Side::Right)
    }

    /// Reflect through `Σ`: the two phases trade places.
    pub fn mirrored(&self) -> Self {
        ProblemParams {
            dim: self.dim,
            rho_minus: self.rho_plus,
            rho_plus: self.rho_minus,
            v_minus: self.v_plus,
            v_plus: self.v_minus,
            gamma: self.gamma,
        }
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        ProblemParams { gamma, ..*self }
    }
}

/// Which transmission condition a candidate satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CandidateKind {
    /// Traces coincide, `ρ− cos α = ρ+ cos β`.
    #[serde(rename = "TypeI")]
    TypeI,
    /// `ρ− cos α = γ = ρ+ cos β`, left trace larger.
    #[serde(rename = "TypeII_plus")]
    TypeIIPlus,
    /// `ρ− cos α = −γ = ρ+ cos β`, right trace larger.
    #[serde(rename = "TypeII_minus")]
    TypeIIMinus,
}

impl CandidateKind {
    pub fn is_type_i(self) -> bool {
        self == CandidateKind::TypeI
    }

    /// The same candidate seen through the mirror `x₁ → −x₁`.
    pub fn mirrored(self) -> Self {
        match self {
            CandidateKind::TypeI => CandidateKind::TypeI,
            CandidateKind::TypeIIPlus => CandidateKind::TypeIIMinus,
            CandidateKind::TypeIIMinus => CandidateKind::TypeIIPlus,
        }
    }
}

/// Absolute trace tolerance for a pair of radii.
pub fn tol_geom(r_minus: f64, r_plus: f64) -> f64 {
    TOL_GEOM_REL * r_minus.max(r_plus)
}

/// A two-cap configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub alpha: f64,
    pub beta: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    pub kind: CandidateKind,
}

impl Candidate {
    /// Builds a candidate, re-tagging it as type I when its traces coincide
    /// within [`tol_geom`]. Asking for a type I tag with mismatched traces is
    /// an error.
    pub fn new(alpha: f64, beta: f64, r_minus: f64, r_plus: f64, kind: CandidateKind) -> Result<Self> {
        for (name, a) in [("alpha", alpha), ("beta", beta)] {
            if !(a > 0.0 && a < PI) {
                return domain(format!("{name} = {a} must lie strictly inside (0, π)"));
            }
        }
        for (name, r) in [("R_minus", r_minus), ("R_plus", r_plus)] {
            if !(r.is_finite() && r > 0.0) {
                return domain(format!("{name} = {r} must be positive and finite"));
            }
        }
        let mut c = Candidate { alpha, beta, r_minus, r_plus, kind };
        if c.traces_coincide() {
            c.kind = CandidateKind::TypeI;
        } else if kind.is_type_i() {
            return domain(format!(
                "type I candidate with trace radii {} and {} differing beyond tolerance",
                c.trace_minus(),
                c.trace_plus()
            ));
        }
        Ok(c)
    }

    /// The candidate with radii forced by the volume constraints; tagged by the
    /// sign of the trace mismatch.
    pub fn on_constraint(alpha: f64, beta: f64, p: &ProblemParams) -> Result<Self> {
        let r_minus = radius_from_volume(alpha, Side::Left, p)?;
        let r_plus = radius_from_volume(beta, Side::Right, p)?;
        let kind = if r_minus * alpha.sin() >= r_plus * beta.sin() {
            CandidateKind::TypeIIPlus
        } else {
            CandidateKind::TypeIIMinus
        };
        Candidate::new(alpha, beta, r_minus, r_plus, kind)
    }

    /// First coordinate of the left ball's centre.
    pub fn left_center(&self) -> f64 {
        -self.r_minus * self.alpha.cos()
    }

    /// First coordinate of the right ball's centre.
    pub fn right_center(&self) -> f64 {
        -self.r_plus * self.beta.cos()
    }

    /// Radius of the left cap's trace on `Σ`.
    pub fn trace_minus(&self) -> f64 {
        self.r_minus * self.alpha.sin()
    }

    pub fn trace_plus(&self) -> f64 {
        self.r_plus * self.beta.sin()
    }

    pub fn trace_gap(&self) -> f64 {
        self.trace_minus() - self.trace_plus()
    }

    pub fn traces_coincide(&self) -> bool {
        self.trace_gap().abs() <= tol_geom(self.r_minus, self.r_plus)
    }

    /// Reflection through `Σ`; pairs with [`ProblemParams::mirrored`].
    pub fn mirrored(&self) -> Self {
        Candidate {
            alpha: PI - self.beta,
            beta: PI - self.alpha,
            r_minus: self.r_plus,
            r_plus: self.r_minus,
            kind: self.kind.mirrored(),
        }
    }
}

/// The three weighted terms of the cost and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub perim_minus: f64,
    pub perim_plus: f64,
    pub interface: f64,
    pub total: f64,
}

/// `|Ω±| = ω·Rᴺ·I±`.
pub fn cap_volume(r: f64, angle: f64, side: Side, dim: u32) -> Result<f64> {
    let ints = cap_integrals(angle, dim, side)?;
    Ok(unit_ball_volume(dim - 1)? * r.powi(dim as i32) * ints.i)
}

/// `𝓗ᴺ⁻¹(Γ±) = (N−1)·ω·Rᴺ⁻¹·J±`.
pub fn cap_perimeter(r: f64, angle: f64, side: Side, dim: u32) -> Result<f64> {
    let ints = cap_integrals(angle, dim, side)?;
    Ok(f64::from(dim - 1) * unit_ball_volume(dim - 1)? * r.powi(dim as i32 - 1) * ints.j)
}

/// Measure of the annulus on `Σ` between the two traces.
pub fn interface_area(r_minus: f64, alpha: f64, r_plus: f64, beta: f64, dim: u32) -> Result<f64> {
    if dim < 2 {
        return domain(format!("dimension N = {dim} must be at least 2"));
    }
    let e = dim as i32 - 1;
    let outer = (r_minus * alpha.sin()).powi(e);
    let inner = (r_plus * beta.sin()).powi(e);
    Ok(unit_ball_volume(dim - 1)? * (outer - inner).abs())
}

/// The weighted perimeter of a candidate.
///
/// A type I candidate has no interface by definition, so its interface term
/// is exactly zero rather than the rounding residue of the trace formula.
pub fn total_cost(c: &Candidate, p: &ProblemParams) -> Result<CostBreakdown> {
    let perim_minus = p.rho_minus * cap_perimeter(c.r_minus, c.alpha, Side::Left, p.dim)?;
    let perim_plus = p.rho_plus * cap_perimeter(c.r_plus, c.beta, Side::Right, p.dim)?;
    let interface = if c.kind.is_type_i() {
        0.0
    } else {
        p.gamma * interface_area(c.r_minus, c.alpha, c.r_plus, c.beta, p.dim)?
    };
    Ok(CostBreakdown { perim_minus, perim_plus, interface, total: perim_minus + perim_plus + interface })
}

/// Cost of the configuration `(α, β)` with radii forced by the volumes.
pub fn reduced_cost(alpha: f64, beta: f64, p: &ProblemParams) -> Result<CostBreakdown> {
    total_cost(&Candidate::on_constraint(alpha, beta, p)?, p)
}

const ROUND_TRIP_TOL: f64 = 1e-12;

/// The radius for which `ρ±·|cap| = V±`.
pub fn radius_from_volume(angle: f64, side: Side, p: &ProblemParams) -> Result<f64> {
    let ints = cap_integrals(angle, p.dim, side)?;
    let omega = p.omega()?;
    let n = f64::from(p.dim);
    let (rho, v) = (p.density(side), p.volume(side));
    let r = (v / (rho * omega * ints.i)).powf(1.0 / n);
    let back = rho * omega * r.powi(p.dim as i32) * ints.i;
    if ((back - v) / v).abs() > ROUND_TRIP_TOL {
        return Err(Error::RoundTrip(format!("radius {r} gives weighted volume {back}, expected {v}")));
    }
    Ok(r)
}

/// Derivative of [`radius_from_volume`] with respect to the cap angle:
/// `sᴺR/(N·I)` on the left and `−sᴺR/(N·I)` on the right.
pub fn radius_derivative(angle: f64, side: Side, p: &ProblemParams) -> Result<f64> {
    let r = radius_from_volume(angle, side, p)?;
    let ints = cap_integrals(angle, p.dim, side)?;
    let d = angle.sin().powi(p.dim as i32) * r / (f64::from(p.dim) * ints.i);
    Ok(match side {
        Side::Left => d,
        Side::Right => -d,
    })
}

/// Which side of the absolute value in the interface term is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignBranch {
    /// Left trace larger.
    Plus,
    /// Right trace larger.
    Minus,
}

impl SignBranch {
    pub fn sign(self) -> f64 {
        match self {
            SignBranch::Plus => 1.0,
            SignBranch::Minus => -1.0,
        }
    }
}

const CONSTRAINT_TOL: f64 = 1e-10;

/// `∂𝓕/∂α` along the volume-constrained family, on the given branch of the
/// interface term:
///
/// ```text
/// (N−1)ωR−ᴺ⁻¹s−ᴺ⁻² ((N−1)J−c− + s−ᴺ⁻¹) / (N·I−) · (±γ − ρ−c−)
/// ```
///
/// The candidate's radii must be the constrained ones.
pub fn df_dalpha(c: &Candidate, p: &ProblemParams, branch: SignBranch) -> Result<f64> {
    for (side, r, angle) in [(Side::Left, c.r_minus, c.alpha), (Side::Right, c.r_plus, c.beta)] {
        let v = p.density(side) * cap_volume(r, angle, side, p.dim)?;
        let target = p.volume(side);
        if ((v - target) / target).abs() > CONSTRAINT_TOL {
            return Err(Error::RoundTrip(format!(
                "{} radius {r} is off the volume constraint ({v} vs {target})",
                side.as_str()
            )));
        }
    }
    let ints = cap_integrals(c.alpha, p.dim, Side::Left)?;
    let n = f64::from(p.dim);
    let (s, co) = c.alpha.sin_cos();
    let prefactor = (n - 1.0) * p.omega()? * c.r_minus.powi(p.dim as i32 - 1) * s.powi(p.dim as i32 - 2)
        * ((n - 1.0) * ints.j * co + s.powi(p.dim as i32 - 1))
        / (n * ints.i);
    Ok(prefactor * (branch.sign() * p.gamma - p.rho_minus * co))
}

/// A vertex of a cross-section polyline with its polar angle about the
/// cap's centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub theta: f64,
    pub x1: f64,
    pub x2: f64,
}

/// The part of `Σ` charged at cost `γ`: heights `inner ≤ |x₂| ≤ outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterfaceSegment {
    pub inner: f64,
    pub outer: f64,
}

impl InterfaceSegment {
    pub fn is_empty(&self) -> bool {
        self.outer <= self.inner
    }
}

/// Planar section of a candidate through its axis of symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub left: Vec<ProfilePoint>,
    pub right: Vec<ProfilePoint>,
    pub interface: InterfaceSegment,
}

/// Samples both cap arcs with `resolution` segments each.
///
/// The left arc runs over `θ ∈ [α, 2π−α]` on its circle, the right arc over
/// `θ ∈ [−β, β]`; both start and end on `x₁ = 0` at heights `±R·sin`.
pub fn cross_section(c: &Candidate, resolution: usize) -> Result<CrossSection> {
    if resolution < 8 {
        return domain(format!("resolution {resolution} must be at least 8"));
    }
    let arc = |center: f64, r: f64, t0: f64, t1: f64| -> Vec<ProfilePoint> {
        let mut pts: Vec<ProfilePoint> = (0..=resolution)
            .map(|k| {
                let theta = t0 + (t1 - t0) * k as f64 / resolution as f64;
                ProfilePoint { theta, x1: center + r * theta.cos(), x2: r * theta.sin() }
            })
            .collect();
        // Pin the trace endpoints exactly onto Σ.
        let h = r * t0.abs().sin();
        pts[0] = ProfilePoint { theta: t0, x1: 0.0, x2: if t0 < 0.0 { -h } else { h } };
        pts[resolution] = ProfilePoint { theta: t1, x1: 0.0, x2: if t0 < 0.0 { h } else { -h } };
        pts
    };
    let left = arc(c.left_center(), c.r_minus, c.alpha, 2.0 * PI - c.alpha);
    let right = arc(c.right_center(), c.r_plus, -c.beta, c.beta);
    let (tm, tp) = (c.trace_minus(), c.trace_plus());
    let interface = if c.kind.is_type_i() {
        let t = 0.5 * (tm + tp);
        InterfaceSegment { inner: t, outer: t }
    } else {
        InterfaceSegment { inner: tm.min(tp), outer: tm.max(tp) }
    };
    Ok(CrossSection { left, right, interface })
}
