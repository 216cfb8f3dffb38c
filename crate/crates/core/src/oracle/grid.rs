//! Brute-force minimization of the reduced two-angle cost.
//!
//! The cost of the configuration `(α, β)` with radii forced by the volume
//! constraints is evaluated from quadrature tables, sampled on a coarse
//! grid over `(0, π)²` and then refined around the best cell.
//!
//! The refinement is a nested golden-section search: the inner search
//! minimizes over `α` for fixed `β`, the outer one minimizes that profile
//! over `β`. Plain coordinate-wise searches stall on the kink of the
//! interface term along the trace-equality curve, which is exactly where the
//! type I minimizers sit.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::geometry::ProblemParams;
use crate::oracle::quadrature::{reference_unit_ball_volume, SinePowerTable};
use crate::special_functions::Side;

const TABLE_PANELS: usize = 512;
/// Half-width of the refinement window, in coarse cells.
const WINDOW_CELLS: f64 = 3.0;
const ANGLE_FLOOR: f64 = 1e-9;

/// Quantities of one cap entering the reduced cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideTerms {
    pub radius: f64,
    /// `ρ·𝓗ᴺ⁻¹(Γ)`.
    pub weighted_perimeter: f64,
    /// `ω·(R·sin)ᴺ⁻¹`, the measure of the trace disk.
    pub trace_measure: f64,
    /// `R·sin`, the trace radius.
    pub trace_radius: f64,
}

/// Reduced cost `𝓕(α, β)` for fixed densities and volumes, any `γ`.
#[derive(Debug, Clone)]
pub struct ReducedFunctional {
    params: ProblemParams,
    omega: f64,
    volume_table: SinePowerTable,
    perimeter_table: SinePowerTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMinimum {
    pub alpha: f64,
    pub beta: f64,
    pub cost: f64,
    /// Smallest cost among the coarse samples.
    pub grid_sample_min: f64,
    pub cell_width: f64,
    pub r_minus: f64,
    pub r_plus: f64,
    /// `R−·sin α − R+·sin β` at the returned point.
    pub trace_gap: f64,
}

impl GridMinimum {
    pub fn relative_trace_gap(&self) -> f64 {
        self.trace_gap / self.r_minus.max(self.r_plus)
    }
}

impl ReducedFunctional {
    pub fn new(p: &ProblemParams) -> Result<Self> {
        p.validate()?;
        Ok(ReducedFunctional {
            params: *p,
            omega: reference_unit_ball_volume(p.dim - 1)?,
            volume_table: SinePowerTable::new(p.dim, TABLE_PANELS)?,
            perimeter_table: SinePowerTable::new(p.dim - 2, TABLE_PANELS)?,
        })
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn side_terms(&self, angle: f64, side: Side) -> Result<SideTerms> {
        if !(angle > 0.0 && angle < PI) {
            return domain(format!("angle {angle} must lie strictly inside (0, π)"));
        }
        let (i, j) = match side {
            Side::Left => (self.volume_table.to_pi(angle)?, self.perimeter_table.to_pi(angle)?),
            Side::Right => (self.volume_table.from_zero(angle)?, self.perimeter_table.from_zero(angle)?),
        };
        let p = &self.params;
        let n = f64::from(p.dim);
        let rho = p.density(side);
        let radius = (p.volume(side) / (rho * self.omega * i)).powf(1.0 / n);
        let trace_radius = radius * angle.sin();
        Ok(SideTerms {
            radius,
            weighted_perimeter: rho * (n - 1.0) * self.omega * radius.powi(p.dim as i32 - 1) * j,
            trace_measure: self.omega * trace_radius.powi(p.dim as i32 - 1),
            trace_radius,
        })
    }

    fn combine(left: &SideTerms, right: &SideTerms, gamma: f64) -> f64 {
        left.weighted_perimeter + right.weighted_perimeter + gamma * (left.trace_measure - right.trace_measure).abs()
    }

    pub fn cost(&self, alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
        Ok(Self::combine(&self.side_terms(alpha, Side::Left)?, &self.side_terms(beta, Side::Right)?, gamma))
    }

    /// Coarse scan followed by nested golden-section refinement.
    ///
    /// Ties on the coarse grid go to the smallest `α`, then the smallest `β`.
    pub fn minimize(&self, gamma: f64, coarse: usize, refine_iters: usize) -> Result<GridMinimum> {
        if coarse < 64 {
            return domain(format!("coarse grid size {coarse} must be at least 64"));
        }
        if refine_iters < 20 {
            return domain(format!("refine_iters {refine_iters} must be at least 20"));
        }
        let h = PI / coarse as f64;
        let nodes: Vec<f64> = (0..coarse).map(|k| (k as f64 + 0.5) * h).collect();
        let left: Vec<SideTerms> = nodes.iter().map(|&a| self.side_terms(a, Side::Left)).collect::<Result<_>>()?;
        let right: Vec<SideTerms> = nodes.iter().map(|&b| self.side_terms(b, Side::Right)).collect::<Result<_>>()?;

        let (mut bi, mut bj, mut best) = (0, 0, f64::INFINITY);
        for (i, l) in left.iter().enumerate() {
            for (j, r) in right.iter().enumerate() {
                let c = Self::combine(l, r, gamma);
                if c < best {
                    (bi, bj, best) = (i, j, c);
                }
            }
        }
        let grid_sample_min = best;

        let window = |center: f64| {
            (
                (center - WINDOW_CELLS * h).max(ANGLE_FLOOR),
                (center + WINDOW_CELLS * h).min(PI - ANGLE_FLOOR),
            )
        };
        let (a_lo, a_hi) = window(nodes[bi]);
        let (b_lo, b_hi) = window(nodes[bj]);

        let inner = |r: &SideTerms| -> Result<(f64, f64)> {
            golden_section(
                |a| Ok(Self::combine(&self.side_terms(a, Side::Left)?, r, gamma)),
                a_lo,
                a_hi,
                refine_iters,
            )
        };
        let (beta, _) = golden_section(
            |b| Ok(inner(&self.side_terms(b, Side::Right)?)?.1),
            b_lo,
            b_hi,
            refine_iters,
        )?;
        let r = self.side_terms(beta, Side::Right)?;
        let (alpha, cost) = inner(&r)?;

        let (alpha, beta, cost) =
            if cost <= best { (alpha, beta, cost) } else { (nodes[bi], nodes[bj], best) };
        let l = self.side_terms(alpha, Side::Left)?;
        let r = self.side_terms(beta, Side::Right)?;
        Ok(GridMinimum {
            alpha,
            beta,
            cost,
            grid_sample_min,
            cell_width: h,
            r_minus: l.radius,
            r_plus: r.radius,
            trace_gap: l.trace_radius - r.trace_radius,
        })
    }
}

/// Golden-section search for a minimum on `[a, b]`; returns the best point
/// seen and its value.
pub fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// One-shot [`ReducedFunctional::minimize`] at the params' own `γ`.
pub fn grid_minimize(p: &ProblemParams, coarse: usize, refine_iters: usize) -> Result<GridMinimum> {
    ReducedFunctional::new(p)?.minimize(p.gamma, coarse, refine_iters)
}

/// Interface cost at which the brute-force minimizer switches from separated
/// traces to coincident ones, found by bisection on `γ ∈ [0, min ρ]`.
///
/// A minimizer counts as type II when its relative trace gap exceeds
/// `gap_tol`.
pub fn locate_transition(
    f: &ReducedFunctional,
    coarse: usize,
    refine_iters: usize,
    gap_tol: f64,
    width: f64,
) -> Result<f64> {
    let is_type_ii = |g: f64| -> Result<bool> {
        Ok(f.minimize(g, coarse, refine_iters)?.relative_trace_gap().abs() > gap_tol)
    };
    let mut lo = 0.0;
    let mut hi = f.params().min_density();
    if !is_type_ii(lo)? {
        return Ok(0.0);
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if is_type_ii(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Threshold from an independent route: bisection on the quadrature-based
/// trace mismatch `(R−s−)ᴺ − (R+s+)ᴺ` along `ρ− cos α = g = ρ+ cos β`.
pub fn reference_gamma_star(f: &ReducedFunctional, tol: f64) -> Result<f64> {
    let p = *f.params();
    let mismatch = |g: f64| -> Result<f64> {
        let l = f.side_terms((g / p.rho_minus).acos(), Side::Left)?;
        let r = f.side_terms((g / p.rho_plus).acos(), Side::Right)?;
        Ok(l.trace_radius.powi(p.dim as i32) - r.trace_radius.powi(p.dim as i32))
    };
    let m = p.min_density();
    let (mut lo, mut hi) = (-m * (1.0 - 1e-9), m * (1.0 - 1e-9));
    if mismatch(lo)? <= 0.0 || mismatch(hi)? >= 0.0 {
        return domain("reference mismatch has no sign change");
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mismatch(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
