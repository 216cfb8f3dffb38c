//! Adaptive Simpson quadrature and the integrals the oracle builds on it.
//!
//! Nothing here calls into [`crate::special_functions`].

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::geometry::Candidate;
use crate::special_functions::Side;

/// Recursion tolerance used by [`reference_sine_integral`].
pub const REFERENCE_TOL: f64 = 1e-13;
const MAX_DEPTH: u32 = 50;

/// Adaptive Simpson with Richardson correction.
///
/// The error target is `max(abs_tol, rel_tol·|coarse estimate|)`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = abs_tol.max(rel_tol * whole.abs());
    step(&f, a, b, fa, fm, fb, whole, tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // The second test stops refinement once the estimate is at rounding level.
    if delta.abs() <= 15.0 * tol || delta.abs() <= 1e-15 * (left + right).abs() {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH || lm <= a || rm >= b {
        return Err(Error::DepthExceeded { a, b, depth });
    }
    Ok(step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}

/// `∫_a^b sinⁿθ dθ` by adaptive Simpson, independent of the recurrence.
pub fn reference_sine_integral(n: u32, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&a) || !(0.0..=PI).contains(&b) || a > b {
        return domain(format!("need 0 ≤ a ≤ b ≤ π, got a = {a}, b = {b}"));
    }
    adaptive_simpson(|t| t.sin().powi(n as i32), a, b, REFERENCE_TOL, 0.0)
}

/// Unit-ball volume from `ω_d = Π_{k=1}^{d} ∫_0^π sinᵏ` (slicing the ball
/// along one axis at a time).
pub fn reference_unit_ball_volume(d: u32) -> Result<f64> {
    if d < 1 {
        return domain("unit ball dimension must be at least 1");
    }
    (1..=d).try_fold(1.0, |acc, k| Ok(acc * reference_sine_integral(k, 0.0, PI)?))
}

/// Cumulative table of `∫_0^x sinⁿ` at panel nodes, refined on demand by a
/// short adaptive Simpson pass. Relative accuracy is kept near `0`.
#[derive(Debug, Clone)]
pub(crate) struct SinePowerTable {
    n: u32,
    step: f64,
    cumulative: Vec<f64>,
}

const TABLE_REL_TOL: f64 = 1e-14;

impl SinePowerTable {
    pub(crate) fn new(n: u32, panels: usize) -> Result<Self> {
        let step = PI / panels as f64;
        let mut cumulative = Vec::with_capacity(panels + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for k in 0..panels {
            let a = k as f64 * step;
            let b = if k + 1 == panels { PI } else { (k + 1) as f64 * step };
            acc += adaptive_simpson(|t| t.sin().powi(n as i32), a, b, 0.0, TABLE_REL_TOL)?;
            cumulative.push(acc);
        }
        Ok(SinePowerTable { n, step, cumulative })
    }

    /// `∫_0^x sinⁿ` for `x ∈ [0, π]`.
    pub(crate) fn from_zero(&self, x: f64) -> Result<f64> {
        let k = ((x / self.step).floor() as usize).min(self.cumulative.len() - 2);
        let node = k as f64 * self.step;
        let n = self.n as i32;
        let tail = adaptive_simpson(|t| t.sin().powi(n), node, x, 0.0, TABLE_REL_TOL)?;
        Ok(self.cumulative[k] + tail)
    }

    /// `∫_x^π sinⁿ`, through the reflection `θ → π − θ`.
    pub(crate) fn to_pi(&self, x: f64) -> Result<f64> {
        self.from_zero(PI - x)
    }
}

/// Lebesgue volume of one cap of `c` by midpoint slabs perpendicular to the
/// axis, using the candidate's ball centres directly.
pub fn slab_volume(c: &Candidate, side: Side, dim: u32, slabs: usize) -> Result<f64> {
    let omega = reference_unit_ball_volume(dim - 1)?;
    let (center, r) = match side {
        Side::Left => (c.left_center(), c.r_minus),
        Side::Right => (c.right_center(), c.r_plus),
    };
    // The cap is the part of the ball on its own side of x₁ = 0.
    let (x0, x1) = match side {
        Side::Left => (center - r, 0.0f64.min(center + r)),
        Side::Right => (0.0f64.max(center - r), center + r),
    };
    let h = (x1 - x0) / slabs as f64;
    let e = dim as i32 - 1;
    let sum: f64 = (0..slabs)
        .map(|k| {
            let x = x0 + (k as f64 + 0.5) * h;
            let u = x - center;
            (r * r - u * u).max(0.0).sqrt().powi(e)
        })
        .sum();
    Ok(omega * sum * h)
}

/// `𝓗ᴺ⁻¹` of one cap as a hypersurface of revolution: the generatrix arc is
/// cut into chords and each contributes `(N−1)·ω·yᴺ⁻²·ds` at its midpoint.
pub fn generatrix_area(c: &Candidate, side: Side, dim: u32, segments: usize) -> Result<f64> {
    let omega = reference_unit_ball_volume(dim - 1)?;
    let (center, r, t0, t1) = match side {
        Side::Left => (c.left_center(), c.r_minus, c.alpha, PI),
        Side::Right => (c.right_center(), c.r_plus, 0.0, c.beta),
    };
    let point = |t: f64| (center + r * t.cos(), r * t.sin());
    let mut total = 0.0;
    let mut prev = point(t0);
    for k in 1..=segments {
        let next = point(t0 + (t1 - t0) * k as f64 / segments as f64);
        let ds = (next.0 - prev.0).hypot(next.1 - prev.1);
        let y = 0.5 * (next.1 + prev.1);
        total += y.powi(dim as i32 - 2) * ds;
        prev = next;
    }
    Ok(f64::from(dim - 1) * omega * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn reference_trivial_values() {
        assert!((reference_sine_integral(0, 0.0, PI).unwrap() - PI).abs() < 1e-12);
        assert!((reference_sine_integral(1, 0.0, FRAC_PI_2).unwrap() - 1.0).abs() < 1e-12);
        assert!(reference_sine_integral(1, 1.0, 0.5).is_err());
    }

    #[test]
    fn reference_ball_volumes() {
        assert!((reference_unit_ball_volume(1).unwrap() - 2.0).abs() < 1e-12);
        assert!((reference_unit_ball_volume(2).unwrap() - PI).abs() < 1e-12);
        assert!((reference_unit_ball_volume(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let t = SinePowerTable::new(5, 64).unwrap();
        for x in [0.0, 1e-3, 0.4, 1.5, 2.9, PI] {
            let direct = reference_sine_integral(5, 0.0, x).unwrap();
            assert!((t.from_zero(x).unwrap() - direct).abs() < 1e-12, "x = {x}");
        }
        let tiny = t.to_pi(PI - 1e-3).unwrap();
        let approx = 1e-18 / 6.0;
        assert!(((tiny - approx) / approx).abs() < 1e-5);
    }
}
