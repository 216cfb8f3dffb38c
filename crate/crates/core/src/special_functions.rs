//! Sine-power integrals and unit-ball volumes.
//!
//! Every closed-form measure of a spherical cap reduces to integrals of the
//! form `W_n(a, b) = ∫_a^b sinⁿθ dθ`. They are evaluated here by the
//! reduction recurrence
//!
//! ```text
//! W_n(a,b) = [cos a·sinⁿ⁻¹a − cos b·sinⁿ⁻¹b] / n + (n−1)/n · W_{n−2}(a,b)
//! ```
//!
//! seeded with `W_0 = b − a` and `W_1 = cos a − cos b`. Nothing in this module
//! uses numerical quadrature; the quadrature cross-checks live in
//! [`crate::oracle`].
//!
//! Cap integrals are anchored at `0` (or `π`) and may be tiny when the cap is a
//! thin sliver. The forward recurrence loses relative precision there, so
//! [`sine_power_from_zero`] switches to the positive-term series in `sin θ`
//! for angles below `π/4`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Which half-space a cap lives in.
///
/// `Left` caps are integrated over `[α, π]`, `Right` caps over `[0, β]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// The pair `(I, J) = (∫ sinᴺ, ∫ sinᴺ⁻²)` over the angular range of one cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapIntegrals {
    pub i: f64,
    pub j: f64,
}

fn check_angle(name: &str, x: f64) -> Result<()> {
    if !(0.0..=PI).contains(&x) {
        return domain(format!("{name} = {x} is outside [0, π]"));
    }
    Ok(())
}

/// `∫_a^b sinⁿθ dθ` by the reduction recurrence.
///
/// Requires `0 ≤ a ≤ b ≤ π`.
pub fn sine_power_integral(n: u32, a: f64, b: f64) -> Result<f64> {
    check_angle("a", a)?;
    check_angle("b", b)?;
    if a > b {
        return domain(format!("lower limit {a} exceeds upper limit {b}"));
    }
    Ok(recurrence(n, a, b))
}

fn recurrence(n: u32, a: f64, b: f64) -> f64 {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (mut k, mut w) = if n % 2 == 0 {
        (0, b - a)
    } else {
        // cos a − cos b written as a product keeps short intervals accurate.
        (1, 2.0 * (0.5 * (a + b)).sin() * (0.5 * (b - a)).sin())
    };
    // sinᵏ⁻¹ at both endpoints for the next k, advanced by sin² per step.
    let (mut pa, mut pb) = if k == 0 { (sa, sb) } else { (sa * sa, sb * sb) };
    while k < n {
        k += 2;
        let kf = f64::from(k);
        w = (ca * pa - cb * pb) / kf + (kf - 1.0) / kf * w;
        pa *= sa * sa;
        pb *= sb * sb;
    }
    w
}

/// `∫_0^π sinⁿθ dθ` (Wallis).
pub fn full_sine_power_integral(n: u32) -> f64 {
    let (mut k, mut w) = if n % 2 == 0 { (0, PI) } else { (1, 2.0) };
    while k < n {
        k += 2;
        let kf = f64::from(k);
        w *= (kf - 1.0) / kf;
    }
    w
}

/// `∫_0^x sinⁿθ dθ` for `x ∈ [0, π]`, accurate in the relative sense even
/// when `x` is close to `0` or `π`.
pub fn sine_power_from_zero(n: u32, x: f64) -> Result<f64> {
    check_angle("x", x)?;
    Ok(from_zero(n, x))
}

fn from_zero(n: u32, x: f64) -> f64 {
    if x > FRAC_PI_2 {
        return full_sine_power_integral(n) - from_zero(n, PI - x);
    }
    if x <= FRAC_PI_4 {
        small_angle_series(n, x)
    } else {
        recurrence(n, 0.0, x)
    }
}

/// `∫_0^x sinⁿθ dθ = Σ_k (1/2)_k/k! · s^{n+2k+1}/(n+2k+1)`, `s = sin x`,
/// valid for `x ≤ π/2`; every term is positive.
fn small_angle_series(n: u32, x: f64) -> f64 {
    let s = x.sin();
    let s2 = s * s;
    let mut coeff = 1.0;
    let mut power = s.powi(n as i32 + 1);
    let mut sum = 0.0;
    for k in 0..400u32 {
        let denom = f64::from(n + 2 * k + 1);
        let term = coeff * power / denom;
        sum += term;
        if term <= 1e-18 * sum {
            break;
        }
        coeff *= (f64::from(k) + 0.5) / f64::from(k + 1);
        power *= s2;
    }
    sum
}

/// `(I±, J±)` for a cap of dimension `dim` meeting the hyperplane at `angle`.
///
/// Left caps integrate over `[angle, π]`, right caps over `[0, angle]`. The
/// angle must lie strictly inside `(0, π)`: a cap at `0` or `π` is either a
/// whole sphere or empty.
pub fn cap_integrals(angle: f64, dim: u32, side: Side) -> Result<CapIntegrals> {
    if dim < 2 {
        return domain(format!("dimension N = {dim} must be at least 2"));
    }
    if !(angle > 0.0 && angle < PI) {
        return domain(format!("cap angle {angle} must lie strictly inside (0, π)"));
    }
    // ∫_α^π sinᵏ = ∫_0^{π−α} sinᵏ by reflection.
    let reach = match side {
        Side::Left => PI - angle,
        Side::Right => angle,
    };
    Ok(CapIntegrals {
        i: from_zero(dim, reach),
        j: from_zero(dim - 2, reach),
    })
}

/// Volume of the unit ball in `ℝᵈ`, `π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: u32) -> Result<f64> {
    if d < 1 {
        return domain("unit ball dimension must be at least 1");
    }
    Ok(PI.powf(f64::from(d) / 2.0) / gamma_half_integer(d + 2))
}

/// `Γ(m/2)` for a positive integer `m`, via `Γ(x+1) = xΓ(x)` from `Γ(1) = 1`
/// or `Γ(1/2) = √π`.
fn gamma_half_integer(m: u32) -> f64 {
    let (mut x, mut g) = if m % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = f64::from(m) / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}
