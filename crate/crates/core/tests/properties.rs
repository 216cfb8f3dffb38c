use std::f64::consts::PI;

use dido::geometry::{radius_derivative, tol_geom};
use dido::oracle::{reference_sine_integral, ReducedFunctional};
use dido::solver::{l1, l2};
use dido::{
    cap_integrals, cap_volume, candidate_type_ii, classify, df_dalpha, gamma_star, interface_area, l_value,
    radius_from_volume, reduced_cost, sine_power_integral, total_cost, Candidate, CandidateKind, ProblemParams,
    Regime, Side, SignBranch,
};
use proptest::prelude::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn positive() -> impl Strategy<Value = f64> {
    (-1.0f64..=1.0).prop_map(|e| 10f64.powf(e))
}

fn params() -> impl Strategy<Value = ProblemParams> {
    (2u32..=8, positive(), positive(), positive(), positive(), 0.0f64..=1.5).prop_map(|(n, rm, rp, vm, vp, g)| {
        ProblemParams::new(n, rm, rp, vm, vp, g * rm.min(rp)).unwrap()
    })
}

fn interior_angle() -> impl Strategy<Value = f64> {
    0.01f64..(PI - 0.01)
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Left), Just(Side::Right)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sine_integral_additivity(n in 0u32..=12, mut x in prop::array::uniform3(0.0f64..=PI)) {
        x.sort_by(f64::total_cmp);
        let whole = sine_power_integral(n, x[0], x[2]).unwrap();
        let parts = sine_power_integral(n, x[0], x[1]).unwrap() + sine_power_integral(n, x[1], x[2]).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12);
    }

    #[test]
    fn sine_integral_reflection(n in 0u32..=12, a in 0.0f64..=PI, b in 0.0f64..=PI) {
        let (a, b) = (a.min(b), a.max(b));
        let w = sine_power_integral(n, a, b).unwrap();
        let r = sine_power_integral(n, PI - b, PI - a).unwrap();
        prop_assert!((w - r).abs() <= 1e-12);
    }

    #[test]
    fn sine_integral_matches_quadrature(n in 0u32..=12, a in 0.0f64..=PI, b in 0.0f64..=PI) {
        let (a, b) = (a.min(b), a.max(b));
        let w = sine_power_integral(n, a, b).unwrap();
        let q = reference_sine_integral(n, a, b).unwrap();
        prop_assert!((w - q).abs() <= 1e-11, "{w} vs {q}");
    }

    #[test]
    fn ni_identity(angle in interior_angle(), n in 2u32..=8, side in side()) {
        let c = cap_integrals(angle, n, side).unwrap();
        let (s, co) = angle.sin_cos();
        let sign = match side { Side::Left => 1.0, Side::Right => -1.0 };
        let rhs = f64::from(n - 1) * c.j + sign * s.powi(n as i32 - 1) * co;
        prop_assert!((f64::from(n) * c.i - rhs).abs() <= 1e-12);
    }

    #[test]
    fn volume_round_trip(p in params(), angle in interior_angle(), side in side()) {
        let r = radius_from_volume(angle, side, &p).unwrap();
        let v = p.density(side) * cap_volume(r, angle, side, p.dim).unwrap();
        prop_assert!(close(v, p.volume(side), 1e-12));
    }

    #[test]
    fn radius_derivative_matches_differences(p in params(), angle in 0.1f64..(PI - 0.1), side in side()) {
        let h = 1e-6;
        let fd = (radius_from_volume(angle + h, side, &p).unwrap() - radius_from_volume(angle - h, side, &p).unwrap())
            / (2.0 * h);
        let d = radius_derivative(angle, side, &p).unwrap();
        let r = radius_from_volume(angle, side, &p).unwrap();
        // Central differences carry roughly ε·R/h of rounding noise.
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs() + 1e-9 * r, "{d} vs {fd}");
    }

    #[test]
    fn cost_scales_with_volume(p in params(), lambda in positive(), a in interior_angle(), b in interior_angle()) {
        let mut q = p;
        q.v_minus *= lambda;
        q.v_plus *= lambda;
        let f = reduced_cost(a, b, &p).unwrap().total;
        let g = reduced_cost(a, b, &q).unwrap().total;
        let n = f64::from(p.dim);
        prop_assert!(close(g, f * lambda.powf((n - 1.0) / n), 1e-10));
        let (r, s) = (classify(&p).unwrap(), classify(&q).unwrap());
        prop_assert!((r.minimizer.alpha - s.minimizer.alpha).abs() <= 1e-10);
        prop_assert!((r.minimizer.beta - s.minimizer.beta).abs() <= 1e-10);
    }

    #[test]
    fn mirror_preserves_cost(p in params(), a in interior_angle(), b in interior_angle()) {
        let f = reduced_cost(a, b, &p).unwrap().total;
        let g = reduced_cost(PI - b, PI - a, &p.mirrored()).unwrap().total;
        prop_assert!(close(f, g, 1e-12));
    }

    #[test]
    fn interface_vanishes_only_on_trace_equality(p in params(), a in interior_angle(), b in interior_angle()) {
        let c = Candidate::on_constraint(a, b, &p).unwrap();
        let area = interface_area(c.r_minus, a, c.r_plus, b, p.dim).unwrap();
        prop_assert_eq!(area == 0.0, c.trace_minus() == c.trace_plus());
        prop_assert!(area >= 0.0);
    }

    #[test]
    fn l_strictly_decreasing(p in params()) {
        let m = p.min_density();
        let mut prev = f64::INFINITY;
        let mut changes = 0;
        let mut prev_sign = 0.0;
        for k in 1..1000 {
            let g = -m + 2.0 * m * f64::from(k) / 1000.0;
            let l = l_value(g, &p).unwrap();
            prop_assert!(l < prev);
            if prev_sign != 0.0 && l.signum() != prev_sign {
                changes += 1;
            }
            prev_sign = l.signum();
            prev = l;
        }
        prop_assert!(changes <= 1);
    }

    #[test]
    fn l1_l2_monotone(n in 2u32..=8, a in interior_angle(), b in interior_angle()) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assume!(hi - lo > 1e-6);
        prop_assert!(l1(lo, n).unwrap() < l1(hi, n).unwrap());
        prop_assert!(l2(lo, n).unwrap() > l2(hi, n).unwrap());
    }

    #[test]
    fn gamma_star_residual_and_scaling(p in params(), lambda in positive()) {
        let t = gamma_star(&p).unwrap();
        let omega = p.omega().unwrap();
        let scale = (p.v_minus / p.rho_minus + p.v_plus / p.rho_plus) / omega;
        prop_assert!(l_value(t.gamma_star, &p).unwrap().abs() <= 1e-10 * scale);
        let mut q = p;
        q.v_minus *= lambda;
        q.v_plus *= lambda;
        prop_assert!((gamma_star(&q).unwrap().gamma_star - t.gamma_star).abs() <= 1e-10);
        prop_assert!((gamma_star(&p.mirrored()).unwrap().gamma_star + t.gamma_star).abs() <= 1e-12);
    }

    #[test]
    fn classification_swap_invariance(p in params()) {
        let r = classify(&p).unwrap();
        let s = classify(&p.mirrored()).unwrap();
        prop_assert!(close(r.cost.total, s.cost.total, 1e-12));
        prop_assert!((r.minimizer.alpha - (PI - s.minimizer.beta)).abs() <= 1e-12);
        prop_assert!((r.minimizer.beta - (PI - s.minimizer.alpha)).abs() <= 1e-12);
        prop_assert_eq!(r.orientation_swapped, !s.orientation_swapped || p.v_minus / p.rho_minus == p.v_plus / p.rho_plus);
    }

    #[test]
    fn classification_optimal_among_candidates(p in params()) {
        let r = classify(&p).unwrap();
        let t = gamma_star(&p).unwrap();
        let mut costs = vec![total_cost(&Candidate::on_constraint(t.alpha_star, t.beta_star, &p).unwrap(), &p).unwrap().total];
        if p.gamma < p.min_density() {
            for g in [p.gamma, -p.gamma] {
                costs.push(total_cost(&candidate_type_ii(g, &p).unwrap(), &p).unwrap().total);
            }
        }
        for c in costs {
            prop_assert!(r.cost.total <= c * (1.0 + 1e-12), "{} > {c}", r.cost.total);
        }
    }

    #[test]
    fn trichotomy(p in params()) {
        let r = classify(&p).unwrap();
        let g = r.transition_gamma();
        let at = (p.gamma - g).abs() <= 1e-12 * g.max(1.0);
        match r.regime {
            Regime::AtThreshold => prop_assert!(at),
            Regime::BelowThreshold => prop_assert!(!at && p.gamma < g),
            Regime::AboveThreshold => prop_assert!(!at && p.gamma > g),
        }
        if r.minimizer.kind.is_type_i() {
            prop_assert_eq!(r.cost.interface, 0.0);
            prop_assert!(r.minimizer.trace_gap().abs() <= tol_geom(r.minimizer.r_minus, r.minimizer.r_plus));
        }
    }

    #[test]
    fn cost_monotone_in_gamma(p in params(), g1 in 0.0f64..=1.5, g2 in 0.0f64..=1.5) {
        let m = p.min_density();
        let (lo, hi) = (g1.min(g2) * m, g1.max(g2) * m);
        let a = classify(&p.with_gamma(lo)).unwrap();
        let b = classify(&p.with_gamma(hi)).unwrap();
        prop_assert!(a.cost.total <= b.cost.total * (1.0 + 1e-12));
        if lo >= a.transition_gamma() {
            prop_assert!(close(a.cost.total, b.cost.total, 1e-12));
        }
    }

    #[test]
    fn grid_samples_never_beat_the_minimizer(p in params(), a in interior_angle(), b in interior_angle()) {
        let r = classify(&p).unwrap();
        let f = ReducedFunctional::new(&p).unwrap();
        let sample = f.cost(a, b, p.gamma).unwrap();
        prop_assert!(r.cost.total <= sample + 1e-12 * sample.abs().max(1.0));
    }

    #[test]
    fn type_i_one_sided_derivatives(p in params(), excess in 0.01f64..=0.99) {
        let r = classify(&p).unwrap();
        let g = r.transition_gamma();
        prop_assume!(g >= 0.0);
        let gamma = g + excess * (p.min_density() - g);
        prop_assume!(gamma > g);
        let q = p.with_gamma(gamma);
        let r = classify(&q).unwrap();
        prop_assume!(!r.orientation_swapped);
        let c = r.minimizer;
        prop_assert_eq!(c.kind, CandidateKind::TypeI);
        // Increasing α lifts the left trace above the right one.
        let left = df_dalpha(&c, &q, SignBranch::Minus).unwrap();
        let right = df_dalpha(&c, &q, SignBranch::Plus).unwrap();
        prop_assert!(left <= 0.0 && right >= 0.0, "{left} {right}");
    }

    #[test]
    fn negative_branch_candidate_loses(p in params()) {
        prop_assume!(p.gamma > 0.0 && p.gamma < p.min_density() && p.is_canonical());
        prop_assume!(p.v_minus / p.rho_minus > p.v_plus / p.rho_plus);
        let r = classify(&p).unwrap();
        let other = total_cost(&candidate_type_ii(-p.gamma, &p).unwrap(), &p).unwrap().total;
        prop_assert!(other > r.cost.total * (1.0 + 1e-10));
    }

    #[test]
    fn df_dalpha_matches_differences(p in params(), a in 0.2f64..(PI - 0.2), b in 0.2f64..(PI - 0.2)) {
        let c = Candidate::on_constraint(a, b, &p).unwrap();
        let branch = if c.trace_minus() >= c.trace_plus() { SignBranch::Plus } else { SignBranch::Minus };
        let d = df_dalpha(&c, &p, branch).unwrap();
        let h = 1e-6;
        let fd = (reduced_cost(a + h, b, &p).unwrap().total - reduced_cost(a - h, b, &p).unwrap().total) / (2.0 * h);
        let gap = (c.trace_minus() - c.trace_plus()).abs();
        prop_assume!(gap > 1e-3 * c.r_minus.max(c.r_plus));
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(fd.abs()).max(1.0), "{d} vs {fd}");
    }
}

#[test]
fn type_ii_branches_coincide_at_zero() {
    let p = ProblemParams::new(4, 1.3, 0.7, 2.0, 0.5, 0.0).unwrap();
    let a = candidate_type_ii(0.0, &p).unwrap();
    let b = candidate_type_ii(-0.0, &p).unwrap();
    assert_eq!((a.alpha, a.beta, a.r_minus, a.r_plus), (b.alpha, b.beta, b.r_minus, b.r_plus));
}

#[test]
fn cap_integrals_reject_degenerate_angles() {
    for a in [0.0, PI, -0.1, 4.0] {
        assert!(cap_integrals(a, 3, Side::Left).is_err());
    }
    assert!(sine_power_integral(3, 0.0, PI).is_ok());
}

#[test]
fn constrained_candidates_are_well_formed() {
    let p = ProblemParams::new(3, 1.0, 2.0, 2.0, 1.0, 0.3).unwrap();
    let c = Candidate::on_constraint(1.0, 2.0, &p).unwrap();
    assert!(c.r_minus > 0.0 && c.r_plus > 0.0);
    assert!(Candidate::new(0.0, 1.0, 1.0, 1.0, CandidateKind::TypeI).is_err());
}
