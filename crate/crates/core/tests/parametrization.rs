use proptest::prelude::*;
use richards_core::hydro::{kirchhoff_quadrature, BrooksCorey, EtaMode, Formulation, Parametrization};

fn param(kind: Formulation, pb: f64, beta: f64) -> Parametrization {
    Parametrization::new(kind, BrooksCorey::new(pb, beta, EtaMode::Derived).unwrap())
}

fn betas() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.0, 2.0, 4.0, 8.0, 16.0])
}

fn kinds() -> impl Strategy<Value = Formulation> {
    prop::sample::select(vec![Formulation::Tau, Formulation::Kirchhoff])
}

proptest! {
    #[test]
    fn monotone(kind in kinds(), beta in betas(), a in 0.0..3.0f64, b in 0.0..3.0f64) {
        let p = param(kind, -0.01, beta);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (x, y) = (p.eval(lo), p.eval(hi));
        prop_assert!(x.s <= y.s && x.u <= y.u);
    }

    #[test]
    fn saturation_is_s_tilde_of_u(kind in kinds(), beta in betas(), tau in 0.0..3.0f64) {
        let p = param(kind, -0.01, beta);
        let g = p.eval(tau);
        prop_assert!((g.s - p.model.kirchhoff_saturation(g.u)).abs() <= 1e-12);
    }

    #[test]
    fn tau_form_is_non_degenerate(beta in betas(), tau in 0.0..3.0f64) {
        let g = param(Formulation::Tau, -0.01, beta).eval(tau);
        prop_assert_eq!(g.ds.max(g.du), 1.0);
        prop_assert!(g.ds.min(g.du) <= 1.0);
    }

    #[test]
    fn derivatives_match_differences(kind in kinds(), beta in betas(), tau in 1e-3..3.0f64) {
        let p = param(kind, -0.01, beta);
        let d = p.params;
        // stay clear of the branch points
        let kinks = [d.tau_star, d.u_b, p.sat_inverse(1.0).unwrap()];
        prop_assume!(kinks.iter().all(|k| (tau - k).abs() > 1e-3));
        let h = 1e-6 * tau;
        let (lo, hi, g) = (p.eval(tau - h), p.eval(tau + h), p.eval(tau));
        let fd_s = (hi.s - lo.s) / (2.0 * h);
        let fd_u = (hi.u - lo.u) / (2.0 * h);
        prop_assert!((fd_s - g.ds).abs() <= 1e-6 * g.ds.abs().max(1e-300) + 1e-12, "s' {} vs {}", fd_s, g.ds);
        prop_assert!((fd_u - g.du).abs() <= 1e-6 * g.du.abs() + 1e-12, "u' {} vs {}", fd_u, g.du);
    }

    #[test]
    fn xi_cauchy_schwarz(kind in kinds(), beta in betas(), a in -0.5..3.0f64, b in -0.5..3.0f64) {
        let p = param(kind, -0.01, beta);
        let lhs = (a - b) * (p.kirchhoff(a) - p.kirchhoff(b));
        let rhs = (p.xi(a) - p.xi(b)).powi(2);
        prop_assert!(lhs >= rhs * (1.0 - 1e-12) - 1e-15, "{} < {}", lhs, rhs);
    }

    #[test]
    fn sat_inverse_round_trip(kind in kinds(), beta in betas(), s in 0.0..1.0f64) {
        let p = param(kind, -0.01, beta);
        let tau = p.sat_inverse(s).unwrap();
        prop_assert!((p.saturation(tau) - s).abs() <= 1e-12);
    }

    #[test]
    fn integral_has_saturation_as_derivative(kind in kinds(), beta in betas(), tau in 1e-2..3.0f64) {
        let p = param(kind, -0.01, beta);
        let h = 1e-6 * tau;
        let fd = (p.saturation_integral(tau + h) - p.saturation_integral(tau - h)) / (2.0 * h);
        prop_assert!((fd - p.saturation(tau)).abs() <= 1e-6);
    }
}

/// A large negative entry pressure moves the branch switch below 1.
#[test]
fn continuity_at_the_branch_switch() {
    for beta in [1.0, 2.0, 4.0] {
        let p = param(Formulation::Tau, -10.0, beta);
        let ts = p.params.tau_star;
        assert!(ts < 1.0, "beta {beta}: tau_star {ts}");
        let below = p.eval(ts * (1.0 - 1e-15));
        let at = p.eval(ts);
        assert!((below.s - at.s).abs() <= 1e-12);
        assert!((below.u - at.u).abs() <= 1e-12);
        // slope switch: s' = 1 below, u' = 1 above
        assert_eq!(below.ds, 1.0);
        assert_eq!(at.du, 1.0);
    }
}

#[test]
fn u_form_degenerates_at_the_dry_end() {
    let p = param(Formulation::Kirchhoff, -0.01, 4.0);
    for u in [1e-12, 1e-14, 1e-16] {
        assert!(p.eval(u).ds > 1e6);
    }
}

#[test]
fn closed_form_against_quadrature_on_a_wide_range() {
    for beta in [1.0, 16.0] {
        let model = BrooksCorey::new(-0.01, beta, EtaMode::Derived).unwrap();
        for p in [-5.0, -0.5, -0.011, -0.01, 0.3, 1.0] {
            let q = kirchhoff_quadrature(&model, p).unwrap();
            let c = model.kirchhoff_of_pressure(p);
            assert!(((c - q) / q).abs() < 1e-8, "beta {beta}, p {p}: {c} vs {q}");
        }
    }
}
