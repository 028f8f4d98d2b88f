use proptest::prelude::*;

use hetbb84::channels::{feasible_region, gaussian_stats, passive_attack_params, passive_rate};
use hetbb84::invariant::{invariant_state, mixing_parameter, sector_c};
use hetbb84::keymap::rel_entropy;
use hetbb84::numerics::{lambda_coeffs, sym_eigvals, SymMatrix};
use hetbb84::rates::{constrained_min_rate, ConstraintMode, EstimateSet, Target};
use hetbb84::sweep::{fmt_g, parse_grid};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_are_ordered_probabilities(tau in 0.01f64..20.0) {
        let c = lambda_coeffs(tau, 15).unwrap();
        for n in 0..=15 {
            prop_assert!((0.0..=1.0).contains(&c.lambda(n)));
            prop_assert!((c.lambda(n) + c.complement(n) - 1.0).abs() < 1e-15);
            if n > 0 {
                prop_assert!(c.lambda(n) >= c.lambda(n - 1));
            }
        }
    }

    #[test]
    fn invariant_states_are_normalized_and_positive(j in 1usize..=6, f in 0.0f64..=1.0) {
        let s = invariant_state(j, f).unwrap();
        prop_assert!((s.rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(sym_eigvals(&s.rho)[0] > -1e-12);
        prop_assert!((mixing_parameter(&s.rho, j).unwrap() - f).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_bounded_by_yield(j in 0usize..=5, f in 0.0f64..=1.0, tau in 0.1f64..4.0) {
        let c = lambda_coeffs(tau, 5).unwrap();
        let d = rel_entropy(j, f, &c).unwrap();
        // at most one bit per conclusive event
        let y = hetbb84::invariant::sector_yield(&c, j).unwrap();
        prop_assert!(d > -1e-12 && d <= y + 1e-12, "D = {d}, Y = {y}");
    }

    #[test]
    fn error_parameter_is_affine_in_f(j in 1usize..=4, f in 0.0f64..=1.0, tau in 0.1f64..4.0) {
        let c = lambda_coeffs(tau, 4).unwrap();
        let (c0, c1) = (sector_c(&c, j, 0.0).unwrap(), sector_c(&c, j, 1.0).unwrap());
        let cf = sector_c(&c, j, f).unwrap();
        prop_assert!((cf - (c0 + f * (c1 - c0))).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_preserve_trace(entries in proptest::collection::vec(-5.0f64..5.0, 36)) {
        let m = SymMatrix::from_fn(6, |i, k| entries[i * 6 + k]);
        let eig = sym_eigvals(&m);
        prop_assert!((eig.iter().sum::<f64>() - m.trace()).abs() < 1e-10);
        prop_assert!(eig.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn passive_parameters_round_trip(eta in 0.01f64..=1.0, f1 in 0.0f64..=1.0, tau in 0.2f64..3.0) {
        let c = lambda_coeffs(tau, 1).unwrap();
        let r = passive_rate(eta, f1, &c).unwrap();
        prop_assert!(feasible_region(&c).unwrap().contains(r.q, r.c, 1e-12));
        let (e2, f2) = passive_attack_params(r.q, r.c, &c).unwrap();
        prop_assert!((e2 - eta).abs() < 1e-9 && (f2 - f1).abs() < 1e-9);
    }

    #[test]
    fn gaussian_statistics_are_distributions(eta in 0.0f64..=1.0, n in 1e-8f64..0.1) {
        let s = gaussian_stats(eta, n).unwrap();
        let total: f64 = s.p.iter().sum::<f64>() + s.tail_mass();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(s.p.iter().all(|&p| p >= 0.0));
        prop_assert!(s.f[1..].iter().all(|&f| (-1e-12..=1.0 + 1e-12).contains(&f)));
    }

    #[test]
    fn g_format_round_trips(x in -1e12f64..1e12, e in -30i32..30) {
        let v = x * 10f64.powi(e);
        let back: f64 = fmt_g(v).parse().unwrap();
        prop_assert!((back - v).abs() <= 1e-11 * v.abs());
    }

    #[test]
    fn linear_grid_hits_endpoints(a in -10.0f64..10.0, span in 0.1f64..10.0, n in 2usize..50) {
        let g = parse_grid(&format!("{a}:{}:{n}", a + span)).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert!((g[0] - a).abs() < 1e-12 && (g[n - 1] - (a + span)).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn tighter_constraint_never_raises_rate(eta in 0.2f64..=1.0, f1 in 0.6f64..=1.0, tau in 0.5f64..1.5) {
        // the inequality mode minimizes over a superset of the equality set
        let c = lambda_coeffs(tau, 21).unwrap();
        let r = passive_rate(eta, f1, &c).unwrap();
        let est = EstimateSet { q_hat: r.q, target: Target::C(r.c), p_hat: vec![1.0 - eta, eta] };
        let eq = constrained_min_rate(&est, &c, ConstraintMode::Equality).unwrap();
        let ineq = constrained_min_rate(&est, &c, ConstraintMode::Inequality).unwrap();
        prop_assert!(ineq.breakdown.rate_signed <= eq.breakdown.rate_signed + 1e-9);
        prop_assert!((eq.breakdown.rate_signed - r.rate_signed).abs() < 1e-6);
    }
}
