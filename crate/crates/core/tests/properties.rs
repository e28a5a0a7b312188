use proptest::prelude::*;

use driftflux::config::parse_config;
use driftflux::diagnostics::relative_potential;
use driftflux::integrator::reciprocal_update;
use driftflux::oracles::riccati_exact;
use driftflux::ModelParams;

proptest! {
    #[test]
    fn relative_potential_is_nonnegative(
        gamma in 1.01f64..5.0,
        c in 1e-3f64..10.0,
        q in 1e-3f64..100.0,
        q_inf in 1e-3f64..100.0,
    ) {
        let p = ModelParams { gamma, ..ModelParams::default() };
        let v = relative_potential(c, q, q_inf, &p).unwrap();
        prop_assert!(v >= 0.0 && v.is_finite());
        if q == q_inf {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn relative_potential_grows_away_from_equilibrium(
        c in 0.1f64..2.0, q_inf in 0.1f64..3.0, r1 in 1.01f64..2.0, r2 in 1.01f64..2.0,
    ) {
        let p = ModelParams::default();
        let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
        let a = relative_potential(c, q_inf * lo, q_inf, &p).unwrap();
        let b = relative_potential(c, q_inf * hi, q_inf, &p).unwrap();
        prop_assert!(a <= b);
    }

    #[test]
    fn reciprocal_update_matches_riccati(
        q in 1e-2f64..50.0, ux in -3.0f64..3.0, dt in 1e-6f64..1e-2,
    ) {
        prop_assume!(1.0 + q * ux * dt > 0.0);
        prop_assert_eq!(reciprocal_update(q, ux, 1.0, dt), riccati_exact(q, ux, 1.0, dt).unwrap());
    }

    #[test]
    fn config_emission_is_idempotent(
        gamma in 2.0f64..4.0,
        theta in 0.05f64..1.0,
        f in 0.0f64..5.0,
        n in 8usize..2000,
        u_amp in -1.0f64..1.0,
    ) {
        let text = format!("gamma = {gamma}\ntheta = {theta}\nf = {f}\nn_cells = {n}\nu_amp = {u_amp}\n");
        let a = parse_config(&text).unwrap();
        let b = parse_config(&a.to_text()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.params.gamma, gamma);
    }
}
