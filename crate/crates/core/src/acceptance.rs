//! The acceptance checks, shared by the `acceptance` test target and the
//! `verify` subcommand. Each check returns an [`Outcome`] instead of
//! panicking so a report can list every result.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{relative_potential, theoretical_density_rate, VELOCITY_RATE};
use crate::grid::MassGrid;
use crate::integrator::{compute_dt, reciprocal_update, SemiImplicit};
use crate::model::{
    build_initial_data, validate_params, HardViolation, InitialDataSpec, ModelParams,
    RegimeViolation, StationaryProfile,
};
use crate::oracles::{
    cross_validate, midpoint_rule, potential_integrand, riccati_exact, self_convergence,
};
use crate::simulation::{Scenario, SimulationError, Trajectory};
use crate::sweep::{MIN_R2, RATE_TOLERANCE};

pub const FIT_WINDOW: (f64, f64) = (10.0, 200.0);

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2}. {} ({:.1} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

pub type Check = fn() -> Outcome;

/// All checks in order.
pub const CHECKS: [Check; 12] = [
    stationary_fixed_point,
    energy_dissipation,
    ratio_band,
    uniform_convergence,
    velocity_decay,
    density_decay,
    weighted_decay,
    oracle_cross_validation,
    exact_q_update,
    potential_closed_form,
    flux_identity,
    validator_codes,
];

pub fn run_all() -> Vec<Outcome> {
    CHECKS.iter().map(|c| c()).collect()
}

fn outcome(
    id: u8,
    name: &'static str,
    start: Instant,
    body: impl FnOnce() -> Result<(bool, String), String>,
) -> Outcome {
    let (passed, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// The reference scenario run to `t = 200`, computed once per process.
pub fn default_trajectory() -> Result<&'static Trajectory, String> {
    static CELL: OnceLock<Result<Trajectory, String>> = OnceLock::new();
    CELL.get_or_init(|| Scenario::default().run().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(Clone::clone)
}

fn sup_flux_residual(t: &Trajectory) -> f64 {
    t.records
        .iter()
        .map(|r| r.flux_residual)
        .fold(0.0, f64::max)
}

pub fn stationary_fixed_point() -> Outcome {
    outcome(1, "stationary fixed point", Instant::now(), || {
        let sc = Scenario::default();
        let grid = MassGrid::new(sc.n_cells).map_err(|e| e.to_string())?;
        let p = sc.params;
        let mut state = build_initial_data(&InitialDataSpec::stationary(), &grid, &p)
            .map_err(|e| e.to_string())?;
        let stationary = StationaryProfile::new(&grid, &p);
        let mut solver = SemiImplicit::new(&grid, &p, &sc.scheme).map_err(|e| e.to_string())?;
        for _ in 0..10_000 {
            let dt = compute_dt(&state, &grid, &p, &sc.scheme).map_err(|e| e.to_string())?;
            solver.step(&mut state, dt).map_err(|e| e.to_string())?;
        }
        let cq_gap = state
            .cq()
            .iter()
            .zip(&stationary.cq_inf)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let sup_u = state.u.iter().map(|u| u.abs()).fold(0.0, f64::max);
        Ok((
            cq_gap <= 1e-10 && sup_u <= 1e-10,
            format!(
                "after 10^4 steps to t = {:.3}: sup|cQ-cQ_inf| = {cq_gap:e}, sup|u| = {sup_u:e}",
                state.t
            ),
        ))
    })
}

pub fn energy_dissipation() -> Outcome {
    outcome(2, "discrete energy dissipation", Instant::now(), || {
        let base = Scenario::default();
        let mut half = base;
        half.scheme.cfl *= 0.5;
        half.scheme.dt_max *= 0.5;
        let a = base.energy_audit().map_err(|e| e.to_string())?;
        let b = half.energy_audit().map_err(|e| e.to_string())?;
        let halving = if b.worst_step_increase > 0.0 {
            a.worst_step_increase / b.worst_step_increase
        } else {
            f64::INFINITY
        };
        let interval_halving = if b.worst_interval_increase > 0.0 {
            a.worst_interval_increase / b.worst_interval_increase
        } else {
            f64::INFINITY
        };
        Ok((
            a.within_slack() && b.within_slack() && (a.worst_step_increase <= 0.0 || halving >= 2.0),
            format!(
                "worst step increase / slack = {:.4} (dt), {:.4} (dt/2); per-interval {:.4}, {:.4}; \
                 worst step increase {:e} -> {:e}, reduction x{halving:.3} (per interval x{interval_halving:.4})",
                a.worst_step_ratio,
                b.worst_step_ratio,
                a.worst_interval_ratio,
                b.worst_interval_ratio,
                a.worst_step_increase,
                b.worst_step_increase,
            ),
        ))
    })
}

pub fn ratio_band() -> Outcome {
    outcome(3, "uniform Y-band", Instant::now(), || {
        let t = default_trajectory()?;
        let r0 = &t.records[0];
        let lo = 0.5 * r0.y_min;
        let hi = 2.0 * r0.y_max.max(1.0);
        let y_min = t
            .records
            .iter()
            .map(|r| r.y_min)
            .fold(f64::INFINITY, f64::min);
        let y_max = t
            .records
            .iter()
            .map(|r| r.y_max)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok((
            y_min >= lo && y_max <= hi,
            format!(
                "Y over {} samples in [{y_min:.4}, {y_max:.4}], band [{lo:.4}, {hi:.4}]",
                t.records.len()
            ),
        ))
    })
}

pub fn uniform_convergence() -> Outcome {
    outcome(4, "uniform convergence", Instant::now(), || {
        let t = default_trajectory()?;
        let first = &t.records[0];
        let last = t.records.last().ok_or("no records")?;
        let rd = last.sup_theta_dist / first.sup_theta_dist;
        let ru = last.sup_u / first.sup_u;
        Ok((
            rd <= 0.05 && ru <= 0.05,
            format!(
                "at t = {}: density gap ratio {rd:.3e}, velocity ratio {ru:.3e}",
                last.t
            ),
        ))
    })
}

pub fn velocity_decay() -> Outcome {
    outcome(5, "velocity decay rate", Instant::now(), || {
        let t = default_trajectory()?;
        let fit = t
            .decay_fits(FIT_WINDOW)
            .velocity
            .map_err(|e| e.to_string())?;
        let limit = -RATE_TOLERANCE * VELOCITY_RATE;
        Ok((
            fit.exponent <= limit && fit.r2 >= MIN_R2,
            format!(
                "exponent {:.4} (need <= {limit}), r2 {:.5}",
                fit.exponent, fit.r2
            ),
        ))
    })
}

pub fn density_decay() -> Outcome {
    outcome(6, "density decay rate", Instant::now(), || {
        let t = default_trajectory()?;
        let fit = t
            .decay_fits(FIT_WINDOW)
            .density
            .map_err(|e| e.to_string())?;
        let rate = theoretical_density_rate(&Scenario::default().params).rate;
        let limit = -RATE_TOLERANCE * rate;
        Ok((
            fit.exponent <= limit,
            format!(
                "exponent {:.4} (need <= {limit:.4}, theoretical rate {rate:.4}), r2 {:.5}",
                fit.exponent, fit.r2
            ),
        ))
    })
}

pub fn weighted_decay() -> Outcome {
    outcome(7, "weighted decay", Instant::now(), || {
        let t = default_trajectory()?;
        let fit = t
            .decay_fits(FIT_WINDOW)
            .weighted
            .map_err(|e| e.to_string())?;
        Ok((
            fit.exponent <= -0.9,
            format!(
                "exponent {:.4} (need <= -0.9), r2 {:.5}",
                fit.exponent, fit.r2
            ),
        ))
    })
}

pub fn oracle_cross_validation() -> Outcome {
    outcome(8, "oracle cross-validation", Instant::now(), || {
        let sc = Scenario::default();
        let cross = cross_validate(&sc.initial, &sc.params, 400, 1600, 1.0, &sc.scheme)
            .map_err(|e| e.to_string())?;
        let conv = self_convergence(&sc.initial, &sc.params, 200, 1.0, &sc.scheme)
            .map_err(|e| e.to_string())?;
        let order = conv.richardson_order.unwrap_or(f64::NAN);
        Ok((
            cross.l2_diff <= 0.01 && order >= 0.8,
            format!(
                "L2 gap to explicit N=1600: {:.3e} (sup {:.3e}); Richardson order over N=200/400/800: {order:.3}",
                cross.l2_diff, cross.linf_diff
            ),
        ))
    })
}

fn ulp_distance(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.is_sign_negative() != b.is_sign_negative() || !a.is_finite() || !b.is_finite() {
        return u64::MAX;
    }
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

/// Largest per-step `|rho_l Q u_x dt|` sampled by the exact-update check.
pub const UPDATE_STEP_BOUND: f64 = 0.1;

pub fn exact_q_update() -> Outcome {
    outcome(9, "exact Q-update", Instant::now(), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
        let (mut worst_direct, mut worst_comp, mut n) = (0u64, 0u64, 0usize);
        while n < 100_000 {
            let q: f64 = rng.gen_range(-3.0f64..3.0).exp();
            let ux: f64 = rng.gen_range(-5.0..5.0);
            let rho: f64 = rng.gen_range(0.5..2.0);
            let dt1: f64 = 1e-4 * rng.gen_range(0.0f64..9.0).exp();
            let dt2: f64 = 1e-4 * rng.gen_range(0.0f64..9.0).exp();
            let step = |dt: f64| (rho * q * ux * dt).abs();
            if step(dt1).max(step(dt1 + dt2)) > UPDATE_STEP_BOUND {
                continue;
            }
            n += 1;
            let exact = riccati_exact(q, ux, rho, dt1).map_err(|e| e.to_string())?;
            worst_direct =
                worst_direct.max(ulp_distance(reciprocal_update(q, ux, rho, dt1), exact));
            let composed = reciprocal_update(reciprocal_update(q, ux, rho, dt1), ux, rho, dt2);
            let once = riccati_exact(q, ux, rho, dt1 + dt2).map_err(|e| e.to_string())?;
            worst_comp = worst_comp.max(ulp_distance(composed, once));
        }
        Ok((
            worst_direct <= 4 && worst_comp <= 4,
            format!(
                "{n} samples with |rho Q u_x dt| <= {UPDATE_STEP_BOUND}: update vs exact {worst_direct} ULP, \
                 two-step composition {worst_comp} ULP"
            ),
        ))
    })
}

pub fn potential_closed_form() -> Outcome {
    outcome(10, "potential closed form", Instant::now(), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let p = ModelParams {
                gamma: rng.gen_range(1.1..4.0),
                rho_l: rng.gen_range(0.5..2.0),
                pressure_coeff: rng.gen_range(0.5..2.0),
                ..ModelParams::default()
            };
            let c: f64 = rng.gen_range(0.1..2.0);
            let q_inf: f64 = rng.gen_range(0.1..3.0);
            let q = q_inf * rng.gen_range(-1.5f64..1.5).exp();
            let closed = relative_potential(c, q, q_inf, &p).map_err(|e| e.to_string())?;
            let quad = midpoint_rule(potential_integrand(c, q_inf, &p), q_inf, q, 10_000)
                .map_err(|e| e.to_string())?;
            let rel = (closed - quad).abs() / quad.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
        Ok((
            worst <= 1e-6,
            format!("1000 random inputs, worst relative error {worst:.3e}"),
        ))
    })
}

pub fn flux_identity() -> Outcome {
    outcome(11, "flux identity", Instant::now(), || {
        let coarse = default_trajectory()?;
        let mut sc = Scenario::default();
        // doubling the cells halves the acoustic step at fixed cfl
        sc.n_cells *= 2;
        sc.scheme.dt_max *= 0.5;
        let fine = sc.run().map_err(|e: SimulationError| e.to_string())?;
        let (rc, rf) = (sup_flux_residual(coarse), sup_flux_residual(&fine));
        let ratio = rc / rf;
        Ok((
            ratio >= 1.8,
            format!("sup residual N=400: {rc:.3e}, N=800: {rf:.3e}, ratio {ratio:.3}"),
        ))
    })
}

pub fn validator_codes() -> Outcome {
    outcome(12, "validator", Instant::now(), || {
        let base = ModelParams::default();
        let regime = |gamma: f64, theta: f64, alpha: f64, v: RegimeViolation| {
            let p = ModelParams {
                gamma,
                theta,
                alpha,
                ..base
            };
            validate_params(&p)
                .map(|r| r.violations.contains(&v))
                .unwrap_or(false)
        };
        let gamma_rejected = validate_params(&ModelParams { gamma: 1.0, ..base })
            .map_err(|e| e.has(HardViolation::GammaNotGtOne))
            .err()
            .unwrap_or(false);
        let cases = [
            ("GAMMA_NOT_GT_ONE", gamma_rejected),
            (
                "THETA_GT_HALF_GAMMA",
                regime(1.5, 0.8, 0.0, RegimeViolation::ThetaGtHalfGamma),
            ),
            (
                "THETA_GT_GAMMA_MINUS_1",
                regime(1.5, 0.6, 0.0, RegimeViolation::ThetaGtGammaMinusOne),
            ),
            (
                "THETA_GT_ONE_MINUS_ALPHA_GAMMA",
                regime(2.0, 0.6, 0.25, RegimeViolation::ThetaGtOneMinusAlphaGamma),
            ),
        ];
        let missed: Vec<&str> = cases.iter().filter(|c| !c.1).map(|c| c.0).collect();
        Ok((
            missed.is_empty() && validate_params(&base).map(|r| r.is_ok()).unwrap_or(false),
            if missed.is_empty() {
                "all four constraints rejected with their codes; default accepted".into()
            } else {
                format!("not reported: {}", missed.join(", "))
            },
        ))
    })
}
