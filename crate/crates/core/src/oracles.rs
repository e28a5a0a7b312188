//! Independent reference computations: a fully explicit fine-grid solver,
//! the closed-form Riccati solution for frozen velocity gradients, and a
//! midpoint quadrature rule.
//!
//! The explicit solver shares only the model and grid primitives with the
//! semi-implicit integrator; it never assembles or solves a linear system.

use thiserror::Error;

use crate::grid::{GridError, MassGrid};
use crate::integrator::{run_to_time, IntegrationError, SchemeConfig, StepResult};
use crate::model::{
    build_initial_data, friction_coefficient, InitialDataSpec, ModelError, ModelParams,
    StationaryProfile, TransformedState,
};
use crate::pow::Power;

pub const DEFAULT_STEP_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("explicit reference needs about {required} steps, budget is {budget}")]
    BudgetExceeded { required: u64, budget: u64 },
    #[error("frozen expansion degenerates: 1 + rho_l Q0 u_x t = {denominator} <= 0")]
    Degenerate { denominator: f64 },
    #[error("midpoint rule needs at least 2 panels and finite bounds")]
    BadQuadrature,
    #[error("grids of {coarse} and {fine} cells are not nested")]
    NotNested { coarse: usize, fine: usize },
    #[error("explicit reference went non-finite at t = {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

/// `Q(t) = Q0 / (1 + rho_l Q0 u_x t)`, the solution of
/// `Q_t = -rho_l Q^2 u_x` with `u_x` held fixed.
pub fn riccati_exact(q0: f64, ux: f64, rho_l: f64, t: f64) -> Result<f64, OracleError> {
    let denominator = 1.0 + rho_l * q0 * ux * t;
    if !(denominator > 0.0) {
        return Err(OracleError::Degenerate { denominator });
    }
    Ok(q0 / denominator)
}

/// Midpoint rule for `f` on `[a, b]` with `panels` equal panels.
pub fn midpoint_rule(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<f64, OracleError> {
    if panels < 2 || !a.is_finite() || !b.is_finite() {
        return Err(OracleError::BadQuadrature);
    }
    let h = (b - a) / panels as f64;
    let sum: f64 = (0..panels).map(|k| f(a + (k as f64 + 0.5) * h)).sum();
    Ok(sum * h)
}

/// Integrand `A c^gamma (h^gamma - Q_inf^gamma) / (rho_l h^2)` of the
/// relative potential, written out directly from its definition.
pub fn potential_integrand(c: f64, q_inf: f64, p: &ModelParams) -> impl Fn(f64) -> f64 {
    let (a, gamma, rho) = (p.pressure_coeff, p.gamma, p.rho_l);
    move |h: f64| a * c.powf(gamma) * (h.powf(gamma) - q_inf.powf(gamma)) / (rho * h * h)
}

/// Distances between a coarse and a nested fine solution plus, when three
/// grids were compared, the observed convergence order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport {
    pub l2_diff: f64,
    pub linf_diff: f64,
    pub richardson_order: Option<f64>,
}

/// Forward-Euler solver for the same continuum system on the same staggered
/// layout and boundary treatment, with every term explicit.
pub fn explicit_reference_run(
    spec: &InitialDataSpec,
    p: &ModelParams,
    n_cells: usize,
    t_end: f64,
    step_budget: u64,
) -> Result<TransformedState, OracleError> {
    let grid = MassGrid::new(n_cells)?;
    let mut state = build_initial_data(spec, &grid, p)?;
    let n = grid.n_cells();
    let dx = grid.dx();
    let inv_dx = 1.0 / dx;
    let gamma = Power::new(p.gamma);
    let theta = Power::new(p.theta);
    let c = state.c.clone();
    let c_theta: Vec<f64> = c.iter().map(|&c| theta.eval(c)).collect();
    let w: Vec<f64> = (0..n).map(|i| grid.node_weight(i)).collect();
    let inv_w: Vec<f64> = w.iter().map(|w| 1.0 / w).collect();
    let pressure_at = |j: usize, q: f64| p.pressure_coeff * gamma.eval(c[j] * q);
    let visc_at = |j: usize, q: f64| p.viscosity_coeff * c_theta[j] * q * theta.eval(q);
    let node_q = |q: &[f64], i: usize| if i > 0 { 0.5 * (q[i - 1] + q[i]) } else { q[0] };

    // Per-step coefficient tables, refreshed inside the update sweep.
    let mut pressure: Vec<f64> = (0..n).map(|j| pressure_at(j, state.q[j])).collect();
    let mut visc: Vec<f64> = (0..n).map(|j| visc_at(j, state.q[j])).collect();
    let mut fric: Vec<f64> = (0..n)
        .map(|i| friction_coefficient(node_q(&state.q, i), p))
        .collect();
    let mut u_new = vec![0.0; n + 1];

    // Largest viscous+friction rate and squared sound speed of the current state.
    let mut rate_max = 0.0f64;
    let mut sound2_max = 0.0f64;
    for i in 0..n {
        let vl = if i > 0 { visc[i - 1] } else { 0.0 };
        rate_max = rate_max.max((vl + visc[i]) * inv_w[i] * inv_dx + fric[i] * state.u[i].abs());
        sound2_max = sound2_max.max(p.gamma * p.rho_l * pressure[i] * state.q[i]);
    }
    let stable_dt = |rate_max: f64, sound2_max: f64| {
        let mut dt = f64::INFINITY;
        if rate_max > 0.0 {
            // Gershgorin bound on the viscous+friction spectrum gives dt <= 1/rate.
            dt = 0.9 / rate_max;
        }
        if sound2_max > 0.0 {
            dt = dt.min(0.4 * dx / sound2_max.sqrt());
        }
        dt
    };

    let dt0 = stable_dt(rate_max, sound2_max);
    let required = (t_end / dt0).ceil() as u64;
    if required > step_budget {
        return Err(OracleError::BudgetExceeded {
            required,
            budget: step_budget,
        });
    }

    let mut steps = 0u64;
    while state.t < t_end {
        let mut dt = stable_dt(rate_max, sound2_max);
        let last = state.t + dt >= t_end;
        if last {
            dt = t_end - state.t;
        }
        // ghost total stress at the vacuum node is zero
        let mut p_left = 0.0;
        let mut flux_left = 0.0;
        let mut visc_left_new = 0.0;
        let mut q_left_new = 0.0;
        rate_max = 0.0;
        sound2_max = 0.0;
        let mut healthy = true;
        for i in 0..n {
            let u = state.u[i];
            let ux = (state.u[i + 1] - u) * inv_dx;
            let flux = visc[i] * ux;
            let force = -(pressure[i] - p_left)
                + (flux - flux_left)
                + w[i] * (p.gravity - fric[i] * u * u.abs());
            let un = u + dt * force * inv_w[i];
            u_new[i] = un;
            p_left = pressure[i];
            flux_left = flux;

            let q = state.q[i];
            let qn = q - dt * p.rho_l * q * q * ux;
            healthy &= qn > 0.0 && qn.is_finite();
            state.q[i] = qn;
            pressure[i] = pressure_at(i, qn);
            visc[i] = visc_at(i, qn);
            fric[i] = friction_coefficient(if i > 0 { 0.5 * (q_left_new + qn) } else { qn }, p);
            rate_max =
                rate_max.max((visc_left_new + visc[i]) * inv_w[i] * inv_dx + fric[i] * un.abs());
            sound2_max = sound2_max.max(p.gamma * p.rho_l * pressure[i] * qn);
            visc_left_new = visc[i];
            q_left_new = qn;
        }
        u_new[n] = 0.0;
        std::mem::swap(&mut state.u, &mut u_new);
        state.t = if last { t_end } else { state.t + dt };
        steps += 1;
        if steps > 2 * step_budget {
            return Err(OracleError::BudgetExceeded {
                required: steps,
                budget: step_budget,
            });
        }
        if !healthy {
            return Err(OracleError::NonFinite(state.t));
        }
    }
    Ok(state)
}

/// `cQ - cQ_inf` on the grid of `state`.
pub fn deviation(state: &TransformedState, stationary: &StationaryProfile) -> Vec<f64> {
    state
        .c
        .iter()
        .zip(&state.q)
        .zip(&stationary.cq_inf)
        .map(|((c, q), s)| c * q - s)
        .collect()
}

/// Averages a cell field onto a grid `factor` times coarser.
pub fn restrict(fine: &[f64], coarse_cells: usize) -> Result<Vec<f64>, OracleError> {
    if coarse_cells == 0 || !fine.len().is_multiple_of(coarse_cells) {
        return Err(OracleError::NotNested {
            coarse: coarse_cells,
            fine: fine.len(),
        });
    }
    let r = fine.len() / coarse_cells;
    Ok(fine
        .chunks(r)
        .map(|c| c.iter().sum::<f64>() / r as f64)
        .collect())
}

/// L2 and sup distances between cell fields on the coarse grid, the fine
/// one restricted by cell averaging.
pub fn compare_cells(coarse: &[f64], fine: &[f64]) -> Result<(f64, f64), OracleError> {
    let r = restrict(fine, coarse.len())?;
    let dx = 1.0 / coarse.len() as f64;
    let mut l2 = 0.0;
    let mut linf = 0.0_f64;
    for (a, b) in coarse.iter().zip(&r) {
        let d = a - b;
        l2 += d * d * dx;
        linf = linf.max(d.abs());
    }
    Ok((l2.sqrt(), linf))
}

/// `log2(e_coarse / e_fine)` for successive differences on grids refined
/// by two.
pub fn richardson_order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

fn semi_implicit_deviation(
    spec: &InitialDataSpec,
    p: &ModelParams,
    n_cells: usize,
    t_end: f64,
    cfg: &SchemeConfig,
) -> Result<Vec<f64>, OracleError> {
    let grid = MassGrid::new(n_cells)?;
    let s0 = build_initial_data(spec, &grid, p)?;
    let stationary = StationaryProfile::new(&grid, p);
    let cfg = SchemeConfig {
        t_end,
        sample_interval: None,
        ..*cfg
    };
    let out = run_to_time(
        s0,
        &grid,
        p,
        &cfg,
        &mut |_: &TransformedState, _: &StepResult| {},
    )?;
    Ok(deviation(&out.state, &stationary))
}

/// Three-grid self-convergence of the semi-implicit scheme: cells
/// `n, 2n, 4n` at `t_end`, returning the sup/L2 gaps and the order.
pub fn self_convergence(
    spec: &InitialDataSpec,
    p: &ModelParams,
    n_coarse: usize,
    t_end: f64,
    cfg: &SchemeConfig,
) -> Result<OracleReport, OracleError> {
    let grids = [n_coarse, 2 * n_coarse, 4 * n_coarse];
    let devs = std::thread::scope(|s| {
        let handles: Vec<_> = grids
            .iter()
            .map(|&n| s.spawn(move || semi_implicit_deviation(spec, p, n, t_end, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("convergence worker panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let (e1, linf1) = compare_cells(&devs[0], &devs[1])?;
    let (e2, _) = compare_cells(&devs[1], &devs[2])?;
    Ok(OracleReport {
        l2_diff: e1,
        linf_diff: linf1,
        richardson_order: Some(richardson_order(e1, e2)),
    })
}

/// Semi-implicit run on `n_coarse` cells against the explicit reference on
/// `n_fine` cells, both at `t_end`.
pub fn cross_validate(
    spec: &InitialDataSpec,
    p: &ModelParams,
    n_coarse: usize,
    n_fine: usize,
    t_end: f64,
    cfg: &SchemeConfig,
) -> Result<OracleReport, OracleError> {
    let fine_grid = MassGrid::new(n_fine)?;
    let fine_stationary = StationaryProfile::new(&fine_grid, p);
    let (main, reference) = std::thread::scope(|s| {
        let h = s.spawn(|| explicit_reference_run(spec, p, n_fine, t_end, DEFAULT_STEP_BUDGET));
        let main = semi_implicit_deviation(spec, p, n_coarse, t_end, cfg);
        (main, h.join().expect("explicit reference panicked"))
    });
    let reference = deviation(&reference?, &fine_stationary);
    let (l2, linf) = compare_cells(&main?, &reference)?;
    Ok(OracleReport {
        l2_diff: l2,
        linf_diff: linf,
        richardson_order: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riccati_examples() {
        assert_eq!(riccati_exact(1.7, 0.0, 1.0, 123.0).unwrap(), 1.7);
        assert_eq!(riccati_exact(1.0, 1.0, 1.0, 1.0).unwrap(), 0.5);
        assert_eq!(riccati_exact(1.0, -0.5, 1.0, 1.0).unwrap(), 2.0);
        assert!(matches!(
            riccati_exact(1.0, -1.0, 1.0, 1.0),
            Err(OracleError::Degenerate { .. })
        ));
    }

    #[test]
    fn quadrature_examples() {
        let v = midpoint_rule(|h| (h * h - 1.0) / (h * h), 1.0, 2.0, 10_000).unwrap();
        assert!((v - 0.5).abs() < 1e-6);
        assert_eq!(midpoint_rule(|_| 0.0, 0.0, 1.0, 10).unwrap(), 0.0);
        assert_eq!(midpoint_rule(|_| 1.0, 0.0, 1.0, 16).unwrap(), 1.0);
        assert!(midpoint_rule(|_| 1.0, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn restriction_averages() {
        let f = [1.0, 3.0, 5.0, 7.0];
        assert_eq!(restrict(&f, 2).unwrap(), vec![2.0, 6.0]);
        assert!(restrict(&f, 3).is_err());
    }

    #[test]
    fn explicit_keeps_stationary_state() {
        let p = ModelParams::default();
        let s =
            explicit_reference_run(&InitialDataSpec::stationary(), &p, 32, 0.2, 1_000_000).unwrap();
        let g = MassGrid::new(32).unwrap();
        let st = StationaryProfile::new(&g, &p);
        let dev = deviation(&s, &st);
        assert!(dev.iter().all(|d| d.abs() < 1e-12));
        assert!(s.u.iter().all(|u| u.abs() < 1e-12));
    }

    #[test]
    fn explicit_budget_is_enforced() {
        let p = ModelParams::default();
        let e =
            explicit_reference_run(&InitialDataSpec::default(), &p, 1600, 1.0, 1000).unwrap_err();
        assert!(matches!(
            e,
            OracleError::BudgetExceeded { budget: 1000, .. }
        ));
    }
}
