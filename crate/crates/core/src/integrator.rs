//! First-order semi-implicit time stepping for `(Q, u)`.
//!
//! Pressure and gravity are explicit, friction is linearized around the old
//! speed, viscosity is fully implicit and `Q` is advanced with the exact
//! solution of `Q_t = -rho_l Q^2 u_x` for the frozen new velocity gradient.
//! At the vacuum node the total stress `A (cQ)^gamma - B c^theta Q^(1+theta) u_x`
//! is set to zero.

use thiserror::Error;

use crate::grid::MassGrid;
use crate::model::{friction_coefficient, ModelParams, TransformedState};
use crate::pow::Power;
use crate::tridiag;

pub const MAX_HALVINGS: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub cfl: f64,
    pub dt_max: f64,
    /// Smallest admissible `1 + rho_l Q u_x dt` in any cell.
    pub pos_floor: f64,
    pub t_end: f64,
    /// Kept for an iterative fallback; the tridiagonal solve is direct.
    pub solver_tol: f64,
    /// Steps are shortened to land exactly on multiples of this interval.
    pub sample_interval: Option<f64>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            dt_max: 1e-2,
            pos_floor: 0.1,
            t_end: 200.0,
            solver_tol: 1e-12,
            sample_interval: None,
        }
    }
}

impl SchemeConfig {
    pub fn check(&self) -> Result<(), IntegrationError> {
        let bad = |what: &'static str| Err(IntegrationError::BadConfig(what));
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must lie in (0, 1]");
        }
        if !(self.pos_floor > 0.0 && self.pos_floor < 1.0) {
            return bad("pos_floor must lie in (0, 1)");
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return bad("dt_max must be positive");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be nonnegative");
        }
        if let Some(s) = self.sample_interval {
            if !(s > 0.0 && s.is_finite()) {
                return bad("sample_interval must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepResult {
    pub dt_used: f64,
    pub n_halvings: u32,
    /// Sup over nodes of the momentum residual of the accepted solve.
    pub max_residual: f64,
    /// `dt * sum_j B c^theta Q^(1+theta) (u_x)^2 dx` for this step.
    pub visc_dissipation: f64,
    /// `dt * sum_i w_i h(Q) |u_old| u_new^2` for this step.
    pub fric_dissipation: f64,
    /// The step ended exactly on a sampling instant (or on `t_end`).
    pub at_sample: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid scheme configuration: {0}")]
    BadConfig(&'static str),
    #[error("state does not match the grid")]
    ShapeMismatch,
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("degenerate tridiagonal system at t = {t} (row {row})")]
    Singular {
        t: f64,
        row: usize,
        state: Box<TransformedState>,
    },
    #[error("positivity lost after {MAX_HALVINGS} step halvings at t = {t} (dt = {dt:e})")]
    PositivityBreakdown {
        t: f64,
        dt: f64,
        state: Box<TransformedState>,
    },
}

impl IntegrationError {
    /// Time at which the integration stopped, where known.
    pub fn time(&self) -> Option<f64> {
        match self {
            IntegrationError::NonFinite { t }
            | IntegrationError::Singular { t, .. }
            | IntegrationError::PositivityBreakdown { t, .. } => Some(*t),
            _ => None,
        }
    }
}

/// Acoustic time step `min(dt_max, cfl dx / max_j a_j)` with the Lagrangian
/// sound speed `a^2 = gamma rho_l A c^gamma Q^(gamma+1)`.
pub fn compute_dt(
    state: &TransformedState,
    grid: &MassGrid,
    p: &ModelParams,
    cfg: &SchemeConfig,
) -> Result<f64, IntegrationError> {
    if !state.is_finite() {
        return Err(IntegrationError::NonFinite { t: state.t });
    }
    let gamma = Power::new(p.gamma);
    let scale = p.gamma * p.rho_l * p.pressure_coeff;
    let max_sq = state
        .c
        .iter()
        .zip(&state.q)
        .map(|(&c, &q)| scale * gamma.eval(c * q) * q)
        .fold(0.0, f64::max);
    let speed = max_sq.sqrt();
    let dt = if speed > 0.0 {
        (cfg.cfl * grid.dx() / speed).min(cfg.dt_max)
    } else {
        cfg.dt_max
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(IntegrationError::NonFinite { t: state.t });
    }
    Ok(dt)
}

/// `Q / (1 + rho_l Q u_x dt)`: the update `1/Q_new = 1/Q + rho_l u_x dt`.
#[inline]
pub fn reciprocal_update(q: f64, ux: f64, rho_l: f64, dt: f64) -> f64 {
    q / (1.0 + rho_l * q * ux * dt)
}

/// Reusable buffers and exponent tables for one grid and parameter set.
#[derive(Debug, Clone)]
pub struct SemiImplicit {
    grid: MassGrid,
    params: ModelParams,
    cfg: SchemeConfig,
    gamma: Power,
    theta: Power,
    // c^theta cached against the c it was built from
    c_cache: Vec<f64>,
    c_theta: Vec<f64>,
    pressure: Vec<f64>,
    visc: Vec<f64>,
    fric: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    sol: Vec<f64>,
    scratch: Vec<f64>,
    ux: Vec<f64>,
}

impl SemiImplicit {
    pub fn new(
        grid: &MassGrid,
        params: &ModelParams,
        cfg: &SchemeConfig,
    ) -> Result<Self, IntegrationError> {
        cfg.check()?;
        let n = grid.n_cells();
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            cfg: *cfg,
            gamma: Power::new(params.gamma),
            theta: Power::new(params.theta),
            c_cache: Vec::new(),
            c_theta: vec![0.0; n],
            pressure: vec![0.0; n],
            visc: vec![0.0; n],
            fric: vec![0.0; n],
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
            sol: vec![0.0; n],
            scratch: vec![0.0; n],
            ux: vec![0.0; n],
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &MassGrid {
        &self.grid
    }

    fn refresh_coefficients(&mut self, state: &TransformedState) {
        if self.c_cache != state.c {
            self.c_cache.clone_from(&state.c);
            for (ct, &c) in self.c_theta.iter_mut().zip(&state.c) {
                *ct = self.theta.eval(c);
            }
        }
        let p = &self.params;
        for j in 0..self.grid.n_cells() {
            let (c, q) = (state.c[j], state.q[j]);
            self.pressure[j] = p.pressure_coeff * self.gamma.eval(c * q);
            self.visc[j] = p.viscosity_coeff * self.c_theta[j] * q * self.theta.eval(q);
        }
        // friction coefficient h(Q)|u| at nodes, Q averaged from adjacent cells
        let n = self.grid.n_cells();
        for i in 0..n {
            let q_node = if i == 0 {
                state.q[0]
            } else {
                0.5 * (state.q[i - 1] + state.q[i])
            };
            self.fric[i] = friction_coefficient(q_node, p) * state.u[i].abs();
        }
    }

    /// Tridiagonal momentum system, each row scaled by the node weight.
    fn assemble(&mut self, state: &TransformedState, dt: f64) {
        let n = self.grid.n_cells();
        let dx = self.grid.dx();
        let g = self.params.gravity;
        for i in 0..n {
            let w = self.grid.node_weight(i);
            let v_left = if i > 0 { self.visc[i - 1] } else { 0.0 };
            let v_right = self.visc[i];
            let p_left = if i > 0 { self.pressure[i - 1] } else { 0.0 };
            self.lower[i] = -v_left / dx;
            self.upper[i] = if i + 1 < n { -v_right / dx } else { 0.0 };
            self.diag[i] = w * (1.0 / dt + self.fric[i]) + (v_left + v_right) / dx;
            self.sol[i] = w * (state.u[i] / dt + g) - (self.pressure[i] - p_left);
        }
    }

    fn residual(&self, state: &TransformedState, dt: f64) -> f64 {
        let n = self.grid.n_cells();
        let g = self.params.gravity;
        let mut worst = 0.0_f64;
        for i in 0..n {
            let w = self.grid.node_weight(i);
            let p_left = if i > 0 { self.pressure[i - 1] } else { 0.0 };
            let rhs = w * (state.u[i] / dt + g) - (self.pressure[i] - p_left);
            let mut lhs = self.diag[i] * self.sol[i];
            if i > 0 {
                lhs += self.lower[i] * self.sol[i - 1];
            }
            if i + 1 < n {
                lhs += self.upper[i] * self.sol[i + 1];
            }
            worst = worst.max(((lhs - rhs) / w).abs());
        }
        worst
    }

    /// Advances `state` by at most `dt`, halving on positivity loss.
    ///
    /// On error the state is left untouched.
    pub fn step(
        &mut self,
        state: &mut TransformedState,
        dt: f64,
    ) -> Result<StepResult, IntegrationError> {
        if !state.fits(&self.grid) {
            return Err(IntegrationError::ShapeMismatch);
        }
        if !state.is_finite() || !(dt > 0.0 && dt.is_finite()) {
            return Err(IntegrationError::NonFinite { t: state.t });
        }
        self.refresh_coefficients(state);
        let n = self.grid.n_cells();
        let rho = self.params.rho_l;
        let dx = self.grid.dx();
        let mut dt = dt;
        let mut halvings = 0;
        loop {
            self.assemble(state, dt);
            if let Err(e) = tridiag::solve_in_place(
                &self.lower,
                &self.diag,
                &self.upper,
                &mut self.sol,
                &mut self.scratch,
            ) {
                return Err(IntegrationError::Singular {
                    t: state.t,
                    row: e.row,
                    state: Box::new(state.clone()),
                });
            }
            for j in 0..n {
                let right = if j + 1 < n { self.sol[j + 1] } else { 0.0 };
                self.ux[j] = (right - self.sol[j]) / dx;
            }
            let positive = state
                .q
                .iter()
                .zip(&self.ux)
                .all(|(&q, &ux)| 1.0 + rho * q * ux * dt >= self.cfg.pos_floor);
            if positive {
                break;
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(IntegrationError::PositivityBreakdown {
                    t: state.t,
                    dt,
                    state: Box::new(state.clone()),
                });
            }
            dt *= 0.5;
        }

        let max_residual = self.residual(state, dt);
        let mut visc = 0.0;
        for j in 0..n {
            visc += self.visc[j] * self.ux[j] * self.ux[j];
        }
        let mut fric = 0.0;
        for i in 0..n {
            fric += self.grid.node_weight(i) * self.fric[i] * self.sol[i] * self.sol[i];
        }

        for (q, &ux) in state.q.iter_mut().zip(&self.ux) {
            *q = reciprocal_update(*q, ux, rho, dt);
        }
        state.u[..n].copy_from_slice(&self.sol);
        state.u[n] = 0.0;
        state.t += dt;
        if !state.is_finite() {
            return Err(IntegrationError::NonFinite { t: state.t });
        }
        Ok(StepResult {
            dt_used: dt,
            n_halvings: halvings,
            max_residual,
            visc_dissipation: visc * dx * dt,
            fric_dissipation: fric * dt,
            at_sample: false,
        })
    }
}

/// Read-only hook called after every accepted step.
pub trait Observer {
    fn observe(&mut self, state: &TransformedState, step: &StepResult);
}

impl<F: FnMut(&TransformedState, &StepResult)> Observer for F {
    fn observe(&mut self, state: &TransformedState, step: &StepResult) {
        self(state, step)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub state: TransformedState,
    pub steps: u64,
}

/// Steps from `state.t` to `cfg.t_end`.
///
/// Steps are shortened so the trajectory passes exactly through every
/// multiple of `cfg.sample_interval` and ends exactly at `t_end`; those
/// steps are flagged `at_sample`. A step that would leave a sliver shorter
/// than one step before the target is split in two equal halves instead.
pub fn run_to_time(
    state: TransformedState,
    grid: &MassGrid,
    p: &ModelParams,
    cfg: &SchemeConfig,
    observer: &mut impl Observer,
) -> Result<RunOutcome, IntegrationError> {
    let mut solver = SemiImplicit::new(grid, p, cfg)?;
    let mut state = state;
    if !state.fits(grid) {
        return Err(IntegrationError::ShapeMismatch);
    }
    let mut steps = 0u64;
    let mut sample_index: u64 = match cfg.sample_interval {
        Some(s) => (state.t / s).floor() as u64 + 1,
        None => 0,
    };
    while state.t < cfg.t_end {
        let target = match cfg.sample_interval {
            Some(s) => {
                let mut next = s * sample_index as f64;
                while next <= state.t {
                    sample_index += 1;
                    next = s * sample_index as f64;
                }
                next.min(cfg.t_end)
            }
            None => cfg.t_end,
        };
        let dt_cfl = compute_dt(&state, grid, p, cfg)?;
        let remaining = target - state.t;
        let (dt, lands) = if dt_cfl >= remaining {
            (remaining, true)
        } else if 2.0 * dt_cfl > remaining {
            (0.5 * remaining, false)
        } else {
            (dt_cfl, false)
        };
        let mut res = solver.step(&mut state, dt)?;
        steps += 1;
        if lands && res.n_halvings == 0 {
            state.t = target;
            res.at_sample = true;
            if cfg.sample_interval.is_some() && target < cfg.t_end {
                sample_index += 1;
            }
        }
        observer.observe(&state, &res);
    }
    Ok(RunOutcome { state, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_initial_data, InitialDataSpec, StationaryProfile};

    fn default_setup(n: usize) -> (MassGrid, ModelParams, TransformedState) {
        let g = MassGrid::new(n).unwrap();
        let p = ModelParams::default();
        let s = build_initial_data(&InitialDataSpec::default(), &g, &p).unwrap();
        (g, p, s)
    }

    #[test]
    fn dt_examples() {
        let g = MassGrid::new(100).unwrap();
        let p = ModelParams::default();
        let cfg = SchemeConfig {
            dt_max: 1.0,
            ..SchemeConfig::default()
        };
        let s = TransformedState {
            t: 0.0,
            c: vec![1.0; 100],
            q: vec![1.0; 100],
            u: vec![0.0; 101],
        };
        let dt = compute_dt(&s, &g, &p, &cfg).unwrap();
        assert!((dt - 0.4 * 0.01 / 2f64.sqrt()).abs() < 1e-15);

        let g2 = MassGrid::new(50).unwrap();
        let s2 = TransformedState {
            c: vec![1.0; 50],
            q: vec![1.0; 50],
            u: vec![0.0; 51],
            ..s.clone()
        };
        let dt2 = compute_dt(&s2, &g2, &p, &cfg).unwrap();
        assert!((dt2 / dt - 2.0).abs() < 1e-14);

        let vac = TransformedState {
            q: vec![1e-300; 100],
            ..s.clone()
        };
        assert_eq!(compute_dt(&vac, &g, &p, &cfg).unwrap(), 1.0);

        let bad = TransformedState {
            q: vec![f64::NAN; 100],
            ..s
        };
        assert!(compute_dt(&bad, &g, &p, &cfg).is_err());
    }

    #[test]
    fn riccati_half() {
        assert_eq!(reciprocal_update(1.0, 1.0, 1.0, 1.0), 0.5);
    }

    #[test]
    fn stationary_is_fixed_point() {
        let g = MassGrid::new(64).unwrap();
        let p = ModelParams::default();
        let s0 = build_initial_data(&InitialDataSpec::stationary(), &g, &p).unwrap();
        let st = StationaryProfile::new(&g, &p);
        let cfg = SchemeConfig::default();
        let mut solver = SemiImplicit::new(&g, &p, &cfg).unwrap();
        let mut s = s0.clone();
        for _ in 0..200 {
            let dt = compute_dt(&s, &g, &p, &cfg).unwrap();
            solver.step(&mut s, dt).unwrap();
        }
        let du = s.u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!(du < 1e-12, "{du}");
        for (a, b) in s.cq().iter().zip(&st.cq_inf) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(s.c, s0.c);
    }

    #[test]
    fn motion_toward_lower_pressure() {
        let g = MassGrid::new(32).unwrap();
        let p = ModelParams {
            gravity: 1e-300,
            friction: 0.0,
            ..ModelParams::default()
        };
        // pressure bump in the middle of the column
        let q: Vec<f64> = g
            .centers()
            .iter()
            .map(|x| 1.0 + 0.5 * (-(x - 0.5f64).powi(2) * 100.0).exp())
            .collect();
        let mut s = TransformedState {
            t: 0.0,
            c: vec![1.0; 32],
            q,
            u: vec![0.0; 33],
        };
        let cfg = SchemeConfig::default();
        let mut solver = SemiImplicit::new(&g, &p, &cfg).unwrap();
        solver.step(&mut s, 1e-3).unwrap();
        // right of the bump pressure falls, fluid accelerates to +x
        assert!(s.u[20] > 0.0);
        // left of the bump pressure rises, fluid accelerates to -x
        assert!(s.u[12] < 0.0);
    }

    #[test]
    fn invariants_along_default_run() {
        let (g, p, s0) = default_setup(64);
        let c0 = s0.c.clone();
        let cfg = SchemeConfig {
            t_end: 2.0,
            sample_interval: Some(0.25),
            ..SchemeConfig::default()
        };
        let mut samples = Vec::new();
        let mut obs = |s: &TransformedState, r: &StepResult| {
            assert!(s.q.iter().all(|&q| q > 0.0));
            assert_eq!(*s.u.last().unwrap(), 0.0);
            assert_eq!(s.c, c0);
            assert!(r.dt_used > 0.0);
            assert!(r.max_residual < 1e-8);
            if r.at_sample {
                samples.push(s.t);
            }
        };
        let out = run_to_time(s0, &g, &p, &cfg, &mut obs).unwrap();
        assert_eq!(out.state.t, 2.0);
        assert_eq!(
            samples,
            (1..=8).map(|k| k as f64 * 0.25).collect::<Vec<_>>()
        );
    }

    #[test]
    fn zero_horizon() {
        let (g, p, s0) = default_setup(16);
        let cfg = SchemeConfig {
            t_end: 0.0,
            ..SchemeConfig::default()
        };
        let out = run_to_time(
            s0.clone(),
            &g,
            &p,
            &cfg,
            &mut |_: &TransformedState, _: &StepResult| {},
        )
        .unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.state, s0);
    }

    #[test]
    fn friction_only_contracts() {
        // no pressure gradient, no gravity, uniform Q: friction alone must
        // shrink |u| at every node
        let g = MassGrid::new(16).unwrap();
        let p = ModelParams {
            gravity: 0.0,
            viscosity_coeff: 0.0,
            pressure_coeff: 0.0,
            friction: 5.0,
            ..ModelParams::default()
        };
        let u: Vec<f64> = (0..17)
            .map(|i| {
                if i == 16 {
                    0.0
                } else {
                    ((i as f64) * 0.7 + 0.3).sin()
                }
            })
            .collect();
        let mut s = TransformedState {
            t: 0.0,
            c: vec![1.0; 16],
            q: vec![1.0; 16],
            u: u.clone(),
        };
        let cfg = SchemeConfig::default();
        let mut solver = SemiImplicit::new(&g, &p, &cfg).unwrap();
        solver.step(&mut s, 0.5).unwrap();
        for (new, old) in s.u.iter().zip(&u) {
            assert!(new.abs() <= old.abs(), "{new} {old}");
        }
    }

    #[test]
    fn halving_protects_positivity() {
        // strong expansion with a huge step forces halvings
        let g = MassGrid::new(16).unwrap();
        let p = ModelParams::default();
        let u: Vec<f64> = g.nodes().iter().map(|x| 50.0 * (1.0 - x)).collect();
        let mut s = TransformedState {
            t: 0.0,
            c: vec![1.0; 16],
            q: vec![1.0; 16],
            u,
        };
        *s.u.last_mut().unwrap() = 0.0;
        let cfg = SchemeConfig::default();
        let mut solver = SemiImplicit::new(&g, &p, &cfg).unwrap();
        let r = solver.step(&mut s, 10.0).unwrap();
        assert!(r.n_halvings > 0);
        assert!(s.q.iter().all(|&q| q > 0.0));
    }
}
