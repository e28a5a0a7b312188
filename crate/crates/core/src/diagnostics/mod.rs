//! Functionals of a state or trajectory: energies, dissipation integrals,
//! the density ratio band, velocity norms, weighted distances to the
//! stationary state, the effective-viscous-flux residual and decay fits.

mod energy;
mod fit;
mod flux;
mod potential;

use thiserror::Error;

pub use energy::{EnergyAudit, EnergyMonitor};
pub use fit::{
    fit_decay_exponent, theoretical_density_rate, DecayFit, FitError, TheoreticalRate,
    MIN_FIT_SAMPLES, VELOCITY_RATE,
};
pub use flux::flux_identity_residual;
pub use potential::relative_potential;

use crate::grid::MassGrid;
use crate::integrator::{Observer, StepResult};
use crate::model::{ModelParams, StationaryProfile, TransformedState};
use crate::pow::Power;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("relative potential needs gamma > 1, got {0}")]
    UnsupportedGamma(f64),
    #[error("densities must be positive (Q = {q}, Q_inf = {q_inf})")]
    NonPositiveDensity { q: f64, q_inf: f64 },
    #[error("time window must be strictly increasing")]
    BadTimeWindow,
    #[error("state does not match the grid")]
    ShapeMismatch,
    #[error("non-finite diagnostic at t = {0}")]
    NonFinite(f64),
}

/// `||u||_{L^p}` for `p = 2, 3, 4, 5`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LpNorms {
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub l5: f64,
}

/// Running time integrals of the dissipation terms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accumulators {
    pub visc: f64,
    pub fric: f64,
}

impl Accumulators {
    pub fn add(&mut self, step: &StepResult) {
        self.visc += step.visc_dissipation;
        self.fric += step.fric_dissipation;
    }
}

/// One time-stamped row of every monitored functional.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_kin: f64,
    pub e_pot: f64,
    pub d_visc_cum: f64,
    pub d_fric_cum: f64,
    /// Extrema of `((cQ)/(cQ_inf))^theta` over cells.
    pub y_min: f64,
    pub y_max: f64,
    pub lp_u: LpNorms,
    pub sup_u: f64,
    pub sup_qux: f64,
    /// `sum x^(1-3/gamma) (cQ - cQ_inf)^2 dx`
    pub w_l2: f64,
    /// `sum x^(((2+alpha)gamma-theta-1)/gamma) (((cQ)^theta - (cQ_inf)^theta)_x)^2 dx`
    pub w_grad: f64,
    /// Same gradient with the weight `x^(((3+alpha)gamma-2theta-1)/gamma)`.
    pub w_grad_time: f64,
    pub sup_theta_dist: f64,
    /// `sum B c^theta Q^(1+theta) u_x^2 dx`
    pub visc_rate: f64,
    pub flux_residual: f64,
    /// Last step size before this sample (zero at the start).
    pub dt: f64,
}

impl DiagnosticsRecord {
    pub fn total_energy(&self) -> f64 {
        self.e_kin + self.e_pot + self.d_visc_cum + self.d_fric_cum
    }

    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.e_kin,
            self.e_pot,
            self.d_visc_cum,
            self.d_fric_cum,
            self.y_min,
            self.y_max,
            self.lp_u.l2,
            self.lp_u.l3,
            self.lp_u.l4,
            self.lp_u.l5,
            self.sup_u,
            self.sup_qux,
            self.w_l2,
            self.w_grad,
            self.w_grad_time,
            self.sup_theta_dist,
            self.visc_rate,
            self.flux_residual,
            self.dt,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Evaluates every single-state functional.
///
/// Cell integrals use the midpoint rule; node integrals use the node control
/// volumes (half cells at both ends). `flux_residual` and `dt` need a
/// trajectory and are left at zero; [`Sampler`] fills them.
#[allow(clippy::needless_range_loop)]
pub fn sample(
    state: &TransformedState,
    grid: &MassGrid,
    p: &ModelParams,
    stationary: &StationaryProfile,
    acc: &Accumulators,
) -> Result<DiagnosticsRecord, DiagnosticsError> {
    if !state.fits(grid) {
        return Err(DiagnosticsError::ShapeMismatch);
    }
    if !(p.gamma > 1.0) {
        return Err(DiagnosticsError::UnsupportedGamma(p.gamma));
    }
    let n = grid.n_cells();
    let dx = grid.dx();
    let gamma = Power::new(p.gamma);
    let theta = Power::new(p.theta);

    let mut e_kin = 0.0;
    let mut lp = [0.0; 4];
    let mut sup_u = 0.0_f64;
    for (i, &u) in state.u.iter().enumerate() {
        let w = grid.node_weight(i);
        let a = u.abs();
        e_kin += 0.5 * w * u * u;
        let a2 = a * a;
        lp[0] += w * a2;
        lp[1] += w * a2 * a;
        lp[2] += w * a2 * a2;
        lp[3] += w * a2 * a2 * a;
        sup_u = sup_u.max(a);
    }

    let mut e_pot = 0.0;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    let mut sup_qux = 0.0_f64;
    let mut w_l2 = 0.0;
    let mut sup_theta_dist = 0.0_f64;
    let mut visc_rate = 0.0;
    let mut theta_dist = vec![0.0; n];
    for j in 0..n {
        let (c, q) = (state.c[j], state.q[j]);
        if !(q > 0.0) {
            return Err(DiagnosticsError::NonPositiveDensity {
                q,
                q_inf: stationary.cq_inf[j] / c,
            });
        }
        let cq = c * q;
        let cq_inf = stationary.cq_inf[j];
        let q_inf = cq_inf / c;
        e_pot += potential::potential(gamma.eval(c), q, q_inf, p) * dx;

        let cq_theta = theta.eval(cq);
        let y = cq_theta / stationary.cq_inf_theta[j];
        y_min = y_min.min(y);
        y_max = y_max.max(y);

        let ux = (state.u[j + 1] - state.u[j]) / dx;
        sup_qux = sup_qux.max((q * ux).abs());
        visc_rate += p.viscosity_coeff * theta.eval(c) * q * theta.eval(q) * ux * ux * dx;

        let d = cq - cq_inf;
        w_l2 += stationary.weight_l2[j] * d * d * dx;

        theta_dist[j] = cq_theta - stationary.cq_inf_theta[j];
        sup_theta_dist = sup_theta_dist.max(theta_dist[j].abs());
    }

    // two-point differences between centers, weighted at the shared node
    let mut w_grad = 0.0;
    let mut w_grad_time = 0.0;
    for i in 1..n {
        let g = (theta_dist[i] - theta_dist[i - 1]) / dx;
        w_grad += stationary.weight_grad[i] * g * g * dx;
        w_grad_time += stationary.weight_grad_time[i] * g * g * dx;
    }

    let rec = DiagnosticsRecord {
        t: state.t,
        e_kin,
        e_pot,
        d_visc_cum: acc.visc,
        d_fric_cum: acc.fric,
        y_min,
        y_max,
        lp_u: LpNorms {
            l2: lp[0].sqrt(),
            l3: lp[1].cbrt(),
            l4: lp[2].sqrt().sqrt(),
            l5: lp[3].powf(0.2),
        },
        sup_u,
        sup_qux,
        w_l2,
        w_grad,
        w_grad_time,
        sup_theta_dist,
        visc_rate,
        flux_residual: 0.0,
        dt: 0.0,
    };
    if !rec.is_finite() {
        return Err(DiagnosticsError::NonFinite(state.t));
    }
    Ok(rec)
}

/// Observer that accumulates dissipation on every step and records a
/// [`DiagnosticsRecord`] at every sampling instant.
///
/// The flux residual of a record is evaluated on the last three stored
/// states, centered on the middle one, i.e. one step before the record time.
/// The initial record gets a one-sided evaluation once two steps exist.
pub struct Sampler<'a> {
    grid: &'a MassGrid,
    params: &'a ModelParams,
    stationary: &'a StationaryProfile,
    acc: Accumulators,
    history: [TransformedState; 3],
    stored: usize,
    newest: usize,
    records: Vec<DiagnosticsRecord>,
    initial_pending: bool,
    error: Option<DiagnosticsError>,
    steps: u64,
}

impl<'a> Sampler<'a> {
    pub fn new(
        initial: &TransformedState,
        grid: &'a MassGrid,
        params: &'a ModelParams,
        stationary: &'a StationaryProfile,
    ) -> Result<Self, DiagnosticsError> {
        let acc = Accumulators::default();
        let first = sample(initial, grid, params, stationary, &acc)?;
        Ok(Self {
            grid,
            params,
            stationary,
            acc,
            history: [initial.clone(), initial.clone(), initial.clone()],
            stored: 1,
            newest: 0,
            records: vec![first],
            initial_pending: true,
            error: None,
            steps: 0,
        })
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn accumulators(&self) -> Accumulators {
        self.acc
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Records and the first error hit while sampling, if any.
    pub fn finish(self) -> Result<Vec<DiagnosticsRecord>, DiagnosticsError> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.records),
        }
    }

    fn ordered(&self) -> [&TransformedState; 3] {
        let k = self.newest;
        [
            &self.history[(k + 1) % 3],
            &self.history[(k + 2) % 3],
            &self.history[k],
        ]
    }

    fn try_observe(
        &mut self,
        state: &TransformedState,
        step: &StepResult,
    ) -> Result<(), DiagnosticsError> {
        self.steps += 1;
        self.acc.add(step);
        self.newest = (self.newest + 1) % 3;
        let slot = &mut self.history[self.newest];
        slot.t = state.t;
        slot.q.copy_from_slice(&state.q);
        slot.u.copy_from_slice(&state.u);
        self.stored = (self.stored + 1).min(3);

        if self.stored == 3 && self.initial_pending {
            let r =
                flux_identity_residual(self.ordered(), 0, self.grid, self.params, self.stationary)?;
            self.records[0].flux_residual = r;
            self.initial_pending = false;
        }
        if step.at_sample {
            let mut rec = sample(state, self.grid, self.params, self.stationary, &self.acc)?;
            rec.dt = step.dt_used;
            if self.stored == 3 {
                rec.flux_residual = flux_identity_residual(
                    self.ordered(),
                    1,
                    self.grid,
                    self.params,
                    self.stationary,
                )?;
            }
            self.records.push(rec);
        }
        Ok(())
    }
}

impl Observer for Sampler<'_> {
    fn observe(&mut self, state: &TransformedState, step: &StepResult) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = self.try_observe(state, step) {
            self.error = Some(e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_initial_data, InitialDataSpec};

    #[test]
    fn stationary_state_is_quiet() {
        let g = MassGrid::new(40).unwrap();
        let p = ModelParams::default();
        let st = StationaryProfile::new(&g, &p);
        let s = build_initial_data(&InitialDataSpec::stationary(), &g, &p).unwrap();
        let r = sample(&s, &g, &p, &st, &Accumulators::default()).unwrap();
        assert_eq!(r.e_kin, 0.0);
        assert!(r.e_pot < 1e-28);
        assert!(r.w_l2 < 1e-28 && r.w_grad < 1e-24);
        assert!(r.sup_theta_dist < 1e-15);
        assert!((r.y_min - 1.0).abs() < 1e-15 && (r.y_max - 1.0).abs() < 1e-15);
        assert_eq!(r.sup_u, 0.0);
    }

    #[test]
    fn uniform_ratio_band() {
        let g = MassGrid::new(40).unwrap();
        let p = ModelParams::default();
        let st = StationaryProfile::new(&g, &p);
        let mut s = build_initial_data(&InitialDataSpec::stationary(), &g, &p).unwrap();
        let k = 2f64.powf(1.0 / p.theta);
        s.q.iter_mut().for_each(|q| *q *= k);
        let r = sample(&s, &g, &p, &st, &Accumulators::default()).unwrap();
        assert!((r.y_min - 2.0).abs() < 1e-14 && (r.y_max - 2.0).abs() < 1e-14);
    }

    #[test]
    fn holder_chain_and_sup_bound() {
        let g = MassGrid::new(64).unwrap();
        let p = ModelParams::default();
        let st = StationaryProfile::new(&g, &p);
        let mut s = build_initial_data(&InitialDataSpec::default(), &g, &p).unwrap();
        for (i, u) in s.u.iter_mut().enumerate().take(64) {
            *u = ((i * 7919) % 13) as f64 / 13.0 - 0.4;
        }
        let r = sample(&s, &g, &p, &st, &Accumulators::default()).unwrap();
        let l = r.lp_u;
        assert!(l.l2 <= l.l3 && l.l3 <= l.l4 && l.l4 <= l.l5 && l.l5 <= r.sup_u);
    }
}
