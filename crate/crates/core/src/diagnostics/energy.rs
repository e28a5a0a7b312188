use super::DiagnosticsError;
use crate::grid::MassGrid;
use crate::integrator::{Observer, StepResult};
use crate::model::{ModelParams, StationaryProfile, TransformedState};
use crate::pow::Power;

/// Summary of the discrete energy balance along a run.
///
/// The balanced quantity is `E_kin + E_pot + D_visc_cum + D_fric_cum`; an
/// *increase* of it between two checkpoints is a violation of discrete
/// dissipation. Slack is `10 dt^2 E(0)` per step.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyAudit {
    pub initial_energy: f64,
    pub final_balance: f64,
    pub steps: u64,
    /// Largest step-to-step increase (0 if the balance never rose).
    pub worst_step_increase: f64,
    /// Largest step-to-step increase divided by that step's slack.
    pub worst_step_ratio: f64,
    /// Largest increase between consecutive sampling instants.
    pub worst_interval_increase: f64,
    /// That increase divided by the summed per-step slack of the interval.
    pub worst_interval_ratio: f64,
}

impl EnergyAudit {
    pub fn within_slack(&self) -> bool {
        self.worst_step_ratio <= 1.0 && self.worst_interval_ratio <= 1.0
    }
}

/// Observer tracking the energy balance after every step.
pub struct EnergyMonitor<'a> {
    grid: &'a MassGrid,
    params: &'a ModelParams,
    // per cell: A c^gamma Q_inf^(gamma-1) / rho_l * dx, and Q_inf
    pot_scale: Vec<f64>,
    q_inf: Vec<f64>,
    audit: EnergyAudit,
    dissipated: f64,
    prev_balance: f64,
    sample_balance: f64,
    interval_slack: f64,
    error: Option<DiagnosticsError>,
}

impl<'a> EnergyMonitor<'a> {
    pub fn new(
        initial: &TransformedState,
        grid: &'a MassGrid,
        params: &'a ModelParams,
        stationary: &StationaryProfile,
    ) -> Result<Self, DiagnosticsError> {
        if !initial.fits(grid) {
            return Err(DiagnosticsError::ShapeMismatch);
        }
        if !(params.gamma > 1.0) {
            return Err(DiagnosticsError::UnsupportedGamma(params.gamma));
        }
        let gamma = Power::new(params.gamma);
        let g1 = params.gamma - 1.0;
        let q_inf: Vec<f64> = initial
            .c
            .iter()
            .zip(&stationary.cq_inf)
            .map(|(c, s)| s / c)
            .collect();
        let pot_scale = initial
            .c
            .iter()
            .zip(&q_inf)
            .map(|(&c, &qi)| {
                params.pressure_coeff * gamma.eval(c) * qi.powf(g1) / params.rho_l * grid.dx()
            })
            .collect();
        let mut monitor = Self {
            grid,
            params,
            pot_scale,
            q_inf,
            audit: EnergyAudit {
                initial_energy: 0.0,
                final_balance: 0.0,
                steps: 0,
                worst_step_increase: 0.0,
                worst_step_ratio: 0.0,
                worst_interval_increase: 0.0,
                worst_interval_ratio: 0.0,
            },
            dissipated: 0.0,
            prev_balance: 0.0,
            sample_balance: 0.0,
            interval_slack: 0.0,
            error: None,
        };
        let e0 = monitor.energy(initial)?;
        monitor.audit.initial_energy = e0;
        monitor.audit.final_balance = e0;
        monitor.prev_balance = e0;
        monitor.sample_balance = e0;
        Ok(monitor)
    }

    /// `E_kin + E_pot` of `state`.
    pub fn energy(&self, state: &TransformedState) -> Result<f64, DiagnosticsError> {
        let mut e_kin = 0.0;
        for (i, &u) in state.u.iter().enumerate() {
            e_kin += 0.5 * self.grid.node_weight(i) * u * u;
        }
        let g1 = self.params.gamma - 1.0;
        let mut e_pot = 0.0;
        for ((&q, &qi), &scale) in state.q.iter().zip(&self.q_inf).zip(&self.pot_scale) {
            if !(q > 0.0) {
                return Err(DiagnosticsError::NonPositiveDensity { q, q_inf: qi });
            }
            let r = q / qi;
            e_pot += (scale * ((g1 * r.ln()).exp_m1() / g1 + (1.0 - r) / r)).max(0.0);
        }
        let e = e_kin + e_pot;
        if !e.is_finite() {
            return Err(DiagnosticsError::NonFinite(state.t));
        }
        Ok(e)
    }

    pub fn finish(self) -> Result<EnergyAudit, DiagnosticsError> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.audit),
        }
    }

    fn ratio(increase: f64, slack: f64) -> f64 {
        if increase <= 0.0 {
            0.0
        } else if slack > 0.0 {
            increase / slack
        } else {
            f64::INFINITY
        }
    }
}

impl Observer for EnergyMonitor<'_> {
    fn observe(&mut self, state: &TransformedState, step: &StepResult) {
        if self.error.is_some() {
            return;
        }
        let e = match self.energy(state) {
            Ok(e) => e,
            Err(err) => {
                self.error = Some(err);
                return;
            }
        };
        self.dissipated += step.visc_dissipation + step.fric_dissipation;
        let balance = e + self.dissipated;
        let slack = 10.0 * step.dt_used * step.dt_used * self.audit.initial_energy;
        let a = &mut self.audit;
        a.steps += 1;
        a.final_balance = balance;

        let inc = balance - self.prev_balance;
        a.worst_step_increase = a.worst_step_increase.max(inc);
        a.worst_step_ratio = a.worst_step_ratio.max(Self::ratio(inc, slack));
        self.prev_balance = balance;

        self.interval_slack += slack;
        if step.at_sample {
            let inc = balance - self.sample_balance;
            a.worst_interval_increase = a.worst_interval_increase.max(inc);
            a.worst_interval_ratio = a
                .worst_interval_ratio
                .max(Self::ratio(inc, self.interval_slack));
            self.sample_balance = balance;
            self.interval_slack = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{sample, Accumulators};
    use crate::model::{build_initial_data, InitialDataSpec};

    #[test]
    fn energy_matches_full_sample() {
        let g = MassGrid::new(64).unwrap();
        let p = ModelParams::default();
        let st = StationaryProfile::new(&g, &p);
        let s = build_initial_data(&InitialDataSpec::default(), &g, &p).unwrap();
        let m = EnergyMonitor::new(&s, &g, &p, &st).unwrap();
        let rec = sample(&s, &g, &p, &st, &Accumulators::default()).unwrap();
        let e = m.energy(&s).unwrap();
        assert!(
            (e - rec.total_energy()).abs() <= 1e-14 * e.max(1e-300),
            "{e} vs {}",
            rec.total_energy()
        );
    }

    #[test]
    fn stationary_state_has_zero_energy() {
        let g = MassGrid::new(16).unwrap();
        let p = ModelParams::default();
        let st = StationaryProfile::new(&g, &p);
        let s = build_initial_data(&InitialDataSpec::stationary(), &g, &p).unwrap();
        let m = EnergyMonitor::new(&s, &g, &p, &st).unwrap();
        assert_eq!(m.finish().unwrap().initial_energy, 0.0);
    }
}
