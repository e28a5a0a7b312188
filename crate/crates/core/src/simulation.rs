//! One simulation end to end: initial data, time stepping, diagnostics.

use thiserror::Error;

use crate::diagnostics::{
    fit_decay_exponent, DecayFit, DiagnosticsError, DiagnosticsRecord, EnergyAudit, EnergyMonitor,
    FitError, Sampler,
};
use crate::grid::{GridError, MassGrid};
use crate::integrator::{run_to_time, IntegrationError, SchemeConfig};
use crate::model::{
    build_initial_data, validate_params, InitialDataSpec, ModelError, ModelParams, ParamError,
    RegimeViolation, StationaryProfile, TransformedState,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub params: ModelParams,
    pub initial: InitialDataSpec,
    pub n_cells: usize,
    pub scheme: SchemeConfig,
    /// Run even when `theta` lies outside the convergence window.
    pub force_out_of_regime: bool,
}

impl Default for Scenario {
    /// `gamma = 2, theta = 1/2, alpha = 0, f = g = 1`, 400 cells to `t = 200`
    /// sampled every half time unit.
    fn default() -> Self {
        Self {
            params: ModelParams::default(),
            initial: InitialDataSpec::default(),
            n_cells: 400,
            scheme: SchemeConfig {
                sample_interval: Some(0.5),
                ..SchemeConfig::default()
            },
            force_out_of_regime: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("parameters outside the convergence window ({0}); force to run anyway")]
    OutOfRegime(RegimeViolation),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("integration failed: {0}")]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

/// Fitted exponents of `sup|u|`, `sup|(cQ)^theta - (cQ_inf)^theta|` and the
/// weighted `L^2` distance plus `||u||_2^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFits {
    pub velocity: Result<DecayFit, FitError>,
    pub density: Result<DecayFit, FitError>,
    pub weighted: Result<DecayFit, FitError>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: MassGrid,
    pub stationary: StationaryProfile,
    pub initial: TransformedState,
    pub final_state: TransformedState,
    pub records: Vec<DiagnosticsRecord>,
    pub steps: u64,
}

impl Trajectory {
    /// `(t, f(record))` pairs for fitting.
    pub fn series(&self, f: impl Fn(&DiagnosticsRecord) -> f64) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, f(r))).collect()
    }

    /// Power-law fits of the three decaying functionals over `window`.
    pub fn decay_fits(&self, window: (f64, f64)) -> DecayFits {
        DecayFits {
            velocity: fit_decay_exponent(&self.series(|r| r.sup_u), window),
            density: fit_decay_exponent(&self.series(|r| r.sup_theta_dist), window),
            weighted: fit_decay_exponent(&self.series(|r| r.w_l2 + r.lp_u.l2 * r.lp_u.l2), window),
        }
    }

    /// Record whose time is closest to `t`.
    pub fn record_near(&self, t: f64) -> Option<&DiagnosticsRecord> {
        self.records
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

impl Scenario {
    pub fn check(&self) -> Result<(), SimulationError> {
        let report = validate_params(&self.params)?;
        if !self.force_out_of_regime {
            if let Some(v) = report.violations.first() {
                return Err(SimulationError::OutOfRegime(*v));
            }
        }
        self.scheme.check()?;
        Ok(())
    }

    pub fn initial_state(&self) -> Result<(MassGrid, TransformedState), SimulationError> {
        let grid = MassGrid::new(self.n_cells)?;
        let state = build_initial_data(&self.initial, &grid, &self.params)?;
        Ok((grid, state))
    }

    pub fn run(&self) -> Result<Trajectory, SimulationError> {
        self.check()?;
        let (grid, initial) = self.initial_state()?;
        let stationary = StationaryProfile::new(&grid, &self.params);
        let mut sampler = Sampler::new(&initial, &grid, &self.params, &stationary)?;
        let out = run_to_time(
            initial.clone(),
            &grid,
            &self.params,
            &self.scheme,
            &mut sampler,
        )?;
        let records = sampler.finish()?;
        Ok(Trajectory {
            grid,
            stationary,
            initial,
            final_state: out.state,
            records,
            steps: out.steps,
        })
    }

    /// Runs the scenario tracking only the energy balance, after every step.
    pub fn energy_audit(&self) -> Result<EnergyAudit, SimulationError> {
        self.check()?;
        let (grid, initial) = self.initial_state()?;
        let stationary = StationaryProfile::new(&grid, &self.params);
        let mut monitor = EnergyMonitor::new(&initial, &grid, &self.params, &stationary)?;
        run_to_time(initial, &grid, &self.params, &self.scheme, &mut monitor)?;
        Ok(monitor.finish()?)
    }
}
