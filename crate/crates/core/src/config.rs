//! Line-oriented `key = value` run configuration.
//!
//! `#` starts a comment. Unknown keys are rejected; missing keys take the
//! defaults of the reference scenario. Sweep lists are comma-separated.

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::integrator::SchemeConfig;
use crate::model::{
    validate_params, InitialDataSpec, ModelParams, ParamError, ProfileKind, RegimeViolation,
};
use crate::simulation::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Single,
    Sweep,
    Verify,
}

impl Mode {
    fn as_str(&self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Sweep => "sweep",
            Mode::Verify => "verify",
        }
    }
}

/// Parameter lists spanned by a sweep. Empty lists keep the base value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub gamma: Vec<f64>,
    pub theta: Vec<f64>,
    pub alpha: Vec<f64>,
    pub friction: Vec<f64>,
    pub max_parallel: usize,
    /// Largest admissible cross-product size.
    pub budget: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            gamma: Vec::new(),
            theta: Vec::new(),
            alpha: Vec::new(),
            friction: Vec::new(),
            max_parallel: 4,
            budget: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub n_cells: usize,
    pub t_end: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub pos_floor: f64,
    pub sample_interval: f64,
    pub initial: InitialDataSpec,
    pub mode: Mode,
    pub force_out_of_regime: bool,
    pub output_dir: PathBuf,
    /// Decay-fit window; `None` means `[t_end/20, t_end]`.
    pub fit_window: Option<(f64, f64)>,
    pub sweep: SweepSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scheme = SchemeConfig::default();
        Self {
            params: ModelParams::default(),
            n_cells: 400,
            t_end: 200.0,
            cfl: scheme.cfl,
            dt_max: scheme.dt_max,
            pos_floor: scheme.pos_floor,
            sample_interval: 0.5,
            initial: InitialDataSpec::default(),
            mode: Mode::Single,
            force_out_of_regime: false,
            output_dir: PathBuf::from("out"),
            fit_window: None,
            sweep: SweepSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error("constraints {} violated; pass force_out_of_regime to run anyway", join(.0))]
    Regime(Vec<RegimeViolation>),
}

impl RunConfig {
    pub fn fit_window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or((self.t_end / 20.0, self.t_end))
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig {
            cfl: self.cfl,
            dt_max: self.dt_max,
            pos_floor: self.pos_floor,
            t_end: self.t_end,
            sample_interval: Some(self.sample_interval),
            ..SchemeConfig::default()
        }
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            params: self.params,
            initial: self.initial,
            n_cells: self.n_cells,
            scheme: self.scheme(),
            force_out_of_regime: self.force_out_of_regime,
        }
    }

    /// Structural checks plus the parameter window.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_cells < crate::grid::MIN_CELLS {
            return Err(ConfigError::Invalid(format!(
                "n_cells = {} below the minimum of {}",
                self.n_cells,
                crate::grid::MIN_CELLS
            )));
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return Err(ConfigError::Invalid(
                "sample_interval must be positive".into(),
            ));
        }
        if self.sweep.max_parallel == 0 {
            return Err(ConfigError::Invalid(
                "max_parallel must be at least 1".into(),
            ));
        }
        if let Some((lo, hi)) = self.fit_window {
            if !(lo < hi) {
                return Err(ConfigError::Invalid(
                    "fit window must satisfy fit_t_lo < fit_t_hi".into(),
                ));
            }
        }
        self.scheme()
            .check()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let report = validate_params(&self.params)?;
        if !self.force_out_of_regime && !report.violations.is_empty() {
            return Err(ConfigError::Regime(report.violations));
        }
        Ok(())
    }

    /// Canonical text form; parsing it yields the same configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let i = &self.initial;
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("gamma", p.gamma.to_string());
        kv("theta", p.theta.to_string());
        kv("alpha", p.alpha.to_string());
        kv("rho_l", p.rho_l.to_string());
        kv("A", p.pressure_coeff.to_string());
        kv("B", p.viscosity_coeff.to_string());
        kv("f", p.friction.to_string());
        kv("g", p.gravity.to_string());
        kv("n_cells", self.n_cells.to_string());
        kv("t_end", self.t_end.to_string());
        kv("cfl", self.cfl.to_string());
        kv("dt_max", self.dt_max.to_string());
        kv("pos_floor", self.pos_floor.to_string());
        kv("sample_interval", self.sample_interval.to_string());
        kv(
            "profile",
            match i.profile {
                ProfileKind::Modulated => "modulated",
                ProfileKind::Stationary => "stationary",
            }
            .into(),
        );
        kv("kappa_lo", i.kappa_lo.to_string());
        kv("kappa_hi", i.kappa_hi.to_string());
        kv("c_amp", i.c_amp.to_string());
        kv("u_amp", i.u_amp.to_string());
        kv("perturb_wavenumber", i.perturb_wavenumber.to_string());
        kv("mode", self.mode.as_str().into());
        kv("force_out_of_regime", self.force_out_of_regime.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        if let Some((lo, hi)) = self.fit_window {
            kv("fit_t_lo", lo.to_string());
            kv("fit_t_hi", hi.to_string());
        }
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let sw = &self.sweep;
        for (k, v) in [
            ("sweep_gamma", &sw.gamma),
            ("sweep_theta", &sw.theta),
            ("sweep_alpha", &sw.alpha),
            ("sweep_f", &sw.friction),
        ] {
            if !v.is_empty() {
                kv(k, list(v));
            }
        }
        kv("max_parallel", sw.max_parallel.to_string());
        kv("sweep_budget", sw.budget.to_string());
        s
    }
}

fn join(v: &[RegimeViolation]) -> String {
    v.iter().map(|v| v.code()).collect::<Vec<_>>().join(", ")
}

/// Parses and validates, rejecting out-of-regime parameters unless the text
/// sets `force_out_of_regime = true`.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, false)
}

/// As [`parse_config`], with `force` OR-ed into `force_out_of_regime`.
pub fn parse_config_with(text: &str, force: bool) -> Result<RunConfig, ConfigError> {
    let mut cfg = parse_raw(text)?;
    cfg.force_out_of_regime |= force;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_raw(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut seen = std::collections::HashSet::new();
    let mut fit_lo = None;
    let mut fit_hi = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or(ConfigError::Malformed { line })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Malformed { line });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.into(),
            });
        }
        let bad = || ConfigError::BadValue {
            line,
            key: key.into(),
            value: value.into(),
        };
        let num = || value.parse::<f64>().map_err(|_| bad());
        let int = || value.parse::<usize>().map_err(|_| bad());
        let list = || -> Result<Vec<f64>, ConfigError> {
            value
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                .collect()
        };
        match key {
            "gamma" => cfg.params.gamma = num()?,
            "theta" => cfg.params.theta = num()?,
            "alpha" => cfg.params.alpha = num()?,
            "rho_l" => cfg.params.rho_l = num()?,
            "A" => cfg.params.pressure_coeff = num()?,
            "B" => cfg.params.viscosity_coeff = num()?,
            "f" => cfg.params.friction = num()?,
            "g" => cfg.params.gravity = num()?,
            "n_cells" => cfg.n_cells = int()?,
            "t_end" => cfg.t_end = num()?,
            "cfl" => cfg.cfl = num()?,
            "dt_max" => cfg.dt_max = num()?,
            "pos_floor" => cfg.pos_floor = num()?,
            "sample_interval" => cfg.sample_interval = num()?,
            "profile" => {
                cfg.initial.profile = match value {
                    "modulated" => ProfileKind::Modulated,
                    "stationary" => ProfileKind::Stationary,
                    _ => return Err(bad()),
                }
            }
            "kappa_lo" => cfg.initial.kappa_lo = num()?,
            "kappa_hi" => cfg.initial.kappa_hi = num()?,
            "c_amp" => cfg.initial.c_amp = num()?,
            "u_amp" => cfg.initial.u_amp = num()?,
            "perturb_wavenumber" => {
                cfg.initial.perturb_wavenumber = value.parse().map_err(|_| bad())?
            }
            "mode" => {
                cfg.mode = match value {
                    "single" => Mode::Single,
                    "sweep" => Mode::Sweep,
                    "verify" => Mode::Verify,
                    _ => return Err(bad()),
                }
            }
            "force_out_of_regime" => cfg.force_out_of_regime = value.parse().map_err(|_| bad())?,
            "output_dir" => cfg.output_dir = PathBuf::from(value),
            "fit_t_lo" => fit_lo = Some(num()?),
            "fit_t_hi" => fit_hi = Some(num()?),
            "sweep_gamma" => cfg.sweep.gamma = list()?,
            "sweep_theta" => cfg.sweep.theta = list()?,
            "sweep_alpha" => cfg.sweep.alpha = list()?,
            "sweep_f" => cfg.sweep.friction = list()?,
            "max_parallel" => cfg.sweep.max_parallel = int()?,
            "sweep_budget" => cfg.sweep.budget = int()?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.into(),
                })
            }
        }
    }
    cfg.fit_window = match (fit_lo, fit_hi) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(cfg.t_end / 20.0), hi.unwrap_or(cfg.t_end))),
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default_scenario() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.params.gamma, 2.0);
        assert_eq!(c.params.theta, 0.5);
        assert_eq!(c.params.friction, 1.0);
        assert_eq!(c.n_cells, 400);
        assert_eq!(c.t_end, 200.0);
        assert_eq!(c.cfl, 0.4);
        assert_eq!(c.initial.u_amp, 0.05);
        assert_eq!((c.initial.kappa_lo, c.initial.kappa_hi), (0.8, 1.2));
        assert_eq!(c.initial.perturb_wavenumber, 2);
        assert_eq!(c.fit_window(), (10.0, 200.0));
    }

    #[test]
    fn regime_violation_needs_force() {
        let e = parse_config("theta = 1.5").unwrap_err();
        assert_eq!(
            e,
            ConfigError::Regime(vec![
                RegimeViolation::ThetaGtHalfGamma,
                RegimeViolation::ThetaGtGammaMinusOne,
                RegimeViolation::ThetaGtOneMinusAlphaGamma,
            ])
        );
        let only = parse_config("gamma = 1.5\ntheta = 0.6").unwrap_err();
        assert_eq!(
            only,
            ConfigError::Regime(vec![RegimeViolation::ThetaGtGammaMinusOne])
        );
        assert!(e.to_string().contains("THETA_GT_GAMMA_MINUS_1"));
        let ok = parse_config_with("theta = 1.5", true).unwrap();
        assert!(ok.force_out_of_regime);
        assert!(parse_config("theta = 1.5\nforce_out_of_regime = true").is_ok());
    }

    #[test]
    fn gamma_three_theta_one() {
        let c = parse_config("gamma = 3\ntheta = 1").unwrap();
        let r = validate_params(&c.params).unwrap();
        assert!(r.strict_regime);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            parse_config("# header\ngamma 2").unwrap_err(),
            ConfigError::Malformed { line: 2 }
        );
        assert!(matches!(
            parse_config("\n\nbogus = 1"),
            Err(ConfigError::UnknownKey { line: 3, .. })
        ));
        assert!(matches!(
            parse_config("cfl = fast"),
            Err(ConfigError::BadValue { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("cfl = 0.3\ncfl = 0.2"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("gamma = 1"),
            Err(ConfigError::Params(_))
        ));
        assert!(matches!(
            parse_config("n_cells = 4"),
            Err(ConfigError::Invalid(_))
        ));
        assert!(matches!(
            parse_config("sample_interval = 0"),
            Err(ConfigError::Invalid(_))
        ));
    }

    #[test]
    fn comments_and_lists() {
        let c = parse_config(
            "gamma = 2.5 # trailing\n  # whole line\nsweep_theta = 0.3, 0.5,0.7\nmax_parallel = 2\n",
        )
        .unwrap();
        assert_eq!(c.params.gamma, 2.5);
        assert_eq!(c.sweep.theta, vec![0.3, 0.5, 0.7]);
        assert_eq!(c.sweep.max_parallel, 2);
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = "gamma = 2.2\ntheta = 0.45\nalpha = 0.1\nu_amp = 0.0123456789012345\n\
                    sweep_f = 0, 1.5\nfit_t_lo = 3\nprofile = stationary\noutput_dir = runs/a b\n";
        let once = parse_config(text).unwrap();
        let twice = parse_config(&once.to_text()).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once.to_text(), twice.to_text());
    }
}
