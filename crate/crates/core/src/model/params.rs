use std::fmt;

use thiserror::Error;

/// Physical and exponent parameters of the transformed drift-flux system.
///
/// Pressure is `pressure_coeff * (cQ)^gamma`, viscosity is
/// `viscosity_coeff * c^theta * Q^(1+theta)`, friction is
/// `f * rho_l^2 * Q^2 / (1+Q)^2 * u|u|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub gamma: f64,
    pub theta: f64,
    /// Power of the vacuum profile of `c0 ~ x^alpha`.
    pub alpha: f64,
    pub rho_l: f64,
    /// `A`
    pub pressure_coeff: f64,
    /// `B`
    pub viscosity_coeff: f64,
    /// Friction coefficient `f`.
    pub friction: f64,
    pub gravity: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            gamma: 2.0,
            theta: 0.5,
            alpha: 0.0,
            rho_l: 1.0,
            pressure_coeff: 1.0,
            viscosity_coeff: 1.0,
            friction: 1.0,
            gravity: 1.0,
        }
    }
}

/// A hard constraint failure. The configuration cannot be simulated at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HardViolation {
    NonFinite(&'static str),
    GammaNotGtOne,
    ThetaNotPositive,
    AlphaOutOfRange,
    RhoLNotPositive,
    PressureCoeffNotPositive,
    ViscosityCoeffNotPositive,
    FrictionNegative,
    GravityNotPositive,
}

impl HardViolation {
    pub fn code(&self) -> &'static str {
        match self {
            HardViolation::NonFinite(_) => "NON_FINITE_PARAMETER",
            HardViolation::GammaNotGtOne => "GAMMA_NOT_GT_ONE",
            HardViolation::ThetaNotPositive => "THETA_NOT_POSITIVE",
            HardViolation::AlphaOutOfRange => "ALPHA_OUT_OF_RANGE",
            HardViolation::RhoLNotPositive => "RHO_L_NOT_POSITIVE",
            HardViolation::PressureCoeffNotPositive => "A_NOT_POSITIVE",
            HardViolation::ViscosityCoeffNotPositive => "B_NOT_POSITIVE",
            HardViolation::FrictionNegative => "F_NEGATIVE",
            HardViolation::GravityNotPositive => "G_NOT_POSITIVE",
        }
    }
}

impl fmt::Display for HardViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HardViolation::NonFinite(field) => write!(f, "{} ({field})", self.code()),
            _ => f.write_str(self.code()),
        }
    }
}

/// Violation of the convergence-theorem window for `theta`. Such
/// configurations still run when forced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeViolation {
    /// `theta > gamma / 2`
    ThetaGtHalfGamma,
    /// `theta > gamma - 1`
    ThetaGtGammaMinusOne,
    /// `theta > 1 - alpha * gamma`
    ThetaGtOneMinusAlphaGamma,
}

impl RegimeViolation {
    pub fn code(&self) -> &'static str {
        match self {
            RegimeViolation::ThetaGtHalfGamma => "THETA_GT_HALF_GAMMA",
            RegimeViolation::ThetaGtGammaMinusOne => "THETA_GT_GAMMA_MINUS_1",
            RegimeViolation::ThetaGtOneMinusAlphaGamma => "THETA_GT_ONE_MINUS_ALPHA_GAMMA",
        }
    }
}

impl fmt::Display for RegimeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid model parameters: {}", join_codes(.violations))]
pub struct ParamError {
    pub violations: Vec<HardViolation>,
}

impl ParamError {
    pub fn has(&self, v: HardViolation) -> bool {
        self.violations.contains(&v)
    }
}

fn join_codes(v: &[HardViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<RegimeViolation>,
    /// `theta <= gamma/2`, `theta <= gamma-1` and `theta <= 1-alpha*gamma`.
    pub theorem_regime: bool,
    /// Theorem window plus `theta < gamma - 1`, where decay rates are claimed.
    pub strict_regime: bool,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every parameter constraint.
///
/// Hard violations (non-finite values, `gamma <= 1`, ...) are returned as an
/// error. Violations of the theorem window for `theta` are only reported.
pub fn validate_params(p: &ModelParams) -> Result<ValidationReport, ParamError> {
    let mut hard = Vec::new();
    let fields = [
        ("gamma", p.gamma),
        ("theta", p.theta),
        ("alpha", p.alpha),
        ("rho_l", p.rho_l),
        ("A", p.pressure_coeff),
        ("B", p.viscosity_coeff),
        ("f", p.friction),
        ("g", p.gravity),
    ];
    for (name, v) in fields {
        if !v.is_finite() {
            hard.push(HardViolation::NonFinite(name));
        }
    }
    if !hard.is_empty() {
        return Err(ParamError { violations: hard });
    }
    if p.gamma <= 1.0 {
        hard.push(HardViolation::GammaNotGtOne);
    }
    if p.theta <= 0.0 {
        hard.push(HardViolation::ThetaNotPositive);
    }
    if !(p.alpha >= 0.0 && p.alpha * p.gamma < 1.0) {
        hard.push(HardViolation::AlphaOutOfRange);
    }
    if p.rho_l <= 0.0 {
        hard.push(HardViolation::RhoLNotPositive);
    }
    if p.pressure_coeff <= 0.0 {
        hard.push(HardViolation::PressureCoeffNotPositive);
    }
    if p.viscosity_coeff <= 0.0 {
        hard.push(HardViolation::ViscosityCoeffNotPositive);
    }
    if p.friction < 0.0 {
        hard.push(HardViolation::FrictionNegative);
    }
    if p.gravity <= 0.0 {
        hard.push(HardViolation::GravityNotPositive);
    }
    if !hard.is_empty() {
        return Err(ParamError { violations: hard });
    }

    let mut violations = Vec::new();
    if p.theta > p.gamma / 2.0 {
        violations.push(RegimeViolation::ThetaGtHalfGamma);
    }
    if p.theta > p.gamma - 1.0 {
        violations.push(RegimeViolation::ThetaGtGammaMinusOne);
    }
    if p.theta > 1.0 - p.alpha * p.gamma {
        violations.push(RegimeViolation::ThetaGtOneMinusAlphaGamma);
    }
    let theorem_regime = violations.is_empty();
    let strict_regime = theorem_regime && p.theta < p.gamma - 1.0;
    Ok(ValidationReport {
        violations,
        theorem_regime,
        strict_regime,
    })
}
