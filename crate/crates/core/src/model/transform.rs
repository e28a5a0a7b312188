//! Maps between the physical densities `(n, m)` and the transformed
//! variables `c = n/m`, `Q = m/(rho_l - m)`.

use thiserror::Error;

use super::ModelParams;

/// Gas and liquid mass per volume plus mixture velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalState {
    pub n: f64,
    pub m: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum TransformError {
    #[error("liquid density m = 0 leaves c = n/m undefined")]
    UndefinedRatio,
    #[error("liquid density m = {m} outside [0, rho_l = {rho_l})")]
    LiquidDensityOutOfRange { m: f64, rho_l: f64 },
    #[error("gas density n = {0} is negative")]
    NegativeGas(f64),
    #[error("transformed density Q = {0} must be positive")]
    NonPositiveQ(f64),
    #[error("mass ratio c = {0} must be nonnegative")]
    NegativeRatio(f64),
}

/// Returns `(c, Q)`.
pub fn to_transformed(s: &PhysicalState, p: &ModelParams) -> Result<(f64, f64), TransformError> {
    if !(s.n >= 0.0) {
        return Err(TransformError::NegativeGas(s.n));
    }
    if s.m == 0.0 {
        return Err(TransformError::UndefinedRatio);
    }
    if !(s.m > 0.0 && s.m < p.rho_l) {
        return Err(TransformError::LiquidDensityOutOfRange {
            m: s.m,
            rho_l: p.rho_l,
        });
    }
    Ok((s.n / s.m, s.m / (p.rho_l - s.m)))
}

/// Returns `(n, m)`.
pub fn from_transformed(c: f64, q: f64, p: &ModelParams) -> Result<(f64, f64), TransformError> {
    if !(q > 0.0) {
        return Err(TransformError::NonPositiveQ(q));
    }
    if !(c >= 0.0) {
        return Err(TransformError::NegativeRatio(c));
    }
    let m = p.rho_l * q / (1.0 + q);
    Ok((c * m, m))
}

/// `h(Q) = f rho_l^2 Q^2 / (1+Q)^2`, bounded by `f rho_l^2`.
#[inline]
pub fn friction_coefficient(q: f64, p: &ModelParams) -> f64 {
    let r = q / (1.0 + q);
    p.friction * p.rho_l * p.rho_l * r * r
}
