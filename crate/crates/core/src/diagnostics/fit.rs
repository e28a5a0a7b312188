//! Power-law decay fits `value ~ C (1+t)^k` by least squares in log-log.

use thiserror::Error;

use crate::model::{validate_params, ModelParams};

pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Slope of `ln(value)` against `ln(1+t)`.
    pub exponent: f64,
    /// `exp(intercept)`
    pub prefactor: f64,
    pub r2: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("fit window [{0}, {1}] is empty or reversed")]
    BadWindow(f64, f64),
    #[error("value {value} at t = {t} is not positive; log undefined")]
    NonPositive { t: f64, value: f64 },
    #[error("{got} samples in window, need at least {MIN_FIT_SAMPLES}")]
    TooFewSamples { got: usize },
}

/// Ordinary least squares of `ln(value)` on `ln(1+t)` over samples with
/// `t` in the closed window.
pub fn fit_decay_exponent(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit, FitError> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(FitError::BadWindow(lo, hi));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, v) in series.iter().filter(|(t, _)| *t >= lo && *t <= hi) {
        if !(v > 0.0) {
            return Err(FitError::NonPositive { t, value: v });
        }
        xs.push((1.0 + t).ln());
        ys.push(v.ln());
    }
    let n = xs.len();
    if n < MIN_FIT_SAMPLES {
        return Err(FitError::TooFewSamples { got: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    // a constant series is fitted perfectly by a flat line
    let r2 = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r2,
        window,
        samples: n,
    })
}

/// Guaranteed sup-norm decay rate of `(cQ)^theta - (cQ_inf)^theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalRate {
    /// `2 theta / (4 gamma + alpha gamma - 2)`
    pub rate: f64,
    /// `false` outside `theta < gamma - 1` and the convergence window, where
    /// no rate is guaranteed and the value is informational only.
    pub guaranteed: bool,
}

pub fn theoretical_density_rate(p: &ModelParams) -> TheoreticalRate {
    let rate = 2.0 * p.theta / (4.0 * p.gamma + p.alpha * p.gamma - 2.0);
    let guaranteed = validate_params(p).map(|r| r.strict_regime).unwrap_or(false);
    TheoreticalRate { rate, guaranteed }
}

/// Guaranteed sup-norm decay rate of the velocity.
pub const VELOCITY_RATE: f64 = 0.5;

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..=200).map(|k| k as f64).map(|t| (t, f(t))).collect()
    }

    #[test]
    fn exact_power_law() {
        let s = series(|t| (1.0 + t).powf(-0.5));
        let fit = fit_decay_exponent(&s, (10.0, 200.0)).unwrap();
        assert!((fit.exponent + 0.5).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert_eq!(fit.samples, 191);
    }

    #[test]
    fn constant_series() {
        let s = series(|_| 4.2);
        let fit = fit_decay_exponent(&s, (0.0, 200.0)).unwrap();
        assert!(fit.exponent.abs() < 1e-12);
        assert!((fit.prefactor - 4.2).abs() < 1e-12);
    }

    #[test]
    fn sixth_root_with_prefactor() {
        let s = series(|t| 3.0 * (1.0 + t).powf(-1.0 / 6.0));
        let fit = fit_decay_exponent(&s, (10.0, 200.0)).unwrap();
        assert!((fit.exponent + 1.0 / 6.0).abs() < 1e-12);
        assert!((fit.prefactor - 3.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_input() {
        let mut s = series(|t| 1.0 / (1.0 + t));
        assert!(matches!(
            fit_decay_exponent(&s, (0.0, 5.0)),
            Err(FitError::TooFewSamples { got: 6 })
        ));
        s[20].1 = 0.0;
        assert!(matches!(
            fit_decay_exponent(&s, (10.0, 200.0)),
            Err(FitError::NonPositive { .. })
        ));
        assert!(fit_decay_exponent(&s, (5.0, 5.0)).is_err());
    }

    #[test]
    fn theoretical_rates() {
        let r = |gamma, theta| {
            theoretical_density_rate(&ModelParams {
                gamma,
                theta,
                ..ModelParams::default()
            })
        };
        assert!((r(2.0, 0.5).rate - 1.0 / 6.0).abs() < 1e-15);
        assert!((r(2.0, 0.9).rate - 0.3).abs() < 1e-15);
        assert!((r(3.0, 1.0).rate - 0.2).abs() < 1e-15);
        assert!(r(2.0, 0.5).guaranteed);
        assert!(!r(2.0, 1.0).guaranteed);
    }
}
