//! Fast evaluation of `x^e` for a fixed exponent and nonnegative base.
//!
//! The solver raises every cell to the same handful of exponents millions of
//! times per run. Integer and half-integer exponents (the common cases
//! `gamma = 2`, `theta = 1/2`) avoid `powf` entirely.

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Zero,
    Int(i32),
    HalfInt(i32),
    General,
}

/// A fixed real exponent, classified once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Power {
    exponent: f64,
    kind: Kind,
}

impl Power {
    pub fn new(exponent: f64) -> Self {
        let kind = if exponent == 0.0 {
            Kind::Zero
        } else if exponent.fract() == 0.0 && exponent.abs() < 64.0 {
            Kind::Int(exponent as i32)
        } else if (exponent - 0.5).fract() == 0.0 && exponent.abs() < 64.0 {
            Kind::HalfInt((exponent - 0.5) as i32)
        } else {
            Kind::General
        };
        Self { exponent, kind }
    }

    /// `x^e` for `x >= 0`.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Zero => 1.0,
            Kind::Int(1) => x,
            Kind::Int(n) => x.powi(n),
            Kind::HalfInt(0) => x.sqrt(),
            Kind::HalfInt(n) => x.powi(n) * x.sqrt(),
            Kind::General => x.powf(self.exponent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_powf() {
        for &e in &[
            0.0,
            1.0,
            2.0,
            3.0,
            -1.0,
            0.5,
            1.5,
            2.5,
            -0.5,
            0.3,
            1.25,
            1.0 / 3.0,
        ] {
            let p = Power::new(e);
            for &x in &[0.0_f64, 1e-6, 0.3, 1.0, 2.7, 11.0] {
                if x == 0.0 && e < 0.0 {
                    continue;
                }
                let want = x.powf(e);
                let got = p.eval(x);
                assert!(
                    (got - want).abs() <= 4.0 * f64::EPSILON * want.abs().max(f64::MIN_POSITIVE),
                    "e={e} x={x}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn classifies_half_integers() {
        assert_eq!(Power::new(1.5).kind, Kind::HalfInt(1));
        assert_eq!(Power::new(0.5).kind, Kind::HalfInt(0));
        assert_eq!(Power::new(2.0).kind, Kind::Int(2));
        assert_eq!(Power::new(0.7).kind, Kind::General);
    }
}
