//! Thomas algorithm for tridiagonal systems.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("zero pivot in tridiagonal elimination at row {row}")]
pub struct SingularPivot {
    pub row: usize,
}

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. The solution overwrites `rhs`;
/// `scratch` holds the modified super-diagonal and must have length `n`.
pub fn solve_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) -> Result<(), SingularPivot> {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n && scratch.len() == n);
    if n == 0 {
        return Ok(());
    }
    if diag[0] == 0.0 {
        return Err(SingularPivot { row: 0 });
    }
    scratch[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let den = diag[i] - lower[i] * scratch[i - 1];
        if den == 0.0 || !den.is_finite() {
            return Err(SingularPivot { row: i });
        }
        scratch[i] = if i + 1 < n { upper[i] / den } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / den;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity() {
        let n = 5;
        let mut x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let mut s = vec![0.0; n];
        solve_in_place(&[0.0; 5], &[1.0; 5], &[0.0; 5], &mut x, &mut s).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn singular_first_pivot() {
        let mut x = vec![1.0; 3];
        let mut s = vec![0.0; 3];
        let e = solve_in_place(&[0.0; 3], &[0.0, 1.0, 1.0], &[0.0; 3], &mut x, &mut s);
        assert_eq!(e, Err(SingularPivot { row: 0 }));
    }

    proptest! {
        #[test]
        fn diagonally_dominant_residual(
            sub in proptest::collection::vec(-1.0f64..1.0, 30),
            sup in proptest::collection::vec(-1.0f64..1.0, 30),
            extra in proptest::collection::vec(0.01f64..3.0, 30),
            b in proptest::collection::vec(-5.0f64..5.0, 30),
        ) {
            let n = 30;
            let diag: Vec<f64> = (0..n).map(|i| sub[i].abs() + sup[i].abs() + extra[i]).collect();
            let mut x = b.clone();
            let mut s = vec![0.0; n];
            solve_in_place(&sub, &diag, &sup, &mut x, &mut s).unwrap();
            for i in 0..n {
                let mut r = diag[i] * x[i] - b[i];
                if i > 0 { r += sub[i] * x[i - 1]; }
                if i + 1 < n { r += sup[i] * x[i + 1]; }
                prop_assert!(r.abs() < 1e-10);
            }
        }
    }
}
