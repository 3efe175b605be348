//! Thomas algorithm for tridiagonal systems.

use crate::{Error, Result};

/// Solve in place; `lower[i]` couples rows `i + 1` and `i`, `upper[i]` rows
/// `i` and `i + 1`.
pub(crate) fn tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut b = diag[0];
    if b == 0.0 {
        return Err(Error::Numeric("zero pivot in tridiagonal solve".into()));
    }
    rhs[0] /= b;
    for i in 1..n {
        c[i - 1] = upper[i - 1] / b;
        b = diag[i] - lower[i - 1] * c[i - 1];
        if b == 0.0 || !b.is_finite() {
            return Err(Error::Numeric("zero pivot in tridiagonal solve".into()));
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
    Ok(())
}
