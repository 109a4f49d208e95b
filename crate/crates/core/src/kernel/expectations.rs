//! Closed-form inverse moments of complex Gaussian vectors and matrices.

use crate::error::{ensure_positive, Error, Result};

/// `E{1/‖g‖²}` for `g` with `M` i.i.d. `CN(0, sigma2)` entries: `1/((M−1)·sigma2)`.
pub fn inv_norm_expectation(m: usize, sigma2: f64) -> Result<f64> {
    ensure_positive("sigma2", sigma2)?;
    if m < 2 {
        return Err(Error::TooFewAntennas(format!(
            "E{{1/|g|^2}} diverges for M = {m}; need M >= 2"
        )));
    }
    Ok(1.0 / ((m - 1) as f64 * sigma2))
}

/// `E{[(G†G)⁻¹]_kk}` for an `M×K` matrix of i.i.d. `CN(0, sigma2)` entries:
/// `1/((M−K)·sigma2)`.
pub fn wishart_inv_diag_expectation(m: usize, k: usize, sigma2: f64) -> Result<f64> {
    ensure_positive("sigma2", sigma2)?;
    if k == 0 {
        return Err(crate::error::invalid("K", "must be >= 1"));
    }
    if m <= k {
        return Err(Error::TooFewAntennas(format!(
            "inverse-Wishart mean needs M > K, got M = {m}, K = {k}"
        )));
    }
    Ok(1.0 / ((m - k) as f64 * sigma2))
}
