//! Multi-cell MRC rates with pilot reuse under power scaling `p_u = E_u/M^γ`.
//!
//! These are the large-`M` deterministic expressions, evaluated at a finite
//! `M`, together with their limits as `M → ∞`. Every cell reuses the same
//! `K` pilots, so user `k` of cell `b` is contaminated by user `k` of every
//! other cell.

use crate::bounds::prediction_gain;
use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};

/// Multi-cell scenario. `beta(b, c, i)` is the large-scale coefficient from
/// user `i` of cell `c` to base station `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiCellConfig {
    cells: usize,
    k: usize,
    betas: Vec<f64>,
    pub gamma: f64,
    pub e_u: f64,
    pub tau: usize,
    pub alpha: f64,
    pub pred_order: usize,
}

impl MultiCellConfig {
    /// Symmetric layout: `beta_same` inside a cell, `beta_cross` between cells.
    #[allow(clippy::too_many_arguments)]
    pub fn symmetric(
        cells: usize,
        k: usize,
        beta_same: f64,
        beta_cross: f64,
        gamma: f64,
        e_u: f64,
        tau: usize,
        alpha: f64,
    ) -> Result<Self> {
        ensure_positive("beta_same", beta_same)?;
        ensure_positive("beta_cross", beta_cross)?;
        let betas = (0..cells * cells * k)
            .map(|idx| {
                let (b, c) = (idx / (cells * k), (idx / k) % cells);
                if b == c {
                    beta_same
                } else {
                    beta_cross
                }
            })
            .collect();
        Self::general(cells, k, betas, gamma, e_u, tau, alpha)
    }

    /// Arbitrary coefficients, laid out as `betas[(b·C + c)·K + i]`.
    pub fn general(
        cells: usize,
        k: usize,
        betas: Vec<f64>,
        gamma: f64,
        e_u: f64,
        tau: usize,
        alpha: f64,
    ) -> Result<Self> {
        if cells == 0 {
            return Err(invalid("C", "must be >= 1"));
        }
        if k == 0 {
            return Err(invalid("K", "must be >= 1"));
        }
        if betas.len() != cells * cells * k {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for C = {cells}, K = {k} (need {})",
                betas.len(),
                cells * cells * k
            )));
        }
        for &b in &betas {
            ensure_positive("beta", b)?;
        }
        ensure_positive("gamma", gamma)?;
        ensure_finite("E_u", e_u)?;
        if e_u < 0.0 {
            return Err(invalid("E_u", "must be >= 0"));
        }
        if tau < k {
            return Err(invalid("tau", format!("training length {tau} shorter than K = {k}")));
        }
        ensure_finite("alpha", alpha)?;
        if alpha.abs() > 1.0 {
            return Err(invalid("alpha", format!("|alpha| must be <= 1, got {alpha}")));
        }
        Ok(Self {
            cells,
            k,
            betas,
            gamma,
            e_u,
            tau,
            alpha,
            pred_order: 0,
        })
    }

    pub fn with_pred_order(mut self, p: usize) -> Self {
        self.pred_order = p;
        self
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self, b: usize, c: usize, i: usize) -> f64 {
        self.betas[(b * self.cells + c) * self.k + i]
    }

    fn check_user(&self, b: usize, k: usize) -> Result<()> {
        if b >= self.cells || k >= self.k {
            return Err(invalid("user", format!("(cell {b}, user {k}) out of range")));
        }
        Ok(())
    }

    /// `Σ_{c≠b} β_bck²`.
    fn contamination(&self, b: usize, k: usize) -> f64 {
        (0..self.cells)
            .filter(|&c| c != b)
            .map(|c| self.beta(b, c, k).powi(2))
            .sum()
    }
}

/// Whether the CSI is the stale estimate or the order-`p` prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiCellMode {
    Aged,
    Predicted,
}

/// Power-scaling regime for [`multicell_limit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaRegime {
    /// `γ = 1/2`.
    Half,
    /// `0 < γ < 1/2`.
    SubHalf,
}

fn rate_at(config: &MultiCellConfig, m: usize, b: usize, k: usize, mode: MultiCellMode) -> Result<f64> {
    config.check_user(b, k)?;
    if m == 0 {
        return Err(invalid("M", "must be >= 1"));
    }
    let mf = m as f64;
    let (a2, tau, e_u) = (config.alpha * config.alpha, config.tau as f64, config.e_u);
    let (gain, leak) = match mode {
        MultiCellMode::Aged => (1.0, 1.0),
        MultiCellMode::Predicted => (
            prediction_gain(config.alpha, config.pred_order),
            a2.powi(config.pred_order as i32),
        ),
    };
    let p_u = e_u / mf.powf(config.gamma);
    let pilot_scale = tau * e_u * e_u / mf.powf(2.0 * config.gamma - 1.0);
    let own = config.beta(b, b, k);
    let mut others = 0.0;
    for c in 0..config.cells {
        for i in 0..config.k {
            if (c, i) != (b, k) {
                others += config.beta(b, c, i);
            }
        }
    }
    let num = a2 * gain * pilot_scale * own * own;
    let den = own * p_u + 1.0 + others * p_u + a2 * gain * leak * pilot_scale * config.contamination(b, k);
    Ok((num / den).ln_1p() / std::f64::consts::LN_2)
}

/// Rate of user 0 in cell 0 with aged CSI at `M` antennas.
pub fn multicell_rate_aged(config: &MultiCellConfig, m: usize) -> Result<f64> {
    rate_at(config, m, 0, 0, MultiCellMode::Aged)
}

/// Rate of user 0 in cell 0 with predicted CSI of order `config.pred_order`.
pub fn multicell_rate_predicted(config: &MultiCellConfig, m: usize) -> Result<f64> {
    rate_at(config, m, 0, 0, MultiCellMode::Predicted)
}

/// Rate of user `k` in cell `b`.
pub fn multicell_user_rate(config: &MultiCellConfig, m: usize, b: usize, k: usize, mode: MultiCellMode) -> Result<f64> {
    rate_at(config, m, b, k, mode)
}

/// `M → ∞` limit for user 0 of cell 0.
pub fn multicell_limit(config: &MultiCellConfig, regime: GammaRegime, mode: MultiCellMode) -> Result<f64> {
    multicell_user_limit(config, 0, 0, regime, mode)
}

/// `M → ∞` limit for user `k` of cell `b`.
///
/// With `α = 0` the CSI carries no information and the limit is 0 in both
/// regimes.
pub fn multicell_user_limit(
    config: &MultiCellConfig,
    b: usize,
    k: usize,
    regime: GammaRegime,
    mode: MultiCellMode,
) -> Result<f64> {
    config.check_user(b, k)?;
    let contamination = config.contamination(b, k);
    if regime == GammaRegime::SubHalf && config.cells < 2 {
        return Err(invalid(
            "C",
            "the sub-half limit is unbounded without pilot contamination (C = 1)",
        ));
    }
    if config.alpha == 0.0 {
        return Ok(0.0);
    }
    let a2 = config.alpha * config.alpha;
    let (gain, leak) = match mode {
        MultiCellMode::Aged => (1.0, 1.0),
        MultiCellMode::Predicted => (
            prediction_gain(config.alpha, config.pred_order),
            a2.powi(config.pred_order as i32),
        ),
    };
    let own2 = config.beta(b, b, k).powi(2);
    let ratio = match regime {
        GammaRegime::Half => {
            let s = config.tau as f64 * config.e_u * config.e_u;
            a2 * gain * s * own2 / (1.0 + a2 * gain * leak * s * contamination)
        }
        GammaRegime::SubHalf => own2 / (leak * contamination),
    };
    Ok(ratio.ln_1p() / std::f64::consts::LN_2)
}
