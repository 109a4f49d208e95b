//! Closed-form achievable-rate lower bounds and power-scaling limits.
//!
//! All bounds are `log2(1 + ·)` of a ratio of expectations obtained with
//! Jensen's inequality. Powers are linear, `p_p = tau · p_u`.

use crate::channel::{mmse_variance, FadingProfile};
use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::predictor::predictor_states;
use crate::SystemConfig;

fn check(config: &SystemConfig, profile: &FadingProfile, k: usize) -> Result<()> {
    config.validate()?;
    if profile.len() != config.k {
        return Err(Error::DimensionMismatch(format!(
            "profile has {} users, config K = {}",
            profile.len(),
            config.k
        )));
    }
    if k >= config.k {
        return Err(invalid(
            "k",
            format!("user index {k} out of range for K = {}", config.k),
        ));
    }
    Ok(())
}

fn need_mrc_antennas(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::TooFewAntennas(format!("MRC bound needs M >= 2, got {m}")));
    }
    Ok(())
}

fn need_zf_antennas(m: usize, k: usize) -> Result<()> {
    if m <= k {
        return Err(Error::TooFewAntennas(format!(
            "ZF bound needs M > K, got M = {m}, K = {k}"
        )));
    }
    Ok(())
}

fn check_thetas(config: &SystemConfig, thetas: &[f64]) -> Result<()> {
    if thetas.len() != config.k {
        return Err(Error::DimensionMismatch(format!(
            "{} thetas for K = {}",
            thetas.len(),
            config.k
        )));
    }
    thetas.iter().try_for_each(|&t| ensure_finite("theta", t))
}

/// MRC lower bound for user `k` with aged CSI.
pub fn mrc_bound_aged(config: &SystemConfig, profile: &FadingProfile, k: usize) -> Result<f64> {
    check(config, profile, k)?;
    need_mrc_antennas(config.m)?;
    let (tau, p_u, a2) = (config.tau as f64, config.p_u, config.alpha().powi(2));
    let betas = profile.betas();
    let bk = betas[k];
    let others: f64 = betas.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, b)| b).sum();
    let num = a2 * tau * p_u * p_u * (config.m - 1) as f64 * bk * bk;
    let b_mrc = (1.0 - a2) * tau * p_u * p_u * bk * bk;
    let den = p_u * (1.0 + tau * p_u * bk) * others + (tau + 1.0) * p_u * bk + 1.0 + b_mrc;
    Ok(log2_1p(num / den))
}

/// ZF lower bound for user `k` with aged CSI.
pub fn zf_bound_aged(config: &SystemConfig, profile: &FadingProfile, k: usize) -> Result<f64> {
    check(config, profile, k)?;
    need_zf_antennas(config.m, config.k)?;
    let (tau, p_u, a2) = (config.tau as f64, config.p_u, config.alpha().powi(2));
    let betas = profile.betas();
    let bk = betas[k];
    let gain = 1.0 + tau * p_u * bk;
    let err: f64 = betas.iter().map(|&b| p_u * b / (tau * p_u * b + 1.0)).sum();
    let b_zf = (1.0 - a2)
        * gain
        * betas
            .iter()
            .map(|&b| tau * p_u * p_u * b * b / (1.0 + tau * p_u * b))
            .sum::<f64>();
    let num = a2 * tau * p_u * p_u * (config.m - config.k) as f64 * bk * bk;
    let den = gain * err + tau * p_u * bk + 1.0 + b_zf;
    Ok(log2_1p(num / den))
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// `p_u Σ_i (β_i − α²θ_i) + 1`.
fn floor_plus_noise(p_u: f64, a2: f64, betas: &[f64], thetas: &[f64]) -> f64 {
    p_u * betas.iter().zip(thetas).map(|(b, t)| b - a2 * t).sum::<f64>() + 1.0
}

/// MRC lower bound for user `k` with Wiener-predicted CSI, given the
/// per-user predictor coefficients `thetas`.
pub fn mrc_bound_predicted(config: &SystemConfig, profile: &FadingProfile, thetas: &[f64], k: usize) -> Result<f64> {
    check(config, profile, k)?;
    check_thetas(config, thetas)?;
    need_mrc_antennas(config.m)?;
    let (p_u, a2) = (config.p_u, config.alpha().powi(2));
    let interference: f64 = thetas
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != k)
        .map(|(_, t)| a2 * t)
        .sum();
    let num = p_u * (config.m - 1) as f64 * a2 * thetas[k];
    let den = p_u * interference + floor_plus_noise(p_u, a2, profile.betas(), thetas);
    Ok(log2_1p(num / den))
}

/// ZF lower bound for user `k` with Wiener-predicted CSI.
pub fn zf_bound_predicted(config: &SystemConfig, profile: &FadingProfile, thetas: &[f64], k: usize) -> Result<f64> {
    check(config, profile, k)?;
    check_thetas(config, thetas)?;
    need_zf_antennas(config.m, config.k)?;
    let (p_u, a2) = (config.p_u, config.alpha().powi(2));
    let num = p_u * (config.m - config.k) as f64 * a2 * thetas[k];
    Ok(log2_1p(num / floor_plus_noise(p_u, a2, profile.betas(), thetas)))
}

/// Predictor coefficients `θ_k` of order `order` for every user of the
/// scenario. Order 0 gives the MMSE estimate variances.
pub fn thetas(config: &SystemConfig, profile: &FadingProfile, order: usize) -> Result<Vec<f64>> {
    if order == 0 {
        return Ok(profile
            .betas()
            .iter()
            .map(|&b| mmse_variance(b, config.p_p()))
            .collect());
    }
    Ok(predictor_states(order, config.alpha(), profile, config.p_p())?
        .iter()
        .map(|s| s.theta())
        .collect())
}

/// MRC bound with perfect CSI: no aging and no estimation error.
pub fn mrc_bound_perfect(config: &SystemConfig, profile: &FadingProfile, k: usize) -> Result<f64> {
    let ideal = config.clone().with_alpha(1.0)?;
    mrc_bound_predicted(&ideal, profile, profile.betas(), k)
}

/// ZF bound with perfect CSI, `log2(1 + p_u (M − K) β_k)`.
pub fn zf_bound_perfect(config: &SystemConfig, profile: &FadingProfile, k: usize) -> Result<f64> {
    let ideal = config.clone().with_alpha(1.0)?;
    zf_bound_predicted(&ideal, profile, profile.betas(), k)
}

/// `Σ_{j=0}^{p} α^{2j}`.
pub fn prediction_gain(alpha: f64, order: usize) -> f64 {
    let a2 = alpha * alpha;
    let mut term = 1.0;
    let mut sum = 0.0;
    for _ in 0..=order {
        sum += term;
        term *= a2;
    }
    sum
}

/// Large-`M` rate under power scaling `p_u = E_u/M^γ`:
/// `log2(1 + α²·S·τE_u²β_k²/M^{2γ−1})` with `S = Σ_{j≤p} α^{2j}` when
/// `predicted`, otherwise `S = 1`.
#[allow(clippy::too_many_arguments)]
pub fn asymptotic_rate(
    gamma: f64,
    m: usize,
    e_u: f64,
    tau: usize,
    alpha: f64,
    beta_k: f64,
    pred_order: usize,
    predicted: bool,
) -> Result<f64> {
    ensure_positive("gamma", gamma)?;
    ensure_finite("E_u", e_u)?;
    ensure_finite("alpha", alpha)?;
    ensure_finite("beta", beta_k)?;
    if m == 0 {
        return Err(invalid("M", "must be >= 1"));
    }
    let s = if predicted {
        prediction_gain(alpha, pred_order)
    } else {
        1.0
    };
    let scale = (m as f64).powf(2.0 * gamma - 1.0);
    Ok(log2_1p(
        alpha * alpha * s * tau as f64 * e_u * e_u * beta_k * beta_k / scale,
    ))
}

/// Which CSI the `γ = 1/2` limit refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitMode {
    Aged,
    /// Prediction of finite order `p`.
    Predicted(usize),
    /// Prediction from the whole past, `p → ∞`.
    Unbounded,
}

/// Rate limit at `γ = 1/2` as `M → ∞`.
pub fn scaling_limit(alpha: f64, tau: usize, e_u: f64, beta_k: f64, mode: LimitMode) -> Result<f64> {
    ensure_finite("alpha", alpha)?;
    ensure_finite("E_u", e_u)?;
    ensure_finite("beta", beta_k)?;
    let a2 = alpha * alpha;
    let s = match mode {
        LimitMode::Aged => 1.0,
        LimitMode::Predicted(p) => prediction_gain(alpha, p),
        LimitMode::Unbounded => {
            if a2 >= 1.0 {
                return Err(invalid("alpha", "|alpha| = 1 makes the infinite-order limit diverge"));
            }
            1.0 / (1.0 - a2)
        }
    };
    Ok(log2_1p(a2 * s * tau as f64 * e_u * e_u * beta_k * beta_k))
}
