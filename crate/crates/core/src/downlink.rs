//! Downlink maximum-ratio transmission with aged CSI.
//!
//! The base station precodes with `W = λ·Ḡ*`, where `Ḡ = α·Ĝ[n]` and `λ`
//! normalizes the average transmit power to one. The closed-form rate treats
//! the beamforming-gain fluctuation and the inter-user leakage as noise.

use rayon::prelude::*;

use crate::channel::{
    age_channel, aged_csi, generate_channel, mmse_variance, observe_and_estimate, AgingParams, FadingProfile,
};
use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::kernel::stats::MeanEstimate;
use crate::kernel::Rng;
use crate::uplink::rate_csv;

/// Single-cell downlink scenario. Powers are linear.
#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkConfig {
    pub m: usize,
    pub p_b: f64,
    pub p_p: f64,
    pub alpha: f64,
    pub betas: Vec<f64>,
    /// Base-station power budget before scaling, `p_b = e_b / m^beta_exp`.
    pub e_b: f64,
    /// Exponent of the base-station power scaling; 0 means fixed `p_b`.
    pub beta_exp: f64,
}

impl DownlinkConfig {
    /// Fixed base-station power `p_b`.
    pub fn new(m: usize, betas: &[f64], p_b: f64, p_p: f64, alpha: f64) -> Result<Self> {
        let c = Self {
            m,
            p_b,
            p_p,
            alpha,
            betas: betas.to_vec(),
            e_b: p_b,
            beta_exp: 0.0,
        };
        c.validate()?;
        Ok(c)
    }

    /// Base-station power scaled as `p_b = e_b / m^beta_exp`.
    pub fn with_power_scaling(m: usize, betas: &[f64], e_b: f64, beta_exp: f64, p_p: f64, alpha: f64) -> Result<Self> {
        ensure_positive("beta_exp", beta_exp)?;
        ensure_positive("E_b", e_b)?;
        let mut c = Self::new(m, betas, e_b / (m as f64).powf(beta_exp), p_p, alpha)?;
        c.e_b = e_b;
        c.beta_exp = beta_exp;
        Ok(c)
    }

    pub fn k(&self) -> usize {
        self.betas.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(invalid("M", "must be >= 1"));
        }
        if self.betas.is_empty() {
            return Err(invalid("K", "must be >= 1"));
        }
        for &b in &self.betas {
            ensure_positive("beta", b)?;
        }
        ensure_positive("p_b", self.p_b)?;
        ensure_positive("p_p", self.p_p)?;
        ensure_finite("alpha", self.alpha)?;
        if self.alpha.abs() > 1.0 {
            return Err(invalid("alpha", format!("|alpha| must be <= 1, got {}", self.alpha)));
        }
        Ok(())
    }

    /// Estimate variance `σ_k² = p_p β_k²/(1 + p_p β_k)`.
    pub fn sigma2(&self, k: usize) -> f64 {
        mmse_variance(self.betas[k], self.p_p)
    }

    fn sigma2_sum(&self) -> f64 {
        (0..self.k()).map(|k| self.sigma2(k)).sum()
    }

    fn profile(&self) -> Result<FadingProfile> {
        FadingProfile::from_betas(&self.betas)
    }
}

/// Precoder normalization `λ = (M α² Σ σ_k²)^{-1/2}`.
pub fn mrt_lambda(config: &DownlinkConfig) -> Result<f64> {
    config.validate()?;
    let denom = config.m as f64 * config.alpha * config.alpha * config.sigma2_sum();
    if denom.is_nan() || denom <= 0.0 {
        return Err(invalid("alpha", "MRT normalization undefined for zero CSI power"));
    }
    Ok(denom.recip().sqrt())
}

/// `log2(1 + α² M σ_k⁴ / ((β_k + 1/p_b) Σ_i σ_i²))`.
pub fn downlink_rate_closed_form(config: &DownlinkConfig, k: usize) -> Result<f64> {
    config.validate()?;
    if k >= config.k() {
        return Err(invalid(
            "k",
            format!("user index {k} out of range for K = {}", config.k()),
        ));
    }
    let s2 = config.sigma2(k);
    let sinr = config.alpha * config.alpha * config.m as f64 * s2 * s2
        / ((config.betas[k] + 1.0 / config.p_b) * config.sigma2_sum());
    Ok(sinr.ln_1p() / std::f64::consts::LN_2)
}

/// Large-`M` downlink rate with `p_u = E_u/√M` training and
/// `p_b = E_b/M^beta_exp` transmission.
#[allow(clippy::too_many_arguments)]
pub fn downlink_scaling_limit(
    e_b: f64,
    e_u: f64,
    tau: usize,
    alpha: f64,
    betas: &[f64],
    beta_exp: f64,
    m: usize,
    k: usize,
) -> Result<f64> {
    ensure_positive("beta_exp", beta_exp)?;
    ensure_finite("E_b", e_b)?;
    ensure_finite("E_u", e_u)?;
    ensure_finite("alpha", alpha)?;
    if k >= betas.len() {
        return Err(invalid(
            "k",
            format!("user index {k} out of range for K = {}", betas.len()),
        ));
    }
    if m == 0 {
        return Err(invalid("M", "must be >= 1"));
    }
    let energy: f64 = betas.iter().map(|b| b * b).sum();
    if energy.is_nan() || energy <= 0.0 {
        return Err(invalid("beta", "need at least one positive coefficient"));
    }
    let bk = betas[k];
    let num = alpha * alpha * tau as f64 * e_u * e_b * bk.powi(4);
    let sinr = num / ((m as f64).powf(beta_exp - 0.5) * energy);
    Ok(sinr.ln_1p() / std::f64::consts::LN_2)
}

/// Monte Carlo moments of `x_ki = g_kᵀ ḡ_i*` for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserMoments {
    /// Real part of `E[x_kk]`.
    pub mean_gain: MeanEstimate,
    /// `E|x_kk − E x_kk|²`.
    pub gain_variance: MeanEstimate,
    /// `E|x_ki|²` for each `i ≠ k`, in increasing `i`.
    pub interference: Vec<MeanEstimate>,
    /// `Σ_{i≠k} E|x_ki|²`.
    pub total_interference: MeanEstimate,
    /// `log2(1 + SINR)` with the SINR assembled from the moments above and
    /// the noise term `1/(p_b λ²)`; standard error by the delta method.
    pub assembled_rate: MeanEstimate,
}

/// Output of [`downlink_moment_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct DownlinkMoments {
    pub users: Vec<UserMoments>,
    /// Average transmit power `E‖W s‖²` for unit-power symbols.
    pub tx_power: MeanEstimate,
    pub trials: usize,
}

impl DownlinkMoments {
    /// Same layout as the uplink rate CSV, with the assembled rates.
    pub fn to_csv(&self, config: &DownlinkConfig) -> String {
        let params = [
            ("M", config.m.to_string()),
            ("K", config.k().to_string()),
            ("p_b", format!("{:.16e}", config.p_b)),
            ("p_p", format!("{:.16e}", config.p_p)),
            ("alpha", format!("{:.16e}", config.alpha)),
            ("precoder", "mrt".to_string()),
            ("trials", self.trials.to_string()),
        ];
        let rates: Vec<f64> = self.users.iter().map(|u| u.assembled_rate.mean).collect();
        let ses: Vec<f64> = self.users.iter().map(|u| u.assembled_rate.std_err).collect();
        rate_csv(&params, &rates, &ses)
    }
}

/// Trials per accumulation block. Blocks are fixed by trial index, so the
/// reduction order does not depend on how blocks are scheduled.
const BLOCK: usize = 1024;

/// Sums of per-trial statistics.
///
/// Per user `k` the vector `z = (Re x_kk, Im x_kk, |x_kk|², Σ_{i≠k}|x_ki|²)`
/// is accumulated with its outer product; every pair `(k, i)` keeps the sum
/// and sum of squares of `|x_ki|²`.
#[derive(Clone)]
struct Sums {
    k: usize,
    n: usize,
    z: Vec<[f64; 4]>,
    zz: Vec<[[f64; 4]; 4]>,
    pair: Vec<f64>,
    pair_sq: Vec<f64>,
    power: f64,
    power_sq: f64,
}

impl Sums {
    fn new(k: usize) -> Self {
        Self {
            k,
            n: 0,
            z: vec![[0.0; 4]; k],
            zz: vec![[[0.0; 4]; 4]; k],
            pair: vec![0.0; k * k],
            pair_sq: vec![0.0; k * k],
            power: 0.0,
            power_sq: 0.0,
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        self.n += other.n;
        for u in 0..self.k {
            for a in 0..4 {
                self.z[u][a] += other.z[u][a];
                for b in 0..4 {
                    self.zz[u][a][b] += other.zz[u][a][b];
                }
            }
        }
        for (s, o) in self.pair.iter_mut().zip(&other.pair) {
            *s += o;
        }
        for (s, o) in self.pair_sq.iter_mut().zip(&other.pair_sq) {
            *s += o;
        }
        self.power += other.power;
        self.power_sq += other.power_sq;
        self
    }
}

fn estimate(sum: f64, sum_sq: f64, n: usize) -> MeanEstimate {
    let nf = n as f64;
    let mean = sum / nf;
    let std_err = if n > 1 {
        ((sum_sq - nf * mean * mean).max(0.0) / (nf - 1.0) / nf).sqrt()
    } else {
        0.0
    };
    MeanEstimate { mean, std_err }
}

fn run_trial(
    config: &DownlinkConfig,
    profile: &FadingProfile,
    aging: AgingParams,
    lambda: f64,
    seed: u64,
    t: u64,
    acc: &mut Sums,
) -> Result<()> {
    let k = config.k();
    let mut rng = Rng::new(seed, t);
    let g = generate_channel(profile, config.m, &mut rng)?;
    let est = observe_and_estimate(&g, profile, config.p_p, &mut rng)?.estimate;
    let g_next = age_channel(&g, aging, profile, &mut rng)?;
    let csi = aged_csi(&est, aging);
    // cross[(i, k)] = ḡ_i† g_k = g_kᵀ ḡ_i*.
    let cross = csi.adjoint_mul(&g_next)?;
    for user in 0..k {
        let x = cross.get(user, user);
        let mut leak = 0.0;
        for i in (0..k).filter(|&i| i != user) {
            let v = cross.get(i, user).norm_sqr();
            leak += v;
            acc.pair[user * k + i] += v;
            acc.pair_sq[user * k + i] += v * v;
        }
        let z = [x.re, x.im, x.norm_sqr(), leak];
        for a in 0..4 {
            acc.z[user][a] += z[a];
            for b in 0..4 {
                acc.zz[user][a][b] += z[a] * z[b];
            }
        }
    }
    let power = lambda * lambda * csi.frobenius_norm().powi(2);
    acc.power += power;
    acc.power_sq += power * power;
    acc.n += 1;
    Ok(())
}

/// Estimates the moments behind the closed-form downlink rate from `trials`
/// generative draws: estimate the channel, age it one step, and correlate the
/// new channel with the aged CSI.
pub fn downlink_moment_oracle(config: &DownlinkConfig, trials: usize, seed: u64) -> Result<DownlinkMoments> {
    config.validate()?;
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let k = config.k();
    let profile = config.profile()?;
    let aging = AgingParams::from_alpha(config.alpha)?;
    // λ only scales the transmit-power check; with α = 0 report zero power.
    let lambda = mrt_lambda(config).unwrap_or(0.0);
    let blocks = trials.div_ceil(BLOCK);
    let partial: Vec<Sums> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Sums::new(k);
            for t in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                run_trial(config, &profile, aging, lambda, seed, t as u64, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let total = partial.iter().fold(Sums::new(k), |a, b| a.merge(b));

    let n = total.n;
    let nf = n as f64;
    let noise = if lambda > 0.0 {
        1.0 / (config.p_b * lambda * lambda)
    } else {
        f64::INFINITY
    };
    let mut users = Vec::with_capacity(k);
    for u in 0..k {
        let mean: Vec<f64> = total.z[u].iter().map(|s| s / nf).collect();
        let mut cov = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                cov[a][b] = if n > 1 {
                    (total.zz[u][a][b] - nf * mean[a] * mean[b]) / (nf - 1.0)
                } else {
                    0.0
                };
            }
        }
        let delta_se = |grad: [f64; 4]| -> f64 {
            let mut v = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    v += grad[a] * cov[a][b] * grad[b];
                }
            }
            (v.max(0.0) / nf).sqrt()
        };
        let (re, im, abs2, leak) = (mean[0], mean[1], mean[2], mean[3]);
        let signal = re * re + im * im;
        let variance = abs2 - signal;
        let gain_variance = MeanEstimate {
            mean: variance,
            std_err: delta_se([-2.0 * re, -2.0 * im, 1.0, 0.0]),
        };
        let denom = variance + leak + noise;
        let sinr = signal / denom;
        let d2 = denom * denom;
        let grad = [
            2.0 * re * (denom + signal) / d2,
            2.0 * im * (denom + signal) / d2,
            -signal / d2,
            -signal / d2,
        ];
        let sinr_se = if noise.is_finite() { delta_se(grad) } else { 0.0 };
        let assembled_rate = MeanEstimate {
            mean: sinr.ln_1p() / std::f64::consts::LN_2,
            std_err: sinr_se / ((1.0 + sinr) * std::f64::consts::LN_2),
        };
        let interference = (0..k)
            .filter(|&i| i != u)
            .map(|i| estimate(total.pair[u * k + i], total.pair_sq[u * k + i], n))
            .collect();
        users.push(UserMoments {
            mean_gain: estimate(total.z[u][0], total.zz[u][0][0], n),
            gain_variance,
            interference,
            total_interference: estimate(total.z[u][3], total.zz[u][3][3], n),
            assembled_rate,
        });
    }
    if users.iter().any(|u| !u.mean_gain.mean.is_finite()) {
        return Err(Error::NonFinite("downlink moment"));
    }
    Ok(DownlinkMoments {
        users,
        tx_power: estimate(total.power, total.power_sq, n),
        trials: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALPHA_01: f64 = 0.903_712_642_092_466_3;

    #[test]
    fn lambda_examples() {
        let c = DownlinkConfig::new(1, &[1.0], 1.0, 1e300, 1.0).unwrap();
        assert!((mrt_lambda(&c).unwrap() - 1.0).abs() < 1e-12);
        let a = 0.8167f64.sqrt();
        let c = DownlinkConfig::new(64, &[1.0], 1.0, 10.0, a).unwrap();
        let expect = 1.0 / (64.0 * 0.8167 * 10.0 / 11.0f64).sqrt();
        assert!((mrt_lambda(&c).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 0.14506).abs() < 1e-5);
        let c = DownlinkConfig::new(64, &[1.0], 1.0, 10.0, 0.0).unwrap();
        assert!(mrt_lambda(&c).is_err());
    }

    #[test]
    fn lambda_scales_inverse_sqrt_m() {
        let betas = [1.0, 0.4, 0.1];
        let l1 = mrt_lambda(&DownlinkConfig::new(16, &betas, 1.0, 10.0, 0.9).unwrap()).unwrap();
        let l4 = mrt_lambda(&DownlinkConfig::new(64, &betas, 1.0, 10.0, 0.9).unwrap()).unwrap();
        assert!((l1 / l4 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_examples() {
        let a = 0.8167f64.sqrt();
        let c = DownlinkConfig::new(64, &[1.0], 10.0, 10.0, a).unwrap();
        let r = downlink_rate_closed_form(&c, 0).unwrap();
        let expect = (1.0 + 0.8167 * 64.0 * (10.0 / 11.0) / 1.1f64).log2();
        assert!((r - expect).abs() < 1e-12);
        assert!((r - 5.47).abs() < 0.01);
        let z = DownlinkConfig::new(64, &[1.0, 0.5], 10.0, 10.0, 0.0).unwrap();
        assert_eq!(downlink_rate_closed_form(&z, 1).unwrap(), 0.0);
        assert!(downlink_rate_closed_form(&z, 2).is_err());
    }

    #[test]
    fn interference_limited_ceiling() {
        let betas = [1.0, 0.5, 0.2];
        let huge = DownlinkConfig::new(32, &betas, 1e15, 5.0, 0.9).unwrap();
        let s: f64 = (0..3).map(|i| huge.sigma2(i)).sum();
        let ceiling = (1.0 + 0.81 * 32.0 * huge.sigma2(1).powi(2) / (0.5 * s)).log2();
        assert!((downlink_rate_closed_form(&huge, 1).unwrap() - ceiling).abs() < 1e-12);
    }

    #[test]
    fn rate_monotonicity() {
        let betas = [1.0, 0.5, 0.2];
        let base = DownlinkConfig::new(32, &betas, 3.0, 5.0, 0.9).unwrap();
        let r = downlink_rate_closed_form(&base, 0).unwrap();
        let more_power = DownlinkConfig::new(32, &betas, 6.0, 5.0, 0.9).unwrap();
        let more_antennas = DownlinkConfig::new(64, &betas, 3.0, 5.0, 0.9).unwrap();
        let more_users = DownlinkConfig::new(32, &[1.0, 0.5, 0.2, 0.1], 3.0, 5.0, 0.9).unwrap();
        assert!(downlink_rate_closed_form(&more_power, 0).unwrap() > r);
        assert!(downlink_rate_closed_form(&more_antennas, 0).unwrap() > r);
        assert!(downlink_rate_closed_form(&more_users, 0).unwrap() < r);
    }

    #[test]
    fn scaling_limit_examples() {
        let r = downlink_scaling_limit(10.0, 2.0, 1, ALPHA_01, &[1.0], 0.5, 1 << 10, 0).unwrap();
        let r2 = downlink_scaling_limit(10.0, 2.0, 1, ALPHA_01, &[1.0], 0.5, 1 << 20, 0).unwrap();
        assert_eq!(r, r2);
        assert!((r - (1.0 + ALPHA_01 * ALPHA_01 * 20.0f64).log2()).abs() < 1e-14);
        assert!((r - 4.12).abs() < 0.01);
        assert!(downlink_scaling_limit(10.0, 2.0, 1, ALPHA_01, &[1.0], 1.0, 1 << 40, 0).unwrap() < 1e-4);
        assert!(downlink_scaling_limit(10.0, 2.0, 1, ALPHA_01, &[1.0], 0.0, 8, 0).is_err());
    }

    #[test]
    fn scaled_config() {
        let c = DownlinkConfig::with_power_scaling(64, &[1.0], 10.0, 0.5, 10.0, 0.9).unwrap();
        assert!((c.p_b - 1.25).abs() < 1e-15);
        assert_eq!(c.beta_exp, 0.5);
    }

    #[test]
    fn oracle_degenerate_cases() {
        let c = DownlinkConfig::new(8, &[1.0], 10.0, 10.0, 0.0).unwrap();
        let m = downlink_moment_oracle(&c, 200, 1).unwrap();
        assert!(m.users[0].interference.is_empty());
        assert_eq!(m.users[0].mean_gain.mean, 0.0);
        assert_eq!(m.users[0].gain_variance.mean, 0.0);
        let c = DownlinkConfig::new(8, &[1.0, 1.0], 10.0, 10.0, 0.0).unwrap();
        let m = downlink_moment_oracle(&c, 50, 1).unwrap();
        assert_eq!(m.users[1].total_interference.mean, 0.0);
        assert_eq!(m.users[1].interference.len(), 1);
    }

    #[test]
    fn oracle_is_deterministic_and_csv_shaped() {
        let c = DownlinkConfig::new(8, &[1.0, 0.5], 10.0, 10.0, 0.9).unwrap();
        let a = downlink_moment_oracle(&c, 3000, 9).unwrap();
        let b = downlink_moment_oracle(&c, 3000, 9).unwrap();
        assert_eq!(a, b);
        let csv = a.to_csv(&c);
        assert!(csv.starts_with("# M=8,K=2,"));
        assert_eq!(csv.lines().nth(1), Some("user,rate,std_err"));
        assert_eq!(csv.lines().count(), 4);
    }
}
