//! Large-scale fading, Rayleigh channels, pilot training and AR(1) aging.

mod profile;

pub use profile::{drop_users, CellGeometry, FadingProfile};

use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::kernel::{bessel_j0, sample_complex_gaussian, ComplexMatrix, Rng};

/// Temporal correlation of the AR(1) channel process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgingParams {
    alpha: f64,
    fd_ts: Option<f64>,
}

impl AgingParams {
    /// Explicit correlation, not tied to a Doppler value.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        ensure_finite("alpha", alpha)?;
        if alpha.abs() > 1.0 {
            return Err(invalid("alpha", format!("|alpha| must be <= 1, got {alpha}")));
        }
        Ok(Self { alpha, fd_ts: None })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Normalized Doppler `f_D T_s`, when the correlation came from one.
    pub fn fd_ts(&self) -> Option<f64> {
        self.fd_ts
    }

    /// Variance fraction `1 − α²` renewed at every step.
    pub fn innovation_fraction(&self) -> f64 {
        1.0 - self.alpha * self.alpha
    }
}

/// Jakes model: `α = J0(2π f_D T_s)`.
pub fn jakes_alpha(fd_ts: f64) -> Result<AgingParams> {
    ensure_finite("fd_ts", fd_ts)?;
    if fd_ts < 0.0 {
        return Err(invalid("fd_ts", format!("must be >= 0, got {fd_ts}")));
    }
    Ok(AgingParams {
        alpha: bessel_j0(2.0 * std::f64::consts::PI * fd_ts)?,
        fd_ts: Some(fd_ts),
    })
}

/// MMSE shrinkage `β/(β + 1/p_p)` applied to a training observation.
pub fn estimate_shrinkage(beta: f64, p_p: f64) -> f64 {
    beta / (beta + 1.0 / p_p)
}

/// Per-entry variance of the MMSE estimate, `p_p β²/(1 + p_p β)`.
pub fn mmse_variance(beta: f64, p_p: f64) -> f64 {
    beta * estimate_shrinkage(beta, p_p)
}

/// One training snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub true_channel: ComplexMatrix,
    /// Post-correlation pilot observation, one column per user.
    pub observation: ComplexMatrix,
    pub estimate: ComplexMatrix,
    /// `true_channel − estimate`.
    pub est_error: ComplexMatrix,
}

/// `M × K` channel with column `k` i.i.d. `CN(0, β_k)`.
pub fn generate_channel(profile: &FadingProfile, m: usize, rng: &mut Rng) -> Result<ComplexMatrix> {
    if m == 0 {
        return Err(invalid("M", "must be >= 1"));
    }
    let mut g = sample_complex_gaussian(m, profile.len(), 1.0, rng)?;
    for (k, &beta) in profile.betas().iter().enumerate() {
        let s = beta.sqrt();
        g.column_mut(k).iter_mut().for_each(|x| *x *= s);
    }
    Ok(g)
}

fn check_columns(g: &ComplexMatrix, profile: &FadingProfile) -> Result<()> {
    if g.cols() != profile.len() {
        return Err(Error::DimensionMismatch(format!(
            "channel has {} columns, profile has {} users",
            g.cols(),
            profile.len()
        )));
    }
    Ok(())
}

/// Draws the pilot observation `g_k + b_k/√p_p` and forms the MMSE estimate.
pub fn observe_and_estimate(
    true_channel: &ComplexMatrix,
    profile: &FadingProfile,
    p_p: f64,
    rng: &mut Rng,
) -> Result<ChannelRealization> {
    ensure_positive("p_p", p_p)?;
    check_columns(true_channel, profile)?;
    let observation = observe(true_channel, p_p, rng)?;
    let mut estimate = observation.clone();
    for (k, &beta) in profile.betas().iter().enumerate() {
        let shrink = estimate_shrinkage(beta, p_p);
        estimate.column_mut(k).iter_mut().for_each(|x| *x *= shrink);
    }
    let est_error = true_channel.sub(&estimate)?;
    Ok(ChannelRealization {
        true_channel: true_channel.clone(),
        observation,
        estimate,
        est_error,
    })
}

/// Training observation only, without the estimate.
pub(crate) fn observe(true_channel: &ComplexMatrix, p_p: f64, rng: &mut Rng) -> Result<ComplexMatrix> {
    let mut y = sample_complex_gaussian(true_channel.rows(), true_channel.cols(), 1.0, rng)?;
    let s = 1.0 / p_p.sqrt();
    for k in 0..y.cols() {
        let g = true_channel.column(k);
        y.column_mut(k).iter_mut().zip(g).for_each(|(b, &gk)| *b = gk + *b * s);
    }
    Ok(y)
}

/// One AR(1) step: `α·g + e` with `e` of per-entry variance `(1 − α²)β_k`.
pub fn age_channel(
    current: &ComplexMatrix,
    aging: AgingParams,
    profile: &FadingProfile,
    rng: &mut Rng,
) -> Result<ComplexMatrix> {
    check_columns(current, profile)?;
    let alpha = aging.alpha();
    let mut next = sample_complex_gaussian(current.rows(), current.cols(), 1.0, rng)?;
    for (k, &beta) in profile.betas().iter().enumerate() {
        let s = (aging.innovation_fraction() * beta).sqrt();
        let g = current.column(k);
        next.column_mut(k)
            .iter_mut()
            .zip(g)
            .for_each(|(e, &gk)| *e = gk * alpha + *e * s);
    }
    Ok(next)
}

/// Stale CSI `α·ĝ[n]` used at time `n + 1`.
pub fn aged_csi(estimate: &ComplexMatrix, aging: AgingParams) -> ComplexMatrix {
    estimate.scale(aging.alpha())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn jakes_examples() {
        assert_eq!(jakes_alpha(0.0).unwrap().alpha(), 1.0);
        assert!((jakes_alpha(0.1).unwrap().alpha() - 0.903_712_9).abs() < 1e-6);
        assert!(jakes_alpha(0.3827).unwrap().alpha().abs() < 1e-3);
        assert!(jakes_alpha(-0.1).is_err());
        assert!(jakes_alpha(f64::NAN).is_err());
        assert_eq!(jakes_alpha(0.1).unwrap().fd_ts(), Some(0.1));
    }

    #[test]
    fn explicit_alpha_bounds() {
        assert!(AgingParams::from_alpha(1.0001).is_err());
        assert_eq!(AgingParams::from_alpha(-0.5).unwrap().fd_ts(), None);
    }

    #[test]
    fn shrinkage_in_unit_interval() {
        for &beta in &[1e-6, 0.1, 1.0, 100.0] {
            for &pp in &[1e-3, 1.0, 1e3] {
                let s = estimate_shrinkage(beta, pp);
                assert!(s > 0.0 && s < 1.0);
                let direct = pp * beta * beta / (1.0 + pp * beta);
                assert!((mmse_variance(beta, pp) - direct).abs() <= 1e-14 * direct);
            }
        }
        assert_eq!(estimate_shrinkage(1.0, 1.0), 0.5);
    }

    #[test]
    fn zero_betas_give_zero_channel() {
        let p = FadingProfile::from_betas(&[0.0, 0.0]).unwrap();
        let g = generate_channel(&p, 5, &mut Rng::new(1, 0)).unwrap();
        assert_eq!(g, ComplexMatrix::zeros(5, 2));
    }

    #[test]
    fn noiseless_training_recovers_channel() {
        let p = FadingProfile::from_betas(&[1.0, 0.3]).unwrap();
        let mut rng = Rng::new(2, 0);
        let g = generate_channel(&p, 16, &mut rng).unwrap();
        let r = observe_and_estimate(&g, &p, 1e12, &mut rng).unwrap();
        assert!(r.est_error.frobenius_norm() < 1e-5 * g.frobenius_norm());
        let back = r.estimate.add(&r.est_error).unwrap();
        assert!(back.sub(&g).unwrap().frobenius_norm() <= 1e-15 * g.frobenius_norm());
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = FadingProfile::from_betas(&[1.0]).unwrap();
        let mut rng = Rng::new(0, 0);
        let g = generate_channel(&p, 4, &mut rng).unwrap();
        assert!(observe_and_estimate(&g, &p, 0.0, &mut rng).is_err());
        assert!(generate_channel(&p, 0, &mut rng).is_err());
        let two = FadingProfile::from_betas(&[1.0, 1.0]).unwrap();
        assert!(age_channel(&g, jakes_alpha(0.1).unwrap(), &two, &mut rng).is_err());
    }

    #[test]
    fn unit_alpha_is_identity() {
        let p = FadingProfile::from_betas(&[1.0, 2.0]).unwrap();
        let mut rng = Rng::new(5, 0);
        let g = generate_channel(&p, 8, &mut rng).unwrap();
        let aging = jakes_alpha(0.0).unwrap();
        assert_eq!(age_channel(&g, aging, &p, &mut rng).unwrap(), g);
        assert_eq!(aged_csi(&g, aging), g);
    }

    #[test]
    fn aged_csi_scales() {
        let est = ComplexMatrix::from_column_slice(1, 1, &[Complex64::new(1.0, 0.0)]).unwrap();
        let a = AgingParams::from_alpha(0.9037).unwrap();
        assert!((aged_csi(&est, a).frobenius_norm() - 0.9037).abs() < 1e-15);
        assert_eq!(
            aged_csi(&est, AgingParams::from_alpha(0.0).unwrap()),
            ComplexMatrix::zeros(1, 1)
        );
    }
}
