//! Linear uplink detection and Monte Carlo ergodic rates.
//!
//! Rates use the worst-case uncorrelated-noise SINR: the CSI error is folded
//! into noise through its average power, so `log2(1 + SINR)` averaged over
//! small-scale fading is an achievable rate.

use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::channel::{
    age_channel, aged_csi, generate_channel, mmse_variance, observe, observe_and_estimate, AgingParams, FadingProfile,
};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::kernel::stats::MeanEstimate;
use crate::kernel::{hermitian_solve, ComplexMatrix, Rng};
use crate::predictor::{predict_channel, predictor_states};
use crate::{CsiMode, SystemConfig};

/// Linear detector type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Mrc,
    Zf,
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorKind::Mrc => "mrc",
            DetectorKind::Zf => "zf",
        })
    }
}

/// Detector matrix for the given CSI: the CSI itself for MRC, its
/// pseudo-inverse `csi·(csi†csi)⁻¹` for ZF.
pub fn build_detector(csi: &ComplexMatrix, kind: DetectorKind) -> Result<ComplexMatrix> {
    match kind {
        DetectorKind::Mrc => Ok(csi.clone()),
        DetectorKind::Zf => {
            if csi.rows() < csi.cols() {
                return Err(Error::TooFewAntennas(format!(
                    "zero-forcing needs M >= K, got M = {}, K = {}",
                    csi.rows(),
                    csi.cols()
                )));
            }
            let gram = csi.adjoint_mul(csi)?;
            let x = hermitian_solve(&gram, &csi.adjoint()).map_err(|e| match e {
                Error::NotPositiveDefinite | Error::NonFinite(_) => Error::SingularGram,
                other => other,
            })?;
            Ok(x.adjoint())
        }
    }
}

/// `Σ_i (β_i − α²θ_i)`: average power of the CSI error summed over users.
fn error_floor(betas: &[f64], alpha: f64, thetas: impl Iterator<Item = f64>) -> f64 {
    let a2 = alpha * alpha;
    betas.iter().zip(thetas).map(|(b, t)| b - a2 * t).sum()
}

fn sinr_with_floor(detector: &ComplexMatrix, csi: &ComplexMatrix, floor: f64, p_u: f64) -> Result<Vec<f64>> {
    if detector.rows() != csi.rows() || detector.cols() != csi.cols() {
        return Err(Error::DimensionMismatch(format!(
            "detector {}x{}, CSI {}x{}",
            detector.rows(),
            detector.cols(),
            csi.rows(),
            csi.cols()
        )));
    }
    let cross = detector.adjoint_mul(csi)?;
    let k = csi.cols();
    let noise = p_u * floor + 1.0;
    Ok((0..k)
        .map(|row| {
            let mut interference = 0.0;
            for i in (0..k).filter(|&i| i != row) {
                interference += cross.get(row, i).norm_sqr();
            }
            let signal = p_u * cross.get(row, row).norm_sqr();
            signal / (p_u * interference + detector.column_norm_sqr(row) * noise)
        })
        .collect())
}

fn check_users(csi: &ComplexMatrix, profile: &FadingProfile, extra: Option<usize>) -> Result<()> {
    let ok = csi.cols() == profile.len() && extra.is_none_or(|n| n == profile.len());
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "CSI has {} users, profile {}",
            csi.cols(),
            profile.len()
        )))
    }
}

/// Per-user SINR when detecting with aged CSI `csi = α·ĝ[n]`.
pub fn instantaneous_sinr_aged(
    detector: &ComplexMatrix,
    csi: &ComplexMatrix,
    profile: &FadingProfile,
    aging: AgingParams,
    p_u: f64,
    p_p: f64,
) -> Result<Vec<f64>> {
    ensure_positive("p_u", p_u)?;
    ensure_positive("p_p", p_p)?;
    check_users(csi, profile, None)?;
    let betas = profile.betas();
    let floor = error_floor(betas, aging.alpha(), betas.iter().map(|&b| mmse_variance(b, p_p)));
    sinr_with_floor(detector, csi, floor, p_u)
}

/// Per-user SINR when detecting with predicted CSI; `thetas[i]` is the
/// predictor coefficient of user `i`.
pub fn instantaneous_sinr_predicted(
    detector: &ComplexMatrix,
    predicted_csi: &ComplexMatrix,
    thetas: &[f64],
    profile: &FadingProfile,
    aging: AgingParams,
    p_u: f64,
) -> Result<Vec<f64>> {
    ensure_positive("p_u", p_u)?;
    check_users(predicted_csi, profile, Some(thetas.len()))?;
    let floor = error_floor(profile.betas(), aging.alpha(), thetas.iter().copied());
    sinr_with_floor(detector, predicted_csi, floor, p_u)
}

/// Monte Carlo rate estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub per_user_rate: Vec<f64>,
    pub std_err: Vec<f64>,
    /// Overhead factor times the sum of the per-user rates.
    pub sum_rate: f64,
    pub sum_std_err: f64,
    pub trials: usize,
    pub csi_mode: CsiMode,
    pub detector: DetectorKind,
    pub overhead: f64,
}

impl RateReport {
    /// CSV text: one `# key=value,...` parameter row, then `user,rate,std_err`.
    pub fn to_csv(&self, config: &SystemConfig) -> String {
        let params = [
            ("M", config.m.to_string()),
            ("K", config.k.to_string()),
            ("tau", config.tau.to_string()),
            ("p_u", format!("{:.16e}", config.p_u)),
            ("alpha", format!("{:.16e}", config.alpha())),
            ("detector", self.detector.to_string()),
            ("csi", self.csi_mode.to_string()),
            ("trials", self.trials.to_string()),
            ("sum_rate", format!("{:.16e}", self.sum_rate)),
        ];
        rate_csv(&params, &self.per_user_rate, &self.std_err)
    }
}

pub(crate) fn rate_csv(params: &[(&str, String)], rates: &[f64], std_err: &[f64]) -> String {
    let mut out = String::from("# ");
    let joined: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    out.push_str(&joined.join(","));
    out.push_str("\nuser,rate,std_err\n");
    for (k, (r, s)) in rates.iter().zip(std_err).enumerate() {
        let _ = writeln!(out, "{k},{r:.16e},{s:.16e}");
    }
    out
}

fn check_setup(config: &SystemConfig, profile: &FadingProfile, kind: DetectorKind) -> Result<()> {
    config.validate()?;
    if profile.len() != config.k {
        return Err(Error::DimensionMismatch(format!(
            "profile has {} users, config K = {}",
            profile.len(),
            config.k
        )));
    }
    if kind == DetectorKind::Zf && config.m < config.k {
        return Err(Error::TooFewAntennas(format!(
            "zero-forcing needs M >= K, got M = {}, K = {}",
            config.m, config.k
        )));
    }
    Ok(())
}

/// Per-user `log2(1 + SINR)` for trial `trial` of a seeded experiment.
///
/// The trial draws from stream `trial` of `seed`. Aged mode draws the channel
/// and one training observation. Predicted mode draws the channel `p` steps
/// back and then alternates training observations with AR(1) steps, ending
/// with the most recent observation; the channel at the detection instant is
/// never drawn because the SINR only involves the CSI. With `p = 0` both modes
/// consume identical draws and produce identical rates.
pub fn trial_rates(
    config: &SystemConfig,
    profile: &FadingProfile,
    kind: DetectorKind,
    csi_mode: CsiMode,
    seed: u64,
    trial: u64,
) -> Result<Vec<f64>> {
    check_setup(config, profile, kind)?;
    let mut rng = Rng::new(seed, trial);
    let aging = config.aging();
    let p_p = config.p_p();
    let sinr = match csi_mode {
        CsiMode::Aged => {
            let g = generate_channel(profile, config.m, &mut rng)?;
            let r = observe_and_estimate(&g, profile, p_p, &mut rng)?;
            let csi = aged_csi(&r.estimate, aging);
            let det = build_detector(&csi, kind)?;
            instantaneous_sinr_aged(&det, &csi, profile, aging, config.p_u, p_p)?
        }
        CsiMode::Predicted(p) => {
            let states = predictor_states(p, aging.alpha(), profile, p_p)?;
            let mut g = generate_channel(profile, config.m, &mut rng)?;
            let mut history = Vec::with_capacity(p + 1);
            for step in 0..=p {
                history.push(observe(&g, p_p, &mut rng)?);
                if step < p {
                    g = age_channel(&g, aging, profile, &mut rng)?;
                }
            }
            history.reverse();
            let csi = predict_channel(&history, &states)?;
            let det = build_detector(&csi, kind)?;
            let thetas: Vec<f64> = states.iter().map(|s| s.theta()).collect();
            instantaneous_sinr_predicted(&det, &csi, &thetas, profile, aging, config.p_u)?
        }
    };
    Ok(sinr.into_iter().map(|s| (1.0 + s).log2()).collect())
}

/// Ergodic per-user rates averaged over `trials` independent realizations.
///
/// Trials run on the current rayon pool; results are gathered in trial order
/// and reduced pairwise, so the report does not depend on the thread count.
pub fn monte_carlo_rate(
    config: &SystemConfig,
    profile: &FadingProfile,
    kind: DetectorKind,
    csi_mode: CsiMode,
    trials: usize,
    seed: u64,
) -> Result<RateReport> {
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    check_setup(config, profile, kind)?;
    let samples: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| trial_rates(config, profile, kind, csi_mode, seed, t))
        .collect::<Result<_>>()?;

    let k = config.k;
    let mut per_user_rate = Vec::with_capacity(k);
    let mut std_err = Vec::with_capacity(k);
    let mut column = vec![0.0; trials];
    for user in 0..k {
        column.iter_mut().zip(&samples).for_each(|(c, s)| *c = s[user]);
        let est = MeanEstimate::from_samples(&column);
        per_user_rate.push(est.mean);
        std_err.push(est.std_err);
    }
    let overhead = config.overhead_factor();
    column
        .iter_mut()
        .zip(&samples)
        .for_each(|(c, s)| *c = crate::kernel::stats::pairwise_sum(s));
    let sum = MeanEstimate::from_samples(&column);
    let plain: f64 = per_user_rate.iter().sum();
    Ok(RateReport {
        per_user_rate,
        std_err,
        sum_rate: overhead * plain,
        sum_std_err: overhead * sum.std_err,
        trials,
        csi_mode,
        detector: kind,
        overhead,
    })
}

/// `(T − τ)/T · Σ_k R_k`; without `T` the plain sum.
pub fn sum_rate(report: &RateReport, frame_len: Option<usize>, tau: usize) -> Result<f64> {
    let plain: f64 = report.per_user_rate.iter().sum();
    match frame_len {
        None => Ok(plain),
        Some(t) if t > tau && tau >= 1 => Ok((t - tau) as f64 / t as f64 * plain),
        Some(t) => Err(invalid("T", format!("frame length {t} must exceed tau = {tau} >= 1"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::sample_complex_gaussian;
    use num_complex::Complex64;

    fn orthonormal(m: usize, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(m, k, |r, c| {
            if r == c {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap()
    }

    #[test]
    fn zf_on_orthonormal_frame_is_identity_map() {
        let q = orthonormal(6, 3);
        assert!(
            build_detector(&q, DetectorKind::Zf)
                .unwrap()
                .sub(&q)
                .unwrap()
                .frobenius_norm()
                < 1e-14
        );
        assert_eq!(build_detector(&q, DetectorKind::Mrc).unwrap(), q);
    }

    #[test]
    fn zf_residual() {
        let mut rng = Rng::new(4, 0);
        for &(m, k) in &[(4, 4), (16, 5), (128, 10)] {
            let csi = sample_complex_gaussian(m, k, 0.7, &mut rng).unwrap();
            let a = build_detector(&csi, DetectorKind::Zf).unwrap();
            let r = a.adjoint_mul(&csi).unwrap().sub(&ComplexMatrix::identity(k)).unwrap();
            assert!(r.frobenius_norm() <= 1e-10);
        }
    }

    #[test]
    fn zf_single_user() {
        let mut rng = Rng::new(5, 0);
        let csi = sample_complex_gaussian(7, 1, 1.0, &mut rng).unwrap();
        let a = build_detector(&csi, DetectorKind::Zf).unwrap();
        let expect = csi.scale(1.0 / csi.column_norm_sqr(0));
        assert!(a.sub(&expect).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn zf_failures() {
        let csi = ComplexMatrix::zeros(4, 2);
        assert_eq!(build_detector(&csi, DetectorKind::Zf), Err(Error::SingularGram));
        assert!(matches!(
            build_detector(&ComplexMatrix::zeros(2, 3), DetectorKind::Zf),
            Err(Error::TooFewAntennas(_))
        ));
    }

    #[test]
    fn perfect_single_user_sinr() {
        let m = 16;
        let g = ComplexMatrix::from_fn(m, 1, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let profile = FadingProfile::from_betas(&[1.0]).unwrap();
        let aging = AgingParams::from_alpha(1.0).unwrap();
        let s = instantaneous_sinr_aged(&g, &g, &profile, aging, 2.0, 1e12).unwrap();
        assert!((s[0] - m as f64 * 2.0).abs() < 1e-9);
    }

    #[test]
    fn zf_orthonormal_is_interference_free() {
        let q = orthonormal(8, 3);
        let profile = FadingProfile::from_betas(&[1.0; 3]).unwrap();
        let aging = AgingParams::from_alpha(1.0).unwrap();
        let det = build_detector(&q, DetectorKind::Zf).unwrap();
        for s in instantaneous_sinr_aged(&det, &q, &profile, aging, 3.0, 1e12).unwrap() {
            assert!((s - 3.0).abs() < 1e-9);
        }
        let s = instantaneous_sinr_predicted(&det, &q, &[1.0; 3], &profile, aging, 3.0).unwrap();
        assert!(s.iter().all(|&x| (x - 3.0).abs() < 1e-12));
    }

    #[test]
    fn sum_rate_overhead() {
        let report = RateReport {
            per_user_rate: vec![1.0; 10],
            std_err: vec![0.0; 10],
            sum_rate: 10.0,
            sum_std_err: 0.0,
            trials: 1,
            csi_mode: CsiMode::Aged,
            detector: DetectorKind::Mrc,
            overhead: 1.0,
        };
        assert_eq!(sum_rate(&report, None, 10).unwrap(), 10.0);
        assert_eq!(sum_rate(&report, Some(200), 10).unwrap(), 9.5);
        assert_eq!(sum_rate(&report, Some(20), 10).unwrap(), 5.0);
        assert!(sum_rate(&report, Some(10), 10).is_err());
    }

    #[test]
    fn csv_shape() {
        let config = SystemConfig::new(8, 2, 1.0, 0.1).unwrap();
        let profile = FadingProfile::from_betas(&[1.0, 0.5]).unwrap();
        let r = monte_carlo_rate(&config, &profile, DetectorKind::Mrc, CsiMode::Aged, 4, 1).unwrap();
        let csv = r.to_csv(&config);
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# M=8,K=2,tau=2,"));
        assert_eq!(lines[1], "user,rate,std_err");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("0,"));
    }

    #[test]
    fn setup_errors() {
        let config = SystemConfig::new(4, 6, 1.0, 0.1).unwrap();
        let profile = FadingProfile::from_betas(&[1.0; 6]).unwrap();
        assert!(monte_carlo_rate(&config, &profile, DetectorKind::Zf, CsiMode::Aged, 10, 0).is_err());
        assert!(monte_carlo_rate(&config, &profile, DetectorKind::Mrc, CsiMode::Aged, 0, 0).is_err());
        let short = FadingProfile::from_betas(&[1.0; 5]).unwrap();
        assert!(monte_carlo_rate(&config, &short, DetectorKind::Mrc, CsiMode::Aged, 10, 0).is_err());
    }
}
