//! Optimal linear (Wiener) prediction of the next channel from past pilots.
//!
//! The predictor for user `k` observes `p + 1` training snapshots `ỹ_k[n − j]`,
//! `j = 0..=p`. Every antenna sees the same statistics, so the full
//! `M(p+1)`-dimensional Wiener filter is the Kronecker product of a
//! `(p+1)`-dimensional filter with `I_M`. Only the reduced filter is stored.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::channel::{estimate_shrinkage, FadingProfile};
use crate::error::{ensure_finite, ensure_positive, invalid, Error, Result};
use crate::kernel::ComplexMatrix;

/// Wiener predictor for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorState {
    order: usize,
    alpha: f64,
    beta: f64,
    /// `β·δ·A⁻¹`: the linear MMSE estimate of `g[n]` from the history.
    filter: Vec<f64>,
    weights: Vec<f64>,
    theta: f64,
    mse_per_entry: f64,
}

impl PredictorState {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Per-lag weights `α·β·δ·A⁻¹`, most recent lag first.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights of the current-channel estimate; `weights = α · filter`.
    pub fn filter(&self) -> &[f64] {
        &self.filter
    }

    /// Scalar `θ` with `Θ = θ·I_M`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `β − α²θ`.
    pub fn mse_per_entry(&self) -> f64 {
        self.mse_per_entry
    }
}

/// `δ(p, α) = [1, α, …, α^p]`.
fn delta(order: usize, alpha: f64) -> Vec<f64> {
    (0..=order).map(|j| alpha.powi(j as i32)).collect()
}

/// Computes the order-`p` Wiener predictor for a user with large-scale
/// coefficient `beta` trained at power `p_p`.
///
/// With `A = β·Δ(p, α) + I/p_p` and `Δ_ij = α^|i−j|`, the weights are
/// `α·β·δ·A⁻¹`, `θ = β²·δ·A⁻¹·δᵀ` and the per-entry error is `β − α²θ`.
pub fn wiener_coefficients(order: usize, alpha: f64, beta: f64, p_p: f64) -> Result<PredictorState> {
    ensure_finite("alpha", alpha)?;
    if alpha.abs() > 1.0 {
        return Err(invalid("alpha", format!("|alpha| must be <= 1, got {alpha}")));
    }
    ensure_positive("beta", beta)?;
    ensure_positive("p_p", p_p)?;

    let (filter, theta) = if order == 0 {
        // Same arithmetic as the plain MMSE estimate, so order 0 reproduces
        // aged CSI bit for bit.
        let shrink = estimate_shrinkage(beta, p_p);
        (vec![shrink], beta * shrink)
    } else {
        let d = delta(order, alpha);
        let n = order + 1;
        let a = DMatrix::from_fn(n, n, |i, j| {
            let noise = if i == j { 1.0 / p_p } else { 0.0 };
            beta * alpha.powi(i.abs_diff(j) as i32) + noise
        });
        let chol = Cholesky::new(a).ok_or(Error::NotPositiveDefinite)?;
        let d = DVector::from_column_slice(&d);
        let x = chol.solve(&d);
        let filter: Vec<f64> = x.iter().map(|v| beta * v).collect();
        // θ = β²‖L⁻¹δ‖². Entry j of L⁻¹δ is the innovation brought by the
        // observation j slots back, and its leading entry squared is the
        // order-0 shrinkage, so θ is accumulated from the order-0 value and
        // cannot decrease with the order even in floating point.
        let z = chol.l().solve_lower_triangular(&d).ok_or(Error::NotPositiveDefinite)?;
        let theta = z
            .iter()
            .skip(1)
            .fold(beta * estimate_shrinkage(beta, p_p), |acc, v| acc + beta * beta * v * v);
        (filter, theta)
    };
    if !theta.is_finite() {
        return Err(Error::NotPositiveDefinite);
    }
    let weights = filter.iter().map(|f| alpha * f).collect();
    Ok(PredictorState {
        order,
        alpha,
        beta,
        filter,
        weights,
        theta,
        mse_per_entry: (beta - alpha * alpha * theta).max(0.0),
    })
}

/// Predictors for every user of a profile.
pub fn predictor_states(order: usize, alpha: f64, profile: &FadingProfile, p_p: f64) -> Result<Vec<PredictorState>> {
    profile
        .betas()
        .iter()
        .map(|&b| wiener_coefficients(order, alpha, b, p_p))
        .collect()
}

/// Predicts `G[n+1]` from training observations, most recent first.
pub fn predict_channel(history: &[ComplexMatrix], states: &[PredictorState]) -> Result<ComplexMatrix> {
    let first = history.first().ok_or_else(|| Error::HistoryLength {
        order: states.first().map_or(0, |s| s.order),
        got: 0,
    })?;
    let (m, k) = (first.rows(), first.cols());
    if states.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "{} predictor states for {k} users",
            states.len()
        )));
    }
    for s in states {
        if s.order + 1 != history.len() {
            return Err(Error::HistoryLength {
                order: s.order,
                got: history.len(),
            });
        }
    }
    if history.iter().any(|h| h.rows() != m || h.cols() != k) {
        return Err(Error::DimensionMismatch("history matrices differ in shape".into()));
    }
    let mut out = history[0].clone();
    for (col, s) in states.iter().enumerate() {
        let acc = out.column_mut(col);
        acc.iter_mut().for_each(|x| *x *= s.filter[0]);
        for (h, &f) in history.iter().zip(&s.filter).skip(1) {
            acc.iter_mut().zip(h.column(col)).for_each(|(x, &y)| *x += y * f);
        }
        acc.iter_mut().for_each(|x| *x *= s.alpha);
    }
    Ok(out)
}

/// Total prediction error `M·(β − α²θ)`.
pub fn prediction_mse(state: &PredictorState, m: usize) -> f64 {
    m as f64 * state.mse_per_entry
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{aged_csi, generate_channel, AgingParams};
    use crate::channel::{mmse_variance, observe_and_estimate};
    use crate::kernel::Rng;
    use num_complex::Complex64;

    /// Full `M(p+1)`-dimensional Θ from the Kronecker form, via a general inverse.
    fn dense_theta(order: usize, alpha: f64, beta: f64, p_p: f64, m: usize) -> DMatrix<f64> {
        let n = m * (order + 1);
        let t = DMatrix::from_fn(n, n, |r, c| {
            let (bi, ii) = (r / m, r % m);
            let (bj, jj) = (c / m, c % m);
            let kron = if ii == jj {
                beta * alpha.powi((bi as i32 - bj as i32).abs())
            } else {
                0.0
            };
            kron + if r == c { 1.0 / p_p } else { 0.0 }
        });
        let d = DMatrix::from_fn(m, n, |r, c| if c % m == r { alpha.powi((c / m) as i32) } else { 0.0 });
        let inv = t.try_inverse().unwrap();
        &d * inv * d.transpose() * (beta * beta)
    }

    #[test]
    fn order_zero_unit_case() {
        for &alpha in &[0.0, 0.3, 0.9, 1.0] {
            let s = wiener_coefficients(0, alpha, 1.0, 1.0).unwrap();
            assert_eq!(s.theta(), 0.5);
            assert_eq!(s.weights(), &[alpha / 2.0]);
        }
    }

    #[test]
    fn order_zero_matches_estimation_variance() {
        for &(beta, pp) in &[(1.0, 1.0), (0.02, 100.0), (3.5, 0.1)] {
            let s = wiener_coefficients(0, 0.7, beta, pp).unwrap();
            assert_eq!(s.theta(), mmse_variance(beta, pp));
            let direct = pp * beta * beta / (1.0 + pp * beta);
            assert!((s.theta() - direct).abs() <= 1e-14 * direct);
        }
    }

    #[test]
    fn reduced_form_matches_dense_oracle() {
        let s = wiener_coefficients(2, 0.9, 1.0, 10.0).unwrap();
        let dense = dense_theta(2, 0.9, 1.0, 10.0, 2);
        assert!((s.theta() - dense[(0, 0)]).abs() < 1e-12);
        assert!((s.theta() - 0.928_675_890_744_856_2).abs() < 1e-12);
    }

    #[test]
    fn dense_theta_is_scaled_identity() {
        for &(p, a, b, pp) in &[(1, 0.9, 1.0, 10.0), (3, 0.5, 0.2, 3.0), (2, -0.4, 2.0, 0.5)] {
            let s = wiener_coefficients(p, a, b, pp).unwrap();
            let dense = dense_theta(p, a, b, pp, 3);
            for i in 0..3 {
                for j in 0..3 {
                    if i == j {
                        assert!((dense[(i, j)] - s.theta()).abs() < 1e-12);
                    } else {
                        assert!(dense[(i, j)].abs() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn theta_grows_with_order() {
        let reference = [
            0.909_090_909_090_909_1,
            0.9275,
            0.928_675_890_744_856_2,
            0.928_754_427_623_215_4,
        ];
        let mut prev = 0.0;
        for (p, &r) in reference.iter().enumerate() {
            let s = wiener_coefficients(p, 0.9, 1.0, 10.0).unwrap();
            assert!((s.theta() - r).abs() < 1e-12);
            assert!(s.theta() >= prev && s.theta() <= 1.0);
            assert!(s.mse_per_entry() >= 0.0);
            prev = s.theta();
        }
    }

    /// Ensemble MSE per entry of the prediction `Σ w_j ỹ[n−j]` of `g[n+1]`.
    fn quadratic_mse(w: &[f64], alpha: f64, beta: f64, p_p: f64) -> f64 {
        let n = w.len();
        let mut mse = beta;
        for i in 0..n {
            mse -= 2.0 * w[i] * beta * alpha.powi(i as i32 + 1);
            for j in 0..n {
                let cov = beta * alpha.powi(i.abs_diff(j) as i32) + if i == j { 1.0 / p_p } else { 0.0 };
                mse += w[i] * w[j] * cov;
            }
        }
        mse
    }

    #[test]
    fn weights_are_locally_optimal() {
        let (alpha, beta, pp) = (0.8, 0.7, 5.0);
        for p in 0..4 {
            let s = wiener_coefficients(p, alpha, beta, pp).unwrap();
            let best = quadratic_mse(s.weights(), alpha, beta, pp);
            assert!((best - s.mse_per_entry()).abs() < 1e-12);
            for j in 0..=p {
                for eps in [-1e-3, 1e-3] {
                    let mut w = s.weights().to_vec();
                    w[j] += eps;
                    assert!(quadratic_mse(&w, alpha, beta, pp) >= best);
                }
            }
        }
    }

    #[test]
    fn large_antenna_asymptote() {
        let m = 1e6f64;
        let pp = 1.0 / m.sqrt();
        let (alpha, beta) = (0.9, 1.0);
        for p in 0..4 {
            let s = wiener_coefficients(p, alpha, beta, pp).unwrap();
            let sum: f64 = (0..=p).map(|j| alpha.powi(2 * j as i32)).sum();
            let limit = beta * beta * pp * sum;
            assert!((s.theta() - limit).abs() <= 0.05 * limit);
        }
    }

    #[test]
    fn predictor_limits() {
        let s = wiener_coefficients(2, 0.0, 2.0, 1.0).unwrap();
        assert_eq!(prediction_mse(&s, 10), 20.0);
        let s = wiener_coefficients(0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(prediction_mse(&s, 8), 4.0);
        assert!(wiener_coefficients(1, 1.2, 1.0, 1.0).is_err());
        assert!(wiener_coefficients(1, 0.5, 0.0, 1.0).is_err());
        assert!(wiener_coefficients(1, 0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn order_zero_prediction_is_aged_csi() {
        let profile = FadingProfile::from_betas(&[1.0, 0.3, 0.05]).unwrap();
        let aging = AgingParams::from_alpha(0.9037).unwrap();
        let pp = 30.0;
        let mut rng = Rng::new(11, 0);
        let g = generate_channel(&profile, 12, &mut rng).unwrap();
        let r = observe_and_estimate(&g, &profile, pp, &mut rng).unwrap();
        let states = predictor_states(0, aging.alpha(), &profile, pp).unwrap();
        let predicted = predict_channel(std::slice::from_ref(&r.observation), &states).unwrap();
        assert_eq!(predicted, aged_csi(&r.estimate, aging));
    }

    #[test]
    fn history_checks() {
        let profile = FadingProfile::from_betas(&[1.0]).unwrap();
        let states = predictor_states(2, 0.9, &profile, 1.0).unwrap();
        let zero = ComplexMatrix::zeros(4, 1);
        assert_eq!(
            predict_channel(&[zero.clone(), zero.clone()], &states),
            Err(Error::HistoryLength { order: 2, got: 2 })
        );
        let out = predict_channel(&[zero.clone(), zero.clone(), zero.clone()], &states).unwrap();
        assert_eq!(out, zero);
        let one = ComplexMatrix::from_column_slice(1, 1, &[Complex64::new(1.0, 0.0)]).unwrap();
        let out = predict_channel(&[one.clone(), one.clone(), one], &states).unwrap();
        let w: f64 = states[0].weights().iter().sum();
        assert!((out.get(0, 0).re - w).abs() < 1e-15);
    }
}
