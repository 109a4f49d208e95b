use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{ensure_finite, Result};

/// Power series below this argument, Hankel asymptotic expansion above.
const CROSSOVER: f64 = 12.0;

/// Bessel function of the first kind, order zero.
///
/// Absolute error stays below 1e-10 on `|x| <= 50`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    let x = x.abs();
    Ok(if x <= CROSSOVER { series(x) } else { asymptotic(x) })
}

fn series(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        let mf = m as f64;
        term *= q / (mf * mf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-3) && mf > 0.5 * x {
            break;
        }
    }
    sum
}

fn asymptotic(x: f64) -> f64 {
    // a_k = -(2k-1)^2 / (8k) * a_{k-1}; terms a_k / x^k alternate between P and Q.
    let mut p = 1.0;
    let mut q = 0.0;
    let mut t = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..64 {
        let odd = (2 * k - 1) as f64;
        t *= -odd * odd / (8.0 * k as f64 * x);
        if t.abs() >= prev || t.abs() < 1e-18 {
            break;
        }
        prev = t.abs();
        // P collects even k with sign (-1)^(k/2), Q odd k with sign (-1)^((k-1)/2).
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * t;
        } else {
            q += sign * t;
        }
    }
    let chi = x - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 30-digit arbitrary-precision evaluation.
    const REFERENCE: &[(f64, f64)] = &[
        (0.6283185, 0.903_712_651_274_342_1),
        (1.0, 0.765_197_686_557_966_6),
        (5.0, -0.177_596_771_314_338_3),
        (11.9, 0.025_049_441_699_589_645),
        (12.0, 0.047_689_310_796_833_54),
        (12.1, 0.069_666_773_606_807_31),
        (15.0, -0.014_224_472_826_780_773),
        (20.0, 0.167_024_664_340_583_15),
        (30.5, -0.019_389_754_517_762_15),
        (42.0, -0.114_739_496_713_582_82),
        (50.0, 0.055_812_327_669_251_815),
    ];

    #[test]
    fn matches_reference_values() {
        for &(x, want) in REFERENCE {
            let got = bessel_j0(x).unwrap();
            assert!((got - want).abs() <= 1e-10, "J0({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn at_zero() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
    }

    #[test]
    fn truncated_series_oracle() {
        // Six-term series from the definition, independent of the loop above.
        let x: f64 = 0.6283185;
        let h = x * x / 4.0;
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];
        let oracle: f64 = (0..6).map(|m| (-h).powi(m as i32) / (fact[m] * fact[m])).sum();
        assert!((bessel_j0(x).unwrap() - oracle).abs() < 1e-6);
        assert!((bessel_j0(x).unwrap() - 0.9037129).abs() < 1e-6);
    }

    #[test]
    fn first_root() {
        // Bisection on the series for the sign change in [2, 3].
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if series(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 2.404_825_557_695_773).abs() < 1e-12);
        assert!(bessel_j0(2.4048256).unwrap().abs() < 1e-6);
    }

    #[test]
    fn seam_is_continuous() {
        for x in [11.5, 11.9, 12.0, 12.1, 12.5, 13.0] {
            assert!((series(x) - asymptotic(x)).abs() < 1e-10, "seam mismatch at {x}");
        }
    }

    #[test]
    fn even_and_bounded() {
        let mut x = -50.0;
        while x <= 50.0 {
            let v = bessel_j0(x).unwrap();
            assert_eq!(v, bessel_j0(-x).unwrap());
            assert!(v.abs() <= 1.0);
            x += 0.173;
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(bessel_j0(f64::NAN).is_err());
        assert!(bessel_j0(f64::INFINITY).is_err());
    }
}
