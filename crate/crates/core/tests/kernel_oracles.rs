use mimo_aging::kernel::stats::MeanEstimate;
use mimo_aging::kernel::{inv_norm_expectation, sample_complex_gaussian, wishart_inv_diag_expectation};
use mimo_aging::{ComplexMatrix, Rng};

#[test]
fn unit_variance_law_of_large_numbers() {
    let x = sample_complex_gaussian(10_000, 1, 1.0, &mut Rng::new(42, 0)).unwrap();
    let p: Vec<f64> = x.column(0).iter().map(|z| z.norm_sqr()).collect();
    assert!((MeanEstimate::from_samples(&p).mean - 1.0).abs() < 0.05);
}

#[test]
fn real_part_carries_half_the_variance() {
    let mut rng = Rng::new(43, 0);
    let re: Vec<f64> = (0..100_000)
        .map(|_| sample_complex_gaussian(1, 1, 4.0, &mut rng).unwrap().get(0, 0).re)
        .collect();
    let sq: Vec<f64> = re.iter().map(|x| x * x).collect();
    assert!((MeanEstimate::from_samples(&sq).mean - 2.0).abs() < 0.1);
}

#[test]
fn inverse_norm_matches_monte_carlo() {
    let mut rng = Rng::new(44, 0);
    for &(m, s2) in &[(4usize, 1.0), (8, 0.5)] {
        let x = sample_complex_gaussian(m, 200_000, s2, &mut rng).unwrap();
        let inv: Vec<f64> = (0..x.cols()).map(|c| 1.0 / x.column_norm_sqr(c)).collect();
        let est = MeanEstimate::from_samples(&inv);
        let exact = inv_norm_expectation(m, s2).unwrap();
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.std_err,
            "M={m}: {est:?} vs {exact}"
        );
    }
}

#[test]
fn inverse_wishart_diagonal_matches_monte_carlo() {
    let mut rng = Rng::new(45, 0);
    let (m, k, s2) = (6, 2, 1.0);
    let samples: Vec<f64> = (0..100_000)
        .map(|_| {
            let x = sample_complex_gaussian(m, k, s2, &mut rng).unwrap();
            let w = x.adjoint_mul(&x).unwrap();
            let inv = mimo_aging::kernel::hermitian_solve(&w, &ComplexMatrix::identity(k)).unwrap();
            inv.get(0, 0).re
        })
        .collect();
    let est = MeanEstimate::from_samples(&samples);
    let exact = wishart_inv_diag_expectation(m, k, s2).unwrap();
    assert!((est.mean - exact).abs() <= 3.0 * est.std_err, "{est:?} vs {exact}");
}
