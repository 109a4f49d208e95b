//! Numerical primitives shared by the rest of the crate: reproducible random
//! streams, complex matrices and the Hermitian solve, Bessel `J0`, and the
//! closed-form random-matrix expectations used by the rate bounds.

mod bessel;
mod expectations;
mod matrix;
mod rng;
pub mod stats;

pub use bessel::bessel_j0;
pub use expectations::{inv_norm_expectation, wishart_inv_diag_expectation};
pub use matrix::{hermitian_solve, sample_complex_gaussian, ComplexMatrix};
pub use rng::{mix_seed, Rng};
