#![allow(dead_code)]

use gmd_precoding::rng::{complex_normal, stream};
use gmd_precoding::{CMatrix, Complex64};

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut rng = stream(seed, &[rows as u64, cols as u64]);
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(&mut rng))
}

/// Random `rows × cols` matrix of exact rank `rank` (almost surely).
pub fn low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> CMatrix {
    gaussian(rows, rank, seed).matmul(&gaussian(rank, cols, seed ^ 0x5555))
}

pub fn to_nalgebra(a: &CMatrix) -> nalgebra::DMatrix<Complex64> {
    nalgebra::DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

/// Singular values from nalgebra, descending.
pub fn oracle_singular_values(a: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_nalgebra(a).singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn unitarity_defect(a: &CMatrix) -> f64 {
    a.adjoint_mul(a).sub(&CMatrix::identity(a.cols())).frob_norm()
}
