//! Dense complex matrices.
//!
//! [`CMatrix`] is a small row-major container with just the operations the
//! precoding pipeline needs: products, conjugate transposes, Frobenius norms,
//! a truncated SVD (one-sided Jacobi) and the Moore-Penrose pseudo-inverse.
//! Channel matrices here are at most a few hundred by a few tens, so nothing
//! is blocked or vectorised.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries, validating the length and
    /// rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Dimension(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Real diagonal matrix.
    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Matrix whose columns are the given vectors (all of equal length).
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        debug_assert!(columns.iter().all(|c| c.len() == rows));
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[Complex64]) {
        assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// New matrix made of the listed columns, in order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        Self::from_fn(self.rows, indices.len(), |i, j| self[(i, indices[j])])
    }

    /// First `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        Self::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diag().into_iter().sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * factor).collect() }
    }

    /// Multiplies column `j` by `weights[j]`, i.e. `self · diag(weights)`.
    pub fn scale_columns(&self, weights: &[f64]) -> Self {
        assert_eq!(weights.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * weights[j])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "sub: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.shape(), other.shape(), "add: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// Matrix product. Panics on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `selfᴴ · rhs` without materialising the adjoint.
    pub fn adjoint_mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "adjoint_mul: row mismatch");
        let mut out = Self::zeros(self.cols, rhs.cols);
        for k in 0..self.rows {
            let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i].conj();
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `selfᴴ · v`.
    pub fn adjoint_mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![ZERO; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    pub fn frob_norm(&self) -> f64 {
        frob_norm(self)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for z in self.row(i) {
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Frobenius norm, `sqrt(Σ |a_ij|²)`.
pub fn frob_norm(a: &CMatrix) -> f64 {
    a.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum()
}

/// Leading `k` singular triplets: `A ≈ u1 · diag(sigma) · v1ᴴ`.
#[derive(Debug, Clone)]
pub struct SvdTruncated {
    /// Left singular vectors, `rows × k`, orthonormal columns.
    pub u1: CMatrix,
    /// Singular values in nonincreasing order.
    pub sigma: Vec<f64>,
    /// Right singular vectors, `cols × k`, orthonormal columns.
    pub v1: CMatrix,
}

impl SvdTruncated {
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    /// `u1 · diag(sigma) · v1ᴴ`.
    pub fn reconstruct(&self) -> CMatrix {
        self.u1.scale_columns(&self.sigma).matmul(&self.v1.adjoint())
    }
}

const JACOBI_TOL: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 80;

/// Full thin SVD of a tall (`rows >= cols`) matrix by one-sided Jacobi.
///
/// Returns columns as separate vectors: `u` (cols vectors of length rows),
/// `sigma`, and `v` (cols vectors of length cols), sorted by decreasing
/// singular value.
fn jacobi_tall(a: &CMatrix) -> (Vec<Vec<Complex64>>, Vec<f64>, Vec<Vec<Complex64>>) {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut work: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            e
        })
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm_sqr(&work[p]);
                let beta = norm_sqr(&work[q]);
                let gamma = dot(&work[p], &work[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate the phase out of the coupling, then apply a real
                // Jacobi rotation to the pair (a_p, a_q·e*).
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut work, p, q, c, s, phase);
                rotate_pair(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = work.iter().map(|col| norm_sqr(col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));

    let sigma_sorted: Vec<f64> = order.iter().map(|&i| sigma[i]).collect();
    let mut u: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&i| {
            let s = sigma[i];
            if s > 0.0 {
                work[i].iter().map(|z| z / s).collect()
            } else {
                vec![ZERO; m]
            }
        })
        .collect();
    let v_sorted: Vec<Vec<Complex64>> = order.iter().map(|&i| std::mem::take(&mut v[i])).collect();

    orthonormalize_completing(&mut u);
    (u, sigma_sorted, v_sorted)
}

fn rotate_pair(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * phase;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

/// Modified Gram-Schmidt (two passes) over `cols` in order. Columns that
/// collapse to (numerically) zero are replaced by the first standard basis
/// vector orthogonal to everything before them.
fn orthonormalize_completing(cols: &mut [Vec<Complex64>]) {
    let m = cols.first().map_or(0, Vec::len);
    let mut next_basis = 0usize;
    for j in 0..cols.len() {
        let (done, rest) = cols.split_at_mut(j);
        let col = &mut rest[0];
        let start = norm_sqr(col).sqrt();
        for _ in 0..2 {
            for prev in done.iter() {
                let proj = dot(prev, col);
                for (c, p) in col.iter_mut().zip(prev) {
                    *c -= proj * p;
                }
            }
        }
        let mut nrm = norm_sqr(col).sqrt();
        if start == 0.0 || nrm <= 1e-8 * start {
            // Degenerate direction: complete from the canonical basis.
            loop {
                assert!(next_basis < m, "cannot complete an orthonormal basis");
                col.iter_mut().for_each(|c| *c = ZERO);
                col[next_basis] = ONE;
                next_basis += 1;
                for _ in 0..2 {
                    for prev in done.iter() {
                        let proj = dot(prev, col);
                        for (c, p) in col.iter_mut().zip(prev) {
                            *c -= proj * p;
                        }
                    }
                }
                nrm = norm_sqr(col).sqrt();
                if nrm > 1e-6 {
                    break;
                }
            }
        }
        col.iter_mut().for_each(|c| *c /= nrm);
    }
}

/// Full thin SVD, `k = min(rows, cols)`, as column vectors.
fn thin_svd(a: &CMatrix) -> (Vec<Vec<Complex64>>, Vec<f64>, Vec<Vec<Complex64>>) {
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        // A = (Aᴴ)ᴴ = (U' Σ V'ᴴ)ᴴ = V' Σ U'ᴴ
        let (u, s, v) = jacobi_tall(&a.adjoint());
        (v, s, u)
    }
}

/// Best rank-`k` approximation factors of `a`.
pub fn svd_truncated(a: &CMatrix, k: usize) -> Result<SvdTruncated> {
    let (m, n) = a.shape();
    if k == 0 || k > m.min(n) {
        return Err(Error::Dimension(format!("svd rank {k} for a {m}x{n} matrix")));
    }
    let (mut u, mut sigma, mut v) = thin_svd(a);
    u.truncate(k);
    v.truncate(k);
    sigma.truncate(k);
    Ok(SvdTruncated { u1: CMatrix::from_columns(&u), sigma, v1: CMatrix::from_columns(&v) })
}

/// Moore-Penrose pseudo-inverse. Singular values below
/// `max(rows, cols) · ε · σ_max` are treated as zero.
pub fn pseudo_inverse(a: &CMatrix) -> CMatrix {
    let (m, n) = a.shape();
    let (u, sigma, v) = thin_svd(a);
    let cutoff = m.max(n) as f64 * f64::EPSILON * sigma.first().copied().unwrap_or(0.0);
    let mut out = CMatrix::zeros(n, m);
    for ((uk, &sk), vk) in u.iter().zip(&sigma).zip(&v) {
        if sk <= cutoff || sk == 0.0 {
            continue;
        }
        let inv = 1.0 / sk;
        for i in 0..n {
            let vi = vk[i] * inv;
            for j in 0..m {
                out[(i, j)] += vi * uk[j].conj();
            }
        }
    }
    out
}

/// QR factorisation of a square or tall matrix with a nonnegative real
/// diagonal on `R`. Columns that are linearly dependent on earlier ones get
/// a zero `R` diagonal and a zero `Q` column.
pub fn qr_decompose(a: &CMatrix) -> (CMatrix, CMatrix) {
    let (m, n) = a.shape();
    let mut q_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut r = CMatrix::zeros(n, n);
    let scale = frob_norm(a).max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut col = a.column(j);
        for _ in 0..2 {
            for (k, qk) in q_cols.iter().enumerate() {
                let proj = dot(qk, &col);
                r[(k, j)] += proj;
                for (c, qv) in col.iter_mut().zip(qk) {
                    *c -= proj * qv;
                }
            }
        }
        let nrm = norm_sqr(&col).sqrt();
        if nrm <= 1e-14 * scale {
            q_cols.push(vec![ZERO; m]);
        } else {
            r[(j, j)] = Complex64::new(nrm, 0.0);
            q_cols.push(col.into_iter().map(|c| c / nrm).collect());
        }
    }
    (CMatrix::from_columns(&q_cols), r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn frob_norm_small_cases() {
        assert!((frob_norm(&CMatrix::identity(2)) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(frob_norm(&CMatrix::zeros(3, 2)), 0.0);
        let m = CMatrix::from_row_major(1, 1, vec![c(3.0, 4.0)]).unwrap();
        assert!((frob_norm(&m) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn from_row_major_rejects_bad_input() {
        assert!(CMatrix::from_row_major(2, 2, vec![ZERO; 3]).is_err());
        assert!(CMatrix::from_row_major(1, 2, vec![ZERO, c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn svd_of_diagonal() {
        let a = CMatrix::from_diag(&[3.0, 1.0]);
        let svd = svd_truncated(&a, 2).unwrap();
        assert_eq!(svd.sigma.len(), 2);
        assert!((svd.sigma[0] - 3.0).abs() < 1e-14);
        assert!((svd.sigma[1] - 1.0).abs() < 1e-14);
        // Columns equal identity columns up to a unit-modulus phase.
        for j in 0..2 {
            assert!((svd.u1[(j, j)].norm() - 1.0).abs() < 1e-14);
            assert!((svd.v1[(j, j)].norm() - 1.0).abs() < 1e-14);
        }
        assert!(frob_norm(&svd.reconstruct().sub(&a)) < 1e-14);
    }

    #[test]
    fn svd_rank_one() {
        let x = vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 1.0)];
        let y = vec![c(2.0, 0.0), c(0.0, -1.0)];
        let a = CMatrix::from_fn(3, 2, |i, j| x[i] * y[j].conj());
        let svd = svd_truncated(&a, 1).unwrap();
        let expected = norm_sqr(&x).sqrt() * norm_sqr(&y).sqrt();
        assert!((svd.sigma[0] - expected).abs() < 1e-13);
        // The full factorisation completes U for the null direction.
        let full = svd_truncated(&a, 2).unwrap();
        assert!(full.sigma[1] < 1e-13);
        let gram = full.u1.adjoint_mul(&full.u1);
        assert!(frob_norm(&gram.sub(&CMatrix::identity(2))) < 1e-12);
    }

    #[test]
    fn svd_rejects_bad_rank() {
        let a = CMatrix::identity(3);
        assert!(svd_truncated(&a, 0).is_err());
        assert!(svd_truncated(&a, 4).is_err());
    }

    #[test]
    fn wide_matrix_svd() {
        let a = CMatrix::from_fn(2, 5, |i, j| c((i + 2 * j) as f64, (i as f64) - (j as f64) * 0.5));
        let svd = svd_truncated(&a, 2).unwrap();
        assert!(frob_norm(&svd.reconstruct().sub(&a)) < 1e-12 * frob_norm(&a));
    }

    #[test]
    fn pinv_identity_and_vector() {
        let i3 = CMatrix::identity(3);
        assert!(frob_norm(&pseudo_inverse(&i3).sub(&i3)) < 1e-15);

        let v = CMatrix::from_row_major(3, 1, vec![c(1.0, 1.0), c(0.0, 2.0), c(-1.0, 0.0)]).unwrap();
        let nsq = frob_norm(&v).powi(2);
        let expected = v.adjoint().scale(1.0 / nsq);
        assert!(frob_norm(&pseudo_inverse(&v).sub(&expected)) < 1e-14);
    }

    #[test]
    fn pinv_of_zero_is_zero() {
        let z = CMatrix::zeros(2, 3);
        let p = pseudo_inverse(&z);
        assert_eq!(p.shape(), (3, 2));
        assert_eq!(frob_norm(&p), 0.0);
    }

    #[test]
    fn qr_has_nonnegative_diagonal() {
        let a = CMatrix::from_fn(3, 3, |i, j| c((i * 3 + j) as f64 - 4.0, (j as f64) * 0.3 - (i as f64)));
        let (q, r) = qr_decompose(&a);
        for i in 0..3 {
            assert!(r[(i, i)].im == 0.0 && r[(i, i)].re >= 0.0);
            for j in 0..i {
                assert_eq!(r[(i, j)], ZERO);
            }
        }
        assert!(frob_norm(&q.matmul(&r).sub(&a)) < 1e-12 * frob_norm(&a));
    }
}
