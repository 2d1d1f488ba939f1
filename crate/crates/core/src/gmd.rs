//! Geometric mean decomposition built as a rotation of a truncated SVD.
//!
//! Starting from `A ≈ U1 Σ1 V1ᴴ`, a sequence of `Ns − 1` stages each applies
//! a symmetric permutation and a pair of real 2×2 rotations to the working
//! triangular factor so that one more diagonal entry becomes the geometric
//! mean `r̄` of the singular values. The accumulated rotations give
//!
//! ```text
//! G1 = U1 · S_L,   Q1 = V1 · S_R,   R1 = S_Lᴴ · Σ1 · S_R,
//! ```
//!
//! where `R1` is upper triangular with every diagonal entry equal to `r̄`.
//! Only `Ns × Ns` factors are ever formed, so the cost on top of the SVD is
//! `O((Nr + Nt)·Ns²)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, SvdTruncated};

/// Retained singular values smaller than this fraction of the largest one
/// are rejected as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// `(Π σ_i)^(1/n)`, evaluated in the log domain.
pub fn geometric_mean(sigma: &[f64]) -> Result<f64> {
    if sigma.is_empty() {
        return Err(Error::Dimension("geometric mean of an empty list".into()));
    }
    let mut log_sum = 0.0;
    for (index, &value) in sigma.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::RankDeficient { index, value });
        }
        log_sum += value.ln();
    }
    Ok((log_sum / sigma.len() as f64).exp())
}

/// Cosine/sine pair for one stage.
///
/// With `c² = (r̄² − r_jj²)/(r_ii² − r_jj²)` and `s = sqrt(1 − c²)`, the
/// rotations
///
/// ```text
/// Θ_L = (1/r̄)·[[c·r_ii, s·r_jj], [−s·r_jj, c·r_ii]],   Θ_R = [[c, −s], [s, c]]
/// ```
///
/// map `diag(r_ii, r_jj)` to `[[r̄, ·], [0, r_ii·r_jj/r̄]]`.
pub fn givens_pair(r_ii: f64, r_jj: f64, r_bar: f64) -> Result<(f64, f64)> {
    let (lo, hi) = if r_ii <= r_jj { (r_ii, r_jj) } else { (r_jj, r_ii) };
    let slack = 1e-12 * hi;
    if r_bar < lo - slack || r_bar > hi + slack {
        return Err(Error::PivotOutOfRange { r_bar, lo, hi });
    }
    if r_ii == r_jj {
        return Ok((1.0, 0.0));
    }
    // Factored differences instead of r² − r² so that near-equal entries do
    // not cancel catastrophically.
    let c2 = ((r_bar - r_jj) * (r_bar + r_jj)) / ((r_ii - r_jj) * (r_ii + r_jj));
    let c2 = if c2.is_finite() { c2.clamp(0.0, 1.0) } else { 1.0 };
    Ok((c2.sqrt(), (1.0 - c2).sqrt()))
}

/// GMD factors plus the rotations that link them to the SVD.
#[derive(Debug, Clone)]
pub struct GmdTriple {
    /// `Nr × Ns`, `U1 · S_L`.
    pub g1: CMatrix,
    /// `Ns × Ns` upper triangular, constant diagonal `r_bar`.
    pub r1: CMatrix,
    /// `Nt × Ns`, `V1 · S_R`.
    pub q1: CMatrix,
    pub s_l: CMatrix,
    pub s_r: CMatrix,
    pub r_bar: f64,
}

/// Snapshot emitted after each stage when tracing.
#[derive(Debug, Clone, PartialEq)]
pub struct GmdStage {
    /// Zero-based stage index `i`; entries `0..=i` of the diagonal are done.
    pub stage: usize,
    /// Index swapped into position `i + 1` before rotating.
    pub pivot: usize,
    pub c: f64,
    pub s: f64,
    pub diag: Vec<f64>,
}

/// GMD of the rank-`Ns` approximation held in `svd`.
pub fn gmd_from_svd(svd: &SvdTruncated) -> Result<GmdTriple> {
    gmd_from_svd_traced(svd, |_| {})
}

/// Same as [`gmd_from_svd`], calling `trace` after every stage.
pub fn gmd_from_svd_traced(svd: &SvdTruncated, mut trace: impl FnMut(&GmdStage)) -> Result<GmdTriple> {
    let ns = svd.sigma.len();
    if svd.u1.cols() != ns || svd.v1.cols() != ns {
        return Err(Error::Dimension(format!(
            "svd factors have {} and {} columns for {} singular values",
            svd.u1.cols(),
            svd.v1.cols(),
            ns
        )));
    }
    let sigma_max = svd.sigma.iter().copied().fold(0.0, f64::max);
    for (index, &value) in svd.sigma.iter().enumerate() {
        if !(value > RANK_TOLERANCE * sigma_max) {
            return Err(Error::RankDeficient { index, value });
        }
    }
    let r_bar = geometric_mean(&svd.sigma)?;

    let mut r = Real::diag(&svd.sigma);
    let mut s_l = Real::identity(ns);
    let mut s_r = Real::identity(ns);

    for i in 0..ns.saturating_sub(1) {
        let pivot = select_pivot(&r, i, r_bar);
        if pivot != i + 1 {
            r.swap_rows(i + 1, pivot);
            r.swap_cols(i + 1, pivot);
            s_l.swap_cols(i + 1, pivot);
            s_r.swap_cols(i + 1, pivot);
        }

        let r_ii = r.get(i, i);
        let r_jj = r.get(i + 1, i + 1);
        let (c, s) = match givens_pair(r_ii, r_jj, r_bar) {
            Ok(cs) => cs,
            // Rounding pushed r̄ just outside the pair; rotate as far as
            // possible towards it.
            Err(Error::PivotOutOfRange { .. }) => {
                if (r_ii - r_bar).abs() <= (r_jj - r_bar).abs() {
                    (1.0, 0.0)
                } else {
                    (0.0, 1.0)
                }
            }
            Err(e) => return Err(e),
        };

        if s != 0.0 {
            let left = [[c * r_ii / r_bar, s * r_jj / r_bar], [-s * r_jj / r_bar, c * r_ii / r_bar]];
            let right = [[c, -s], [s, c]];
            let corner = c * s * (r_jj * r_jj - r_ii * r_ii) / r_bar;

            r.rotate_rows(i, &left);
            r.rotate_cols(i, &right);
            // G1 absorbs N_Lᵀ, Q1 absorbs N_R.
            s_l.rotate_cols(i, &transpose2(&left));
            s_r.rotate_cols(i, &right);

            r.set(i, i, r_bar);
            r.set(i, i + 1, corner);
            r.set(i + 1, i, 0.0);
            r.set(i + 1, i + 1, r_ii * r_jj / r_bar);
        }

        trace(&GmdStage { stage: i, pivot, c, s, diag: (0..ns).map(|k| r.get(k, k)).collect() });
    }

    let s_l = s_l.to_complex();
    let s_r = s_r.to_complex();
    Ok(GmdTriple {
        g1: svd.u1.matmul(&s_l),
        q1: svd.v1.matmul(&s_r),
        r1: r.to_complex(),
        s_l,
        s_r,
        r_bar,
    })
}

/// Smallest `p > i` on the other side of `r̄` from `r_ii`; falls back to the
/// entry closest to `r̄` if rounding leaves no candidate.
fn select_pivot(r: &Real, i: usize, r_bar: f64) -> usize {
    let n = r.n;
    let above = r.get(i, i) >= r_bar;
    let found = (i + 1..n).find(|&p| {
        let d = r.get(p, p);
        if above {
            d <= r_bar
        } else {
            d >= r_bar
        }
    });
    found.unwrap_or_else(|| {
        (i + 1..n)
            .min_by(|&a, &b| (r.get(a, a) - r_bar).abs().total_cmp(&(r.get(b, b) - r_bar).abs()))
            .expect("stage index below n - 1")
    })
}

fn transpose2(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

/// Small square real matrix for the `Ns × Ns` working set.
struct Real {
    n: usize,
    data: Vec<f64>,
}

impl Real {
    fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    fn diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self { n, data }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.n {
            self.data.swap(a * self.n + j, b * self.n + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.n {
            self.data.swap(i * self.n + a, i * self.n + b);
        }
    }

    /// Rows `(i, i+1) := m · rows(i, i+1)`.
    fn rotate_rows(&mut self, i: usize, m: &[[f64; 2]; 2]) {
        for j in 0..self.n {
            let a = self.get(i, j);
            let b = self.get(i + 1, j);
            self.set(i, j, m[0][0] * a + m[0][1] * b);
            self.set(i + 1, j, m[1][0] * a + m[1][1] * b);
        }
    }

    /// Columns `(i, i+1) := cols(i, i+1) · m`.
    fn rotate_cols(&mut self, i: usize, m: &[[f64; 2]; 2]) {
        for k in 0..self.n {
            let a = self.get(k, i);
            let b = self.get(k, i + 1);
            self.set(k, i, a * m[0][0] + b * m[1][0]);
            self.set(k, i + 1, a * m[0][1] + b * m[1][1]);
        }
    }

    fn to_complex(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |i, j| Complex64::new(self.get(i, j), 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frob_norm;

    #[test]
    fn geometric_mean_closed_forms() {
        assert!((geometric_mean(&[1.0; 4]).unwrap() - 1.0).abs() < 1e-15);
        assert!((geometric_mean(&[4.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!((geometric_mean(&[8.0, 2.0, 1.0]).unwrap() - 16f64.cbrt()).abs() < 1e-14);
        assert!((geometric_mean(&[8.0, 2.0, 1.0]).unwrap() - 2.5198421).abs() < 1e-7);
    }

    #[test]
    fn geometric_mean_rejects_nonpositive() {
        assert_eq!(
            geometric_mean(&[1.0, 0.0, 2.0]),
            Err(Error::RankDeficient { index: 1, value: 0.0 })
        );
        assert!(geometric_mean(&[-1.0]).is_err());
        assert!(geometric_mean(&[]).is_err());
    }

    fn apply_pair(r_ii: f64, r_jj: f64, r_bar: f64, c: f64, s: f64) -> [[f64; 2]; 2] {
        let l = [[c * r_ii / r_bar, s * r_jj / r_bar], [-s * r_jj / r_bar, c * r_ii / r_bar]];
        let d = [[r_ii, 0.0], [0.0, r_jj]];
        let rr = [[c, -s], [s, c]];
        let mul = |a: [[f64; 2]; 2], b: [[f64; 2]; 2]| {
            let mut o = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    o[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
                }
            }
            o
        };
        mul(mul(l, d), rr)
    }

    #[test]
    fn givens_equal_entries_is_identity() {
        assert_eq!(givens_pair(1.5, 1.5, 1.5).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn givens_two_one() {
        let rb = 2f64.sqrt();
        let (c, s) = givens_pair(2.0, 1.0, rb).unwrap();
        assert!((c - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let m = apply_pair(2.0, 1.0, rb, c, s);
        let expected = [[rb, -1.0], [0.0, rb]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[i][j] - expected[i][j]).abs() < 1e-14, "{m:?}");
            }
        }
    }

    #[test]
    fn givens_three_one() {
        let rb = 3f64.sqrt();
        let (c, s) = givens_pair(3.0, 1.0, rb).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
        assert!((s - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let m = apply_pair(3.0, 1.0, rb, c, s);
        assert!((m[0][0] - rb).abs() < 1e-14);
        assert!(m[1][0].abs() < 1e-14);
        assert!((m[1][1] - rb).abs() < 1e-14);
    }

    #[test]
    fn givens_rejects_out_of_range() {
        assert!(matches!(givens_pair(2.0, 1.0, 2.5), Err(Error::PivotOutOfRange { .. })));
        assert!(matches!(givens_pair(2.0, 1.0, 0.5), Err(Error::PivotOutOfRange { .. })));
        // Ascending order works too.
        let (c, s) = givens_pair(1.0, 2.0, 2f64.sqrt()).unwrap();
        assert!((c * c + s * s - 1.0).abs() < 1e-15);
    }

    fn diag_svd(sigma: &[f64]) -> SvdTruncated {
        let n = sigma.len();
        SvdTruncated { u1: CMatrix::identity(n), sigma: sigma.to_vec(), v1: CMatrix::identity(n) }
    }

    #[test]
    fn constant_spectrum_needs_no_rotation() {
        let g = gmd_from_svd(&diag_svd(&[2.5; 4])).unwrap();
        let eye = CMatrix::identity(4);
        assert!(frob_norm(&g.s_l.sub(&eye)) == 0.0);
        assert!(frob_norm(&g.s_r.sub(&eye)) == 0.0);
        assert!(frob_norm(&g.r1.sub(&CMatrix::from_diag(&[2.5; 4]))) == 0.0);
    }

    #[test]
    fn two_by_two_stage() {
        let g = gmd_from_svd(&diag_svd(&[2.0, 1.0])).unwrap();
        let rb = 2f64.sqrt();
        assert!((g.r_bar - rb).abs() < 1e-15);
        assert!((g.r1[(0, 0)].re - rb).abs() < 1e-14);
        assert!((g.r1[(1, 1)].re - rb).abs() < 1e-14);
        assert!(g.r1[(1, 0)].norm() < 1e-15);
        assert!((g.r1[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_zero_singular_value() {
        let err = gmd_from_svd(&diag_svd(&[3.0, 1.0, 0.0])).unwrap_err();
        assert_eq!(err, Error::RankDeficient { index: 2, value: 0.0 });
        let err = gmd_from_svd(&diag_svd(&[3.0, 1e-13, 1.0])).unwrap_err();
        assert!(matches!(err, Error::RankDeficient { index: 1, .. }));
    }

    #[test]
    fn trace_reports_progress() {
        let mut stages = Vec::new();
        let g = gmd_from_svd_traced(&diag_svd(&[9.0, 4.0, 2.0, 0.5]), |s| stages.push(s.clone())).unwrap();
        assert_eq!(stages.len(), 3);
        for st in &stages {
            for k in 0..=st.stage {
                assert!((st.diag[k] - g.r_bar).abs() <= 1e-12 * g.r_bar);
            }
            assert!(st.pivot > st.stage);
            assert!((st.c * st.c + st.s * st.s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn single_stream_is_trivial() {
        let g = gmd_from_svd(&diag_svd(&[3.0])).unwrap();
        assert!((g.r_bar - 3.0).abs() < 1e-15);
        assert_eq!(g.r1[(0, 0)].re, 3.0);
    }
}
