//! Per-stream hard-decision receivers.
//!
//! Both detectors work on the `Ns × Ns` effective channel
//! `E = Wᴴ·H·P·diag(√p)` and return one decision per stream; `None` marks
//! an erased stream whose gain is too small to equalise.

use num_complex::Complex64;

use super::modem::{qam16_map, qam16_slice};
use crate::hybrid::PrecoderBundle;
use crate::linalg::{qr_decompose, CMatrix};

/// Gains below this are treated as a dead stream.
pub const ERASURE_THRESHOLD: f64 = 1e-12;

/// `Wᴴ · H · P · diag(√powers)`.
pub fn effective_channel(bundle: &PrecoderBundle, h: &CMatrix, powers: &[f64]) -> CMatrix {
    let amps: Vec<f64> = powers.iter().map(|p| p.max(0.0).sqrt()).collect();
    bundle.combiner.adjoint_mul(&h.matmul(&bundle.precoder)).scale_columns(&amps)
}

/// Scalar equaliser for the SVD schemes: `ŝ_k = slice(y_k / E_kk)`, with
/// off-diagonal leakage left as interference.
#[derive(Debug, Clone)]
pub struct ScalarEqualizer {
    gains: Vec<Complex64>,
}

impl ScalarEqualizer {
    pub fn new(effective: &CMatrix) -> Self {
        Self { gains: effective.diag() }
    }

    pub fn detect(&self, y: &[Complex64]) -> Vec<Option<u8>> {
        self.gains
            .iter()
            .zip(y)
            .map(|(g, yk)| (g.norm() >= ERASURE_THRESHOLD).then(|| qam16_slice(yk / g)))
            .collect()
    }
}

/// Successive interference cancellation on the QR factorisation of the
/// effective channel. Streams are decided last to first; each decision is
/// subtracted before the next stream is sliced.
#[derive(Debug, Clone)]
pub struct SicDetector {
    q: CMatrix,
    r: CMatrix,
}

impl SicDetector {
    pub fn new(effective: &CMatrix) -> Self {
        let (q, r) = qr_decompose(effective);
        Self { q, r }
    }

    /// Upper-triangular factor with nonnegative real diagonal.
    pub fn r(&self) -> &CMatrix {
        &self.r
    }

    pub fn detect(&self, y: &[Complex64]) -> Vec<Option<u8>> {
        let n = self.r.rows();
        let z = self.q.adjoint_mul_vec(y);
        let mut decisions = vec![None; n];
        let mut symbols = vec![Complex64::new(0.0, 0.0); n];
        for k in (0..n).rev() {
            let rkk = self.r[(k, k)].re;
            if rkk < ERASURE_THRESHOLD {
                continue;
            }
            let interference: Complex64 = (k + 1..n).map(|j| self.r[(k, j)] * symbols[j]).sum();
            let bits = qam16_slice((z[k] - interference) / rkk);
            decisions[k] = Some(bits);
            symbols[k] = qam16_map(bits);
        }
        decisions
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_equalizer_erases_dead_streams() {
        let e = CMatrix::from_diag(&[2.0, 0.0]);
        let eq = ScalarEqualizer::new(&e);
        let y = vec![qam16_map(0b1010) * 2.0, Complex64::new(1.0, 0.0)];
        assert_eq!(eq.detect(&y), vec![Some(0b1010), None]);
    }

    #[test]
    fn sic_undoes_triangular_mixing() {
        let mut e = CMatrix::from_diag(&[1.5, 1.5, 1.5]);
        e[(0, 1)] = Complex64::new(0.9, -0.4);
        e[(0, 2)] = Complex64::new(-1.2, 0.3);
        e[(1, 2)] = Complex64::new(0.5, 0.8);
        let det = SicDetector::new(&e);
        for (a, b, c) in [(0u8, 5u8, 15u8), (9, 3, 6), (12, 12, 1)] {
            let s = vec![qam16_map(a), qam16_map(b), qam16_map(c)];
            let y = e.mul_vec(&s);
            assert_eq!(det.detect(&y), vec![Some(a), Some(b), Some(c)]);
        }
    }

    #[test]
    fn sic_handles_non_triangular_channels() {
        let e = CMatrix::from_fn(2, 2, |i, j| Complex64::new(1.0 + i as f64, 0.5 * j as f64 - 0.2));
        let det = SicDetector::new(&e);
        let s = vec![qam16_map(7), qam16_map(8)];
        assert_eq!(det.detect(&e.mul_vec(&s)), vec![Some(7), Some(8)]);
    }

    #[test]
    fn single_stream_awgn_matches_closed_form() {
        use crate::rng::{complex_normal, stream};
        use rand::Rng;
        use statrs::function::erf::erfc;

        let q = |x: f64| 0.5 * erfc(x / std::f64::consts::SQRT_2);
        let gain = Complex64::from_polar(0.7, 1.1);
        let mut e = CMatrix::zeros(1, 1);
        e[(0, 0)] = gain;
        let eq = ScalarEqualizer::new(&e);
        // Es/N0 = 10 dB at the slicer input.
        let sigma = gain.norm() * 0.1f64.sqrt();
        let mut rng = stream(9, &[]);
        let symbols = 50_000u32;
        let mut errors = 0u32;
        for _ in 0..symbols {
            let b = rng.random::<u8>() & 0x0F;
            let y = gain * qam16_map(b) + complex_normal(&mut rng) * sigma;
            errors += (eq.detect(&[y])[0].unwrap() ^ b).count_ones();
        }
        let ber = f64::from(errors) / f64::from(4 * symbols);
        let a = (10.0f64 / 5.0).sqrt();
        let expect = (3.0 * q(a) + 2.0 * q(3.0 * a) - q(5.0 * a)) / 4.0;
        assert!((ber / expect - 1.0).abs() < 0.2, "{ber} vs {expect}");
    }
}
