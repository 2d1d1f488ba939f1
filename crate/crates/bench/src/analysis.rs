//! Reading numbers off BER curves.

use gmd_precoding::link::BerPoint;
use gmd_precoding::Scheme;

/// Half-width of the normal-approximation 95% interval on a BER estimate.
pub fn ci_half_width(errors: u64, bits: u64) -> f64 {
    if bits == 0 {
        return f64::INFINITY;
    }
    let p = errors as f64 / bits as f64;
    1.96 * (p * (1.0 - p) / bits as f64).sqrt()
}

/// `(snr_db, ber)` pairs of one scheme, sorted by SNR.
pub fn curve(points: &[BerPoint], scheme: Scheme) -> Vec<(f64, f64)> {
    let mut c: Vec<(f64, f64)> = points.iter().filter(|p| p.scheme == scheme).map(|p| (p.snr_db, p.ber())).collect();
    c.sort_by(|a, b| a.0.total_cmp(&b.0));
    c
}

/// SNR at which the curve first falls through `target`, interpolated
/// linearly in `log10(BER)`. `None` if the curve never crosses it.
pub fn snr_at_ber(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if !(b0 >= target && b1 < target) {
            return None;
        }
        if b1 <= 0.0 {
            // No log scale available below zero errors; interpolate linearly.
            return Some(s0 + (s1 - s0) * (b0 - target) / (b0 - b1));
        }
        let (l0, l1, lt) = (b0.log10(), b1.log10(), target.log10());
        Some(if l0 == l1 { s0 } else { s0 + (s1 - s0) * (l0 - lt) / (l0 - l1) })
    })
}
