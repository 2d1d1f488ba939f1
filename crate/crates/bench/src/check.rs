//! Decomposition invariant suite over random channels.

use gmd_precoding::linalg::{frob_norm, svd_truncated, CMatrix};
use gmd_precoding::rng::stream;
use gmd_precoding::{draw_channel, gmd_from_svd, ArrayGeometry};
use rand::Rng;
use serde::Serialize;

const N_T_CHOICES: [usize; 5] = [16, 32, 64, 128, 256];
const N_R_CHOICES: [usize; 3] = [4, 8, 16];

/// Worst observed deviation for each GMD invariant (all relative).
#[derive(Debug, Clone, Default, Serialize)]
pub struct GmdCheckReport {
    pub channels: u64,
    /// `max |R1_ii − r̄| / r̄`.
    pub diag: f64,
    /// `max |R1_ij| / r̄` below the diagonal.
    pub lower: f64,
    /// `‖Q1 − V1·S_R‖_F`.
    pub q_rotation: f64,
    /// `‖G1 − U1·S_L‖_F`.
    pub g_rotation: f64,
    /// Singular values of `R1` against `Σ1`, relative.
    pub spectrum: f64,
    /// `‖G1 R1 Q1ᴴ − U1 Σ1 V1ᴴ‖_F / ‖Σ1‖_F`.
    pub reconstruction: f64,
    /// `max(‖S_LᴴS_L − I‖_F, ‖S_RᴴS_R − I‖_F)`.
    pub unitarity: f64,
}

impl GmdCheckReport {
    pub fn worst(&self) -> f64 {
        [self.diag, self.lower, self.q_rotation, self.g_rotation, self.spectrum, self.reconstruction, self.unitarity]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

/// Runs the invariant suite on `channels` random channels with
/// `Ns ∈ {2, 3, 4}` and arrays up to 16×256.
pub fn gmd_check(channels: u64, seed: u64) -> gmd_precoding::Result<GmdCheckReport> {
    let mut report = GmdCheckReport { channels, ..Default::default() };
    for trial in 0..channels {
        let mut rng = stream(seed, &[0x6D0, trial]);
        let n_t = N_T_CHOICES[rng.random_range(0..N_T_CHOICES.len())];
        let n_r = N_R_CHOICES[rng.random_range(0..N_R_CHOICES.len())];
        let n_s = rng.random_range(2..=4usize);
        let n_paths = rng.random_range(n_s..=6);
        let chan = draw_channel(
            n_paths,
            &ArrayGeometry::half_wavelength(n_t),
            &ArrayGeometry::half_wavelength(n_r),
            &mut rng,
        )?;
        let svd = svd_truncated(&chan.h, n_s)?;
        let g = gmd_from_svd(&svd)?;
        let eye = CMatrix::identity(n_s);

        for i in 0..n_s {
            report.diag = report.diag.max((g.r1[(i, i)].re - g.r_bar).abs() / g.r_bar);
            for j in 0..i {
                report.lower = report.lower.max(g.r1[(i, j)].norm() / g.r_bar);
            }
        }
        report.q_rotation = report.q_rotation.max(frob_norm(&g.q1.sub(&svd.v1.matmul(&g.s_r))));
        report.g_rotation = report.g_rotation.max(frob_norm(&g.g1.sub(&svd.u1.matmul(&g.s_l))));

        let r_sigma = svd_truncated(&g.r1, n_s)?.sigma;
        for (a, b) in r_sigma.iter().zip(&svd.sigma) {
            report.spectrum = report.spectrum.max((a - b).abs() / b);
        }

        let low_rank = svd.reconstruct();
        let recon = g.g1.matmul(&g.r1).matmul(&g.q1.adjoint());
        report.reconstruction = report.reconstruction.max(frob_norm(&recon.sub(&low_rank)) / frob_norm(&low_rank));

        let ul = frob_norm(&g.s_l.adjoint_mul(&g.s_l).sub(&eye));
        let ur = frob_norm(&g.s_r.adjoint_mul(&g.s_r).sub(&eye));
        report.unitarity = report.unitarity.max(ul).max(ur);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_check_passes() {
        let r = gmd_check(20, 5).unwrap();
        assert_eq!(r.channels, 20);
        assert!(r.passes(1e-9), "{r:?}");
    }
}
