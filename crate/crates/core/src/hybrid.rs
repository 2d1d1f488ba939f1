//! Hybrid analog/digital precoder and combiner design.
//!
//! The analog stage is chosen greedily from the steering dictionary of the
//! channel paths; the digital stage is the least-squares fit of the
//! unconstrained target onto the chosen columns. For the GMD schemes the
//! digital stage is additionally rotated by the GMD rotation, which leaves
//! the approximation error unchanged because the Frobenius norm is
//! invariant under unitary rotation.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::gmd::{gmd_from_svd, GmdTriple, RANK_TOLERANCE};
use crate::linalg::{frob_norm, pseudo_inverse, svd_truncated, CMatrix, SvdTruncated};

/// Analog × digital factorisation of one side of the link.
#[derive(Debug, Clone)]
pub struct HybridFactor {
    /// `N × N_RF`, every entry of modulus `1/√N`.
    pub analog: CMatrix,
    /// `N_RF × Ns`.
    pub digital: CMatrix,
    /// Dictionary columns used for the analog stage, in selection order.
    pub selected: Vec<usize>,
    /// `‖target − analog·digital‖_F` after each selection round.
    pub residual_history: Vec<f64>,
}

impl HybridFactor {
    pub fn product(&self) -> CMatrix {
        self.analog.matmul(&self.digital)
    }
}

/// Greedy sparse factorisation of `target` over the columns of `dictionary`.
///
/// Each round correlates the normalised residual with every unused
/// dictionary column, appends the column with the largest energy
/// (`diag(ΦΦᴴ)`, ties to the lowest index) at constant modulus, and refits
/// the digital stage by least squares against the full target.
pub fn omp_factor(target: &CMatrix, dictionary: &CMatrix, n_rf: usize) -> Result<HybridFactor> {
    let (n, n_s) = target.shape();
    let l = dictionary.cols();
    if dictionary.rows() != n {
        return Err(Error::Dimension(format!(
            "target has {n} rows but dictionary has {}",
            dictionary.rows()
        )));
    }
    if n_rf == 0 || n_rf > l {
        return Err(Error::Dimension(format!("{n_rf} RF chains for a dictionary of {l} columns")));
    }

    let amp = 1.0 / (n as f64).sqrt();
    let mut selected: Vec<usize> = Vec::with_capacity(n_rf);
    let mut analog_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n_rf);
    let mut residual_history = Vec::with_capacity(n_rf);
    let mut residual = target.clone();
    let mut analog = CMatrix::zeros(n, 0);
    let mut digital = CMatrix::zeros(0, n_s);

    for _ in 0..n_rf {
        let phi = dictionary.adjoint_mul(&residual);
        let mut best: Option<(usize, f64)> = None;
        for k in (0..l).filter(|k| !selected.contains(k)) {
            let energy: f64 = phi.row(k).iter().map(Complex64::norm_sqr).sum();
            if best.is_none_or(|(_, e)| energy > e) {
                best = Some((k, energy));
            }
        }
        let (k, _) = best.expect("n_rf <= dictionary size");
        selected.push(k);
        analog_cols.push(
            dictionary
                .column(k)
                .into_iter()
                .map(|z| if z.norm() > 0.0 { Complex64::from_polar(amp, z.arg()) } else { Complex64::new(amp, 0.0) })
                .collect(),
        );
        analog = CMatrix::from_columns(&analog_cols);
        digital = pseudo_inverse(&analog).matmul(target);

        let err = target.sub(&analog.matmul(&digital));
        let err_norm = frob_norm(&err);
        residual_history.push(err_norm);
        residual = if err_norm > 0.0 { err.scale(1.0 / err_norm) } else { err };
    }

    Ok(HybridFactor { analog, digital, selected, residual_history })
}

/// Precoding schemes compared in the simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    SvdDigital,
    SvdHybrid,
    GmdDigital,
    GmdHybrid,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::SvdDigital, Scheme::SvdHybrid, Scheme::GmdDigital, Scheme::GmdHybrid];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::SvdDigital => "svd_digital",
            Scheme::SvdHybrid => "svd_hybrid",
            Scheme::GmdDigital => "gmd_digital",
            Scheme::GmdHybrid => "gmd_hybrid",
        }
    }

    /// Stable numeric id used for RNG stream derivation.
    pub fn id(self) -> u64 {
        match self {
            Scheme::SvdDigital => 0,
            Scheme::SvdHybrid => 1,
            Scheme::GmdDigital => 2,
            Scheme::GmdHybrid => 3,
        }
    }

    pub fn is_gmd(self) -> bool {
        matches!(self, Scheme::GmdDigital | Scheme::GmdHybrid)
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, Scheme::SvdHybrid | Scheme::GmdHybrid)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme '{s}'")))
    }
}

/// Effective precoder and combiner for one channel and scheme.
#[derive(Debug, Clone)]
pub struct PrecoderBundle {
    pub scheme: Scheme,
    /// `Nt × Ns` effective precoder `P`.
    pub precoder: CMatrix,
    /// `Nr × Ns` effective combiner `W`; the receiver applies `Wᴴ`.
    pub combiner: CMatrix,
    /// Singular values for SVD schemes, `r̄` repeated for GMD schemes.
    pub subchannel_gains: Vec<f64>,
    /// Transmit-side factorisation (hybrid schemes only).
    pub tx_factor: Option<HybridFactor>,
    /// Receive-side factorisation (hybrid schemes only).
    pub rx_factor: Option<HybridFactor>,
}

impl PrecoderBundle {
    pub fn n_s(&self) -> usize {
        self.precoder.cols()
    }

    pub fn transmit_power(&self) -> f64 {
        frob_norm(&self.precoder).powi(2)
    }
}

/// Fully digital reference design.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigitalMode {
    Svd,
    Gmd,
}

fn channel_svd(chan: &ChannelRealization, n_s: usize) -> Result<SvdTruncated> {
    let svd = svd_truncated(&chan.h, n_s)?;
    let sigma_max = svd.sigma[0];
    for (index, &value) in svd.sigma.iter().enumerate() {
        if !(value > RANK_TOLERANCE * sigma_max) {
            return Err(Error::RankDeficient { index, value });
        }
    }
    Ok(svd)
}

fn check_hybrid_dims(chan: &ChannelRealization, n_rf_t: usize, n_rf_r: usize, n_s: usize) -> Result<()> {
    let (n_r, n_t) = chan.h.shape();
    if n_s == 0 || n_s > n_rf_t || n_rf_t > n_t {
        return Err(Error::Config(format!("need 1 <= n_s ({n_s}) <= n_rf_t ({n_rf_t}) <= n_t ({n_t})")));
    }
    if n_s > n_rf_r || n_rf_r > n_r {
        return Err(Error::Config(format!("need n_s ({n_s}) <= n_rf_r ({n_rf_r}) <= n_r ({n_r})")));
    }
    Ok(())
}

/// Hybrid design shared by both schemes. `rotation` is `(S_R, S_L)` for GMD.
fn hybrid_from_svd(
    chan: &ChannelRealization,
    svd: &SvdTruncated,
    rotation: Option<(&CMatrix, &CMatrix)>,
    n_rf_t: usize,
    n_rf_r: usize,
) -> Result<(HybridFactor, HybridFactor)> {
    let n_s = svd.k();
    let mut tx = omp_factor(&svd.v1, &chan.a_t, n_rf_t)?;
    let mut rx = omp_factor(&svd.u1, &chan.a_r, n_rf_r)?;
    if let Some((s_r, s_l)) = rotation {
        tx.digital = tx.digital.matmul(s_r);
        rx.digital = rx.digital.matmul(s_l);
    }
    let norm = frob_norm(&tx.product());
    if !(norm > 0.0) {
        return Err(Error::RankDeficient { index: 0, value: norm });
    }
    tx.digital = tx.digital.scale((n_s as f64).sqrt() / norm);
    Ok((tx, rx))
}

fn bundle_from_factors(scheme: Scheme, tx: HybridFactor, rx: HybridFactor, gains: Vec<f64>) -> PrecoderBundle {
    PrecoderBundle {
        scheme,
        precoder: tx.product(),
        combiner: rx.product(),
        subchannel_gains: gains,
        tx_factor: Some(tx),
        rx_factor: Some(rx),
    }
}

/// GMD hybrid precoder/combiner: greedy analog selection against `V1`/`U1`,
/// least-squares digital stage rotated by `S_R`/`S_L`, transmit power
/// normalised to `Ns`.
pub fn build_gmd_hybrid(chan: &ChannelRealization, n_rf_t: usize, n_rf_r: usize, n_s: usize) -> Result<PrecoderBundle> {
    check_hybrid_dims(chan, n_rf_t, n_rf_r, n_s)?;
    let svd = channel_svd(chan, n_s)?;
    gmd_hybrid_from_svd(chan, &svd, n_rf_t, n_rf_r)
}

fn gmd_hybrid_from_svd(chan: &ChannelRealization, svd: &SvdTruncated, n_rf_t: usize, n_rf_r: usize) -> Result<PrecoderBundle> {
    let gmd = gmd_from_svd(svd)?;
    let (tx, rx) = hybrid_from_svd(chan, svd, Some((&gmd.s_r, &gmd.s_l)), n_rf_t, n_rf_r)?;
    Ok(bundle_from_factors(Scheme::GmdHybrid, tx, rx, vec![gmd.r_bar; svd.k()]))
}

/// Baseline SVD hybrid design: as [`build_gmd_hybrid`] without rotation.
pub fn build_svd_hybrid(chan: &ChannelRealization, n_rf_t: usize, n_rf_r: usize, n_s: usize) -> Result<PrecoderBundle> {
    check_hybrid_dims(chan, n_rf_t, n_rf_r, n_s)?;
    let svd = channel_svd(chan, n_s)?;
    svd_hybrid_from_svd(chan, &svd, n_rf_t, n_rf_r)
}

fn svd_hybrid_from_svd(chan: &ChannelRealization, svd: &SvdTruncated, n_rf_t: usize, n_rf_r: usize) -> Result<PrecoderBundle> {
    let (tx, rx) = hybrid_from_svd(chan, svd, None, n_rf_t, n_rf_r)?;
    Ok(bundle_from_factors(Scheme::SvdHybrid, tx, rx, svd.sigma.clone()))
}

/// Unconstrained reference: `(V1, U1, σ)` or `(Q1, G1, r̄)`.
pub fn build_fully_digital(chan: &ChannelRealization, n_s: usize, mode: DigitalMode) -> Result<PrecoderBundle> {
    let (n_r, n_t) = chan.h.shape();
    if n_s == 0 || n_s > n_r.min(n_t) {
        return Err(Error::Config(format!("n_s = {n_s} for a {n_r}x{n_t} channel")));
    }
    let svd = channel_svd(chan, n_s)?;
    digital_from_svd(&svd, mode)
}

fn digital_from_svd(svd: &SvdTruncated, mode: DigitalMode) -> Result<PrecoderBundle> {
    Ok(match mode {
        DigitalMode::Svd => PrecoderBundle {
            scheme: Scheme::SvdDigital,
            precoder: svd.v1.clone(),
            combiner: svd.u1.clone(),
            subchannel_gains: svd.sigma.clone(),
            tx_factor: None,
            rx_factor: None,
        },
        DigitalMode::Gmd => {
            let GmdTriple { g1, q1, r_bar, .. } = gmd_from_svd(svd)?;
            PrecoderBundle {
                scheme: Scheme::GmdDigital,
                precoder: q1,
                combiner: g1,
                subchannel_gains: vec![r_bar; svd.k()],
                tx_factor: None,
                rx_factor: None,
            }
        }
    })
}

/// Builds the bundle for any scheme, using the same RF chain count on both
/// ends for the hybrid schemes.
pub fn build_bundle(chan: &ChannelRealization, scheme: Scheme, n_rf: usize, n_s: usize) -> Result<PrecoderBundle> {
    match scheme {
        Scheme::SvdDigital => build_fully_digital(chan, n_s, DigitalMode::Svd),
        Scheme::GmdDigital => build_fully_digital(chan, n_s, DigitalMode::Gmd),
        Scheme::SvdHybrid => build_svd_hybrid(chan, n_rf, n_rf, n_s),
        Scheme::GmdHybrid => build_gmd_hybrid(chan, n_rf, n_rf, n_s),
    }
}
