//! Monte-Carlo BER estimation for one (scheme, SNR) point.

use std::ops::Range;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detect::{effective_channel, ScalarEqualizer, SicDetector};
use super::modem::{qam16_map, BITS_PER_SYMBOL};
use super::power::water_fill;
use crate::channel::{draw_channel, ArrayGeometry, ChannelRealization};
use crate::error::{Error, Result};
use crate::hybrid::{build_bundle, PrecoderBundle, Scheme};
use crate::rng::{complex_normal, derive_seed, stream};

const CHANNEL_DOMAIN: u64 = 0xC4A7;
const DATA_DOMAIN: u64 = 0xDA7A;

/// Link-level simulation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_t: usize,
    pub n_r: usize,
    /// RF chains at each end.
    pub n_rf: usize,
    pub n_s: usize,
    /// Number of propagation paths `L`.
    pub n_paths: usize,
    /// Element spacing in wavelengths, both arrays.
    pub spacing: f64,
    /// `10·log10(Ns / σ²)` values to simulate.
    pub snr_db_grid: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub channels_per_point: u64,
    pub symbols_per_channel: u64,
    pub master_seed: u64,
}

impl Default for SimConfig {
    /// 128×16 half-wavelength ULAs, 4 RF chains, 4 paths, 4 streams.
    fn default() -> Self {
        Self {
            n_t: 128,
            n_r: 16,
            n_rf: 4,
            n_s: 4,
            n_paths: 4,
            spacing: 0.5,
            snr_db_grid: (0..8).map(|i| -10.0 + 2.0 * i as f64).collect(),
            schemes: Scheme::ALL.to_vec(),
            channels_per_point: 200,
            symbols_per_channel: 100,
            master_seed: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_t == 0 || self.n_r == 0 || self.n_s == 0 || self.n_paths == 0 {
            return fail("n_t, n_r, n_s and n_paths must be positive".into());
        }
        if self.n_s > self.n_rf {
            return fail(format!("n_s ({}) must not exceed n_rf ({})", self.n_s, self.n_rf));
        }
        if self.n_rf > self.n_t.min(self.n_r) {
            return fail(format!("n_rf ({}) must not exceed min(n_t, n_r) ({})", self.n_rf, self.n_t.min(self.n_r)));
        }
        if self.n_s > self.n_paths {
            return fail(format!("n_s ({}) must not exceed the path count ({})", self.n_s, self.n_paths));
        }
        if self.n_rf > self.n_paths {
            return fail(format!(
                "n_rf ({}) must not exceed the path count ({}) used as the analog dictionary",
                self.n_rf, self.n_paths
            ));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return fail(format!("spacing must be positive, got {}", self.spacing));
        }
        if self.snr_db_grid.iter().any(|s| !s.is_finite()) {
            return fail("snr_db_grid contains a non-finite value".into());
        }
        if self.schemes.is_empty() {
            return fail("no schemes selected".into());
        }
        if self.channels_per_point == 0 || self.symbols_per_channel == 0 {
            return fail("channels_per_point and symbols_per_channel must be positive".into());
        }
        Ok(())
    }

    pub fn geometries(&self) -> (ArrayGeometry, ArrayGeometry) {
        (
            ArrayGeometry { n_elements: self.n_t, spacing_over_wavelength: self.spacing },
            ArrayGeometry { n_elements: self.n_r, spacing_over_wavelength: self.spacing },
        )
    }

    /// Noise variance at the receive antennas for a given SNR.
    pub fn noise_variance(&self, snr_db: f64) -> f64 {
        self.n_s as f64 / 10f64.powf(snr_db / 10.0)
    }

    /// Channel of trial `trial`; shared by every scheme and SNR point.
    pub fn channel(&self, trial: u64) -> Result<ChannelRealization> {
        let (gt, gr) = self.geometries();
        draw_channel(self.n_paths, &gt, &gr, &mut stream(self.master_seed, &[CHANNEL_DOMAIN, trial]))
    }

    /// Seed identifying the data/noise streams of one (scheme, SNR) point.
    pub fn point_seed(&self, scheme: Scheme, snr_db: f64) -> u64 {
        derive_seed(self.master_seed, &[DATA_DOMAIN, scheme.id(), snr_db.to_bits()])
    }
}

/// Accumulated error counts for one (scheme, SNR) point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub trials: u64,
    pub seed: u64,
    /// Bit errors per stream; each stream carries `bits / n_s` bits.
    pub stream_errors: Vec<u64>,
}

impl BerPoint {
    pub fn empty(scheme: Scheme, snr_db: f64, n_s: usize, seed: u64) -> Self {
        Self { scheme, snr_db, bits: 0, errors: 0, trials: 0, seed, stream_errors: vec![0; n_s] }
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    pub fn stream_bits(&self) -> u64 {
        self.bits / self.stream_errors.len().max(1) as u64
    }

    pub fn merge(&mut self, other: &BerPoint) {
        self.bits += other.bits;
        self.errors += other.errors;
        self.trials += other.trials;
        for (a, b) in self.stream_errors.iter_mut().zip(&other.stream_errors) {
            *a += b;
        }
    }
}

/// Transmit power per stream: water-filling for SVD schemes, equal power
/// for GMD schemes. Sums to `Ns`.
pub fn stream_powers(bundle: &PrecoderBundle, noise_var: f64) -> Vec<f64> {
    let n_s = bundle.n_s();
    if bundle.scheme.is_gmd() {
        vec![1.0; n_s]
    } else {
        water_fill(&bundle.subchannel_gains, n_s as f64, noise_var)
    }
}

enum Receiver {
    Scalar(ScalarEqualizer),
    Sic(SicDetector),
}

impl Receiver {
    fn detect(&self, y: &[Complex64]) -> Vec<Option<u8>> {
        match self {
            Receiver::Scalar(d) => d.detect(y),
            Receiver::Sic(d) => d.detect(y),
        }
    }
}

/// Transmits `symbols` random 16-QAM vectors through a fixed channel and
/// bundle and returns per-stream bit errors.
pub fn simulate_block<R: Rng + ?Sized>(
    chan: &ChannelRealization,
    bundle: &PrecoderBundle,
    noise_var: f64,
    symbols: u64,
    rng: &mut R,
) -> Vec<u64> {
    let n_s = bundle.n_s();
    let powers = stream_powers(bundle, noise_var);
    let effective = effective_channel(bundle, &chan.h, &powers);
    let receiver = if bundle.scheme.is_gmd() {
        Receiver::Sic(SicDetector::new(&effective))
    } else {
        Receiver::Scalar(ScalarEqualizer::new(&effective))
    };
    let sigma = noise_var.sqrt();
    let n_r = chan.n_r();

    let mut errors = vec![0u64; n_s];
    let mut tx_bits = vec![0u8; n_s];
    let mut s = vec![Complex64::new(0.0, 0.0); n_s];
    let mut noise = vec![Complex64::new(0.0, 0.0); n_r];
    for _ in 0..symbols {
        for k in 0..n_s {
            tx_bits[k] = rng.random::<u8>() & 0x0F;
            s[k] = qam16_map(tx_bits[k]);
        }
        for z in noise.iter_mut() {
            *z = complex_normal(rng) * sigma;
        }
        let mut y = effective.mul_vec(&s);
        for (yk, nk) in y.iter_mut().zip(bundle.combiner.adjoint_mul_vec(&noise)) {
            *yk += nk;
        }
        for (k, d) in receiver.detect(&y).into_iter().enumerate() {
            errors[k] += match d {
                Some(b) => u64::from((b ^ tx_bits[k]).count_ones()),
                None => u64::from(BITS_PER_SYMBOL),
            };
        }
    }
    errors
}

fn run_trial(cfg: &SimConfig, scheme: Scheme, snr_db: f64, trial: u64) -> Result<Vec<u64>> {
    let chan = cfg.channel(trial)?;
    let bundle = build_bundle(&chan, scheme, cfg.n_rf, cfg.n_s)?;
    let mut rng = stream(cfg.point_seed(scheme, snr_db), &[trial]);
    Ok(simulate_block(&chan, &bundle, cfg.noise_variance(snr_db), cfg.symbols_per_channel, &mut rng))
}

/// Runs trials `trials` of one point. Trials execute on the current rayon
/// pool; the result does not depend on the pool size.
pub fn run_trials(cfg: &SimConfig, scheme: Scheme, snr_db: f64, trials: Range<u64>) -> Result<BerPoint> {
    cfg.validate()?;
    let per_trial: Vec<Vec<u64>> = trials
        .clone()
        .into_par_iter()
        .map(|t| run_trial(cfg, scheme, snr_db, t))
        .collect::<Result<_>>()?;

    let mut point = BerPoint::empty(scheme, snr_db, cfg.n_s, cfg.point_seed(scheme, snr_db));
    point.trials = trials.end.saturating_sub(trials.start);
    point.bits = point.trials * cfg.symbols_per_channel * cfg.n_s as u64 * u64::from(BITS_PER_SYMBOL);
    for errs in &per_trial {
        for (acc, e) in point.stream_errors.iter_mut().zip(errs) {
            *acc += e;
        }
    }
    point.errors = point.stream_errors.iter().sum();
    Ok(point)
}

/// Full point: `channels_per_point` trials.
pub fn run_ber_point(cfg: &SimConfig, scheme: Scheme, snr_db: f64) -> Result<BerPoint> {
    run_trials(cfg, scheme, snr_db, 0..cfg.channels_per_point)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            n_t: 32,
            n_r: 8,
            n_rf: 2,
            n_s: 2,
            n_paths: 3,
            snr_db_grid: vec![0.0],
            channels_per_point: 4,
            symbols_per_channel: 20,
            ..SimConfig::default()
        }
    }

    #[test]
    fn default_config_is_valid() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn validation_catches_ordering() {
        let mut c = small();
        c.n_s = 3;
        assert!(c.validate().is_err());
        let mut c = small();
        c.n_rf = 9;
        assert!(c.validate().is_err());
        let mut c = small();
        c.n_paths = 1;
        assert!(c.validate().is_err());
        let mut c = small();
        c.schemes.clear();
        assert!(c.validate().is_err());
        let mut c = small();
        c.channels_per_point = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn bit_count_bookkeeping() {
        let c = small();
        let p = run_ber_point(&c, Scheme::SvdHybrid, 0.0).unwrap();
        assert_eq!(p.bits, 4 * 20 * 2 * 4);
        assert_eq!(p.trials, 4);
        assert!(p.errors <= p.bits);
        assert_eq!(p.errors, p.stream_errors.iter().sum::<u64>());
    }

    #[test]
    fn split_runs_merge_to_whole() {
        let c = small();
        let whole = run_ber_point(&c, Scheme::GmdHybrid, -5.0).unwrap();
        let mut a = run_trials(&c, Scheme::GmdHybrid, -5.0, 0..1).unwrap();
        a.merge(&run_trials(&c, Scheme::GmdHybrid, -5.0, 1..4).unwrap());
        assert_eq!(a, whole);
    }

    #[test]
    fn noiseless_digital_is_error_free() {
        let c = small();
        for s in [Scheme::SvdDigital, Scheme::GmdDigital] {
            assert_eq!(run_ber_point(&c, s, 60.0).unwrap().errors, 0, "{s}");
        }
    }
}
