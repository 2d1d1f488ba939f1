//! Narrowband clustered (Saleh-Valenzuela) mmWave channel between two
//! uniform linear arrays.
//!
//! `H = sqrt(Nt·Nr/L) · Σ_i β_i · a_r(φʳ_i) · a_t(φᵗ_i)ᴴ`, with
//! `β_i ~ CN(0, 1)` and angles uniform on `[-π/2, π/2]`. The steering vectors
//! of the realised paths are kept as the dictionaries for the analog design.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::complex_normal;

/// Uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub n_elements: usize,
    /// Element spacing in wavelengths (`d/λ`).
    pub spacing_over_wavelength: f64,
}

impl ArrayGeometry {
    /// Half-wavelength ULA.
    pub fn half_wavelength(n_elements: usize) -> Self {
        Self { n_elements, spacing_over_wavelength: 0.5 }
    }

    pub fn new(n_elements: usize, spacing_over_wavelength: f64) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::Config("array needs at least one element".into()));
        }
        if !(spacing_over_wavelength > 0.0) || !spacing_over_wavelength.is_finite() {
            return Err(Error::Config(format!(
                "element spacing must be positive, got {spacing_over_wavelength}"
            )));
        }
        Ok(Self { n_elements, spacing_over_wavelength })
    }
}

/// Unit-norm array response: element `m` is `exp(j·2π·(d/λ)·m·sin θ)/√N`.
pub fn ula_response(geom: &ArrayGeometry, angle: f64) -> Vec<Complex64> {
    let n = geom.n_elements;
    let amp = 1.0 / (n as f64).sqrt();
    let phase_step = 2.0 * PI * geom.spacing_over_wavelength * angle.sin();
    (0..n).map(|m| Complex64::from_polar(amp, phase_step * m as f64)).collect()
}

/// Propagation paths of one realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub gains: Vec<Complex64>,
    /// Angles of departure (radians).
    pub aod: Vec<f64>,
    /// Angles of arrival (radians).
    pub aoa: Vec<f64>,
}

impl PathSet {
    pub fn new(gains: Vec<Complex64>, aod: Vec<f64>, aoa: Vec<f64>) -> Result<Self> {
        let l = gains.len();
        if l == 0 || aod.len() != l || aoa.len() != l {
            return Err(Error::Dimension(format!(
                "path set with {} gains, {} AoDs, {} AoAs",
                l,
                aod.len(),
                aoa.len()
            )));
        }
        let tol = 1e-12;
        if let Some(bad) = aod.iter().chain(&aoa).find(|a| a.abs() > FRAC_PI_2 + tol) {
            return Err(Error::Config(format!("path angle {bad} outside [-π/2, π/2]")));
        }
        Ok(Self { gains, aod, aoa })
    }

    pub fn count(&self) -> usize {
        self.gains.len()
    }
}

/// A channel matrix together with the paths and steering dictionaries that
/// generated it.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `Nr × Nt` channel.
    pub h: CMatrix,
    pub paths: PathSet,
    /// `Nt × L` transmit steering dictionary.
    pub a_t: CMatrix,
    /// `Nr × L` receive steering dictionary.
    pub a_r: CMatrix,
}

impl ChannelRealization {
    /// Assembles the channel deterministically from a path set.
    pub fn from_paths(geom_t: &ArrayGeometry, geom_r: &ArrayGeometry, paths: PathSet) -> Self {
        let (n_t, n_r, l) = (geom_t.n_elements, geom_r.n_elements, paths.count());
        let at_cols: Vec<_> = paths.aod.iter().map(|&a| ula_response(geom_t, a)).collect();
        let ar_cols: Vec<_> = paths.aoa.iter().map(|&a| ula_response(geom_r, a)).collect();
        let a_t = CMatrix::from_columns(&at_cols);
        let a_r = CMatrix::from_columns(&ar_cols);

        let norm = ((n_t * n_r) as f64 / l as f64).sqrt();
        let mut h = CMatrix::zeros(n_r, n_t);
        for ((beta, ar), at) in paths.gains.iter().zip(&ar_cols).zip(&at_cols) {
            let w = beta * norm;
            for (i, ari) in ar.iter().enumerate() {
                let wi = w * ari;
                for (j, atj) in at.iter().enumerate() {
                    h[(i, j)] += wi * atj.conj();
                }
            }
        }
        Self { h, paths, a_t, a_r }
    }

    pub fn n_t(&self) -> usize {
        self.h.cols()
    }

    pub fn n_r(&self) -> usize {
        self.h.rows()
    }
}

/// Draws a random channel: `L` paths with `CN(0,1)` gains and angles uniform
/// on `[-π/2, π/2]`.
pub fn draw_channel<R: Rng + ?Sized>(
    n_paths: usize,
    geom_t: &ArrayGeometry,
    geom_r: &ArrayGeometry,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if n_paths == 0 {
        return Err(Error::Config("channel needs at least one path".into()));
    }
    let mut gains = Vec::with_capacity(n_paths);
    let mut aod = Vec::with_capacity(n_paths);
    let mut aoa = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        gains.push(complex_normal(rng));
        aod.push(rng.random_range(-FRAC_PI_2..=FRAC_PI_2));
        aoa.push(rng.random_range(-FRAC_PI_2..=FRAC_PI_2));
    }
    let paths = PathSet::new(gains, aod, aoa)?;
    Ok(ChannelRealization::from_paths(geom_t, geom_r, paths))
}
