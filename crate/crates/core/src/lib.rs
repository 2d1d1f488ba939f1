//! GMD-based hybrid precoding for mmWave massive MIMO.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: dense complex matrices, truncated SVD, pseudo-inverse.
//! - [`channel`]: clustered narrowband channel between two ULAs.
//! - [`gmd`]: geometric mean decomposition as a rotation of the SVD.
//! - [`hybrid`]: greedy analog selection and the (rotated) digital stage.
//! - [`link`]: 16-QAM, water-filling, SVD and SIC receivers, BER loops.

pub mod channel;
pub mod error;
pub mod gmd;
pub mod hybrid;
pub mod linalg;
pub mod link;
pub mod rng;

pub use channel::{draw_channel, ula_response, ArrayGeometry, ChannelRealization, PathSet};
pub use error::{Error, Result};
pub use gmd::{geometric_mean, givens_pair, gmd_from_svd, gmd_from_svd_traced, GmdStage, GmdTriple};
pub use hybrid::{
    build_bundle, build_fully_digital, build_gmd_hybrid, build_svd_hybrid, omp_factor, DigitalMode, HybridFactor,
    PrecoderBundle, Scheme,
};
pub use linalg::{frob_norm, pseudo_inverse, svd_truncated, CMatrix, SvdTruncated};
pub use num_complex::Complex64;
