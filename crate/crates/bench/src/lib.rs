//! Batch BER sweeps comparing SVD and GMD precoding, fully digital and
//! hybrid, on clustered mmWave channels.

pub mod analysis;
pub mod check;
pub mod config;
pub mod sweep;

pub use analysis::{ci_half_width, curve, snr_at_ber};
pub use check::{gmd_check, GmdCheckReport};
pub use config::{parse_config, ConfigError, ExperimentSpec};
pub use sweep::{csv_string, plot_string, run_point, run_sweep, write_outputs, SweepError};

/// Runs `f` on a dedicated rayon pool with `threads` workers (0 = rayon's
/// default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}
