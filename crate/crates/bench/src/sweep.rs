//! Sweep orchestration and result files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gmd_precoding::link::{run_trials, BerPoint};
use gmd_precoding::Scheme;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::ci_half_width;
use crate::config::ExperimentSpec;

/// Early stopping never triggers before this many bit errors.
pub const MIN_ERRORS_FOR_EARLY_STOP: u64 = 100;
/// Trials per batch when early stopping is enabled.
pub const BATCH_TRIALS: u64 = 16;

pub const CSV_HEADER: &str = "scheme,snr_db,ber,bits,errors,trials,seed";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Sim(#[from] gmd_precoding::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),
}

/// Configured schemes, deduplicated and in output order.
fn ordered_schemes(spec: &ExperimentSpec) -> Vec<Scheme> {
    let mut schemes = spec.config.schemes.clone();
    schemes.sort_by_key(|s| s.name());
    schemes.dedup();
    schemes
}

fn ordered_snrs(spec: &ExperimentSpec) -> Vec<f64> {
    let mut snrs = spec.config.snr_db_grid.clone();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();
    snrs
}

/// Runs one point, stopping early once the confidence target is met (and at
/// least [`MIN_ERRORS_FOR_EARLY_STOP`] errors were seen).
pub fn run_point(spec: &ExperimentSpec, scheme: Scheme, snr_db: f64) -> Result<BerPoint, SweepError> {
    let cfg = &spec.config;
    let budget = cfg.channels_per_point;
    let Some(target) = spec.ci_target else {
        return Ok(run_trials(cfg, scheme, snr_db, 0..budget)?);
    };
    let mut point = BerPoint::empty(scheme, snr_db, cfg.n_s, cfg.point_seed(scheme, snr_db));
    let mut next = 0;
    while next < budget {
        let end = (next + BATCH_TRIALS).min(budget);
        point.merge(&run_trials(cfg, scheme, snr_db, next..end)?);
        next = end;
        let rel = ci_half_width(point.errors, point.bits) / point.ber();
        if point.errors >= MIN_ERRORS_FOR_EARLY_STOP && rel <= target {
            break;
        }
    }
    Ok(point)
}

/// All (scheme, SNR) points, sorted by scheme name then SNR.
pub fn run_sweep(spec: &ExperimentSpec, progress: bool) -> Result<Vec<BerPoint>, SweepError> {
    spec.validate()?;
    let mut points = Vec::new();
    for scheme in ordered_schemes(spec) {
        for snr in ordered_snrs(spec) {
            let p = run_point(spec, scheme, snr)?;
            if progress {
                eprintln!(
                    "[{}] {:<12} {:>6.1} dB  ber={:.3e}  ({} errors / {} bits, {} trials)",
                    spec.name,
                    scheme.name(),
                    snr,
                    p.ber(),
                    p.errors,
                    p.bits,
                    p.trials
                );
            }
            points.push(p);
        }
    }
    Ok(points)
}

pub fn csv_string(points: &[BerPoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        writeln!(out, "{},{},{:.6e},{},{},{},{}", p.scheme, p.snr_db, p.ber(), p.bits, p.errors, p.trials, p.seed)
            .expect("write to string");
    }
    out
}

/// One row per SNR, one BER column per scheme.
pub fn plot_string(points: &[BerPoint]) -> String {
    let mut schemes: Vec<Scheme> = points.iter().map(|p| p.scheme).collect();
    schemes.sort_by_key(|s| s.name());
    schemes.dedup();
    let mut snrs: Vec<f64> = points.iter().map(|p| p.snr_db).collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();

    let mut out = String::from("snr_db");
    for s in &schemes {
        write!(out, ",{s}").unwrap();
    }
    out.push('\n');
    for snr in snrs {
        write!(out, "{snr}").unwrap();
        for s in &schemes {
            match points.iter().find(|p| p.scheme == *s && p.snr_db == snr) {
                Some(p) => write!(out, ",{:.6e}", p.ber()).unwrap(),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct BuildInfo {
    package: &'static str,
    version: &'static str,
    git: &'static str,
}

#[derive(Serialize)]
struct Metadata<'a> {
    experiment: &'a ExperimentSpec,
    build: BuildInfo,
}

pub fn build_identity() -> String {
    format!("{} {} ({})", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"), env!("GMDSIM_GIT_DESCRIBE"))
}

pub fn metadata_string(spec: &ExperimentSpec) -> String {
    let meta = Metadata {
        experiment: spec,
        build: BuildInfo {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            git: env!("GMDSIM_GIT_DESCRIBE"),
        },
    };
    serde_json::to_string_pretty(&meta).expect("metadata serialises")
}

/// `<stem>.meta.json` and `<stem>.plot.csv` next to the CSV.
pub fn sidecar_paths(csv: &Path) -> (PathBuf, PathBuf) {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "ber".into());
    let dir = csv.parent().unwrap_or_else(|| Path::new(""));
    (dir.join(format!("{stem}.meta.json")), dir.join(format!("{stem}.plot.csv")))
}

fn write(path: &Path, contents: &str) -> Result<(), SweepError> {
    fs::write(path, contents).map_err(|source| SweepError::Io { path: path.to_path_buf(), source })
}

/// Writes the CSV, plot data and metadata for a finished sweep.
pub fn write_outputs(spec: &ExperimentSpec, points: &[BerPoint]) -> Result<(), SweepError> {
    let csv = &spec.output_path;
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| SweepError::Io { path: dir.to_path_buf(), source })?;
    }
    let (meta, plot) = sidecar_paths(csv);
    write(csv, &csv_string(points))?;
    write(&plot, &plot_string(points))?;
    write(&meta, &metadata_string(spec))
}
