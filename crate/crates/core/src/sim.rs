//! Seeded Monte Carlo engine for word-error-rate and outage curves.
//!
//! Reproducibility contract: every trial draws from its own counter-derived
//! stream `seed(master, point, trial)`, so results are bit-identical for a
//! given configuration regardless of how trials are sharded across workers.
//! Trials run in fixed-size chunks; the optional `min_errors` stopping rule
//! is evaluated only at chunk boundaries, which keeps early stopping
//! deterministic too.

use crate::channel::{mutual_information, sample_channel, ChannelError, ChannelSpec};
use crate::codes::{Code, CodeError, CodeSpec};
use crate::decoder::{DecodeError, MlDecoder};
use crate::stats::{least_squares_slope, wilson_interval_95};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Trials per deterministic scheduling chunk.
const CHUNK: u64 = 4096;

/// Points with fewer error events than this are emitted flagged.
const FLAG_THRESHOLD: u64 = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("word-error-rate simulation requires a code spec")]
    MissingCode,
    #[error("snr grid must be non-empty and strictly increasing (dB)")]
    BadSnrGrid,
    #[error("trial budget must be at least 1")]
    NoTrials,
    #[error("code has {code} sub-channels / {code_tx} tx but channel has {channel} / {channel_tx}")]
    DimensionMismatch {
        code: usize,
        code_tx: usize,
        channel: usize,
        channel_tx: usize,
    },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

type Result<T> = std::result::Result<T, SimError>;

/// What each trial counts.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SimMode {
    /// Transmit a uniform codeword, ML-decode, count word errors.
    Wer,
    /// Mutual information below a fixed total rate `N * rate` bits.
    OutageFixedRate { rate: f64 },
    /// Mutual information below the scaling target `N * r * log2(snr)`.
    OutageScalingRate { r: f64 },
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    /// Required for WER mode; ignored by the outage modes.
    pub code: Option<CodeSpec>,
    pub channel: ChannelSpec,
    /// Strictly increasing grid in dB.
    pub snr_db: Vec<f64>,
    /// Trial budget per grid point.
    pub trials: u64,
    /// Optional stopping rule: stop a point once this many errors have been
    /// seen (checked at deterministic chunk boundaries).
    pub min_errors: Option<u64>,
    pub seed: u64,
    pub mode: SimMode,
}

/// One estimated point of a curve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// True when fewer than 10 error events back the estimate.
    pub flagged: bool,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Counter-derived stream for one trial; distinct `(point, trial)` pairs map
/// to distinct seeds for trials below 2^40 and grids below 2^24 points.
pub fn trial_rng(master: u64, point: u64, trial: u64) -> ChaCha12Rng {
    debug_assert!(trial < 1 << 40);
    ChaCha12Rng::seed_from_u64(master ^ (point << 40) ^ trial)
}

fn validate(config: &SimConfig) -> Result<()> {
    if config.snr_db.is_empty() || config.snr_db.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::BadSnrGrid);
    }
    if config.trials == 0 {
        return Err(SimError::NoTrials);
    }
    Ok(())
}

/// Deterministic chunked Monte Carlo over the SNR grid.
fn run_curve<F>(config: &SimConfig, trial_is_event: F) -> Vec<CurvePoint>
where
    F: Fn(u64, u64, f64) -> bool + Sync,
{
    config
        .snr_db
        .iter()
        .enumerate()
        .map(|(point, &snr_db)| {
            let snr = db_to_linear(snr_db);
            let mut done = 0u64;
            let mut errors = 0u64;
            while done < config.trials {
                if let Some(stop) = config.min_errors {
                    if errors >= stop {
                        break;
                    }
                }
                let chunk = CHUNK.min(config.trials - done);
                errors += (done..done + chunk)
                    .into_par_iter()
                    .map(|t| trial_is_event(point as u64, t, snr) as u64)
                    .sum::<u64>();
                done += chunk;
            }
            let estimate = errors as f64 / done as f64;
            let (ci_low, ci_high) = wilson_interval_95(errors, done);
            CurvePoint {
                snr_db,
                trials: done,
                errors,
                estimate,
                ci_low,
                ci_high,
                flagged: errors < FLAG_THRESHOLD,
            }
        })
        .collect()
}

/// Word-error-rate curve: per trial draw a channel, a uniform codeword and
/// noise, ML-decode, and count decoding errors.
pub fn run_wer(config: &SimConfig) -> Result<Vec<CurvePoint>> {
    validate(config)?;
    let code_spec = config.code.clone().ok_or(SimError::MissingCode)?;
    if code_spec.subchannels != config.channel.subchannels || code_spec.tx != config.channel.tx {
        return Err(SimError::DimensionMismatch {
            code: code_spec.subchannels,
            code_tx: code_spec.tx,
            channel: config.channel.subchannels,
            channel_tx: config.channel.tx,
        });
    }
    let code = Code::build(code_spec)?;
    let decoder = MlDecoder::new(&code)?;
    let corr = config
        .channel
        .correlation
        .resolve(config.channel.subchannels)?;
    let size = code.size();

    Ok(run_curve(config, |point, trial, snr| {
        let mut rng = trial_rng(config.seed, point, trial);
        let h = sample_channel(&config.channel, &corr, &mut rng);
        let index = rng.random_range(0..size);
        let cw = code.codeword_by_index(index);
        let y = crate::channel::transmit(&h, &cw.blocks, snr, &mut rng)
            .expect("codeword/channel shapes agree");
        let decoded = decoder
            .decode(&y, &h, snr)
            .expect("decoder accepts its own code's shapes");
        decoded.best_index != index
    }))
}

/// Outage curve: count mutual-information shortfalls against the mode's
/// rate target. Needs no codebook.
pub fn run_outage(config: &SimConfig) -> Result<Vec<CurvePoint>> {
    validate(config)?;
    let corr = config
        .channel
        .correlation
        .resolve(config.channel.subchannels)?;
    let n = config.channel.subchannels as f64;
    let tx = config.channel.tx;

    let threshold = |snr: f64| -> f64 {
        match config.mode {
            SimMode::OutageFixedRate { rate } => n * rate,
            SimMode::OutageScalingRate { r } => n * r * snr.log2(),
            SimMode::Wer => n * 0.0,
        }
    };

    Ok(run_curve(config, |point, trial, snr| {
        let mut rng = trial_rng(config.seed, point, trial);
        let h = sample_channel(&config.channel, &corr, &mut rng);
        mutual_information(&h, snr, tx) < threshold(snr)
    }))
}

/// Diversity-slope fit of a curve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SlopeFit {
    /// Least-squares slope of `-log10(estimate)` against `log10(snr)`.
    pub slope: f64,
    pub points_used: usize,
    /// False when fewer than two points carry at least 50 error events;
    /// the slope is then not trustworthy.
    pub reliable: bool,
}

/// Fits the high-SNR decay exponent over the points with at least 50 error
/// events.
pub fn fit_slope(points: &[CurvePoint]) -> SlopeFit {
    let usable: Vec<&CurvePoint> = points
        .iter()
        .filter(|p| p.errors >= 50 && p.estimate > 0.0)
        .collect();
    if usable.len() < 2 {
        return SlopeFit {
            slope: f64::NAN,
            points_used: usable.len(),
            reliable: false,
        };
    }
    let x: Vec<f64> = usable
        .iter()
        .map(|p| db_to_linear(p.snr_db).log10())
        .collect();
    let y: Vec<f64> = usable.iter().map(|p| -p.estimate.log10()).collect();
    SlopeFit {
        slope: least_squares_slope(&x, &y),
        points_used: usable.len(),
        reliable: true,
    }
}
