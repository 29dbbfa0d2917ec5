//! Run configuration: TOML files with flat key-value sections, CLI flags
//! overriding file values, and JSON provenance documents that reproduce a
//! finished run bit-for-bit.

use splitnvd::channel::{ChannelSpec, CorrelationModel};
use splitnvd::codes::{CodeSpec, Constellation, Scheme};
use splitnvd::sim::{CurvePoint, SimConfig, SimMode};
use std::path::Path;

/// Configuration error with the offending detail spelled out; always maps to
/// exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    code: Option<FileCode>,
    channel: Option<FileChannel>,
    sim: Option<FileSim>,
    output: Option<FileOutput>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileCode {
    scheme: String,
    bits_per_symbol: u32,
    subchannels: Option<usize>,
    tx: Option<usize>,
    slots: Option<usize>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileChannel {
    rx: usize,
    subchannels: Option<usize>,
    tx: Option<usize>,
    correlation: Option<String>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSim {
    snr_db: Option<Vec<f64>>,
    trials: Option<u64>,
    min_errors: Option<u64>,
    seed: Option<u64>,
    mode: Option<String>,
    rate: Option<f64>,
    mult_gain: Option<f64>,
}

#[derive(Debug, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOutput {
    path: Option<String>,
    format: Option<String>,
}

/// JSON document emitted next to every run; feeding it back as `--config`
/// reproduces the run.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
pub struct ProvenanceDoc {
    pub config: SimConfig,
    pub results: Vec<CurvePoint>,
}

// ---------------------------------------------------------------------------
// Flag-level overrides
// ---------------------------------------------------------------------------

/// Values that can arrive from CLI flags and take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub scheme: Option<String>,
    pub bits_per_symbol: Option<u32>,
    pub rx: Option<usize>,
    pub correlation: Option<String>,
    pub snr_db: Option<String>,
    pub trials: Option<u64>,
    pub min_errors: Option<u64>,
    pub seed: Option<u64>,
    pub rate: Option<f64>,
    pub mult_gain: Option<f64>,
    pub needs_code: bool,
}

/// Resolved run plus output preferences.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub sim: SimConfig,
    pub out_path: Option<String>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

pub fn parse_scheme(text: &str) -> Result<Scheme> {
    match text {
        "split-nvd" | "split" => Ok(Scheme::SplitNvd),
        "block-diag-nvd" | "block-diag" | "parallel" => Ok(Scheme::BlockDiagNvd),
        other => err(format!(
            "unknown scheme `{other}` (expected `split-nvd` or `block-diag-nvd`)"
        )),
    }
}

/// Grid syntax: `start:stop:step` (inclusive) or a comma list of dB values.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let grid = if parts.len() == 3 {
        let bad = |w| ConfigError(format!("bad snr range `{text}`: {w}"));
        let start: f64 = parts[0].trim().parse().map_err(|_| bad("start"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad("stop"))?;
        let step: f64 = parts[2].trim().parse().map_err(|_| bad("step"))?;
        if step <= 0.0 {
            return err(format!("bad snr range `{text}`: step must be positive"));
        }
        let mut v = Vec::new();
        let mut x = start;
        while x <= stop + 1e-9 {
            v.push((x * 1e9).round() / 1e9);
            x += step;
        }
        v
    } else {
        text.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| ConfigError(format!("bad snr value `{p}`")))
            })
            .collect::<Result<Vec<f64>>>()?
    };
    if grid.is_empty() {
        return err("empty snr grid");
    }
    Ok(grid)
}

pub fn parse_correlation(text: &str) -> Result<CorrelationModel> {
    if text == "identity" {
        return Ok(CorrelationModel::Identity);
    }
    if let Some(rest) = text.strip_prefix("taps:") {
        let taps: usize = rest
            .parse()
            .map_err(|_| ConfigError(format!("bad tap count `{rest}` in `{text}`")))?;
        return Ok(CorrelationModel::CirculantTaps { taps });
    }
    if let Some(path) = text.strip_prefix("file:") {
        return load_correlation_csv(path);
    }
    err(format!(
        "unknown correlation `{text}` (expected `identity`, `taps:L` or `file:<path>`)"
    ))
}

/// Parses `re+imj` complex literals, e.g. `1`, `-0.5j`, `0.3-0.7j`.
pub fn parse_complex(text: &str) -> Result<(f64, f64)> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || ConfigError(format!("bad complex entry `{text}` (expected `re+imj`)"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some(imag) = t.strip_suffix('j') {
        // Split at the last +/- that is not a leading sign or part of an exponent.
        let bytes = imag.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: f64 = imag[..k].parse().map_err(|_| bad())?;
                let im_text = &imag[k..];
                let im: f64 = if im_text == "+" {
                    1.0
                } else if im_text == "-" {
                    -1.0
                } else {
                    im_text.parse().map_err(|_| bad())?
                };
                Ok((re, im))
            }
            None => {
                let im: f64 = if imag.is_empty() || imag == "+" {
                    1.0
                } else if imag == "-" {
                    -1.0
                } else {
                    imag.parse().map_err(|_| bad())?
                };
                Ok((0.0, im))
            }
        }
    } else {
        let re: f64 = t.parse().map_err(|_| bad())?;
        Ok((re, 0.0))
    }
}

fn load_correlation_csv(path: &str) -> Result<CorrelationModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read correlation file `{path}`: {e}")))?;
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                parse_complex(cell).map_err(|e| {
                    ConfigError(format!("{path}:{}: {}", lineno + 1, e.0))
                })
            })
            .collect::<Result<Vec<(f64, f64)>>>()?;
        entries.push(row);
    }
    if entries.is_empty() {
        return err(format!("correlation file `{path}` holds no rows"));
    }
    Ok(CorrelationModel::Explicit { entries })
}

// ---------------------------------------------------------------------------
// Loading and resolution
// ---------------------------------------------------------------------------

fn load_file(path: &str) -> Result<(FileConfig, Option<SimConfig>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config `{path}`: {e}")))?;
    if Path::new(path).extension().and_then(|e| e.to_str()) == Some("json") {
        let doc: ProvenanceDoc = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("{path}: {e}")))?;
        Ok((FileConfig::default(), Some(doc.config)))
    } else {
        let file: FileConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("{path}: {e}")))?;
        Ok((file, None))
    }
}

/// Builds the fully resolved run from an optional config file plus CLI
/// overrides. Flags win over file values; a JSON provenance file already
/// holds a resolved config and is only overridden by explicit flags.
pub fn resolve(
    path: Option<&str>,
    mode_default: SimMode,
    ov: &Overrides,
    out_flag: Option<&str>,
    format_flag: Option<&str>,
) -> Result<ResolvedRun> {
    let (file, resolved) = match path {
        Some(p) => load_file(p)?,
        None => (FileConfig::default(), None),
    };

    let mut sim = match resolved {
        Some(cfg) => cfg,
        None => file_to_sim(&file, mode_default)?,
    };

    // Flag overrides.
    if let Some(scheme) = &ov.scheme {
        let scheme = parse_scheme(scheme)?;
        let bits = ov
            .bits_per_symbol
            .or(sim.code.as_ref().map(|c| c.constellation.bits_per_symbol))
            .unwrap_or(1);
        sim.code = Some(golden_code(scheme, bits)?);
    } else if let Some(bits) = ov.bits_per_symbol {
        match &mut sim.code {
            Some(code) => {
                code.constellation = Constellation::qam(bits)
                    .map_err(|e| ConfigError(e.to_string()))?;
            }
            None => return err("--bits requires a scheme (flag or [code] section)"),
        }
    }
    if let Some(rx) = ov.rx {
        sim.channel.rx = rx;
    }
    if let Some(corr) = &ov.correlation {
        sim.channel.correlation = parse_correlation(corr)?;
    }
    if let Some(grid) = &ov.snr_db {
        sim.snr_db = parse_snr_grid(grid)?;
    }
    if let Some(trials) = ov.trials {
        sim.trials = trials;
    }
    if let Some(me) = ov.min_errors {
        sim.min_errors = Some(me);
    }
    if let Some(seed) = ov.seed {
        sim.seed = seed;
    }
    if let Some(rate) = ov.rate {
        sim.mode = SimMode::OutageFixedRate { rate };
    }
    if let Some(r) = ov.mult_gain {
        sim.mode = SimMode::OutageScalingRate { r };
    }
    if let Some(code) = &sim.code {
        // Channel dimensions follow the code unless stated otherwise.
        sim.channel.subchannels = code.subchannels;
        sim.channel.tx = code.tx;
    }

    if ov.needs_code && sim.code.is_none() {
        return err("this command needs a code: give [code] in the config or --scheme/--bits");
    }

    let out_path = out_flag
        .map(str::to_owned)
        .or_else(|| file.output.as_ref().and_then(|o| o.path.clone()));
    let format = match format_flag.or(file
        .output
        .as_ref()
        .and_then(|o| o.format.as_deref()))
    {
        None | Some("both") => OutputFormat::Both,
        Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => return err(format!("unknown output format `{other}`")),
    };
    Ok(ResolvedRun {
        sim,
        out_path,
        format,
    })
}

pub fn golden_code(scheme: Scheme, bits: u32) -> Result<CodeSpec> {
    CodeSpec::golden(scheme, bits).map_err(|e| ConfigError(e.to_string()))
}

fn file_to_sim(file: &FileConfig, mode_default: SimMode) -> Result<SimConfig> {
    let code = match &file.code {
        Some(fc) => {
            let scheme = parse_scheme(&fc.scheme)?;
            let mut spec = golden_code(scheme, fc.bits_per_symbol)?;
            if let Some(n) = fc.subchannels {
                spec.subchannels = n;
            }
            if let Some(t) = fc.tx {
                spec.tx = t;
            }
            if let Some(s) = fc.slots {
                spec.slots = s;
            }
            Some(spec)
        }
        None => None,
    };
    let channel = match &file.channel {
        Some(fc) => {
            let n = fc
                .subchannels
                .or(code.as_ref().map(|c| c.subchannels))
                .ok_or_else(|| {
                    ConfigError("channel needs `subchannels` when no [code] is given".into())
                })?;
            let tx = fc.tx.or(code.as_ref().map(|c| c.tx)).unwrap_or(1);
            ChannelSpec {
                subchannels: n,
                tx,
                rx: fc.rx,
                correlation: match &fc.correlation {
                    Some(text) => parse_correlation(text)?,
                    None => CorrelationModel::Identity,
                },
            }
        }
        None => match &code {
            Some(code) => ChannelSpec::block_fading(code.subchannels, code.tx, code.tx),
            // Flag-only outage runs start from the 1x1, N = 2 block-fading
            // default and adjust via --subchannels/--tx/--rx.
            None => ChannelSpec::block_fading(2, 1, 1),
        },
    };
    let fs = file.sim.as_ref();
    let mode = match fs.and_then(|s| s.mode.as_deref()) {
        None => mode_default,
        Some("wer") => SimMode::Wer,
        Some("outage-fixed-rate") => SimMode::OutageFixedRate {
            rate: fs.and_then(|s| s.rate).ok_or_else(|| {
                ConfigError("mode `outage-fixed-rate` needs `rate` (bits per sub-channel)".into())
            })?,
        },
        Some("outage-scaling-rate") => SimMode::OutageScalingRate {
            r: fs.and_then(|s| s.mult_gain).ok_or_else(|| {
                ConfigError("mode `outage-scaling-rate` needs `mult_gain`".into())
            })?,
        },
        Some(other) => return err(format!("unknown sim mode `{other}`")),
    };
    Ok(SimConfig {
        code,
        channel,
        snr_db: fs
            .and_then(|s| s.snr_db.clone())
            .unwrap_or_else(|| (0..=30).step_by(2).map(f64::from).collect()),
        trials: fs.and_then(|s| s.trials).unwrap_or(10_000),
        min_errors: fs.and_then(|s| s.min_errors),
        seed: fs.and_then(|s| s.seed).unwrap_or(1),
        mode,
    })
}
