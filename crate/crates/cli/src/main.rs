//! Batch front door for code certification and Monte Carlo evaluation.
//!
//! Subcommands map one-to-one onto the library: `wer` and `outage` run
//! seeded curves, `dmt-curve` tabulates the closed-form tradeoffs,
//! `nvd min-det`/`nvd criterion` certify the code determinants, and
//! `verify` hosts the randomized checkers. Every data-producing command
//! embeds its resolved configuration and seed in the output so a run can be
//! reproduced bit-for-bit from its own artifact.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error.

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, Overrides, ResolvedRun};
use splitnvd::analysis;
use splitnvd::codes::{constellation_size_for_rate, Code, Scheme};
use splitnvd::sim::{self, SimMode};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "splitnvd", version, about = "NVD parallel space-time codes: exact certification and Monte Carlo evaluation")]
struct Cli {
    /// Cap on worker threads (0 = all cores). Results never depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Word-error-rate curve for a golden code over the block-fading channel.
    Wer(CurveArgs),
    /// Outage-probability curve (no codebook needed).
    Outage(OutageArgs),
    /// Tabulate the two closed-form DMT curves over the multiplexing gain.
    DmtCurve(DmtArgs),
    /// Non-vanishing determinant certificates.
    #[command(subcommand)]
    Nvd(NvdCommand),
    /// Randomized and structural verifiers.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Args)]
struct CurveArgs {
    /// TOML config (or a JSON provenance document from a previous run).
    #[arg(long)]
    config: Option<String>,
    /// Code scheme: split-nvd | block-diag-nvd.
    #[arg(long)]
    scheme: Option<String>,
    /// Constellation size in bits per symbol (1 = BPSK, 2 = QPSK, ...).
    #[arg(long)]
    bits: Option<u32>,
    /// Receive antennas.
    #[arg(long)]
    rx: Option<usize>,
    /// Correlation: identity | taps:L | file:<csv of re+imj entries>.
    #[arg(long)]
    correlation: Option<String>,
    /// SNR grid in dB: `start:stop:step` or a comma list.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    /// Stop a point early once this many errors are counted.
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output stem; writes `<stem>.csv` / `<stem>.json`.
    #[arg(long)]
    out: Option<String>,
    /// csv | json | both.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct OutageArgs {
    #[command(flatten)]
    curve: CurveArgs,
    /// Fixed rate in bits per sub-channel (outage when MI < N*rate).
    #[arg(long)]
    rate: Option<f64>,
    /// Multiplexing gain r (outage when MI < N*r*log2 snr).
    #[arg(long)]
    mult_gain: Option<f64>,
    /// Parallel sub-channels N (flag-only runs).
    #[arg(long)]
    subchannels: Option<usize>,
    /// Transmit antennas (flag-only runs).
    #[arg(long)]
    tx: Option<usize>,
}

#[derive(Args)]
struct DmtArgs {
    #[arg(long, default_value_t = 2)]
    subchannels: usize,
    #[arg(long, default_value_t = 2)]
    tx: usize,
    #[arg(long, default_value_t = 2)]
    rx: usize,
    /// Correlation rank (defaults to the sub-channel count, block fading).
    #[arg(long)]
    rho: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    step: f64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum NvdCommand {
    /// Exact minimum |det|^2 over all nonzero codeword differences.
    MinDet(NvdArgs),
    /// Eigenvalue-product criterion at the rate-matched constellation
    /// schedule; with several `--bits` values, fits the SNR exponent.
    Criterion(CriterionArgs),
}

#[derive(Args)]
struct NvdArgs {
    #[arg(long, default_value = "block-diag-nvd")]
    scheme: String,
    #[arg(long, default_value_t = 2)]
    bits: u32,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct CriterionArgs {
    #[arg(long, default_value = "split-nvd")]
    scheme: String,
    /// Comma list of constellation sizes in bits per symbol.
    #[arg(long, default_value = "1,2")]
    bits: String,
    /// Multiplexing gain of the schedule pairing `snr = |A|^(N*nt/r)`.
    #[arg(long, default_value_t = 1.0)]
    mult_gain: f64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Outage equivalence of the block-circulant form (KS + spectra).
    Lemma1(Lemma1Args),
    /// Randomized eigenvalue lower-bound suite.
    Lemma2(SuiteArgs),
    /// Randomized effective-codeword rank/bound suite.
    Theta(SuiteArgs),
    /// Power-constraint equality of the golden codebooks.
    Power,
    /// The 4 bpcu split-vs-parallel comparison (paired seeds).
    FigReproduce(FigArgs),
}

#[derive(Args)]
struct Lemma1Args {
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1_000)]
    draws: usize,
    #[arg(long, default_value_t = 10.0)]
    snr_db: f64,
    #[arg(long, default_value_t = 2)]
    subchannels: usize,
    #[arg(long, default_value_t = 2)]
    tx: usize,
    #[arg(long, default_value_t = 2)]
    rx: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 1000)]
    instances: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct FigArgs {
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value = "0:30:2")]
    snr: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output prefix; writes `<prefix>-split.*` and `<prefix>-parallel.*`.
    #[arg(long)]
    out: Option<String>,
}

enum CliOutcome {
    Success,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        // Ignore failure: a pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    }
    match run(cli.command) {
        Ok(CliOutcome::Success) => ExitCode::SUCCESS,
        Ok(CliOutcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<CliOutcome, ConfigError> {
    match command {
        Command::Wer(args) => cmd_wer(args),
        Command::Outage(args) => cmd_outage(args),
        Command::DmtCurve(args) => cmd_dmt_curve(args),
        Command::Nvd(NvdCommand::MinDet(args)) => cmd_min_det(args),
        Command::Nvd(NvdCommand::Criterion(args)) => cmd_criterion(args),
        Command::Verify(VerifyCommand::Lemma1(args)) => cmd_lemma1(args),
        Command::Verify(VerifyCommand::Lemma2(args)) => cmd_lemma2(args),
        Command::Verify(VerifyCommand::Theta(args)) => cmd_theta(args),
        Command::Verify(VerifyCommand::Power) => cmd_power(),
        Command::Verify(VerifyCommand::FigReproduce(args)) => cmd_fig(args),
    }
}

fn curve_overrides(args: &CurveArgs, needs_code: bool) -> Overrides {
    Overrides {
        scheme: args.scheme.clone(),
        bits_per_symbol: args.bits,
        rx: args.rx,
        correlation: args.correlation.clone(),
        snr_db: args.snr.clone(),
        trials: args.trials,
        min_errors: args.min_errors,
        seed: args.seed,
        rate: None,
        mult_gain: None,
        needs_code,
    }
}

fn resolve_curve(args: &CurveArgs, mode: SimMode, ov: Overrides) -> Result<ResolvedRun, ConfigError> {
    config::resolve(
        args.config.as_deref(),
        mode,
        &ov,
        args.out.as_deref(),
        args.format.as_deref(),
    )
}

fn cmd_wer(args: CurveArgs) -> Result<CliOutcome, ConfigError> {
    let run = resolve_curve(&args, SimMode::Wer, curve_overrides(&args, true))?;
    let points = sim::run_wer(&run.sim).map_err(|e| ConfigError(e.to_string()))?;
    finish_curve(&run, &points, "wer")
}

fn cmd_outage(args: OutageArgs) -> Result<CliOutcome, ConfigError> {
    let mut ov = curve_overrides(&args.curve, false);
    ov.rate = args.rate;
    ov.mult_gain = args.mult_gain;
    let default_mode = SimMode::OutageFixedRate { rate: 1.0 };
    let mut run = resolve_curve(&args.curve, default_mode, ov)?;
    if let Some(n) = args.subchannels {
        run.sim.channel.subchannels = n;
    }
    if let Some(tx) = args.tx {
        run.sim.channel.tx = tx;
    }
    run.sim.code = None;
    if matches!(run.sim.mode, SimMode::Wer) {
        return Err(ConfigError(
            "outage needs --rate R or --mult-gain r (or a config with an outage mode)".into(),
        ));
    }
    let points = sim::run_outage(&run.sim).map_err(|e| ConfigError(e.to_string()))?;
    let fit = sim::fit_slope(&points);
    if fit.reliable {
        println!(
            "outage: fitted high-SNR slope {:.3} over {} points",
            fit.slope, fit.points_used
        );
    }
    finish_curve(&run, &points, "outage")
}

fn finish_curve(
    run: &ResolvedRun,
    points: &[sim::CurvePoint],
    what: &str,
) -> Result<CliOutcome, ConfigError> {
    if let Some(stem) = &run.out_path {
        let written = output::write_curve(stem, run.format, &run.sim, points)?;
        for p in &written {
            println!("wrote {}", p.display());
        }
    } else {
        print!("{}", output::curve_csv(&run.sim, points));
    }
    let last = points.last().expect("grid is non-empty");
    println!(
        "{what}: {} points, last point {} dB -> {:.3e} [{} errors / {} trials]",
        points.len(),
        last.snr_db,
        last.estimate,
        last.errors,
        last.trials
    );
    Ok(CliOutcome::Success)
}

fn cmd_dmt_curve(args: DmtArgs) -> Result<CliOutcome, ConfigError> {
    let m = args.tx.min(args.rx);
    let big_m = args.tx.max(args.rx);
    let rho = args.rho.unwrap_or(args.subchannels);
    if args.step <= 0.0 {
        return Err(ConfigError("--step must be positive".into()));
    }
    let mut rows = Vec::new();
    let mut r = 0.0;
    while r <= m as f64 + 1e-9 {
        let split = analysis::dmt_jensen(rho, big_m, m, r).d;
        let parallel = analysis::dmt_blockfading_zhengtse(args.subchannels, big_m, m, r).d;
        rows.push((r, split, parallel));
        r += args.step;
    }
    let mut csv = format!(
        "# dmt-curve subchannels={} tx={} rx={} rho={rho} step={}\nr,d_split,d_parallel\n",
        args.subchannels, args.tx, args.rx, args.step
    );
    for (r, s, p) in &rows {
        csv.push_str(&format!("{r},{s},{p}\n"));
    }
    match &args.out {
        Some(stem) => {
            let path = format!("{stem}.csv");
            std::fs::write(&path, &csv)
                .map_err(|e| ConfigError(format!("cannot write `{path}`: {e}")))?;
            println!("wrote {path}");
        }
        None => print!("{csv}"),
    }
    let at = |x: f64| rows.iter().min_by(|a, b| {
        (a.0 - x).abs().total_cmp(&(b.0 - x).abs())
    });
    if let (Some(r0), Some(r1)) = (at(0.0), at(1.0)) {
        println!(
            "dmt-curve: d(0) = {} (both), d(1) = {} split vs {} parallel",
            r0.1, r1.1, r1.2
        );
    }
    Ok(CliOutcome::Success)
}

fn cmd_min_det(args: NvdArgs) -> Result<CliOutcome, ConfigError> {
    let scheme = config::parse_scheme(&args.scheme)?;
    let code = Code::build(config::golden_code(scheme, args.bits)?)
        .map_err(|e| ConfigError(e.to_string()))?;
    let started = std::time::Instant::now();
    let report = analysis::min_det_exact(&code).map_err(|e| ConfigError(e.to_string()))?;
    let elapsed = started.elapsed();
    if let Some(stem) = &args.out {
        let path = output::write_report(stem, &report)?;
        println!("wrote {}", path.display());
    }
    println!(
        "nvd min-det [{} {} bpsym]: min |det|^2 = {} over {} nonzero differences ({:?}, {:.2?})",
        scheme.name(),
        args.bits,
        report.min_exact_detsq,
        report.differences,
        report.method,
        elapsed
    );
    println!(
        "  witness {:?}; min eigen-product {:.6e}",
        report
            .witness_exact
            .iter()
            .map(|g| format!("{g}"))
            .collect::<Vec<_>>(),
        report.min_product
    );
    if report.min_exact_detsq > 0 {
        Ok(CliOutcome::Success)
    } else {
        println!("nvd min-det: FAIL (vanishing determinant)");
        Ok(CliOutcome::VerificationFailed)
    }
}

fn cmd_criterion(args: CriterionArgs) -> Result<CliOutcome, ConfigError> {
    let scheme = config::parse_scheme(&args.scheme)?;
    let r = args.mult_gain;
    if r <= 0.0 {
        return Err(ConfigError("--mult-gain must be positive".into()));
    }
    let bit_list: Vec<u32> = args
        .bits
        .split(',')
        .map(|b| {
            b.trim()
                .parse::<u32>()
                .map_err(|_| ConfigError(format!("bad bits value `{b}`")))
        })
        .collect::<Result<_, _>>()?;

    let mut reports = Vec::new();
    for bits in &bit_list {
        let spec = config::golden_code(scheme, *bits)?;
        let n = spec.subchannels;
        let nt = spec.tx;
        let alphabet = (1u64 << bits) as f64;
        // Rate-matched pairing: |A| = snr^(r/(N*nt)) for the split scheme,
        // snr^(r/nt) for the block-diagonal one.
        let exponent = match scheme {
            Scheme::SplitNvd => n as f64 * nt as f64 / r,
            Scheme::BlockDiagNvd => nt as f64 / r,
        };
        let snr = alphabet.powf(exponent);
        debug_assert!(
            (constellation_size_for_rate(scheme, r, snr, n, nt) - alphabet).abs() < 1e-6
        );
        let rate_bits = r * snr.log2();
        let code = Code::build(spec).map_err(|e| ConfigError(e.to_string()))?;
        let rep = analysis::check_nvd_criterion(&code, nt.min(2), rate_bits, snr)
            .map_err(|e| ConfigError(e.to_string()))?;
        println!(
            "criterion [{} {} bpsym]: snr = {} -> min eigen-product {:.4e} (point exponent {:.3}, offset {:.2} bits)",
            scheme.name(),
            bits,
            snr,
            rep.min_product,
            rep.exponent,
            rep.offset_bits
        );
        reports.push(rep);
    }

    let required = -r - 0.25;
    let outcome;
    let schedule_exponent = if reports.len() >= 2 {
        let x: Vec<f64> = reports.iter().map(|p| p.snr.ln()).collect();
        let y: Vec<f64> = reports.iter().map(|p| p.min_product.ln()).collect();
        let slope = splitnvd::stats::least_squares_slope(&x, &y);
        println!(
            "criterion: schedule exponent {slope:.4} (required >= {required:.2})"
        );
        outcome = slope >= required;
        Some(slope)
    } else {
        outcome = reports.iter().all(|p| p.min_product > 0.0);
        None
    };

    if let Some(stem) = &args.out {
        #[derive(serde::Serialize)]
        struct ScheduleReport<'a> {
            points: &'a [analysis::CriterionReport],
            schedule_exponent: Option<f64>,
            required_exponent: f64,
            pass: bool,
        }
        let path = output::write_report(
            stem,
            &ScheduleReport {
                points: &reports,
                schedule_exponent,
                required_exponent: required,
                pass: outcome,
            },
        )?;
        println!("wrote {}", path.display());
    }
    Ok(if outcome {
        CliOutcome::Success
    } else {
        println!("criterion: FAIL");
        CliOutcome::VerificationFailed
    })
}

fn cmd_lemma1(args: Lemma1Args) -> Result<CliOutcome, ConfigError> {
    let report = analysis::verify_circulant_equivalence(
        args.subchannels,
        args.tx,
        args.rx,
        sim::db_to_linear(args.snr_db),
        args.samples,
        args.draws,
        args.seed,
    );
    println!(
        "lemma1: KS statistic {:.5} vs 1% threshold {:.5} -> {}; worst spectrum mismatch {:.3e} over {} draws",
        report.ks_statistic,
        report.ks_threshold,
        if report.ks_reject { "REJECT" } else { "no reject" },
        report.worst_spectrum_mismatch,
        report.spectrum_draws
    );
    let pass = !report.ks_reject && report.worst_spectrum_mismatch <= 1e-9;
    Ok(if pass {
        CliOutcome::Success
    } else {
        println!("lemma1: FAIL");
        CliOutcome::VerificationFailed
    })
}

fn cmd_lemma2(args: SuiteArgs) -> Result<CliOutcome, ConfigError> {
    let report = analysis::run_ostrowski_suite(args.instances, args.seed);
    println!(
        "lemma2: {} violations over {} instances (worst slack {:.3e})",
        report.violations, report.instances, report.worst_slack
    );
    Ok(if report.violations == 0 {
        CliOutcome::Success
    } else {
        CliOutcome::VerificationFailed
    })
}

fn cmd_theta(args: SuiteArgs) -> Result<CliOutcome, ConfigError> {
    let report = analysis::run_effective_codeword_suite(args.instances, args.seed);
    println!(
        "theta: {} violations over {} instances (worst slack {:.3e})",
        report.violations, report.instances, report.worst_slack
    );
    Ok(if report.violations == 0 {
        CliOutcome::Success
    } else {
        CliOutcome::VerificationFailed
    })
}

fn cmd_power() -> Result<CliOutcome, ConfigError> {
    let mut pass = true;
    for (scheme, bits) in [
        (Scheme::SplitNvd, 1u32),
        (Scheme::BlockDiagNvd, 1),
        (Scheme::BlockDiagNvd, 2),
    ] {
        let code = Code::build(config::golden_code(scheme, bits)?)
            .map_err(|e| ConfigError(e.to_string()))?;
        let total: f64 = code
            .codewords()
            .map_err(|e| ConfigError(e.to_string()))?
            .map(|cw| cw.total_energy())
            .sum();
        let avg = total / code.size() as f64;
        let target = (code.spec().total_slots() * code.spec().subchannels) as f64;
        let ok = (avg - target).abs() <= 1e-9;
        pass &= ok;
        println!(
            "power [{} {} bpsym]: codebook average energy {avg:.12} (target {target}) -> {}",
            scheme.name(),
            bits,
            if ok { "ok" } else { "VIOLATION" }
        );
    }
    Ok(if pass {
        CliOutcome::Success
    } else {
        CliOutcome::VerificationFailed
    })
}

fn cmd_fig(args: FigArgs) -> Result<CliOutcome, ConfigError> {
    let grid = config::parse_snr_grid(&args.snr)?;
    let run_one = |scheme: Scheme, bits: u32| -> Result<_, ConfigError> {
        let sim_cfg = sim::SimConfig {
            code: Some(config::golden_code(scheme, bits)?),
            channel: splitnvd::channel::ChannelSpec::block_fading(2, 2, 2),
            snr_db: grid.clone(),
            trials: args.trials,
            min_errors: None,
            seed: args.seed,
            mode: SimMode::Wer,
        };
        let points = sim::run_wer(&sim_cfg).map_err(|e| ConfigError(e.to_string()))?;
        Ok((sim_cfg, points))
    };
    // 4 bpcu pairing: split/BPSK against block-diagonal/QPSK, identical
    // trial streams so the comparison is paired.
    let (split_cfg, split) = run_one(Scheme::SplitNvd, 1)?;
    let (par_cfg, parallel) = run_one(Scheme::BlockDiagNvd, 2)?;

    if let Some(prefix) = &args.out {
        for (tag, cfg, pts) in [
            ("split", &split_cfg, &split),
            ("parallel", &par_cfg, &parallel),
        ] {
            let written =
                output::write_curve(&format!("{prefix}-{tag}"), config::OutputFormat::Both, cfg, pts)?;
            for p in &written {
                println!("wrote {}", p.display());
            }
        }
    }

    println!("snr_db  split_wer    parallel_wer");
    let mut pass = true;
    for (s, p) in split.iter().zip(&parallel) {
        let high_snr = s.snr_db >= 20.0;
        let ordered = s.estimate <= p.estimate;
        if high_snr && !ordered {
            pass = false;
        }
        println!(
            "{:>6}  {:>10.4e}  {:>12.4e}{}",
            s.snr_db,
            s.estimate,
            p.estimate,
            if high_snr && !ordered { "  <-- ordering violated" } else { "" }
        );
    }
    println!(
        "fig-reproduce: split <= parallel at every point >= 20 dB: {}",
        if pass { "yes" } else { "NO" }
    );
    Ok(if pass {
        CliOutcome::Success
    } else {
        CliOutcome::VerificationFailed
    })
}
