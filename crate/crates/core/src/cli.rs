//! Command-line front end. Every subcommand writes plain text or CSV, led
//! by `#` comment lines recording the fully resolved configuration.
//!
//! Exit codes: 0 on success, 1 for usage or validation errors, 2 for
//! numerical failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bounds::{block_error_bounds, SeriesConfig};
use crate::channel::ChannelKind;
use crate::error::{Error, Result};
use crate::lehmer::{
    decode_bits, encode_bits, permutation_to_rank, rank_to_permutation, Permutation, SymbolRank,
};
use crate::radar::{self, DEFAULT_BT};
use crate::receiver::{hungarian_detect_traced, CorrelationMatrix, Detector};
use crate::simkit::{self, SimConfig, SimMode};
use crate::special::q_function;
use crate::waveform::{synthesize, WaveformParams};

#[derive(Debug, Parser)]
#[command(
    name = "freqperm",
    version,
    about = "Frequency-permutation radar/communication waveforms: codec, detection, bounds, ambiguity and CRLB analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Map a symbol (or a bit block) to its tone permutation.
    Encode(EncodeArgs),
    /// Map a tone permutation back to its symbol.
    Decode(DecodeArgs),
    /// Sample the baseband waveform of a permutation.
    Waveform(WaveformArgs),
    /// Detect the permutation maximizing a correlation matrix read from CSV.
    Detect(DetectArgs),
    /// Union bound and nearest-neighbour block error probabilities.
    Bounds(BoundsArgs),
    /// Monte Carlo block error rate sweep.
    Simulate(SimulateArgs),
    /// Ambiguity function magnitude on a delay-Doppler grid.
    Af(AfArgs),
    /// Cramer-Rao bounds on delay and Doppler.
    Crlb(CrlbArgs),
    /// Run built-in golden checks.
    Selftest,
}

#[derive(Debug, Args)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WaveformFlags {
    /// Pulse width T in seconds.
    #[arg(long = "t-sec", default_value_t = 1.0)]
    t_sec: f64,
    /// Tone spacing in Hz; defaults to 1/T. Must be a positive integer multiple of 1/T.
    #[arg(long = "delta-f-hz")]
    delta_f_hz: Option<f64>,
    /// Frequency of tone index 0 in Hz.
    #[arg(long = "f0-hz", default_value_t = 0.0, allow_hyphen_values = true)]
    f0_hz: f64,
    /// Total waveform energy (linear, joules-equivalent).
    #[arg(long, default_value_t = 1.0)]
    energy: f64,
}

impl WaveformFlags {
    fn params(&self, m: usize) -> Result<WaveformParams> {
        let df = self.delta_f_hz.unwrap_or(1.0 / self.t_sec);
        WaveformParams::new(m, self.t_sec, df, self.f0_hz, self.energy)
    }
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["symbol", "bits"])))]
struct EncodeArgs {
    /// Number of tones M (1..=20).
    #[arg(long)]
    m: usize,
    /// Symbol rank in 0..M!.
    #[arg(long)]
    symbol: Option<u64>,
    /// Data word in bit mode, below 2^floor(log2 M!).
    #[arg(long)]
    bits: Option<u64>,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    /// Permutation as space- or comma-separated tone indices, e.g. "0 3 2 1".
    #[arg(long)]
    perm: String,
    /// Decode to a bit-mode data word instead of a symbol rank.
    #[arg(long)]
    bit_mode: bool,
}

#[derive(Debug, Args)]
struct WaveformArgs {
    /// Number of tones M.
    #[arg(long)]
    m: usize,
    /// Tone order; defaults to ascending.
    #[arg(long)]
    perm: Option<String>,
    /// Samples per pulse; defaults to 8 M (delta_f T).
    #[arg(long)]
    oversampling: Option<usize>,
    #[command(flatten)]
    wave: WaveformFlags,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// CSV file with one matrix row per line (row = pulse slot, column = tone).
    #[arg(long, value_name = "PATH")]
    matrix: PathBuf,
    /// Detector: hungarian or exhaustive.
    #[arg(long, default_value = "hungarian")]
    receiver: String,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// Number of tones M (2..=20).
    #[arg(long)]
    m: usize,
    /// Number of receive antennas N.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Channel: awgn, rician or rayleigh.
    #[arg(long, default_value = "awgn")]
    channel: String,
    /// Rician K factor (linear).
    #[arg(long = "rician-k", default_value_t = 0.0)]
    rician_k: f64,
    /// SNR E/N0 in dB: comma list or start:step:stop.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: String,
    /// Relative truncation tolerance of the Rician series.
    #[arg(long, default_value_t = 1e-12)]
    series_tol: f64,
    /// Maximum number of Rician series terms.
    #[arg(long, default_value_t = 200)]
    j_max: usize,
    /// Report bounds clamped to 1.
    #[arg(long)]
    clamp: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// key=value configuration file; flags given on the command line win.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Number of tones M.
    #[arg(long)]
    m: Option<usize>,
    /// Number of receive antennas N.
    #[arg(long)]
    n: Option<usize>,
    /// Channel: awgn, rician or rayleigh.
    #[arg(long)]
    channel: Option<String>,
    /// Rician K factor (linear).
    #[arg(long = "rician-k")]
    rician_k: Option<f64>,
    /// SNR E/N0 in dB: comma list or start:step:stop.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// Trials per SNR point (trial cap with --stop-after-errors).
    #[arg(long)]
    trials: Option<u64>,
    /// Stop a point once this many block errors are counted.
    #[arg(long)]
    stop_after_errors: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Detector: hungarian or exhaustive.
    #[arg(long)]
    receiver: Option<String>,
    /// statistic (default) or sampled.
    #[arg(long)]
    mode: Option<String>,
    /// Pulse width T in seconds (sampled mode).
    #[arg(long = "t-sec")]
    t_sec: Option<f64>,
    /// Tone spacing in Hz (sampled mode); defaults to 1/T.
    #[arg(long = "delta-f-hz")]
    delta_f_hz: Option<f64>,
    /// Frequency of tone index 0 in Hz (sampled mode).
    #[arg(long = "f0-hz", allow_hyphen_values = true)]
    f0_hz: Option<f64>,
    /// Waveform energy E (linear).
    #[arg(long)]
    energy: Option<f64>,
    /// Worker threads; defaults to all cores. Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct AfArgs {
    /// Number of tones M.
    #[arg(long)]
    m: usize,
    /// Tone order; defaults to ascending.
    #[arg(long)]
    perm: Option<String>,
    /// Delay half-span in seconds; defaults to M T.
    #[arg(long = "tau-max-sec")]
    tau_max_sec: Option<f64>,
    /// Doppler half-span in Hz; defaults to 2/T (4 pi / T rad/s).
    #[arg(long = "doppler-max-hz")]
    doppler_max_hz: Option<f64>,
    /// Number of delay samples.
    #[arg(long, default_value_t = 41)]
    tau_points: usize,
    /// Number of Doppler samples.
    #[arg(long, default_value_t = 41)]
    doppler_points: usize,
    /// Worker threads for grid evaluation.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    wave: WaveformFlags,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct CrlbArgs {
    /// Number of tones M.
    #[arg(long)]
    m: usize,
    /// Tone order; defaults to ascending.
    #[arg(long)]
    perm: Option<String>,
    /// SNR E/N0 in dB with E = 1: comma list or start:step:stop.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: String,
    /// Bandwidth-time product; B = bt / T in Hz.
    #[arg(long, default_value_t = DEFAULT_BT)]
    bt: f64,
    /// full, simplified or both.
    #[arg(long, default_value = "both")]
    variant: String,
    /// Place the tone set symmetrically around 0 Hz (overrides --f0-hz).
    #[arg(long)]
    centered: bool,
    #[command(flatten)]
    wave: WaveformFlags,
    #[command(flatten)]
    output: Output,
}

/// Parses an SNR grid: `a,b,c` or `start:step:stop` (inclusive).
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidParams(format!("cannot parse grid '{text}'"));
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    match parts.len() {
        1 => text
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect(),
        3 => {
            let nums: Vec<f64> = parts
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let (start, step, stop) = (nums[0], nums[1], nums[2]);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|k| start + k as f64 * step).collect())
        }
        _ => Err(bad()),
    }
}

/// Reads a `key = value` file; `#` starts a comment. Keys are normalized to
/// lower case with `-` replaced by `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidParams(format!("config line {}: expected key = value", no + 1))
        })?;
        out.insert(k.trim().to_lowercase().replace('-', "_"), v.trim().to_string());
    }
    Ok(out)
}

/// Parses a correlation matrix from CSV text.
pub fn parse_matrix(text: &str) -> Result<CorrelationMatrix> {
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::InvalidParams(format!("bad matrix entry '{s}'")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    CorrelationMatrix::from_rows(rows)
}

fn perm_or_identity(text: Option<&str>, m: usize) -> Result<Permutation> {
    let p = match text {
        Some(s) => s.parse::<Permutation>()?,
        None => Permutation::identity(m),
    };
    if p.len() != m {
        return Err(Error::Mismatch(format!(
            "permutation has {} entries, M={m}",
            p.len()
        )));
    }
    Ok(p)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout())),
    })
}

fn header(w: &mut dyn Write, command: &str, items: &[(&str, String)]) -> Result<()> {
    writeln!(w, "# command = {command}")?;
    for (k, v) in items {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

fn grid_text(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn wave_items(p: &WaveformParams) -> Vec<(&'static str, String)> {
    vec![
        ("m", p.m.to_string()),
        ("t_sec", p.pulse_width.to_string()),
        ("delta_f_hz", p.delta_f.to_string()),
        ("f0_hz", p.f0.to_string()),
        ("energy", p.energy.to_string()),
        ("oversampling", p.oversampling.to_string()),
    ]
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::InvalidParams("worker count must be at least 1".into()));
        }
        b = b.num_threads(w);
    }
    b.build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))
}

fn run_encode(a: &EncodeArgs, w: &mut dyn Write) -> Result<()> {
    let perm = match (a.symbol, a.bits) {
        (Some(s), _) => {
            header(w, "encode", &[("m", a.m.to_string()), ("symbol", s.to_string())])?;
            rank_to_permutation(SymbolRank::new(s, a.m)?)
        }
        (None, Some(b)) => {
            header(w, "encode", &[("m", a.m.to_string()), ("bits", b.to_string())])?;
            encode_bits(b, a.m)?
        }
        (None, None) => unreachable!("clap enforces one input"),
    };
    writeln!(w, "{perm}")?;
    Ok(())
}

fn run_decode(a: &DecodeArgs, w: &mut dyn Write) -> Result<()> {
    let perm: Permutation = a.perm.parse()?;
    header(
        w,
        "decode",
        &[
            ("m", perm.len().to_string()),
            ("perm", perm.to_string()),
            ("bit_mode", a.bit_mode.to_string()),
        ],
    )?;
    if a.bit_mode {
        writeln!(w, "{}", decode_bits(&perm)?)?;
    } else {
        writeln!(w, "{}", permutation_to_rank(&perm).value())?;
    }
    Ok(())
}

fn run_waveform(a: &WaveformArgs, w: &mut dyn Write) -> Result<()> {
    let mut params = a.wave.params(a.m)?;
    if let Some(os) = a.oversampling {
        params = params.with_oversampling(os)?;
    }
    let perm = perm_or_identity(a.perm.as_deref(), a.m)?;
    let s = synthesize(&perm, &params)?;
    let mut items = wave_items(&params);
    items.push(("perm", perm.to_string()));
    header(w, "waveform", &items)?;
    writeln!(w, "t_sec,re,im")?;
    for (k, z) in s.samples.iter().enumerate() {
        writeln!(w, "{:e},{:e},{:e}", s.time(k), z.re, z.im)?;
    }
    Ok(())
}

fn run_detect(a: &DetectArgs, w: &mut dyn Write) -> Result<()> {
    let text = fs::read_to_string(&a.matrix)
        .map_err(|e| Error::Io(format!("{}: {e}", a.matrix.display())))?;
    let r = parse_matrix(&text)?;
    let detector: Detector = a.receiver.parse()?;
    let perm = match detector {
        Detector::Hungarian => hungarian_detect_traced(&r).0,
        Detector::Exhaustive => detector.detect(&r)?,
    };
    header(
        w,
        "detect",
        &[
            ("matrix", a.matrix.display().to_string()),
            ("m", r.size().to_string()),
            ("receiver", detector.to_string()),
            ("objective", r.objective(&perm).to_string()),
        ],
    )?;
    writeln!(w, "{perm}")?;
    Ok(())
}

fn run_bounds(a: &BoundsArgs, w: &mut dyn Write) -> Result<()> {
    let kind: ChannelKind = a.channel.parse()?;
    let grid = parse_grid(&a.snr_db)?;
    let cfg = SeriesConfig {
        series_tol: a.series_tol,
        j_max: a.j_max,
    };
    let k = if kind == ChannelKind::Rician { a.rician_k } else { 0.0 };
    let rows = grid
        .iter()
        .map(|&db| {
            block_error_bounds(kind, a.m, a.n, k, 10f64.powf(db / 10.0), &cfg).map(|b| (db, b))
        })
        .collect::<Result<Vec<_>>>()?;
    header(
        w,
        "bounds",
        &[
            ("m", a.m.to_string()),
            ("n", a.n.to_string()),
            ("channel", kind.to_string()),
            ("rician_k", k.to_string()),
            ("snr_db", grid_text(&grid)),
            ("series_tol", a.series_tol.to_string()),
            ("j_max", a.j_max.to_string()),
            ("clamp", a.clamp.to_string()),
        ],
    )?;
    writeln!(w, "snr_db,ub,nn,channel,M,N,K")?;
    for (db, b) in rows {
        let (ub, nn) = if a.clamp {
            (b.union_bound_display(), b.nearest_neighbour_display())
        } else {
            (b.union_bound, b.nearest_neighbour)
        };
        writeln!(w, "{db},{ub:e},{nn:e},{kind},{},{},{k}", a.m, a.n)?;
    }
    Ok(())
}

fn sim_config(a: &SimulateArgs) -> Result<(SimConfig, Option<usize>)> {
    let file = match &a.config {
        Some(p) => parse_config(
            &fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )?,
        None => BTreeMap::new(),
    };
    const KNOWN: &[&str] = &[
        "m", "n", "n_antennas", "channel", "rician_k", "k", "snr_db", "snr_db_list", "trials",
        "stop_after_errors", "seed", "receiver", "mode", "t_sec", "delta_f_hz", "f0_hz",
        "energy", "workers",
    ];
    if let Some(k) = file.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(Error::InvalidParams(format!("unknown config key '{k}'")));
    }
    let get = |keys: &[&str]| keys.iter().find_map(|k| file.get(*k).cloned());
    fn num<T: std::str::FromStr>(key: &str, v: Option<String>) -> Result<Option<T>> {
        v.map(|s| {
            s.parse::<T>()
                .map_err(|_| Error::InvalidParams(format!("config key {key}: cannot parse '{s}'")))
        })
        .transpose()
    }

    let m = a
        .m
        .or(num("m", get(&["m"]))?)
        .ok_or_else(|| Error::InvalidParams("M is required (--m or config key m)".into()))?;
    let n = a.n.or(num("n", get(&["n", "n_antennas"]))?).unwrap_or(1);
    let channel: ChannelKind = a
        .channel
        .clone()
        .or(get(&["channel"]))
        .unwrap_or_else(|| "awgn".into())
        .parse()?;
    let rician_k = a.rician_k.or(num("rician_k", get(&["rician_k", "k"]))?).unwrap_or(0.0);
    let snr_text = a
        .snr_db
        .clone()
        .or(get(&["snr_db", "snr_db_list"]))
        .ok_or_else(|| Error::InvalidParams("SNR grid is required (--snr-db)".into()))?;
    let trials = a.trials.or(num("trials", get(&["trials"]))?).unwrap_or(100_000);
    let t_sec = a.t_sec.or(num("t_sec", get(&["t_sec"]))?).unwrap_or(1.0);
    let delta_f = a
        .delta_f_hz
        .or(num("delta_f_hz", get(&["delta_f_hz"]))?)
        .unwrap_or(1.0 / t_sec);
    let f0 = a.f0_hz.or(num("f0_hz", get(&["f0_hz"]))?).unwrap_or(0.0);
    let energy = a.energy.or(num("energy", get(&["energy"]))?).unwrap_or(1.0);

    let mut cfg = SimConfig::new(m, n, parse_grid(&snr_text)?, trials)?;
    cfg.waveform = WaveformParams::new(m, t_sec, delta_f, f0, energy)?;
    cfg.channel = channel;
    cfg.rician_k = if channel == ChannelKind::Rician { rician_k } else { 0.0 };
    cfg.stop_after_errors = a
        .stop_after_errors
        .or(num("stop_after_errors", get(&["stop_after_errors"]))?);
    cfg.seed = a.seed.or(num("seed", get(&["seed"]))?).unwrap_or(1);
    cfg.receiver = a
        .receiver
        .clone()
        .or(get(&["receiver"]))
        .unwrap_or_else(|| "hungarian".into())
        .parse()?;
    cfg.mode = a
        .mode
        .clone()
        .or(get(&["mode"]))
        .map(|s| s.parse::<SimMode>())
        .transpose()?
        .unwrap_or_default();
    let workers = a.workers.or(num("workers", get(&["workers"]))?);
    cfg.validate()?;
    Ok((cfg, workers))
}

fn run_simulate(a: &SimulateArgs, w: &mut dyn Write) -> Result<()> {
    let (cfg, workers) = sim_config(a)?;
    let points = simkit::run_bler_sweep(&cfg, workers)?;
    writeln!(w, "# command = simulate")?;
    simkit::write_csv(w, &cfg, &points)
}

fn run_af(a: &AfArgs, w: &mut dyn Write) -> Result<()> {
    let params = a.wave.params(a.m)?;
    let perm = perm_or_identity(a.perm.as_deref(), a.m)?;
    let tau_max = a.tau_max_sec.unwrap_or(params.duration());
    let dop_hz = a.doppler_max_hz.unwrap_or(2.0 / params.pulse_width);
    if !(tau_max > 0.0 && dop_hz > 0.0) || a.tau_points == 0 || a.doppler_points == 0 {
        return Err(Error::InvalidParams("grid spans and sizes must be positive".into()));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let taus = radar::linspace(-tau_max, tau_max, a.tau_points);
    let omegas = radar::linspace(-two_pi * dop_hz, two_pi * dop_hz, a.doppler_points);
    let grid = pool(a.workers)?.install(|| radar::af_grid(&perm, &params, &taus, &omegas))?;
    let mut items = wave_items(&params);
    items.extend([
        ("perm", perm.to_string()),
        ("tau_max_sec", tau_max.to_string()),
        ("doppler_max_hz", dop_hz.to_string()),
        ("doppler_max_rad_s", (two_pi * dop_hz).to_string()),
        ("tau_points", a.tau_points.to_string()),
        ("doppler_points", a.doppler_points.to_string()),
        ("normalization", "unit energy".to_string()),
    ]);
    header(w, "af", &items)?;
    writeln!(w, "tau,omega_rad_s,magnitude")?;
    for (tau, om, v) in grid.cells() {
        writeln!(w, "{tau:e},{om:e},{v:e}")?;
    }
    Ok(())
}

fn run_crlb(a: &CrlbArgs, w: &mut dyn Write) -> Result<()> {
    let mut params = a.wave.params(a.m)?;
    if a.centered {
        params.f0 = -0.5 * (a.m as f64 - 1.0) * params.delta_f;
    }
    let perm = perm_or_identity(a.perm.as_deref(), a.m)?;
    let (full, simple) = match a.variant.as_str() {
        "full" => (true, false),
        "simplified" => (false, true),
        "both" => (true, true),
        other => {
            return Err(Error::InvalidParams(format!(
                "unknown variant '{other}' (expected full, simplified or both)"
            )))
        }
    };
    if a.bt.is_nan() || a.bt <= 0.0 {
        return Err(Error::InvalidParams("bt must be positive".into()));
    }
    let b = a.bt / params.pulse_width;
    let grid = parse_grid(&a.snr_db)?;
    let mut rows = Vec::new();
    for &db in &grid {
        let n0 = params.energy / 10f64.powf(db / 10.0);
        if full {
            rows.push((db, n0, radar::crlb_full(&perm, &params, n0, b)?, "full"));
        }
        if simple {
            rows.push((db, n0, radar::crlb_simplified(&params, n0, b)?, "simplified"));
        }
    }
    let mut items = wave_items(&params);
    items.extend([
        ("perm", perm.to_string()),
        ("bt", a.bt.to_string()),
        ("b_hz", b.to_string()),
        ("snr_db", grid_text(&grid)),
        ("variant", a.variant.clone()),
    ]);
    header(w, "crlb", &items)?;
    if radar::bandwidth_is_small(&params, b) {
        writeln!(w, "# warning: BT below 10, the delay information approximation is loose")?;
    }
    writeln!(w, "M,t_sec,bt,snr_db,n0,crlb_tau,crlb_omega,variant")?;
    for (db, n0, c, variant) in rows {
        writeln!(
            w,
            "{},{},{},{db},{n0:e},{:e},{:e},{variant}",
            a.m, params.pulse_width, a.bt, c.tau, c.omega
        )?;
    }
    Ok(())
}

fn run_selftest(w: &mut dyn Write) -> Result<bool> {
    header(w, "selftest", &[])?;
    let r = CorrelationMatrix::from_rows(vec![
        vec![-4.0, -3.0, -2.0, -6.0],
        vec![-2.0, 1.0, 0.0, -4.0],
        vec![4.0, -2.0, 5.0, -3.0],
        vec![5.0, 4.0, -4.0, 3.0],
    ])?;
    let (perm, _) = hungarian_detect_traced(&r);
    let golden = perm.as_slice() == [2, 1, 0, 3] && r.objective(&perm) == 6.0;
    writeln!(
        w,
        "{} golden 4x4 assignment: {perm} objective {}",
        if golden { "PASS" } else { "FAIL" },
        r.objective(&perm)
    )?;

    let q1 = q_function(1.0);
    let b = block_error_bounds(ChannelKind::Awgn, 2, 1, 0.0, 1.0, &SeriesConfig::default())?;
    let closed = (b.union_bound - q1).abs() < 1e-15 && b.union_bound == b.nearest_neighbour;
    writeln!(
        w,
        "{} two-tone bound equals Q(1): ub={:e} nn={:e}",
        if closed { "PASS" } else { "FAIL" },
        b.union_bound,
        b.nearest_neighbour
    )?;

    let cfg = SimConfig::new(2, 1, vec![0.0], 100_000)?;
    let p = &simkit::run_bler_sweep(&cfg, None)?[0];
    let sim = (p.bler - q1).abs() <= 4.0 * p.std_error();
    writeln!(
        w,
        "{} two-tone simulation matches Q(1): bler={:e} over {} trials",
        if sim { "PASS" } else { "FAIL" },
        p.bler,
        p.trials
    )?;
    Ok(golden && closed && sim)
}

fn execute(cmd: &Command) -> Result<bool> {
    let out_path = match cmd {
        Command::Waveform(a) => a.output.out.as_deref(),
        Command::Bounds(a) => a.output.out.as_deref(),
        Command::Simulate(a) => a.output.out.as_deref(),
        Command::Af(a) => a.output.out.as_deref(),
        Command::Crlb(a) => a.output.out.as_deref(),
        _ => None,
    };
    // Render into memory first so a failed run leaves no partial output.
    let mut buf = Vec::new();
    let ok = match cmd {
        Command::Encode(a) => run_encode(a, &mut buf).map(|_| true),
        Command::Decode(a) => run_decode(a, &mut buf).map(|_| true),
        Command::Waveform(a) => run_waveform(a, &mut buf).map(|_| true),
        Command::Detect(a) => run_detect(a, &mut buf).map(|_| true),
        Command::Bounds(a) => run_bounds(a, &mut buf).map(|_| true),
        Command::Simulate(a) => run_simulate(a, &mut buf).map(|_| true),
        Command::Af(a) => run_af(a, &mut buf).map(|_| true),
        Command::Crlb(a) => run_crlb(a, &mut buf).map(|_| true),
        Command::Selftest => run_selftest(&mut buf),
    }?;
    let mut w = open_output(out_path)?;
    w.write_all(&buf)?;
    w.flush()?;
    Ok(ok)
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0,3,6").unwrap(), vec![0.0, 3.0, 6.0]);
        assert_eq!(parse_grid("-2:2:4").unwrap(), vec![-2.0, 0.0, 2.0, 4.0]);
        assert_eq!(parse_grid("0:0.5:1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("0:0:1").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2").is_err());
    }

    #[test]
    fn config_files() {
        let c = parse_config("# sweep\nM = 4\nsnr-db = 0,2 # inline\n\nchannel=rician\n").unwrap();
        assert_eq!(c["m"], "4");
        assert_eq!(c["snr_db"], "0,2");
        assert_eq!(c["channel"], "rician");
        assert!(parse_config("nonsense").is_err());
    }

    #[test]
    fn matrices() {
        let r = parse_matrix("# golden\n1, 2\n3 4\n").unwrap();
        assert_eq!(r.size(), 2);
        assert_eq!(r.get(1, 0), 3.0);
        assert!(parse_matrix("1,2\n3\n").is_err());
        assert!(parse_matrix("1,x\n3,4\n").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(dispatch(["freqperm", "encode", "--m", "4", "--symbol", "5"]), 0);
        assert_eq!(dispatch(["freqperm", "encode", "--m", "4", "--symbol", "24"]), 1);
        assert_eq!(dispatch(["freqperm", "encode", "--m", "4", "--bogus"]), 1);
        assert_eq!(dispatch(["freqperm", "crlb", "--m", "4", "--snr-db", "10"]), 2);
        assert_eq!(
            dispatch(["freqperm", "crlb", "--m", "4", "--snr-db", "10", "--centered", "--bt", "1e4"]),
            0
        );
    }
}
