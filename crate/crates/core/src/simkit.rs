//! Monte Carlo block error rate sweeps.
//!
//! Each trial draws a uniform symbol, its fading vector and its noise from
//! separate keyed streams (see [`crate::rng`]), so results depend only on
//! the configuration and seed, never on the number of worker threads.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{apply_channel, draw_fading, ChannelKind, ChannelParams};
use crate::error::{Error, Result};
use crate::lehmer::{rank_to_permutation, symbol_count, SymbolRank};
use crate::receiver::{correlation_matrix, statistic_matrix, Detector, EXHAUSTIVE_LIMIT};
use crate::rng::{stream, DrawTag};
use crate::waveform::{synthesize, WaveformParams};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Trials per batch when stopping on an error count.
pub const STOP_BATCH: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SimMode {
    /// Correlation matrix drawn from its Gaussian sufficient statistic.
    #[default]
    Statistic,
    /// Waveform synthesized, passed through the channel and correlated.
    Sampled,
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimMode::Statistic => "statistic",
            SimMode::Sampled => "sampled",
        })
    }
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "statistic" => Ok(SimMode::Statistic),
            "sampled" => Ok(SimMode::Sampled),
            other => Err(Error::InvalidParams(format!(
                "unknown mode '{other}' (expected statistic or sampled)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub m: usize,
    pub n_antennas: usize,
    pub channel: ChannelKind,
    /// Linear Rician factor; ignored unless `channel` is Rician.
    pub rician_k: f64,
    /// SNR grid, `10 log10(E / N0)`.
    pub snr_db: Vec<f64>,
    /// Trials per point, or the trial cap when `stop_after_errors` is set.
    pub trials: u64,
    pub stop_after_errors: Option<u64>,
    pub seed: u64,
    pub receiver: Detector,
    pub mode: SimMode,
    /// Waveform used in sampled mode; its energy fixes `E`.
    pub waveform: WaveformParams,
}

impl SimConfig {
    /// Unit-energy defaults: AWGN, Hungarian receiver, statistic mode,
    /// `T = 1 s` and `delta_f = 1 Hz`.
    pub fn new(m: usize, n_antennas: usize, snr_db: Vec<f64>, trials: u64) -> Result<Self> {
        let cfg = Self {
            m,
            n_antennas,
            channel: ChannelKind::Awgn,
            rician_k: 0.0,
            snr_db,
            trials,
            stop_after_errors: None,
            seed: 1,
            receiver: Detector::Hungarian,
            mode: SimMode::Statistic,
            waveform: WaveformParams::unit(m.max(1), 1.0)?,
        };
        Ok(cfg)
    }

    pub fn energy(&self) -> f64 {
        self.waveform.energy
    }

    pub fn validate(&self) -> Result<()> {
        symbol_count(self.m)?;
        if self.m < 2 {
            return Err(Error::InvalidParams("simulation needs M >= 2".into()));
        }
        if self.waveform.m != self.m {
            return Err(Error::Mismatch(format!(
                "waveform has M={}, configuration has M={}",
                self.waveform.m, self.m
            )));
        }
        self.waveform.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::InvalidParams("SNR grid is empty".into()));
        }
        if let Some(&bad) = self.snr_db.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidParams(format!("SNR value {bad} is not finite")));
        }
        if self.stop_after_errors == Some(0) {
            return Err(Error::InvalidParams("error target must be at least 1".into()));
        }
        if self.receiver == Detector::Exhaustive && self.m > EXHAUSTIVE_LIMIT {
            return Err(Error::TooLarge {
                m: self.m,
                limit: EXHAUSTIVE_LIMIT,
            });
        }
        self.channel_params(self.snr_db[0]).map(|_| ())
    }

    pub fn channel_params(&self, snr_db: f64) -> Result<ChannelParams> {
        ChannelParams::from_snr_db(
            self.channel,
            self.n_antennas,
            self.rician_k,
            snr_db,
            self.energy(),
        )
    }
}

/// One SNR point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub bler: f64,
    pub trials: u64,
    pub errors: u64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// In stop-on-errors mode, whether the error target was reached before
    /// the trial cap.
    pub target_reached: Option<bool>,
}

impl BlerPoint {
    pub fn new(snr_db: f64, errors: u64, trials: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(errors, trials, Z95);
        Self {
            snr_db,
            bler: errors as f64 / trials as f64,
            trials,
            errors,
            ci_lo,
            ci_hi,
            target_reached: None,
        }
    }

    /// Binomial standard error of the estimate.
    pub fn std_error(&self) -> f64 {
        (self.bler * (1.0 - self.bler) / self.trials as f64).sqrt()
    }
}

/// Wilson score interval for `errors` successes out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

struct PointContext<'a> {
    cfg: &'a SimConfig,
    channel: ChannelParams,
    point: u64,
    symbols: u64,
}

impl PointContext<'_> {
    /// Whether trial `trial` ends in a block error.
    fn trial(&self, trial: u64) -> Result<bool> {
        let cfg = self.cfg;
        let mut sym_rng = stream(cfg.seed, self.point, trial, DrawTag::Symbol);
        let rank = SymbolRank::new(sym_rng.random_range(0..self.symbols), cfg.m)?;
        let sent = rank_to_permutation(rank);
        let mut fade_rng = stream(cfg.seed, self.point, trial, DrawTag::Fading);
        let fading = draw_fading(&self.channel, &mut fade_rng);
        let mut noise_rng = stream(cfg.seed, self.point, trial, DrawTag::Noise);
        let r = match cfg.mode {
            SimMode::Statistic => {
                statistic_matrix(&sent, &fading, cfg.energy(), self.channel.n0, &mut noise_rng)
            }
            SimMode::Sampled => {
                let s = synthesize(&sent, &cfg.waveform)?;
                let rx = apply_channel(&s, &fading, self.channel.n0, &mut noise_rng);
                correlation_matrix(&rx, &fading, &cfg.waveform)?
            }
        };
        Ok(cfg.receiver.detect(&r)? != sent)
    }

    fn count(&self, range: std::ops::Range<u64>) -> Result<u64> {
        range
            .into_par_iter()
            .map(|t| self.trial(t).map(u64::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    }
}

fn sweep(cfg: &SimConfig) -> Result<Vec<BlerPoint>> {
    let symbols = symbol_count(cfg.m)?;
    let mut out = Vec::with_capacity(cfg.snr_db.len());
    for (point, &snr_db) in cfg.snr_db.iter().enumerate() {
        let ctx = PointContext {
            cfg,
            channel: cfg.channel_params(snr_db)?,
            point: point as u64,
            symbols,
        };
        let p = match cfg.stop_after_errors {
            None => BlerPoint::new(snr_db, ctx.count(0..cfg.trials)?, cfg.trials),
            Some(target) => {
                let mut done = 0;
                let mut errors = 0;
                while done < cfg.trials && errors < target {
                    let end = (done + STOP_BATCH).min(cfg.trials);
                    errors += ctx.count(done..end)?;
                    done = end;
                }
                let mut p = BlerPoint::new(snr_db, errors, done);
                p.target_reached = Some(errors >= target);
                p
            }
        };
        out.push(p);
    }
    Ok(out)
}

/// Runs the sweep on a pool of `workers` threads (`None` uses rayon's
/// default). The output does not depend on the worker count.
pub fn run_bler_sweep(cfg: &SimConfig, workers: Option<usize>) -> Result<Vec<BlerPoint>> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::InvalidParams("worker count must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    pool.install(|| sweep(cfg))
}

pub const CSV_COLUMNS: &str = "snr_db,bler,ci_lo,ci_hi,trials,errors,M,N,channel,K,receiver,mode,seed";

/// Resolved configuration as `# key = value` lines.
pub fn config_header(cfg: &SimConfig) -> Vec<String> {
    let snr: Vec<String> = cfg.snr_db.iter().map(|x| x.to_string()).collect();
    vec![
        format!("m = {}", cfg.m),
        format!("n = {}", cfg.n_antennas),
        format!("channel = {}", cfg.channel),
        format!("rician_k = {}", cfg.rician_k),
        format!("snr_db = {}", snr.join(",")),
        format!("trials = {}", cfg.trials),
        format!(
            "stop_after_errors = {}",
            cfg.stop_after_errors.map_or("none".to_string(), |e| e.to_string())
        ),
        format!("seed = {}", cfg.seed),
        format!("receiver = {}", cfg.receiver),
        format!("mode = {}", cfg.mode),
        format!("energy = {}", cfg.energy()),
        format!("t_sec = {}", cfg.waveform.pulse_width),
        format!("delta_f_hz = {}", cfg.waveform.delta_f),
        format!("f0_hz = {}", cfg.waveform.f0),
        format!("oversampling = {}", cfg.waveform.oversampling),
    ]
}

pub fn write_csv<W: Write + ?Sized>(w: &mut W, cfg: &SimConfig, points: &[BlerPoint]) -> Result<()> {
    for line in config_header(cfg) {
        writeln!(w, "# {line}")?;
    }
    for p in points.iter().filter(|p| p.target_reached == Some(false)) {
        writeln!(
            w,
            "# warning: snr_db = {} reached {} of {} target errors within {} trials",
            p.snr_db,
            p.errors,
            cfg.stop_after_errors.unwrap_or(0),
            p.trials
        )?;
    }
    writeln!(w, "{CSV_COLUMNS}")?;
    for p in points {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{},{},{},{},{},{},{},{},{}",
            p.snr_db,
            p.bler,
            p.ci_lo,
            p.ci_hi,
            p.trials,
            p.errors,
            cfg.m,
            cfg.n_antennas,
            cfg.channel,
            cfg.rician_k,
            cfg.receiver,
            cfg.mode,
            cfg.seed
        )?;
    }
    Ok(())
}
