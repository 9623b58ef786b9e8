//! Multi-antenna block fading and additive noise.
//!
//! The channel vector follows the Rician model
//! `h = sqrt(K/(K+1)) * Delta + sqrt(1/(K+1)) * u` with `u_i ~ CN(0, 1)`.
//! All LOS phases are taken as `Delta_i = 1`; detection performance only
//! depends on `||h||^2`, which does not see those phases.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::waveform::ComplexSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    /// Unit gain on every antenna, `||h||^2 = N`.
    Awgn,
    Rician,
    /// Rician with `K = 0`.
    Rayleigh,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Awgn => "awgn",
            ChannelKind::Rician => "rician",
            ChannelKind::Rayleigh => "rayleigh",
        })
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "awgn" => Ok(ChannelKind::Awgn),
            "rician" => Ok(ChannelKind::Rician),
            "rayleigh" => Ok(ChannelKind::Rayleigh),
            other => Err(Error::InvalidParams(format!(
                "unknown channel '{other}' (expected awgn, rician or rayleigh)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub kind: ChannelKind,
    pub n_antennas: usize,
    /// Linear Rician factor. Ignored for AWGN; forced to zero for Rayleigh.
    pub rician_k: f64,
    /// Noise variance of each complex noise process.
    pub n0: f64,
}

impl ChannelParams {
    pub fn new(kind: ChannelKind, n_antennas: usize, rician_k: f64, n0: f64) -> Result<Self> {
        let p = Self {
            kind,
            n_antennas,
            rician_k: if kind == ChannelKind::Rayleigh { 0.0 } else { rician_k },
            n0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for a target `E / N0` in dB.
    pub fn from_snr_db(
        kind: ChannelKind,
        n_antennas: usize,
        rician_k: f64,
        snr_db: f64,
        energy: f64,
    ) -> Result<Self> {
        Self::new(kind, n_antennas, rician_k, energy / db_to_linear(snr_db))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_antennas == 0 {
            return Err(Error::InvalidParams("need at least one antenna".into()));
        }
        if self.rician_k.is_nan() || self.rician_k < 0.0 {
            return Err(Error::InvalidParams(format!(
                "Rician K must be non-negative, got {}",
                self.rician_k
            )));
        }
        if !(self.n0 > 0.0 && self.n0.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "N0 must be positive, got {}",
                self.n0
            )));
        }
        Ok(())
    }

    /// `10 log10(E / N0)`.
    pub fn snr_db(&self, energy: f64) -> f64 {
        10.0 * (energy / self.n0).log10()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// One block-constant channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingRealization {
    pub h: Vec<Complex64>,
    /// Cached `h^H h`.
    pub gain: f64,
}

impl FadingRealization {
    pub fn new(h: Vec<Complex64>) -> Self {
        let gain = h.iter().map(|z| z.norm_sqr()).sum();
        Self { h, gain }
    }

    /// Unit gain on each of `n` antennas.
    pub fn unit(n: usize) -> Self {
        Self {
            h: vec![Complex64::new(1.0, 0.0); n],
            gain: n as f64,
        }
    }

    pub fn n_antennas(&self) -> usize {
        self.h.len()
    }
}

/// Circularly symmetric complex Gaussian with total variance `var`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

pub fn draw_fading<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> FadingRealization {
    let n = params.n_antennas;
    let k = params.rician_k;
    if params.kind == ChannelKind::Awgn || k.is_infinite() {
        return FadingRealization::unit(n);
    }
    let los = (k / (k + 1.0)).sqrt();
    let scatter = (1.0 / (k + 1.0)).sqrt();
    let h = (0..n)
        .map(|_| Complex64::new(los, 0.0) + complex_normal(rng, 1.0) * scatter)
        .collect();
    FadingRealization::new(h)
}

/// Passes `signal` through the channel: antenna `k` receives
/// `h_k s(t) + n_k(t)`.
///
/// The sampled noise has per-sample variance `N0 * sample_rate`, the discrete
/// counterpart of white noise with spectral level `N0`: a correlator with
/// template energy `E_p` then sees noise variance exactly `N0 * E_p`.
pub fn apply_channel<R: Rng + ?Sized>(
    signal: &ComplexSignal,
    fading: &FadingRealization,
    n0: f64,
    rng: &mut R,
) -> Vec<ComplexSignal> {
    let var = n0 * signal.sample_rate;
    fading
        .h
        .iter()
        .map(|&hk| {
            let samples = signal
                .samples
                .iter()
                .map(|&s| hk * s + complex_normal(rng, var))
                .collect();
            ComplexSignal {
                samples,
                sample_rate: signal.sample_rate,
                t0: signal.t0,
            }
        })
        .collect()
}
